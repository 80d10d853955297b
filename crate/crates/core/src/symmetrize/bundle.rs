use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bundles::{BundleSpace, S3Point, SampledRegion};
use crate::error::{Error, Result};
use crate::numeric::integrate_default;
use crate::par;
use crate::regions::{ProfileRegion, SliceForm};
use crate::spaces::{FiberKind, WarpedSpace};

/// Probes a base cell needs before its slice estimate is trusted.
pub const MIN_CELL_PROBES: usize = 20;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleSymmetrized {
    pub profile: ProfileRegion,
    /// Base-cell edges in the target's base coordinate.
    pub cell_edges: Vec<f64>,
    pub slice_volume: Vec<f64>,
    pub slice_std_error: Vec<f64>,
    pub cell_probes: Vec<usize>,
    /// Cells with fewer than [`MIN_CELL_PROBES`] probes.
    pub undersampled: Vec<usize>,
    /// `Σ_cells ∫_cell Φ · slice volume`.
    pub target_volume: f64,
    pub target_std_error: f64,
    /// Sampled volume of the input region.
    pub source_volume: f64,
}

/// Replaces the slice of a sampled region in each orbit by a centered arc
/// of the same length in the corresponding fiber of `target`.
///
/// The target base coordinate is the distance of an orbit from the orbit
/// through `reference`; `target` must be the matching reduced space
/// (base `[0, π/2]`, circle fibers of the orbit length, and total volume
/// equal to that of the quotient).
pub fn bundle_symmetrize(
    bundle: &BundleSpace,
    target: &WarpedSpace,
    region: &SampledRegion,
    reference: &S3Point,
    base_cells: usize,
) -> Result<BundleSymmetrized> {
    if !bundle.is_hopf_like() {
        return Err(Error::Unsupported(
            "bundle symmetrization needs equal action weights; orbit lengths vary when k ≠ l".into(),
        ));
    }
    bundle.check_unit(reference)?;
    let orbit = 2.0 * PI / bundle.q as f64;
    match target.fiber.kind {
        FiberKind::Circle { circumference } if (circumference - orbit).abs() <= 1e-12 * orbit => {}
        _ => return Err(Error::Precondition(format!("target fiber must be a circle of length {orbit}"))),
    }
    let [lo, hi] = target.base;
    if lo.abs() > 1e-12 || (hi - PI / 2.0).abs() > 1e-12 {
        return Err(Error::Precondition("target base must be [0, π/2], the distance from the reference orbit".into()));
    }
    let capacity = |b: f64| target.fiber_capacity(b);
    let total: f64 = integrate_default(|b| target.phi(b) * capacity(b).unwrap_or(0.0), lo, hi);
    if (total - bundle.total_volume()).abs() > 1e-6 * bundle.total_volume() {
        return Err(Error::Precondition(format!(
            "target volume {total} does not match the quotient volume {}",
            bundle.total_volume()
        )));
    }
    if base_cells == 0 {
        return Err(Error::InvalidRegion("need at least one base cell".into()));
    }

    let h = (hi - lo) / base_cells as f64;
    let dist = par::map_slice(&region.points, |x| bundle.fiber_distance_unchecked(x, reference));
    let mut probes = vec![0usize; base_cells];
    let mut hits = vec![0usize; base_cells];
    for (d, &inside) in dist.iter().zip(&region.inside) {
        let i = ((d - lo) / h).floor().clamp(0.0, (base_cells - 1) as f64) as usize;
        probes[i] += 1;
        if inside {
            hits[i] += 1;
        }
    }
    let edges: Vec<f64> = (0..=base_cells).map(|i| lo + h * i as f64).collect();
    let centers: Vec<f64> = (0..base_cells).map(|i| lo + h * (i as f64 + 0.5)).collect();
    let mut slice_volume = Vec::with_capacity(base_cells);
    let mut slice_std_error = Vec::with_capacity(base_cells);
    let mut undersampled = Vec::new();
    let (mut vol, mut var) = (0.0, 0.0);
    for i in 0..base_cells {
        let cap = capacity(centers[i])?;
        let (p, se) = if probes[i] == 0 {
            (0.0, 0.0)
        } else {
            let n = probes[i] as f64;
            let p = hits[i] as f64 / n;
            (p, (p * (1.0 - p) / n).sqrt())
        };
        if probes[i] < MIN_CELL_PROBES {
            undersampled.push(i);
        }
        slice_volume.push(p * cap);
        slice_std_error.push(se * cap);
        let w = integrate_default(|b| target.phi(b), edges[i], edges[i + 1]);
        vol += w * p * cap;
        var += (w * se * cap).powi(2);
    }

    // Samples at the cell centers plus both base ends, so the profile spans
    // the whole base and has no artificial end caps.
    let mut base = vec![lo];
    base.extend_from_slice(&centers);
    base.push(hi);
    let mut vols = vec![slice_volume[0]];
    vols.extend_from_slice(&slice_volume);
    vols.push(slice_volume[base_cells - 1]);
    let radius = base
        .iter()
        .zip(&vols)
        .map(|(&b, &v)| {
            if target.is_singular(b) {
                Ok(0.0)
            } else {
                target.fiber_ball_radius(b, v.min(capacity(b)?))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = base.len();
    let profile = ProfileRegion::new(SliceForm::Ball, base, radius, vec![0.0; n])?;
    Ok(BundleSymmetrized {
        profile,
        cell_edges: edges,
        slice_volume,
        slice_std_error,
        cell_probes: probes,
        undersampled,
        target_volume: vol,
        target_std_error: var.sqrt(),
        source_volume: region.volume(),
    })
}

/// Reduced comparison space for orbit-symmetric regions: distance `b` from
/// a reference orbit, `Φ(b) = π sin 2b` (the circle of radius `b` on the
/// base sphere of radius 1/2), and circle fibers of the orbit length.
pub fn hopf_reduced_space(bundle: &BundleSpace) -> WarpedSpace {
    use crate::spaces::{FiberGeometry, ScalarFn};
    WarpedSpace::new(
        format!("hopf-reduced-q{}", bundle.q),
        [0.0, PI / 2.0],
        ScalarFn::ONE,
        ScalarFn::Sine { amp: PI, freq: 2.0 },
        FiberGeometry::circle(2.0 * PI / bundle.q as f64, ScalarFn::ONE),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::Shape;

    #[test]
    fn fiber_union_keeps_whole_fibers() {
        let s3 = BundleSpace::hopf();
        let target = hopf_reduced_space(&s3);
        let c = [1.0, 0.0, 0.0, 0.0];
        let shape = Shape::FiberBand { center: c, inner: 0.3, outer: 0.9 };
        let region = SampledRegion::sample(&s3, shape, 20_000, 4);
        let out = bundle_symmetrize(&s3, &target, &region, &c, 30).unwrap();
        for (i, &v) in out.slice_volume.iter().enumerate() {
            let (a, b) = (out.cell_edges[i], out.cell_edges[i + 1]);
            let straddles = |e: f64| a < e && e < b;
            if !straddles(0.3) && !straddles(0.9) {
                let expect = if a >= 0.3 && b <= 0.9 { 2.0 * PI } else { 0.0 };
                assert_eq!(v, expect, "cell {i}");
            }
        }
        let empty = SampledRegion::sample(&s3, Shape::Empty, 2000, 4);
        let e = bundle_symmetrize(&s3, &target, &empty, &c, 10).unwrap();
        assert!(e.profile.radius.iter().all(|&r| r == 0.0));
        assert_eq!(e.target_volume, 0.0);
    }

    #[test]
    fn reduced_space_has_sphere_volume() {
        let t = hopf_reduced_space(&BundleSpace::hopf());
        t.validate().unwrap();
        let v = integrate_default(|b| t.phi(b) * t.fiber_capacity(b).unwrap(), 0.0, PI / 2.0);
        assert!((v - 2.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn weighted_actions_are_refused() {
        let b = BundleSpace::new(1, 2, 1).unwrap();
        let r = SampledRegion::sample(&b, Shape::Empty, 100, 0);
        assert!(bundle_symmetrize(&b, &hopf_reduced_space(&b), &r, &[1.0, 0.0, 0.0, 0.0], 4).is_err());
    }
}
