//! Slice-by-slice perimeter comparison between a profile region and its
//! symmetral.
//!
//! With `v = g·∂y/∂b` the normal slope of a boundary sheet, `W` the
//! boundary density of a sheet and `h(x) = √(1 + x²)`, each sample checks
//!
//! * mass balance: `Σ ±W v` agrees for both regions,
//! * Jensen: `Σ W h(v) ≥ |∂R_b| h(Σ W|v| / |∂R_b|)`,
//! * scaling: `h(ρx) ≥ ρ h(x)` for `ρ = |∂R'_b| / |∂R_b| ≤ 1`,
//! * monotonicity: `h(x) ≥ h(|v'|)`, using mass balance,
//!
//! which together give `Σ W h(v) ≥ Σ W' h(v')`.

use serde::{Deserialize, Serialize};

use super::profile::{profile_perimeter, sheet_weight, sheets, slice_state, unwrapped_centers, SliceState};
use crate::error::{Error, Result};
use crate::regions::{ProfileRegion, SliceForm};
use crate::spaces::WarpedSpace;

const STEP_TOL: f64 = 1e-9;

fn h(x: f64) -> f64 {
    x.hypot(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JensenSample {
    pub b: f64,
    /// Skipped because a slice in the stencil is empty, full or singular.
    pub degenerate: bool,
    /// Mass-balance residual `Σ ±W v − Σ ±W' v'`.
    pub balance_residual: f64,
    /// `Σ W h(v)` for the input region.
    pub area_element: f64,
    /// Jensen lower bound on `area_element`.
    pub jensen_bound: f64,
    /// `|∂R'_b| h(x)`.
    pub scaled_bound: f64,
    /// `Σ W' h(v')` for the symmetral.
    pub area_element_sym: f64,
    /// `ρ_b = |∂R'_b| / |∂R_b|`.
    pub boundary_ratio: f64,
    /// Largest difference of `|v'|` between sheets of the symmetral.
    pub sym_slope_spread: f64,
    /// Slice center of the input region.
    pub center: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JensenChainReport {
    pub samples: Vec<JensenSample>,
    pub perimeter: f64,
    pub perimeter_sym: f64,
    pub max_balance_residual: f64,
    /// Count of failing samples per step: Jensen, scaling, monotonicity,
    /// boundary ratio.
    pub violations: [usize; 4],
    /// Whole-region perimeters agree to relative `1e-9`.
    pub equality: bool,
    /// At equality: largest `|ρ_b − 1|` and `|center|` over the samples.
    pub equality_ratio_gap: f64,
    pub equality_center_gap: f64,
    pub holds: bool,
}

struct SliceTerms {
    balance: f64,
    area: f64,
    boundary: f64,
    abs_flux: f64,
    max_abs_v: f64,
    min_abs_v: f64,
}

fn slice_terms(space: &WarpedSpace, p: &ProfileRegion, centers: &[f64], k: usize) -> SliceTerms {
    let n = p.len();
    let (k0, k1) = if k == 0 {
        (0, 1)
    } else if k == n - 1 {
        (n - 2, n - 1)
    } else {
        (k - 1, k + 1)
    };
    let b = p.base[k];
    let g = space.g(b);
    let here = sheets(space, p.form, p.radius[k], centers[k]);
    let before = sheets(space, p.form, p.radius[k0], centers[k0]);
    let after = sheets(space, p.form, p.radius[k1], centers[k1]);
    let db = p.base[k1] - p.base[k0];
    let mut t = SliceTerms { balance: 0.0, area: 0.0, boundary: 0.0, abs_flux: 0.0, max_abs_v: 0.0, min_abs_v: f64::INFINITY };
    for ((s, a), c) in here.iter().zip(&before).zip(&after) {
        let v = g * (c.y - a.y) / db;
        let w = sheet_weight(space, b, s.y);
        t.balance += s.sign * w * v;
        t.area += w * h(v);
        t.boundary += w;
        t.abs_flux += w * v.abs();
        t.max_abs_v = t.max_abs_v.max(v.abs());
        t.min_abs_v = t.min_abs_v.min(v.abs());
    }
    t
}

fn usable(space: &WarpedSpace, p: &ProfileRegion, k: usize) -> bool {
    let n = p.len();
    let lo = k.saturating_sub(1);
    let hi = (k + 1).min(n - 1);
    (lo..=hi).all(|j| {
        slice_state(space, p.form, p.radius[j], p.center[j]) == SliceState::Partial && !space.is_singular(p.base[j])
    })
}

/// Runs the chain at every base sample of `region` against `sym`, which
/// must share the samples and slice masses and have centered slices
/// (balls about `p` or lower rays).
pub fn jensen_chain(space: &WarpedSpace, region: &ProfileRegion, sym: &ProfileRegion) -> Result<JensenChainReport> {
    region.validate(space)?;
    sym.validate(space)?;
    if region.len() < 3 {
        return Err(Error::Precondition("need at least three base samples".into()));
    }
    if region.base != sym.base {
        return Err(Error::Precondition("region and symmetral must share base samples".into()));
    }
    if !(sym.is_centered() || sym.form == SliceForm::LowerRay) {
        return Err(Error::Precondition("symmetral slices must be centered balls or lower rays".into()));
    }
    for k in 0..region.len() {
        let (m, ms) = (region.slice_mass(space, k), sym.slice_mass(space, k));
        if (m - ms).abs() > 1e-9 * m.max(ms) + 1e-14 {
            return Err(Error::Precondition(format!(
                "slice masses differ at b = {}: {m} vs {ms}",
                region.base[k]
            )));
        }
    }
    let cr = unwrapped_centers(space, region);
    let cs = unwrapped_centers(space, sym);
    let mut samples = Vec::with_capacity(region.len());
    let mut violations = [0usize; 4];
    let mut max_balance_residual: f64 = 0.0;
    for k in 0..region.len() {
        let b = region.base[k];
        let mut s = JensenSample {
            b,
            degenerate: true,
            balance_residual: 0.0,
            area_element: 0.0,
            jensen_bound: 0.0,
            scaled_bound: 0.0,
            area_element_sym: 0.0,
            boundary_ratio: 1.0,
            sym_slope_spread: 0.0,
            center: region.center[k],
            holds: true,
        };
        if !usable(space, region, k) || !usable(space, sym, k) {
            samples.push(s);
            continue;
        }
        let t = slice_terms(space, region, &cr, k);
        let ts = slice_terms(space, sym, &cs, k);
        if !(t.boundary > 0.0 && ts.boundary > 0.0) {
            samples.push(s);
            continue;
        }
        s.degenerate = false;
        s.balance_residual = t.balance - ts.balance;
        max_balance_residual = max_balance_residual.max(s.balance_residual.abs());
        let rho = ts.boundary / t.boundary;
        let x = t.abs_flux / ts.boundary;
        let v_sym = ts.max_abs_v;
        s.area_element = t.area;
        s.jensen_bound = t.boundary * h(rho * x);
        s.scaled_bound = ts.boundary * h(x);
        s.area_element_sym = ts.area;
        s.boundary_ratio = rho;
        s.sym_slope_spread = ts.max_abs_v - ts.min_abs_v;
        let tol = STEP_TOL * t.area.max(1.0);
        let checks = [
            s.area_element >= s.jensen_bound - tol,
            s.jensen_bound >= s.scaled_bound - tol,
            s.scaled_bound >= ts.boundary * h(v_sym) - tol - s.balance_residual.abs(),
            rho <= 1.0 + STEP_TOL,
        ];
        for (c, ok) in violations.iter_mut().zip(checks) {
            if !ok {
                *c += 1;
                s.holds = false;
            }
        }
        samples.push(s);
    }
    let perimeter = profile_perimeter(space, region)?.perimeter;
    let perimeter_sym = profile_perimeter(space, sym)?.perimeter;
    let equality = (perimeter - perimeter_sym).abs() <= STEP_TOL * perimeter.abs().max(1e-300);
    let (mut equality_ratio_gap, mut equality_center_gap) = (0.0f64, 0.0f64);
    if equality {
        for s in samples.iter().filter(|s| !s.degenerate) {
            equality_ratio_gap = equality_ratio_gap.max((s.boundary_ratio - 1.0).abs());
            if region.form == SliceForm::Ball {
                equality_center_gap = equality_center_gap.max(space.fiber.wrap(s.center).abs());
            }
        }
    }
    let holds = violations.iter().all(|&v| v == 0) && perimeter >= perimeter_sym - STEP_TOL * perimeter.max(1.0);
    Ok(JensenChainReport {
        samples,
        perimeter,
        perimeter_sym,
        max_balance_residual,
        violations,
        equality,
        equality_ratio_gap,
        equality_center_gap,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::Region;
    use crate::spaces::{FiberGeometry, ScalarFn};
    use crate::symmetrize::{symmetrize, Variant};

    fn sym_of(space: &WarpedSpace, p: &ProfileRegion, v: Variant) -> ProfileRegion {
        match symmetrize(space, &Region::Profile(p.clone()), v).unwrap().region {
            Region::Profile(q) => q,
            _ => unreachable!(),
        }
    }

    #[test]
    fn rosales_offset_disk_strictly_improves() {
        let s = WarpedSpace::product("rosales", [-1.0, 1.0], FiberGeometry::line(ScalarFn::ExpQuad { rate: 1.0 }, 2.0));
        let p = ProfileRegion::from_fn(-0.5, 0.5, 201, |b| ((0.25 - b * b).max(0.0).sqrt(), 0.3)).unwrap();
        let q = sym_of(&s, &p, Variant::Schwarz);
        let rep = jensen_chain(&s, &p, &q).unwrap();
        assert!(rep.holds, "{:?}", rep.violations);
        assert!(!rep.equality && rep.perimeter > rep.perimeter_sym);
        assert!(rep.max_balance_residual < 1e-3);
    }

    #[test]
    fn flat_translation_is_an_equality_case() {
        let s = WarpedSpace::product("flat", [-1.0, 2.0], FiberGeometry::line(ScalarFn::ONE, 3.0));
        let p = ProfileRegion::from_fn(0.0, 1.0, 101, |b| (0.5, 0.5 * b + 0.5)).unwrap();
        let q = sym_of(&s, &p, Variant::Schwarz);
        let rep = jensen_chain(&s, &p, &q).unwrap();
        assert!(rep.holds);
        assert!(rep.perimeter > rep.perimeter_sym);
        let flat = ProfileRegion::from_fn(0.0, 1.0, 101, |_| (0.5, 0.4)).unwrap();
        let rep = jensen_chain(&s, &flat, &sym_of(&s, &flat, Variant::Schwarz)).unwrap();
        assert!(rep.equality && rep.equality_ratio_gap < 1e-12);
        assert!(rep.equality_center_gap > 0.3);
    }

    #[test]
    fn mismatched_masses_are_rejected() {
        let s = WarpedSpace::product("flat", [-1.0, 2.0], FiberGeometry::line(ScalarFn::ONE, 3.0));
        let p = ProfileRegion::from_fn(0.0, 1.0, 11, |_| (0.5, 0.0)).unwrap();
        let q = ProfileRegion::from_fn(0.0, 1.0, 11, |_| (0.6, 0.0)).unwrap();
        assert!(matches!(jensen_chain(&s, &p, &q), Err(Error::Precondition(_))));
    }
}
