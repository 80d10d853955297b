//! Quasi-random probes on S³, region shapes with exact distances, and the
//! Monte Carlo Minkowski estimator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{from_hopf, BundleSpace, S3Point};
use crate::error::{Error, Result};
use crate::numeric::{fit_quadratic, mean_and_std_error, ShiftedHalton};
use crate::par;

/// Region shapes in the quotient with closed-form distance functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Shape {
    Empty,
    Full,
    /// Geodesic ball about `center`.
    Ball { center: S3Point, radius: f64 },
    /// Points within `radius` of the orbit through `center`.
    Tube { center: S3Point, radius: f64 },
    /// Whole orbits whose distance from the orbit through `center` lies in
    /// `[inner, outer]`.
    FiberBand { center: S3Point, inner: f64, outer: f64 },
}

impl Shape {
    /// Distance from `x` to the shape (0 inside).
    pub fn distance(&self, bundle: &BundleSpace, x: &S3Point) -> f64 {
        match self {
            Shape::Empty => f64::INFINITY,
            Shape::Full => 0.0,
            Shape::Ball { center, radius } => (bundle.distance_unchecked(x, center) - radius).max(0.0),
            Shape::Tube { center, radius } => (bundle.fiber_distance_unchecked(x, center) - radius).max(0.0),
            Shape::FiberBand { center, inner, outer } => {
                let s = bundle.fiber_distance_unchecked(x, center);
                (inner - s).max(s - outer).max(0.0)
            }
        }
    }

    pub fn contains(&self, bundle: &BundleSpace, x: &S3Point) -> bool {
        self.distance(bundle, x) == 0.0
    }

    /// Closed-form perimeter for the shapes where one is known (unit S³
    /// and its quotients, radii below the injectivity bounds).
    pub fn exact_perimeter(&self, bundle: &BundleSpace) -> Option<f64> {
        let q = bundle.q as f64;
        let tube = |r: f64| 4.0 * PI * PI * r.sin() * r.cos() / q;
        match self {
            Shape::Empty | Shape::Full => Some(0.0),
            Shape::Ball { radius, .. } if bundle.q == 1 => Some(4.0 * PI * radius.sin().powi(2)),
            Shape::Tube { radius, .. } if bundle.is_hopf_like() => Some(tube(*radius)),
            Shape::FiberBand { inner, outer, .. } if bundle.is_hopf_like() => Some(tube(*inner) + tube(*outer)),
            _ => None,
        }
    }

    /// Closed-form volume where known.
    pub fn exact_volume(&self, bundle: &BundleSpace) -> Option<f64> {
        let q = bundle.q as f64;
        let tube = |r: f64| 2.0 * PI * PI * r.sin().powi(2) / q;
        match self {
            Shape::Empty => Some(0.0),
            Shape::Full => Some(bundle.total_volume()),
            Shape::Ball { radius, .. } if bundle.q == 1 => Some(PI * (2.0 * radius - (2.0 * radius).sin())),
            Shape::Tube { radius, .. } if bundle.is_hopf_like() => Some(tube(*radius)),
            Shape::FiberBand { inner, outer, .. } if bundle.is_hopf_like() => Some(tube(*outer) - tube(*inner)),
            _ => None,
        }
    }
}

/// Point `i` of the shifted Halton stream mapped uniformly onto S³.
pub fn sample_s3(halton: &ShiftedHalton<3>, i: u64) -> S3Point {
    let [u1, u2, u3] = halton.point(i);
    from_hopf(u1.sqrt().asin(), 2.0 * PI * u2, 2.0 * PI * u3)
}

/// Quasi-random probes with equal weights and a membership flag.
#[derive(Debug, Clone)]
pub struct SampledRegion {
    pub shape: Shape,
    pub points: Vec<S3Point>,
    pub inside: Vec<bool>,
    /// Weight of every probe: total volume / probe count.
    pub weight: f64,
    pub seed: u64,
}

impl SampledRegion {
    pub fn sample(bundle: &BundleSpace, shape: Shape, probes: usize, seed: u64) -> Self {
        let halton = ShiftedHalton::<3>::new(seed, 0);
        let points = par::map_indexed(probes, |i| sample_s3(&halton, i as u64));
        let inside = par::map_slice(&points, |x| shape.contains(bundle, x));
        Self { shape, points, inside, weight: bundle.total_volume() / probes.max(1) as f64, seed }
    }

    pub fn volume(&self) -> f64 {
        self.inside.iter().filter(|&&b| b).count() as f64 * self.weight
    }

    pub fn total_weight(&self) -> f64 {
        self.weight * self.points.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McPerimeter {
    pub perimeter: f64,
    pub std_error: f64,
    pub volume: f64,
    pub volume_std_error: f64,
    pub radii: Vec<f64>,
    /// Mean enlarged volume at each radius.
    pub volumes: Vec<f64>,
    pub probes: usize,
    pub blocks: usize,
    pub seed: u64,
}

/// Replicate blocks used for standard errors.
pub const MC_BLOCKS: usize = 10;

/// Minimum probes per block.
const MIN_BLOCK_PROBES: usize = 200;

/// Slope at `r = 0⁺` of the enlarged volume `V(r)`, estimated from the
/// fraction of probes within distance `r` of the shape. Each of
/// [`MC_BLOCKS`] blocks uses an independently shifted Halton stream; the
/// spread of the per-block slopes gives the standard error.
pub fn mc_minkowski_perimeter(
    bundle: &BundleSpace,
    shape: &Shape,
    radii: &[f64],
    probes: usize,
    seed: u64,
) -> Result<McPerimeter> {
    if radii.len() < 2 || radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
        return Err(Error::Precondition("need at least two increasing positive radii".into()));
    }
    let per_block = probes / MC_BLOCKS;
    if per_block < MIN_BLOCK_PROBES {
        return Err(Error::Undersampled(format!(
            "{probes} probes give {per_block} per block, need at least {MIN_BLOCK_PROBES}"
        )));
    }
    let total = bundle.total_volume();
    let blocks: Vec<(f64, f64, Vec<f64>)> = par::map_indexed(MC_BLOCKS, |blk| {
        let halton = ShiftedHalton::<3>::new(seed, blk as u64 + 1);
        let mut counts = vec![0usize; radii.len() + 1];
        for i in 0..per_block {
            let x = sample_s3(&halton, i as u64);
            let d = shape.distance(bundle, &x);
            if d == 0.0 {
                counts[0] += 1;
            }
            for (c, &r) in counts[1..].iter_mut().zip(radii) {
                if d <= r {
                    *c += 1;
                }
            }
        }
        let vols: Vec<f64> = counts.iter().map(|&c| total * c as f64 / per_block as f64).collect();
        let mut xs = vec![0.0];
        xs.extend_from_slice(radii);
        let slope = if vols.iter().all(|&v| v == vols[0]) {
            0.0
        } else {
            fit_quadratic(&xs, &vols).map(|f| f.slope).unwrap_or(0.0).max(0.0)
        };
        (slope, vols[0], vols[1..].to_vec())
    });
    let slopes: Vec<f64> = blocks.iter().map(|b| b.0).collect();
    let v0: Vec<f64> = blocks.iter().map(|b| b.1).collect();
    let (perimeter, std_error) = mean_and_std_error(&slopes);
    let (volume, volume_std_error) = mean_and_std_error(&v0);
    let volumes = (0..radii.len())
        .map(|k| blocks.iter().map(|b| b.2[k]).sum::<f64>() / MC_BLOCKS as f64)
        .collect();
    Ok(McPerimeter {
        perimeter,
        std_error,
        volume,
        volume_std_error,
        radii: radii.to_vec(),
        volumes,
        probes: per_block * MC_BLOCKS,
        blocks: MC_BLOCKS,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_sphere_volume_and_ball_volume_matches() {
        let s3 = BundleSpace::hopf();
        let shape = Shape::Ball { center: [1.0, 0.0, 0.0, 0.0], radius: 0.8 };
        let r = SampledRegion::sample(&s3, shape.clone(), 20_000, 3);
        assert!((r.total_weight() - 2.0 * PI * PI).abs() < 1e-9);
        let exact = shape.exact_volume(&s3).unwrap();
        assert!((r.volume() - exact).abs() / exact < 0.02, "{} vs {exact}", r.volume());
    }

    #[test]
    fn empty_and_full_have_no_perimeter() {
        let s3 = BundleSpace::hopf();
        let radii = [0.02, 0.04, 0.06];
        let e = mc_minkowski_perimeter(&s3, &Shape::Empty, &radii, 5000, 1).unwrap();
        let f = mc_minkowski_perimeter(&s3, &Shape::Full, &radii, 5000, 1).unwrap();
        assert_eq!(e.perimeter, 0.0);
        assert_eq!(f.perimeter, 0.0);
        assert!(mc_minkowski_perimeter(&s3, &Shape::Full, &radii, 100, 1).is_err());
    }
}
