//! Numerical checks of the submersion hypotheses on S³ and lens spaces.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{base_distance, base_to_sphere, from_hopf, wrap_angle, BasePoint, BundleSpace, S3Point};
use crate::error::{Error, Result};
use crate::numeric::mean_and_std_error;
use crate::par;

/// Largest base step of the horizontal-lift integration.
pub const TRANSPORT_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    /// Mean ratio of transported to source arc length.
    pub factor: f64,
    pub std_error: f64,
    /// Ratio of orbit lengths over the two base points.
    pub predicted: f64,
    pub steps: usize,
    pub samples: usize,
}

fn random_s3(rng: &mut ChaCha8Rng) -> S3Point {
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    from_hopf(u1.sqrt().asin(), 2.0 * PI * u2, 2.0 * PI * u3)
}

fn orbit_speed(bundle: &BundleSpace, x: &S3Point) -> f64 {
    let (k, l) = (bundle.k as f64, bundle.l as f64);
    (k * k * (x[0] * x[0] + x[1] * x[1]) + l * l * (x[2] * x[2] + x[3] * x[3])).sqrt()
}

fn sphere_to_base(u: [f64; 3]) -> BasePoint {
    let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    BasePoint { eta: 0.5 * (u[2] / n).clamp(-1.0, 1.0).acos(), psi: u[1].atan2(u[0]) }
}

/// Moves `samples` equally spaced points of the orbit over `b1` along
/// horizontal lifts of the base great circle to `b2` (each step goes to the
/// nearest point of the next orbit) and compares image arc lengths with
/// source arc lengths.
pub fn transport_scaling_check(bundle: &BundleSpace, b1: BasePoint, b2: BasePoint, samples: usize) -> Result<TransportReport> {
    let period = 2.0 * PI / bundle.q as f64;
    let x1 = bundle.section(b1);
    let x2 = bundle.section(b2);
    let predicted = orbit_speed(bundle, &x2) / orbit_speed(bundle, &x1);
    if samples < 2 {
        return Err(Error::Undersampled("transport needs at least two fiber samples".into()));
    }
    let dist = base_distance(b1, b2);
    if dist == 0.0 {
        return Ok(TransportReport { factor: 1.0, std_error: 0.0, predicted, steps: 0, samples });
    }
    let (u, v) = (base_to_sphere(b1), base_to_sphere(b2));
    let (u, v) = (u.map(|c| 2.0 * c), v.map(|c| 2.0 * c));
    let angle = 2.0 * dist;
    if (PI - angle).abs() < 1e-9 {
        return Err(Error::Precondition("antipodal base points have no unique great circle".into()));
    }
    let steps = (dist / TRANSPORT_STEP).ceil() as usize;
    let path: Vec<BasePoint> = (1..=steps)
        .map(|s| {
            let t = s as f64 / steps as f64;
            let (a, b) = (((1.0 - t) * angle).sin() / angle.sin(), (t * angle).sin() / angle.sin());
            sphere_to_base([a * u[0] + b * v[0], a * u[1] + b * v[1], a * u[2] + b * v[2]])
        })
        .collect();
    if !bundle.is_hopf_like() {
        if let Some(p) = path.iter().find(|p| p.eta < 1e-9 || (PI / 2.0 - p.eta) < 1e-9) {
            return Err(Error::SingularFiber(p.eta));
        }
    }
    let sections: Vec<S3Point> = path.iter().map(|&p| bundle.section(p)).collect();
    let finals: Vec<f64> = par::map_indexed(samples, |i| {
        let mut x = bundle.act(period * i as f64 / samples as f64, &x1);
        let mut theta = 0.0;
        for y in &sections {
            let (t, _) = bundle.nearest_on_orbit(&x, y, None);
            theta = t;
            x = bundle.act(t, y);
        }
        theta
    });
    let (s1, s2) = (orbit_speed(bundle, &x1), orbit_speed(bundle, &x2));
    let source = s1 * period / samples as f64;
    let ratios: Vec<f64> = (0..samples)
        .map(|i| {
            let d = (finals[(i + 1) % samples] - finals[i]).rem_euclid(period);
            s2 * d / source
        })
        .collect();
    let (factor, std_error) = mean_and_std_error(&ratios);
    Ok(TransportReport { factor, std_error, predicted, steps, samples })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeDistortion {
    pub radius: f64,
    pub max_deviation: f64,
    pub mean_deviation: f64,
    pub pairs: usize,
}

fn require_hopf_like(bundle: &BundleSpace, what: &str) -> Result<()> {
    if bundle.is_hopf_like() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("{what} needs equal action weights (k = l)")))
    }
}

/// Unit vector complex-orthogonal to `c`.
fn complex_normal(c: &S3Point) -> S3Point {
    [-c[2], c[3], c[0], -c[1]]
}

/// Point `e^{iθ}(cos s·c + sin s·e^{iφ} w)` of the tube about the orbit of `c`.
fn tube_point(c: &S3Point, w: &S3Point, theta: f64, s: f64, phi: f64) -> S3Point {
    let (sp, cp) = phi.sin_cos();
    let w = [w[0] * cp - w[1] * sp, w[0] * sp + w[1] * cp, w[2] * cp - w[3] * sp, w[2] * sp + w[3] * cp];
    let (ss, cs) = s.sin_cos();
    let y = [cs * c[0] + ss * w[0], cs * c[1] + ss * w[1], cs * c[2] + ss * w[2], cs * c[3] + ss * w[3]];
    let (st, ct) = theta.sin_cos();
    [y[0] * ct - y[1] * st, y[0] * st + y[1] * ct, y[2] * ct - y[3] * st, y[2] * st + y[3] * ct]
}

/// Relative deviation of the true distance from the product surrogate
/// `√(d_base² + Δt²)` for random pairs within the `r`-tube about the orbit
/// over `b`; `t` is the phase relative to the nearest point of that orbit.
pub fn tube_distortion(bundle: &BundleSpace, b: BasePoint, r: f64, pairs: usize, seed: u64) -> Result<TubeDistortion> {
    require_hopf_like(bundle, "tube distortion")?;
    if pairs < 100 {
        return Err(Error::Undersampled(format!("{pairs} pairs, need at least 100")));
    }
    if !(r > 0.0 && r < PI / 4.0) {
        return Err(Error::OutOfRange { what: "tube radius", value: r, lo: 0.0, hi: PI / 4.0 });
    }
    let c = bundle.section(b);
    let w = complex_normal(&c);
    let period = 2.0 * PI / bundle.q as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        let (u, th, ph): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
        tube_point(&c, &w, PI * (2.0 * th - 1.0), r * u.sqrt(), 2.0 * PI * ph)
    };
    let pts: Vec<(S3Point, S3Point)> = (0..pairs).map(|_| (draw(&mut rng), draw(&mut rng))).collect();
    let phase = |x: &S3Point| {
        let (re, im) = super::hermitian(x, &c);
        im.atan2(re)
    };
    let devs: Vec<f64> = par::map_slice(&pts, |(x, y)| {
        let truth = bundle.distance_unchecked(x, y);
        let db = bundle.fiber_distance_unchecked(x, y);
        let dt = wrap_angle(phase(x) - phase(y), period);
        let sur = (db * db + dt * dt).sqrt();
        if sur < 1e-12 {
            0.0
        } else {
            (truth - sur).abs() / sur
        }
    });
    let max_deviation = devs.iter().cloned().fold(0.0, f64::max);
    let mean_deviation = devs.iter().sum::<f64>() / devs.len() as f64;
    Ok(TubeDistortion { radius: r, max_deviation, mean_deviation, pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub pairs: usize,
    pub violations: usize,
    /// Largest `d(x, y) − surrogate` seen (negative when all pairs pass).
    pub max_excess: f64,
    /// Largest `|d − surrogate|` over pairs on a common orbit.
    pub same_fiber_max_gap: f64,
    pub seed: u64,
}

/// For random `x, y`, compares `d(x, y)` with the product distance
/// `√(s² + τ²)`, where `s` is the distance from `y` to the orbit of `x`
/// and `τ` the arc along that orbit from `x` to the foot point of `y`.
pub fn product_distance_comparison(bundle: &BundleSpace, pairs: usize, seed: u64) -> Result<ComparisonReport> {
    require_hopf_like(bundle, "the product-distance comparison")?;
    let period = 2.0 * PI / bundle.q as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(S3Point, S3Point)> = (0..pairs).map(|_| (random_s3(&mut rng), random_s3(&mut rng))).collect();
    let same: Vec<(S3Point, f64)> = (0..pairs / 10)
        .map(|_| (random_s3(&mut rng), PI * (2.0 * rng.random::<f64>() - 1.0)))
        .collect();
    let surrogate = |x: &S3Point, y: &S3Point| {
        let (theta, _) = bundle.nearest_on_orbit(y, x, None);
        let s = bundle.fiber_distance_unchecked(y, x);
        let tau = wrap_angle(theta, period) * orbit_speed(bundle, x);
        (s * s + tau * tau).sqrt()
    };
    let excess: Vec<f64> = par::map_slice(&pts, |(x, y)| bundle.distance_unchecked(x, y) - surrogate(x, y));
    let gaps: Vec<f64> = par::map_slice(&same, |(x, t)| {
        let y = bundle.act(*t, x);
        (bundle.distance_unchecked(x, &y) - surrogate(x, &y)).abs()
    });
    Ok(ComparisonReport {
        pairs,
        violations: excess.iter().filter(|&&e| e > 1e-9).count(),
        max_excess: excess.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        same_fiber_max_gap: gaps.iter().cloned().fold(0.0, f64::max),
        seed,
    })
}

/// Largest `|d(x, M') − d(θ·x, M')|` over random `x`, `θ` and orbits `M'`.
pub fn equidistance_check(bundle: &BundleSpace, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(S3Point, f64, S3Point)> = (0..samples)
        .map(|_| (random_s3(&mut rng), 2.0 * PI * rng.random::<f64>(), random_s3(&mut rng)))
        .collect();
    par::map_slice(&cases, |(x, t, y)| {
        let x2 = bundle.act(*t, x);
        (bundle.fiber_distance_unchecked(x, y) - bundle.fiber_distance_unchecked(&x2, y)).abs()
    })
    .into_iter()
    .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hopf_transport_preserves_fiber_length() {
        let s3 = BundleSpace::hopf();
        let b1 = BasePoint { eta: 0.4, psi: 0.3 };
        let b2 = BasePoint { eta: 1.0, psi: 1.7 };
        let rep = transport_scaling_check(&s3, b1, b2, 32).unwrap();
        assert!((rep.factor - 1.0).abs() < 0.01, "{rep:?}");
        assert!(rep.std_error < 0.01);
        let same = transport_scaling_check(&s3, b1, b1, 8).unwrap();
        assert_eq!(same.factor, 1.0);
    }

    #[test]
    fn tube_pairs_on_one_fiber_or_geodesic_have_no_distortion() {
        let s3 = BundleSpace::hopf();
        let c = s3.section(BasePoint { eta: 0.6, psi: 0.2 });
        let w = complex_normal(&c);
        assert!(super::super::hermitian(&c, &w).0.abs() < 1e-15);
        let x = tube_point(&c, &w, 0.3, 0.1, 1.0);
        let y = tube_point(&c, &w, -0.4, 0.1, 1.0);
        assert!((s3.distance_unchecked(&x, &y) - 0.7).abs() < 1e-12);
        let z = tube_point(&c, &w, 0.3, 0.05, 1.0);
        assert!((s3.distance_unchecked(&x, &z) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn distortion_shrinks_with_radius() {
        let s3 = BundleSpace::hopf();
        let b = BasePoint { eta: 0.7, psi: 0.0 };
        let d: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&r| tube_distortion(&s3, b, r, 2000, 5).unwrap().max_deviation)
            .collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    }

    #[test]
    fn lens_distances_do_not_exceed_product() {
        for q in [1, 2, 5] {
            let b = BundleSpace::new(1, 1, q).unwrap();
            let rep = product_distance_comparison(&b, 2000, 9).unwrap();
            assert_eq!(rep.violations, 0, "q = {q}: {rep:?}");
            assert!(rep.same_fiber_max_gap < 1e-9);
        }
        assert!(product_distance_comparison(&BundleSpace::new(1, 2, 1).unwrap(), 10, 1).is_err());
    }

    #[test]
    fn orbits_are_equidistant() {
        assert!(equidistance_check(&BundleSpace::hopf(), 500, 2) < 1e-6);
        assert!(equidistance_check(&BundleSpace::new(2, 3, 1).unwrap(), 500, 2) < 1e-6);
    }
}
