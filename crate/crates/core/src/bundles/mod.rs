//! Circle actions on the unit three-sphere and their lens quotients.
//!
//! Points of S³ ⊂ ℂ² are stored as `[Re z1, Im z1, Re z2, Im z2]`. The
//! action `θ·(z1, z2) = (e^{ikθ} z1, e^{ilθ} z2)` is normalized so that
//! `gcd(k, l) = 1`; the lens order `q` quotients by the subgroup generated
//! by `θ = 2π/q`.

mod checks;
mod sampling;

pub use checks::{
    equidistance_check, product_distance_comparison, transport_scaling_check, tube_distortion, ComparisonReport,
    TransportReport, TubeDistortion,
};
pub use sampling::{mc_minkowski_perimeter, sample_s3, McPerimeter, SampledRegion, Shape};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type S3Point = [f64; 4];

/// Tolerance on `|x| = 1` for inputs.
const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleSpace {
    pub k: u32,
    pub l: u32,
    pub q: u32,
}

/// Point of the orbit space: `η ∈ [0, π/2]` with `|z1| = cos η`, and the
/// invariant phase `ψ = lα − kβ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasePoint {
    pub eta: f64,
    pub psi: f64,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `Σ x_i conj(y_i)` as `(re, im)`.
pub fn hermitian(x: &S3Point, y: &S3Point) -> (f64, f64) {
    (
        x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3],
        x[1] * y[0] - x[0] * y[1] + x[3] * y[2] - x[2] * y[3],
    )
}

fn rotate(re: f64, im: f64, angle: f64) -> (f64, f64) {
    let (s, c) = angle.sin_cos();
    (re * c - im * s, re * s + im * c)
}

pub fn norm(x: &S3Point) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Great-circle distance on the unit S³, `2 atan2(|x − y|, |x + y|)`.
pub fn sphere_distance(x: &S3Point, y: &S3Point) -> f64 {
    let minus = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let plus = x.iter().zip(y).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt();
    2.0 * minus.atan2(plus)
}

/// Point with Hopf coordinates `z1 = cos η e^{iα}`, `z2 = sin η e^{iβ}`.
pub fn from_hopf(eta: f64, alpha: f64, beta: f64) -> S3Point {
    let (c, s) = (eta.cos(), eta.sin());
    [c * alpha.cos(), c * alpha.sin(), s * beta.cos(), s * beta.sin()]
}

fn wrap_angle(a: f64, period: f64) -> f64 {
    a - period * ((a + 0.5 * period) / period).floor()
}

impl BundleSpace {
    /// Action with weights `(k, l)` divided by their gcd, lens order `q`.
    pub fn new(k: u32, l: u32, q: u32) -> Result<Self> {
        if k == 0 || l == 0 || q == 0 {
            return Err(Error::InvalidSpace("k, l and q must be positive".into()));
        }
        let d = gcd(k, l);
        Ok(Self { k: k / d, l: l / d, q })
    }

    pub fn hopf() -> Self {
        Self { k: 1, l: 1, q: 1 }
    }

    pub fn is_hopf_like(&self) -> bool {
        self.k == self.l
    }

    /// Riemannian volume of the quotient, `2π²/q`.
    pub fn total_volume(&self) -> f64 {
        2.0 * PI * PI / self.q as f64
    }

    pub fn act(&self, theta: f64, x: &S3Point) -> S3Point {
        let (a, b) = rotate(x[0], x[1], self.k as f64 * theta);
        let (c, d) = rotate(x[2], x[3], self.l as f64 * theta);
        [a, b, c, d]
    }

    /// Deck transformation `A_j`, the action at angle `2πj/q`.
    pub fn deck(&self, j: u32, x: &S3Point) -> S3Point {
        self.act(2.0 * PI * j as f64 / self.q as f64, x)
    }

    pub fn check_unit(&self, x: &S3Point) -> Result<()> {
        let n = norm(x);
        if (n - 1.0).abs() > UNIT_TOL || !n.is_finite() {
            return Err(Error::Precondition(format!("point {x:?} has norm {n}, expected 1")));
        }
        Ok(())
    }

    /// Distance in the lens quotient: `min_j d_S³(x, A_j y)`.
    pub fn geodesic_distance(&self, x: &S3Point, y: &S3Point) -> Result<f64> {
        self.check_unit(x)?;
        self.check_unit(y)?;
        Ok(self.distance_unchecked(x, y))
    }

    pub(crate) fn distance_unchecked(&self, x: &S3Point, y: &S3Point) -> f64 {
        (0..self.q)
            .map(|j| sphere_distance(x, &self.deck(j, y)))
            .fold(f64::INFINITY, f64::min)
    }

    /// True when `x` lies on one of the exceptional orbits (only when `k ≠ l`).
    pub fn on_singular_fiber(&self, x: &S3Point) -> bool {
        if self.k == self.l {
            return false;
        }
        let r1 = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let r2 = (x[2] * x[2] + x[3] * x[3]).sqrt();
        r1 < 1e-12 || r2 < 1e-12
    }

    /// Orbit-space coordinates of `x`.
    pub fn base_coords(&self, x: &S3Point) -> Result<BasePoint> {
        self.check_unit(x)?;
        if self.on_singular_fiber(x) {
            return Err(Error::SingularFiber(if x[0].abs() + x[1].abs() < 1e-12 { PI / 2.0 } else { 0.0 }));
        }
        let r1 = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let r2 = (x[2] * x[2] + x[3] * x[3]).sqrt();
        let eta = r2.atan2(r1);
        let alpha = x[1].atan2(x[0]);
        let beta = x[3].atan2(x[2]);
        let psi = wrap_angle(self.l as f64 * alpha - self.k as f64 * beta, 2.0 * PI);
        Ok(BasePoint { eta, psi })
    }

    /// Projection to the round sphere of radius 1/2. For `k = l = 1` this is
    /// the Hopf map `(2 z1 z̄2, |z1|² − |z2|²)/2`.
    pub fn project(&self, x: &S3Point) -> Result<[f64; 3]> {
        let p = self.base_coords(x)?;
        Ok(base_to_sphere(p))
    }

    /// Orbit of `base` through the section point `(cos η e^{iψ/l}, sin η)`.
    pub fn section(&self, base: BasePoint) -> S3Point {
        from_hopf(base.eta, base.psi / self.l as f64, 0.0)
    }

    /// Phase of `x` along its orbit in a local chart: `β/l` where
    /// `|z2| ≥ |z1|`, otherwise `α/k`.
    pub fn fiber_coordinate(&self, x: &S3Point) -> Result<f64> {
        self.check_unit(x)?;
        if self.on_singular_fiber(x) {
            return Err(Error::SingularFiber(0.0));
        }
        let r1 = x[0] * x[0] + x[1] * x[1];
        let r2 = x[2] * x[2] + x[3] * x[3];
        let period = 2.0 * PI / self.q as f64;
        let t = if r2 >= r1 {
            x[3].atan2(x[2]) / self.l as f64
        } else {
            x[1].atan2(x[0]) / self.k as f64
        };
        Ok(t.rem_euclid(period))
    }

    /// Length of the orbit through `x` in the quotient.
    pub fn fiber_length(&self, x: &S3Point) -> f64 {
        let r1 = x[0] * x[0] + x[1] * x[1];
        let r2 = x[2] * x[2] + x[3] * x[3];
        let (k, l) = (self.k as f64, self.l as f64);
        if self.on_singular_fiber(x) {
            // Exceptional orbits close after 2π/k or 2π/l.
            return 2.0 * PI / self.q as f64;
        }
        2.0 * PI * (k * k * r1 + l * l * r2).sqrt() / self.q as f64
    }

    /// Orbit length measured as a fine polyline, for cross-checking
    /// [`fiber_length`](Self::fiber_length).
    pub fn measured_fiber_length(&self, x: &S3Point, segments: usize) -> f64 {
        let span = 2.0 * PI / self.q as f64;
        let pts: Vec<S3Point> = (0..=segments).map(|i| self.act(span * i as f64 / segments as f64, x)).collect();
        pts.windows(2)
            .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
            .sum()
    }

    /// Angle `θ` maximizing `Re⟨x, θ·y⟩` and that maximum.
    pub(crate) fn nearest_on_orbit(&self, x: &S3Point, y: &S3Point, guess: Option<f64>) -> (f64, f64) {
        let (ar, ai) = hermitian(&[x[0], x[1], 0.0, 0.0], &[y[0], y[1], 0.0, 0.0]);
        let (br, bi) = hermitian(&[0.0, 0.0, x[2], x[3]], &[0.0, 0.0, y[2], y[3]]);
        let (k, l) = (self.k as f64, self.l as f64);
        // Re(A e^{-ikθ}) + Re(B e^{-ilθ}) and its derivatives.
        let f = |t: f64| {
            let (ca, sa) = ((k * t).cos(), (k * t).sin());
            let (cb, sb) = ((l * t).cos(), (l * t).sin());
            let v = ar * ca + ai * sa + br * cb + bi * sb;
            let d1 = k * (-ar * sa + ai * ca) + l * (-br * sb + bi * cb);
            let d2 = -k * k * (ar * ca + ai * sa) - l * l * (br * cb + bi * sb);
            (v, d1, d2)
        };
        if self.k == self.l {
            let (re, im) = (ar + br, ai + bi);
            let t = im.atan2(re) / k;
            return (t, (re * re + im * im).sqrt());
        }
        let mut best = match guess {
            Some(g) => g,
            None => {
                let n = 64 * (self.k.max(self.l) as usize);
                (0..n)
                    .map(|i| 2.0 * PI * i as f64 / n as f64)
                    .max_by(|a, b| f(*a).0.total_cmp(&f(*b).0))
                    .unwrap()
            }
        };
        for _ in 0..50 {
            let (_, d1, d2) = f(best);
            if d2 >= 0.0 {
                break;
            }
            let step = d1 / d2;
            best -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        (best, f(best).0)
    }

    /// Distance from `x` to the orbit through `y` (in the quotient).
    pub fn fiber_distance(&self, x: &S3Point, y: &S3Point) -> Result<f64> {
        self.check_unit(x)?;
        self.check_unit(y)?;
        Ok(self.fiber_distance_unchecked(x, y))
    }

    pub(crate) fn fiber_distance_unchecked(&self, x: &S3Point, y: &S3Point) -> f64 {
        let (_, m) = self.nearest_on_orbit(x, y, None);
        let chord = (2.0 - 2.0 * m).max(0.0).sqrt();
        2.0 * (0.5 * chord).min(1.0).asin()
    }
}

/// Orbit-space point on the sphere of radius 1/2 (polar angle `2η`).
pub fn base_to_sphere(p: BasePoint) -> [f64; 3] {
    let s = (2.0 * p.eta).sin();
    [0.5 * s * p.psi.cos(), 0.5 * s * p.psi.sin(), 0.5 * (2.0 * p.eta).cos()]
}

/// Distance on the sphere of radius 1/2.
pub fn base_distance(a: BasePoint, b: BasePoint) -> f64 {
    let (u, v) = (base_to_sphere(a), base_to_sphere(b));
    let chord = u.iter().zip(&v).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    (chord).min(1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(eta: f64, a: f64, b: f64) -> S3Point {
        from_hopf(eta, a, b)
    }

    #[test]
    fn sphere_and_lens_distances() {
        let s3 = BundleSpace::hopf();
        let x = pt(0.4, 0.3, -1.1);
        let neg = x.map(|v| -v);
        assert_eq!(s3.geodesic_distance(&x, &x).unwrap(), 0.0);
        assert_relative_eq!(s3.geodesic_distance(&x, &neg).unwrap(), PI, epsilon = 1e-12);
        let rp3 = BundleSpace::new(1, 1, 2).unwrap();
        assert!(rp3.geodesic_distance(&x, &neg).unwrap() < 1e-7);
        assert!(s3.geodesic_distance(&x, &[1.0, 0.0, 0.0, 0.1]).is_err());
    }

    #[test]
    fn weights_are_normalized() {
        assert_eq!(BundleSpace::new(2, 4, 3).unwrap(), BundleSpace { k: 1, l: 2, q: 3 });
    }

    #[test]
    fn projection_is_constant_on_orbits() {
        let s3 = BundleSpace::hopf();
        let x = pt(0.0, 0.0, 0.0);
        let y = s3.act(0.7, &x);
        let (a, b) = (s3.project(&x).unwrap(), s3.project(&y).unwrap());
        for i in 0..3 {
            assert_relative_eq!(a[i], b[i], epsilon = 1e-14);
        }
        // Hopf map (2 z1 z̄2, |z1|² − |z2|²)/2 on a generic point.
        let z = pt(0.3, 1.0, 0.2);
        let h = s3.project(&z).unwrap();
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        assert_relative_eq!(h[0], c * s * (0.8f64).cos(), epsilon = 1e-14);
        assert_relative_eq!(h[1], c * s * (0.8f64).sin(), epsilon = 1e-14);
        assert_relative_eq!(h[2], 0.5 * (c * c - s * s), epsilon = 1e-14);
        let w = BundleSpace::new(2, 3, 1).unwrap();
        let g = pt(0.9, 0.1, 2.0);
        assert_relative_eq!(w.base_coords(&g).unwrap().psi, w.base_coords(&w.act(1.3, &g)).unwrap().psi, epsilon = 1e-12);
        assert!(w.project(&pt(0.0, 0.4, 0.0)).is_err());
    }

    #[test]
    fn hopf_fibers_have_length_two_pi() {
        let s3 = BundleSpace::hopf();
        let x = pt(0.7, 0.2, 0.9);
        assert_relative_eq!(s3.fiber_length(&x), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(s3.measured_fiber_length(&x, 1 << 14), 2.0 * PI, max_relative = 1e-7);
        let w = BundleSpace::new(1, 3, 1).unwrap();
        assert_relative_eq!(w.measured_fiber_length(&x, 1 << 15), w.fiber_length(&x), max_relative = 1e-7);
    }

    #[test]
    fn submersion_contracts() {
        let s3 = BundleSpace::hopf();
        let x = pt(0.2, 0.5, 1.0);
        let y = pt(1.1, -0.4, 2.5);
        let d = s3.geodesic_distance(&x, &y).unwrap();
        let db = base_distance(s3.base_coords(&x).unwrap(), s3.base_coords(&y).unwrap());
        assert!(db <= d + 1e-12);
        // Base distance equals the distance between the fibers.
        assert_relative_eq!(db, s3.fiber_distance(&x, &y).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn orbit_search_matches_closed_form_when_weights_agree() {
        let general = BundleSpace { k: 1, l: 1, q: 1 };
        let x = pt(0.3, 0.1, 0.7);
        let y = pt(1.0, 2.0, -0.2);
        let (_, m) = general.nearest_on_orbit(&x, &y, None);
        let (re, im) = hermitian(&x, &y);
        assert_relative_eq!(m, (re * re + im * im).sqrt(), epsilon = 1e-14);
        let w = BundleSpace::new(1, 2, 1).unwrap();
        let (t, m) = w.nearest_on_orbit(&x, &y, None);
        let brute = (0..200_000)
            .map(|i| {
                let p = w.act(2.0 * PI * i as f64 / 200_000.0, &y);
                hermitian(&x, &p).0
            })
            .fold(f64::MIN, f64::max);
        assert!(m >= brute - 1e-12 && m <= brute + 1e-9, "{m} vs {brute} at {t}");
    }
}
