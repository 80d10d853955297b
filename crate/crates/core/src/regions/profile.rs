use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::par;
use crate::spaces::{FiberChart, FiberKind, GridScheme, WarpedSpace};

use super::grid::GridRegion;

/// Shape of every slice of a profile region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SliceForm {
    /// Fiber ball `B(center, radius)`.
    Ball,
    /// Lower ray `(-∞, center]`; `center = -∞` is the empty slice.
    LowerRay,
}

/// A region given slice by slice over base samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRegion {
    pub form: SliceForm,
    pub base: Vec<f64>,
    pub radius: Vec<f64>,
    pub center: Vec<f64>,
}

/// Relative tolerance for matching a base point to a sample.
const SAMPLE_TOL: f64 = 1e-9;

impl ProfileRegion {
    pub fn new(form: SliceForm, base: Vec<f64>, radius: Vec<f64>, center: Vec<f64>) -> Result<Self> {
        let p = Self { form, base, radius, center };
        p.check_shape()?;
        Ok(p)
    }

    /// Ball slices `B(center(b), radius(b))` at `samples` uniform points of
    /// `[lo, hi]`.
    pub fn from_fn<F>(lo: f64, hi: f64, samples: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> (f64, f64),
    {
        if samples < 2 {
            return Err(Error::InvalidRegion("a profile needs at least two base samples".into()));
        }
        let base: Vec<f64> = (0..samples).map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64).collect();
        let (radius, center) = base.iter().map(|&b| f(b)).unzip();
        Self::new(SliceForm::Ball, base, radius, center)
    }

    /// Lower rays `(-∞, cut(b)]` at uniform base samples.
    pub fn rays_from_fn<F>(lo: f64, hi: f64, samples: usize, cut: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        if samples < 2 {
            return Err(Error::InvalidRegion("a profile needs at least two base samples".into()));
        }
        let base: Vec<f64> = (0..samples).map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64).collect();
        let center = base.iter().map(|&b| cut(b)).collect();
        Self::new(SliceForm::LowerRay, base.clone(), vec![0.0; base.len()], center)
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    /// True when every slice is centered at `p`.
    pub fn is_centered(&self) -> bool {
        self.form == SliceForm::Ball && self.center.iter().all(|&c| c == 0.0)
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.base.len();
        if n < 2 || self.radius.len() != n || self.center.len() != n {
            return Err(Error::InvalidRegion(format!(
                "profile arrays must share a length ≥ 2 (base {}, radius {}, center {})",
                n,
                self.radius.len(),
                self.center.len()
            )));
        }
        if self.base.windows(2).any(|w| !(w[1] > w[0])) || self.base.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidRegion("base samples must be finite and strictly increasing".into()));
        }
        Ok(())
    }

    /// Checks the profile against a space: sample range, radius bounds,
    /// admissible off-center slices and truncation.
    pub fn validate(&self, space: &WarpedSpace) -> Result<()> {
        self.check_shape()?;
        let [lo, hi] = space.base;
        let tol = SAMPLE_TOL * (hi - lo).abs().max(1.0);
        if self.base[0] < lo - tol || *self.base.last().unwrap() > hi + tol {
            return Err(Error::InvalidRegion(format!("profile base samples leave the base interval [{lo}, {hi}]")));
        }
        let fiber = &space.fiber;
        let rmax = fiber.max_radius();
        match self.form {
            SliceForm::Ball => {
                let off_center_ok = matches!(fiber.kind, FiberKind::Line | FiberKind::Circle { .. })
                    || matches!(fiber.kind, FiberKind::SphereCap { dim: 1, .. });
                for (k, (&r, &c)) in self.radius.iter().zip(&self.center).enumerate() {
                    if !(r >= 0.0) || r > rmax * (1.0 + 1e-12) || !c.is_finite() {
                        return Err(Error::InvalidRegion(format!(
                            "sample {k}: radius {r} outside [0, {rmax}] or center {c} not finite"
                        )));
                    }
                    if c != 0.0 && !off_center_ok {
                        return Err(Error::InvalidRegion(format!(
                            "sample {k}: off-center slices are only supported on line and circle fibers"
                        )));
                    }
                    if fiber.kind == FiberKind::Line && r > 0.0 && c.abs() + r > rmax * (1.0 + 1e-12) {
                        return Err(Error::Truncation(format!(
                            "sample {k}: slice [{}, {}] leaves the truncated fiber [-{rmax}, {rmax}]",
                            c - r,
                            c + r
                        )));
                    }
                }
            }
            SliceForm::LowerRay => {
                let FiberChart::Signed { hi: fhi, period: None, .. } = fiber.chart() else {
                    return Err(Error::InvalidRegion("ray slices need a line or half-line fiber".into()));
                };
                if !matches!(fiber.kind, FiberKind::Line | FiberKind::HalfLine) {
                    return Err(Error::InvalidRegion("ray slices need a line or half-line fiber".into()));
                }
                for (k, &c) in self.center.iter().enumerate() {
                    if c.is_nan() || c == f64::INFINITY || (c.is_finite() && c > fhi * (1.0 + 1e-12) + 1e-300) {
                        return Err(Error::Truncation(format!("sample {k}: ray cut {c} beyond fiber edge {fhi}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Index of the sample at base point `b`.
    pub fn sample_index(&self, b: f64) -> Result<usize> {
        let (lo, hi) = (self.base[0], *self.base.last().unwrap());
        let tol = SAMPLE_TOL * (hi - lo).max(1.0);
        let k = self.base.partition_point(|&x| x < b - tol);
        if k < self.base.len() && (self.base[k] - b).abs() <= tol {
            Ok(k)
        } else {
            Err(Error::OutOfRange { what: "profile base sample", value: b, lo, hi })
        }
    }

    /// Unscaled fiber mass of slice `k`.
    pub fn slice_mass(&self, space: &WarpedSpace, k: usize) -> f64 {
        slice_mass(space, self.form, self.radius[k], self.center[k])
    }

    /// Weighted slice volume at sample `k`.
    pub fn slice_volume_at(&self, space: &WarpedSpace, k: usize) -> f64 {
        let b = self.base[k];
        if space.is_singular(b) {
            return 0.0;
        }
        space.fiber_scale(b) * self.slice_mass(space, k)
    }

    pub fn slice_volume(&self, space: &WarpedSpace, b: f64) -> Result<f64> {
        Ok(self.slice_volume_at(space, self.sample_index(b)?))
    }

    /// Trapezoid quadrature weights of the base samples.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        trapezoid_weights(&self.base)
    }

    pub fn slice_volume_curve(&self, space: &WarpedSpace) -> SliceVolumeCurve {
        let volume = par::map_indexed(self.len(), |k| self.slice_volume_at(space, k));
        SliceVolumeCurve { base: self.base.clone(), volume, weight: self.trapezoid_weights() }
    }

    /// `∫ Φ(b)·Vol_b db` by the trapezoid rule over the samples.
    pub fn weighted_volume(&self, space: &WarpedSpace) -> f64 {
        self.slice_volume_curve(space).integrate(space)
    }

    /// Linearly interpolated slice `(radius, center)` at `b`, or `None`
    /// outside the sampled range.
    pub fn slice_at(&self, b: f64) -> Option<(f64, f64)> {
        let n = self.base.len();
        if b < self.base[0] || b > self.base[n - 1] {
            return None;
        }
        let k = self.base.partition_point(|&x| x <= b).clamp(1, n - 1);
        let (b0, b1) = (self.base[k - 1], self.base[k]);
        let s = (b - b0) / (b1 - b0);
        let lerp = |v: &[f64]| {
            let (a, c) = (v[k - 1], v[k]);
            if a == c {
                a
            } else if !a.is_finite() || !c.is_finite() {
                f64::NEG_INFINITY
            } else {
                a + s * (c - a)
            }
        };
        Some((lerp(&self.radius), lerp(&self.center)))
    }

    /// Whether the fiber point `t` (chart coordinate) lies in the slice
    /// `(radius, center)`.
    pub fn slice_contains(&self, space: &WarpedSpace, radius: f64, center: f64, t: f64) -> bool {
        slice_contains(space, self.form, radius, center, t)
    }
}

pub(crate) fn slice_contains(space: &WarpedSpace, form: SliceForm, radius: f64, center: f64, t: f64) -> bool {
    let fiber = &space.fiber;
    match form {
        SliceForm::LowerRay => t <= center,
        SliceForm::Ball => {
            if radius <= 0.0 {
                return false;
            }
            match fiber.chart() {
                FiberChart::Radial { .. } => t <= radius,
                FiberChart::Signed { period: Some(l), .. } => {
                    2.0 * radius >= l || fiber.delta(center, t).abs() <= radius
                }
                FiberChart::Signed { lo, .. } if lo == 0.0 => t <= radius,
                FiberChart::Signed { .. } => (t - center).abs() <= radius,
            }
        }
    }
}

/// Unscaled fiber mass of a single slice.
pub fn slice_mass(space: &WarpedSpace, form: SliceForm, radius: f64, center: f64) -> f64 {
    let fiber = &space.fiber;
    match form {
        SliceForm::LowerRay => {
            if center == f64::NEG_INFINITY {
                return 0.0;
            }
            let FiberChart::Signed { lo, hi, .. } = fiber.chart() else { return 0.0 };
            let c = center.min(hi);
            if c <= lo {
                return 0.0;
            }
            split_at_zero(space, lo, c)
        }
        SliceForm::Ball => {
            if radius <= 0.0 {
                return 0.0;
            }
            match fiber.chart() {
                FiberChart::Radial { .. } => fiber.ball_mass(radius),
                FiberChart::Signed { period: Some(l), .. } if 2.0 * radius >= l => fiber.ball_mass(0.5 * l),
                FiberChart::Signed { lo, .. } if lo == 0.0 => fiber.interval_mass(0.0, radius),
                FiberChart::Signed { .. } if center == 0.0 => fiber.ball_mass(radius),
                FiberChart::Signed { .. } => split_at_zero(space, center - radius, center + radius),
            }
        }
    }
}

/// `∫_a^b Ψ`, split at `p` where densities may have a kink.
fn split_at_zero(space: &WarpedSpace, a: f64, b: f64) -> f64 {
    let f = &space.fiber;
    if a < 0.0 && b > 0.0 {
        f.interval_mass(a, 0.0) + f.interval_mass(0.0, b)
    } else {
        f.interval_mass(a, b)
    }
}

pub(crate) fn trapezoid_weights(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let h = 0.5 * (xs[k + 1] - xs[k]);
        w[k] += h;
        w[k + 1] += h;
    }
    w
}

/// Weighted slice volumes along the base, with the quadrature weights
/// that turn them into a total volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceVolumeCurve {
    pub base: Vec<f64>,
    pub volume: Vec<f64>,
    pub weight: Vec<f64>,
}

impl SliceVolumeCurve {
    /// `Σ_k w_k Φ(b_k) Vol_k`.
    pub fn integrate(&self, space: &WarpedSpace) -> f64 {
        let terms: Vec<f64> = self
            .base
            .iter()
            .zip(&self.volume)
            .zip(&self.weight)
            .map(|((&b, &v), &w)| if v == 0.0 { 0.0 } else { w * space.phi(b) * v })
            .collect();
        pairwise_sum(&terms)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("b,slice_volume\n");
        for (b, v) in self.base.iter().zip(&self.volume) {
            s.push_str(&format!("{b},{v}\n"));
        }
        s
    }
}

/// Result of rasterizing a profile onto a grid.
#[derive(Debug, Clone)]
pub struct Rasterized {
    pub region: GridRegion,
    pub profile_volume: f64,
    pub grid_volume: f64,
}

impl Rasterized {
    pub fn discrepancy(&self) -> f64 {
        self.grid_volume - self.profile_volume
    }
}

/// Grid cells whose centers lie in the interpolated profile slices.
pub fn rasterize(space: &WarpedSpace, profile: &ProfileRegion, scheme: &GridScheme) -> Result<Rasterized> {
    profile.validate(space)?;
    if let (FiberKind::Line, SliceForm::Ball) = (&space.fiber.kind, profile.form) {
        let (flo, fhi) = (scheme.fiber_lo, scheme.fiber_hi);
        for (k, (&r, &c)) in profile.radius.iter().zip(&profile.center).enumerate() {
            if r > 0.0 && (c - r < flo - 1e-12 || c + r > fhi + 1e-12) {
                return Err(Error::Truncation(format!(
                    "sample {k}: slice [{}, {}] exceeds grid fiber range [{flo}, {fhi}]",
                    c - r,
                    c + r
                )));
            }
        }
    }
    let region = GridRegion::from_predicate(scheme.clone(), |b, t| match profile.slice_at(b) {
        Some((r, c)) => !space.is_singular(b) && profile.slice_contains(space, r, c, t),
        None => false,
    });
    let grid_volume = region.weighted_volume(&scheme.measure(space));
    Ok(Rasterized { region, profile_volume: profile.weighted_volume(space), grid_volume })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{FiberGeometry, ScalarFn};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn flat() -> WarpedSpace {
        WarpedSpace::product("flat", [0.0, 1.0], FiberGeometry::line(ScalarFn::ONE, 3.0))
    }

    #[test]
    fn slice_volume_examples() {
        let s = flat();
        let p = ProfileRegion::from_fn(0.0, 1.0, 11, |_| (1.0, 0.0)).unwrap();
        assert_relative_eq!(p.slice_volume(&s, 0.3).unwrap(), 2.0, max_relative = 1e-12);
        assert!(p.slice_volume(&s, 0.35).is_err());
        let e = ProfileRegion::from_fn(0.0, 1.0, 11, |_| (0.0, 0.0)).unwrap();
        assert_eq!(e.slice_volume(&s, 0.3).unwrap(), 0.0);
        let gauss = WarpedSpace::product("g", [0.0, 1.0], FiberGeometry::line(ScalarFn::ExpQuad { rate: -1.0 }, 3.0));
        let q = ProfileRegion::from_fn(0.0, 1.0, 3, |_| (0.5, 1.0)).unwrap();
        // ∫_{0.5}^{1.5} e^{-t²} dt = (√π/2)(erf 1.5 − erf 0.5)
        assert_relative_eq!(q.slice_volume(&gauss, 0.5).unwrap(), 0.3949073872121086, max_relative = 1e-10);
    }

    #[test]
    fn cone_full_fibers_have_volume_pi() {
        let cone = WarpedSpace::new(
            "cone",
            [0.0, 1.0],
            ScalarFn::identity(),
            ScalarFn::ONE,
            FiberGeometry::circle(2.0 * PI, ScalarFn::ONE),
        )
        .with_singular(vec![0.0]);
        let p = ProfileRegion::from_fn(0.0, 1.0, 2, |_| (PI, 0.0)).unwrap();
        // g is linear, so the trapezoid rule is exact.
        assert_relative_eq!(p.weighted_volume(&cone), PI, max_relative = 1e-12);
    }

    #[test]
    fn rasterized_tilted_strip_has_unit_volume() {
        let s = flat();
        let p = ProfileRegion::from_fn(0.0, 1.0, 201, |b| (0.5, 0.5 * b + 0.5)).unwrap();
        let sch = GridScheme::with_spacing(&s, 0.01, 0.01).unwrap();
        let r = rasterize(&s, &p, &sch).unwrap();
        assert_relative_eq!(r.profile_volume, 1.0, max_relative = 1e-12);
        assert!((r.grid_volume - 1.0).abs() <= 0.02, "{}", r.grid_volume);
    }

    #[test]
    fn zero_radius_rasterizes_empty() {
        let s = flat();
        let p = ProfileRegion::from_fn(0.0, 1.0, 5, |_| (0.0, 0.0)).unwrap();
        let sch = GridScheme::new(&s, 20, 20).unwrap();
        assert!(rasterize(&s, &p, &sch).unwrap().region.is_empty());
    }

    #[test]
    fn truncation_is_reported() {
        let s = flat();
        let p = ProfileRegion::from_fn(0.0, 1.0, 5, |_| (1.0, 2.5)).unwrap();
        assert!(matches!(p.validate(&s), Err(Error::Truncation(_))));
    }

    #[test]
    fn off_center_radial_slices_are_rejected() {
        let s = WarpedSpace::product(
            "r2",
            [0.0, 1.0],
            FiberGeometry::new(FiberKind::RadialEuclidean { dim: 2 }, ScalarFn::ONE, Some(2.0)),
        );
        let p = ProfileRegion::from_fn(0.0, 1.0, 5, |_| (0.5, 0.1)).unwrap();
        assert!(p.validate(&s).is_err());
    }

    #[test]
    fn rays_on_exponential_line() {
        let s = WarpedSpace::product("e", [0.0, 1.0], FiberGeometry::line(ScalarFn::Exp { rate: 1.0 }, 40.0));
        let p = ProfileRegion::rays_from_fn(0.0, 1.0, 3, |_| 0.7).unwrap();
        assert_relative_eq!(p.slice_volume(&s, 0.0).unwrap(), 0.7f64.exp(), max_relative = 1e-10);
        let e = ProfileRegion::rays_from_fn(0.0, 1.0, 3, |_| f64::NEG_INFINITY).unwrap();
        assert_eq!(e.weighted_volume(&s), 0.0);
    }

    #[test]
    fn interpolation_between_samples() {
        let p = ProfileRegion::from_fn(0.0, 1.0, 3, |b| (b, 2.0 * b)).unwrap();
        let (r, c) = p.slice_at(0.25).unwrap();
        assert_relative_eq!(r, 0.25);
        assert_relative_eq!(c, 0.5);
        assert!(p.slice_at(1.5).is_none());
    }
}
