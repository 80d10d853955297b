//! Fiber geometries and their ball-volume profiles about the basepoint.
//!
//! Fiber coordinates are measured from the basepoint `p`, which sits at
//! coordinate 0. One-dimensional fibers use a signed coordinate (periodic
//! for circles); higher-dimensional radial fibers use the distance from
//! `p`, so grid regions over them are unions of spherical shells.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::catalog::ScalarFn;
use crate::numeric::integrate_default;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FiberKind {
    Line,
    Circle { circumference: f64 },
    /// `R^dim` with a density depending only on the distance to `p`.
    RadialEuclidean { dim: usize },
    /// Round sphere `S^dim` of the given radius; `p` is a pole.
    SphereCap { dim: usize, radius: f64 },
    HalfLine,
}

/// How fiber coordinates are laid out on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FiberChart {
    /// Signed coordinate on `[lo, hi]`; `period` is set for circles.
    Signed { lo: f64, hi: f64, period: Option<f64> },
    /// Distance from `p` on `[0, hi]`.
    Radial { hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberGeometry {
    #[serde(flatten)]
    pub kind: FiberKind,
    pub density: ScalarFn,
    /// Truncation radius for non-compact fibers.
    #[serde(default)]
    pub extent: Option<f64>,
}

/// Area of the unit sphere `S^(n-1)` in `R^n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 2.0) * unit_sphere_area(n - 2),
    }
}

impl FiberGeometry {
    pub fn new(kind: FiberKind, density: ScalarFn, extent: Option<f64>) -> Self {
        Self { kind, density, extent }
    }

    pub fn line(density: ScalarFn, extent: f64) -> Self {
        Self::new(FiberKind::Line, density, Some(extent))
    }

    pub fn circle(circumference: f64, density: ScalarFn) -> Self {
        Self::new(FiberKind::Circle { circumference }, density, None)
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            FiberKind::Line | FiberKind::Circle { .. } | FiberKind::HalfLine => 1,
            FiberKind::RadialEuclidean { dim } | FiberKind::SphereCap { dim, .. } => dim,
        }
    }

    /// Period of the signed coordinate, if the fiber is a circle.
    pub fn period(&self) -> Option<f64> {
        match self.kind {
            FiberKind::Circle { circumference } => Some(circumference),
            FiberKind::SphereCap { dim: 1, radius } => Some(2.0 * PI * radius),
            _ => None,
        }
    }

    pub fn is_compact(&self) -> bool {
        matches!(self.kind, FiberKind::Circle { .. } | FiberKind::SphereCap { .. })
    }

    /// Largest ball radius about `p`; balls of this radius fill the
    /// (truncated) fiber.
    pub fn max_radius(&self) -> f64 {
        match self.kind {
            FiberKind::Circle { circumference } => 0.5 * circumference,
            FiberKind::SphereCap { radius, .. } => PI * radius,
            _ => self.extent.unwrap_or(f64::INFINITY),
        }
    }

    pub fn chart(&self) -> FiberChart {
        let rmax = self.max_radius();
        match self.kind {
            FiberKind::Line => FiberChart::Signed { lo: -rmax, hi: rmax, period: None },
            FiberKind::HalfLine => FiberChart::Signed { lo: 0.0, hi: rmax, period: None },
            FiberKind::Circle { .. } | FiberKind::SphereCap { dim: 1, .. } => FiberChart::Signed {
                lo: -rmax,
                hi: rmax,
                period: self.period(),
            },
            FiberKind::RadialEuclidean { dim: 1 } => FiberChart::Signed { lo: -rmax, hi: rmax, period: None },
            FiberKind::RadialEuclidean { .. } | FiberKind::SphereCap { .. } => FiberChart::Radial { hi: rmax },
        }
    }

    /// Wraps a signed coordinate into `[-period/2, period/2)` on circles.
    pub fn wrap(&self, t: f64) -> f64 {
        match self.period() {
            Some(p) => t - p * ((t + 0.5 * p) / p).floor(),
            None => t,
        }
    }

    /// Signed coordinate difference, shortest way round on circles.
    pub fn delta(&self, t1: f64, t2: f64) -> f64 {
        let d = t2 - t1;
        match self.period() {
            Some(_) => self.wrap(d),
            None => d,
        }
    }

    /// Fiber density at a coordinate (signed or radial, per the chart).
    pub fn psi(&self, t: f64) -> f64 {
        self.density.eval(self.wrap(t))
    }

    /// Unweighted measure of the sphere of radius `s` about `p`.
    pub fn sphere_area(&self, s: f64) -> f64 {
        match self.kind {
            FiberKind::HalfLine => 1.0,
            FiberKind::Line | FiberKind::Circle { .. } => 2.0,
            FiberKind::RadialEuclidean { dim } => unit_sphere_area(dim) * s.powi(dim as i32 - 1),
            FiberKind::SphereCap { dim, radius } => {
                unit_sphere_area(dim) * (radius * (s / radius).sin()).powi(dim as i32 - 1)
            }
        }
    }

    /// Radial weight used when integrating over a radial chart cell.
    pub(crate) fn radial_weight(&self, s: f64) -> f64 {
        match self.kind {
            FiberKind::RadialEuclidean { dim } => unit_sphere_area(dim) * s.powi(dim as i32 - 1),
            FiberKind::SphereCap { dim, radius } => {
                unit_sphere_area(dim) * (radius * (s / radius).sin()).powi(dim as i32 - 1)
            }
            _ => 1.0,
        }
    }

    /// `∫_{B(p, rad)} Ψ` in unscaled fiber coordinates.
    pub fn ball_mass(&self, rad: f64) -> f64 {
        if rad <= 0.0 {
            return 0.0;
        }
        match self.chart() {
            FiberChart::Signed { lo, .. } if lo == 0.0 => self.interval_mass(0.0, rad),
            FiberChart::Signed { .. } => {
                // Split at p so each half sees a smooth integrand.
                self.interval_mass(-rad, 0.0) + self.interval_mass(0.0, rad)
            }
            FiberChart::Radial { .. } => self.shell_mass(0.0, rad),
        }
    }

    /// `∫_a^b Ψ` along a signed coordinate (wrapping on circles).
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        integrate_default(|t| self.psi(t), a, b)
    }

    /// `∫_a^b Ψ(s) σ(s) ds` along a radial coordinate.
    pub fn shell_mass(&self, a: f64, b: f64) -> f64 {
        integrate_default(|s| self.psi(s) * self.radial_weight(s), a, b)
    }

    /// Weighted boundary measure of `B(p, rad)` in unscaled coordinates.
    pub fn ball_boundary_mass(&self, rad: f64) -> f64 {
        if self.is_compact() && rad >= self.max_radius() {
            return 0.0;
        }
        match self.kind {
            FiberKind::HalfLine => self.psi(rad),
            FiberKind::Line | FiberKind::Circle { .. } | FiberKind::RadialEuclidean { dim: 1 } => {
                self.psi(rad) + self.psi(-rad)
            }
            FiberKind::SphereCap { dim: 1, .. } => self.psi(rad) + self.psi(-rad),
            _ => self.psi(rad) * self.sphere_area(rad),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.density.validate()?;
        match self.kind {
            FiberKind::Circle { circumference } if !(circumference > 0.0) => {
                return Err("circle circumference must be positive".into())
            }
            FiberKind::SphereCap { radius, dim } if !(radius > 0.0) || dim == 0 => {
                return Err("sphere radius and dimension must be positive".into())
            }
            FiberKind::RadialEuclidean { dim: 0 } => return Err("radial fiber dimension must be ≥ 1".into()),
            _ => {}
        }
        if !self.is_compact() {
            match self.extent {
                Some(e) if e > 0.0 && e.is_finite() => {}
                _ => return Err("non-compact fibers need a positive finite `extent`".into()),
            }
        }
        let (lo, hi) = match self.chart() {
            FiberChart::Signed { lo, hi, .. } => (lo, hi),
            FiberChart::Radial { hi } => (-hi, hi),
        };
        for k in 0..=256 {
            let t = lo + (hi - lo) * k as f64 / 256.0;
            let v = self.density.eval(t);
            let needs = matches!(self.chart(), FiberChart::Signed { .. }) || t >= 0.0;
            if needs && !(v > 0.0 && v.is_finite()) {
                return Err(format!("fiber density must be positive and finite, got {v} at t = {t}"));
            }
        }
        let radial_kind = matches!(
            self.kind,
            FiberKind::RadialEuclidean { .. } | FiberKind::SphereCap { .. }
        );
        if radial_kind && !self.density.is_even_on(self.max_radius()) {
            return Err("density on a radial or spherical fiber must be rotationally symmetric".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_areas() {
        assert_eq!(unit_sphere_area(1), 2.0);
        assert_relative_eq!(unit_sphere_area(2), 2.0 * PI);
        assert_relative_eq!(unit_sphere_area(3), 4.0 * PI);
        assert_relative_eq!(unit_sphere_area(4), 2.0 * PI * PI);
    }

    #[test]
    fn wrap_on_circle() {
        let f = FiberGeometry::circle(2.0 * PI, ScalarFn::ONE);
        assert_relative_eq!(f.wrap(3.5 * PI), -0.5 * PI, epsilon = 1e-12);
        assert_relative_eq!(f.delta(3.0, -3.0), 2.0 * PI - 6.0, epsilon = 1e-12);
    }

    #[test]
    fn ball_mass_of_unit_disk_and_cap() {
        let disk = FiberGeometry::new(FiberKind::RadialEuclidean { dim: 2 }, ScalarFn::ONE, Some(3.0));
        assert_relative_eq!(disk.ball_mass(1.0), PI, max_relative = 1e-13);
        // Cap of geodesic radius π/2 on the unit S^2 is a hemisphere.
        let cap = FiberGeometry::new(FiberKind::SphereCap { dim: 2, radius: 1.0 }, ScalarFn::ONE, None);
        assert_relative_eq!(cap.ball_mass(PI / 2.0), 2.0 * PI, max_relative = 1e-13);
        assert_eq!(cap.ball_boundary_mass(PI), 0.0);
    }

    #[test]
    fn radial_validation_rejects_odd_density() {
        let f = FiberGeometry::new(FiberKind::RadialEuclidean { dim: 2 }, ScalarFn::Exp { rate: 1.0 }, Some(2.0));
        assert!(f.validate().is_err());
        let g = FiberGeometry::new(FiberKind::Line, ScalarFn::Exp { rate: 1.0 }, Some(2.0));
        assert!(g.validate().is_ok());
        let h = FiberGeometry::new(FiberKind::Line, ScalarFn::ONE, None);
        assert!(h.validate().is_err());
    }
}
