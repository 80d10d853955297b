use serde::{Deserialize, Serialize};

use super::catalog::ScalarFn;
use super::fiber::FiberGeometry;
use crate::error::{Error, Result};
use crate::numeric::bisect_increasing;

/// Tolerance for recognizing a declared singular base point.
const SINGULAR_TOL: f64 = 1e-12;

/// A warped product `B ×_g F` over a base interval with metric
/// `db² + g(b)² dt²` and product density `Φ(b)·Ψ(t)`.
///
/// Fiber volumes over `b` scale by `g(b)^n` and fiber boundary measures by
/// `g(b)^(n-1)`, where `n` is the fiber dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpedSpace {
    #[serde(default)]
    pub id: String,
    pub base: [f64; 2],
    pub warp: ScalarFn,
    pub base_density: ScalarFn,
    pub fiber: FiberGeometry,
    #[serde(default)]
    pub singular_base: Vec<f64>,
}

impl WarpedSpace {
    pub fn new(id: impl Into<String>, base: [f64; 2], warp: ScalarFn, base_density: ScalarFn, fiber: FiberGeometry) -> Self {
        Self { id: id.into(), base, warp, base_density, fiber, singular_base: Vec::new() }
    }

    pub fn with_singular(mut self, points: Vec<f64>) -> Self {
        self.singular_base = points;
        self
    }

    /// Flat product `[b0, b1] × F` with `g ≡ 1`, `Φ ≡ 1`.
    pub fn product(id: impl Into<String>, base: [f64; 2], fiber: FiberGeometry) -> Self {
        Self::new(id, base, ScalarFn::ONE, ScalarFn::ONE, fiber)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpace(m));
        let [lo, hi] = self.base;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return bad(format!("base interval [{lo}, {hi}] is empty or unbounded"));
        }
        self.fiber.validate().map_err(Error::InvalidSpace)?;
        self.warp.validate().map_err(Error::InvalidSpace)?;
        self.base_density.validate().map_err(Error::InvalidSpace)?;
        for &s in &self.singular_base {
            if s < lo - SINGULAR_TOL || s > hi + SINGULAR_TOL {
                return bad(format!("singular base point {s} lies outside the base"));
            }
            if self.warp.eval(s).abs() > SINGULAR_TOL {
                return bad(format!("declared singular point {s} has g = {} ≠ 0", self.warp.eval(s)));
            }
        }
        for k in 0..=512 {
            let b = lo + (hi - lo) * k as f64 / 512.0;
            let phi = self.base_density.eval(b);
            // A density may vanish at an end of the base (polar reductions).
            let end = k == 0 || k == 512;
            if !((phi > 0.0 || (end && phi == 0.0)) && phi.is_finite()) && !self.is_singular(b) {
                return bad(format!("base density must be positive, got {phi} at b = {b}"));
            }
            let g = self.warp.eval(b);
            if !(g > 0.0 && g.is_finite()) && !self.is_singular(b) {
                return bad(format!("warp must be positive off the singular set, got {g} at b = {b}"));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.fiber.dim()
    }

    pub fn g(&self, b: f64) -> f64 {
        self.warp.eval(b)
    }

    pub fn phi(&self, b: f64) -> f64 {
        self.base_density.eval(b)
    }

    pub fn psi(&self, t: f64) -> f64 {
        self.fiber.psi(t)
    }

    /// `g(b)^n`, the factor relating fiber-coordinate masses to weighted
    /// slice volumes.
    pub fn fiber_scale(&self, b: f64) -> f64 {
        self.g(b).powi(self.n() as i32)
    }

    pub fn is_singular(&self, b: f64) -> bool {
        self.singular_base.iter().any(|&s| (b - s).abs() <= SINGULAR_TOL) || self.g(b) == 0.0
    }

    fn check_base(&self, b: f64) -> Result<()> {
        let [lo, hi] = self.base;
        if b < lo - 1e-12 || b > hi + 1e-12 {
            return Err(Error::OutOfRange { what: "base point", value: b, lo, hi });
        }
        Ok(())
    }

    fn check_radius(&self, rad: f64) -> Result<()> {
        let hi = self.fiber.max_radius();
        if !(rad >= 0.0) || rad > hi * (1.0 + 1e-12) {
            return Err(Error::OutOfRange { what: "fiber radius", value: rad, lo: 0.0, hi });
        }
        Ok(())
    }

    /// Weighted volume `g(b)^n ∫_{B(p, rad)} Ψ` of the fiber ball.
    pub fn fiber_ball_volume(&self, b: f64, rad: f64) -> Result<f64> {
        self.check_base(b)?;
        self.check_radius(rad)?;
        if self.is_singular(b) {
            return Ok(0.0);
        }
        Ok(self.fiber_scale(b) * self.fiber.ball_mass(rad))
    }

    /// Weighted volume of the whole (truncated) fiber over `b`.
    pub fn fiber_capacity(&self, b: f64) -> Result<f64> {
        self.fiber_ball_volume(b, self.fiber.max_radius())
    }

    /// Inverse of [`fiber_ball_volume`](Self::fiber_ball_volume) in the radius.
    pub fn fiber_ball_radius(&self, b: f64, vol: f64) -> Result<f64> {
        self.check_base(b)?;
        if self.is_singular(b) {
            return Err(Error::SingularFiber(b));
        }
        self.radius_for_mass(vol / self.fiber_scale(b)).map_err(|e| match e {
            Error::ExceedsCapacity { volume, capacity } => Error::ExceedsCapacity {
                volume: volume * self.fiber_scale(b),
                capacity: capacity * self.fiber_scale(b),
            },
            other => other,
        })
    }

    /// Radius of the ball about `p` with unscaled fiber mass `mass`.
    pub fn radius_for_mass(&self, mass: f64) -> Result<f64> {
        let rmax = self.fiber.max_radius();
        let cap = self.fiber.ball_mass(rmax);
        if !(mass >= 0.0) {
            return Err(Error::OutOfRange { what: "fiber volume", value: mass, lo: 0.0, hi: cap });
        }
        if mass == 0.0 {
            return Ok(0.0);
        }
        if mass > cap * (1.0 + 1e-10) {
            return Err(Error::ExceedsCapacity { volume: mass, capacity: cap });
        }
        if mass >= cap {
            return Ok(rmax);
        }
        Ok(bisect_increasing(|r| self.fiber.ball_mass(r), mass, 0.0, rmax, 1e-15 * rmax.max(1.0)))
    }

    /// Weighted `(n-1)`-measure of the boundary of the fiber ball.
    pub fn fiber_ball_boundary_measure(&self, b: f64, rad: f64) -> Result<f64> {
        self.check_base(b)?;
        self.check_radius(rad)?;
        if self.is_singular(b) {
            return Ok(0.0);
        }
        Ok(self.g(b).powi(self.n() as i32 - 1) * self.fiber.ball_boundary_mass(rad))
    }

    /// Fiber-volume scale factor `(g(b2)/g(b1))^n` of horizontal transport.
    pub fn transport_scale(&self, b1: f64, b2: f64) -> Result<f64> {
        self.check_base(b1)?;
        self.check_base(b2)?;
        if self.is_singular(b1) {
            return Err(Error::SingularFiber(b1));
        }
        Ok((self.g(b2) / self.g(b1)).powi(self.n() as i32))
    }

    /// Short-range metric distance `√(Δb² + g(b̄)²Δt²)` with `g` taken at
    /// the base midpoint; `Δt` is taken the short way round on circles.
    pub fn chord_distance(&self, p: (f64, f64), q: (f64, f64)) -> f64 {
        let db = q.0 - p.0;
        let dt = self.fiber.delta(p.1, q.1);
        let g = self.g(0.5 * (p.0 + q.0));
        (db * db + g * g * dt * dt).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::FiberKind;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn gauss_line() -> WarpedSpace {
        WarpedSpace::product("gauss", [0.0, 1.0], FiberGeometry::line(ScalarFn::ExpQuad { rate: -1.0 }, 6.0))
    }

    #[test]
    fn ball_volume_examples() {
        let flat = WarpedSpace::product("flat", [0.0, 1.0], FiberGeometry::line(ScalarFn::ONE, 3.0));
        assert_relative_eq!(flat.fiber_ball_volume(0.5, 1.0).unwrap(), 2.0, max_relative = 1e-14);
        let disk = WarpedSpace::product(
            "r2",
            [0.0, 1.0],
            FiberGeometry::new(FiberKind::RadialEuclidean { dim: 2 }, ScalarFn::ONE, Some(3.0)),
        );
        assert_relative_eq!(disk.fiber_ball_volume(0.5, 1.0).unwrap(), PI, max_relative = 1e-13);
        // Independent value: √π·erf(1).
        assert_relative_eq!(gauss_line().fiber_ball_volume(0.5, 1.0).unwrap(), 1.493_648_265_624_854, max_relative = 1e-12);
    }

    #[test]
    fn radius_examples() {
        let flat = WarpedSpace::product("flat", [0.0, 1.0], FiberGeometry::line(ScalarFn::ONE, 3.0));
        assert_relative_eq!(flat.fiber_ball_radius(0.5, 2.0).unwrap(), 1.0, max_relative = 1e-13);
        assert_eq!(flat.fiber_ball_radius(0.5, 0.0).unwrap(), 0.0);
        let circ = WarpedSpace::product("c", [0.0, 1.0], FiberGeometry::circle(2.0 * PI, ScalarFn::ONE));
        assert_relative_eq!(circ.fiber_ball_radius(0.5, 2.0 * PI).unwrap(), PI, max_relative = 1e-14);
        assert!(matches!(flat.fiber_ball_radius(0.5, 7.0), Err(Error::ExceedsCapacity { .. })));
    }

    #[test]
    fn boundary_examples() {
        let disk = WarpedSpace::product(
            "r2",
            [0.0, 1.0],
            FiberGeometry::new(FiberKind::RadialEuclidean { dim: 2 }, ScalarFn::ONE, Some(3.0)),
        );
        assert_relative_eq!(disk.fiber_ball_boundary_measure(0.2, 1.0).unwrap(), 2.0 * PI, max_relative = 1e-14);
        let flat = WarpedSpace::product("flat", [0.0, 1.0], FiberGeometry::line(ScalarFn::ONE, 3.0));
        assert_eq!(flat.fiber_ball_boundary_measure(0.2, 0.7).unwrap(), 2.0);
        assert_relative_eq!(
            gauss_line().fiber_ball_boundary_measure(0.2, 1.0).unwrap(),
            2.0 * (-1.0f64).exp(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn singular_fiber_has_zero_volume() {
        let cone = WarpedSpace::new(
            "cone",
            [0.0, 1.0],
            ScalarFn::identity(),
            ScalarFn::ONE,
            FiberGeometry::circle(2.0 * PI, ScalarFn::ONE),
        )
        .with_singular(vec![0.0]);
        cone.validate().unwrap();
        assert_eq!(cone.fiber_ball_volume(0.0, 1.0).unwrap(), 0.0);
        assert!(matches!(cone.fiber_ball_radius(0.0, 1.0), Err(Error::SingularFiber(_))));
        assert_relative_eq!(cone.transport_scale(1.0, 0.5).unwrap(), 0.5);
    }

    #[test]
    fn out_of_range_inputs() {
        let flat = WarpedSpace::product("flat", [0.0, 1.0], FiberGeometry::line(ScalarFn::ONE, 3.0));
        assert!(matches!(flat.fiber_ball_volume(2.0, 1.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(flat.fiber_ball_volume(0.5, 4.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(flat.fiber_ball_volume(0.5, -0.1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn validation_catches_bad_warp() {
        let s = WarpedSpace::new(
            "bad",
            [-1.0, 1.0],
            ScalarFn::identity(),
            ScalarFn::ONE,
            FiberGeometry::line(ScalarFn::ONE, 1.0),
        );
        assert!(s.validate().is_err());
    }
}
