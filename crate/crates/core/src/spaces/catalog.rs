//! Closed-form function catalog for warps and densities.

use serde::{Deserialize, Serialize};

/// A real function of one variable, drawn from a small closed-form
/// catalog or tabulated with linear interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScalarFn {
    Constant { value: f64 },
    /// `coef * x^exponent`
    Power { coef: f64, exponent: f64 },
    /// `exp(rate * x^2)`
    ExpQuad { rate: f64 },
    /// `exp(rate * |x|)`
    ExpAbs { rate: f64 },
    /// `exp(rate * x)`
    Exp { rate: f64 },
    /// `cosh(rate * x)`
    Cosh { rate: f64 },
    /// `amp * sin(freq * x)`
    Sine { amp: f64, freq: f64 },
    /// Piecewise-linear through `(xs[i], ys[i])`, constant beyond the ends.
    Tabulated { xs: Vec<f64>, ys: Vec<f64> },
}

impl ScalarFn {
    pub const ONE: ScalarFn = ScalarFn::Constant { value: 1.0 };

    pub fn constant(value: f64) -> Self {
        ScalarFn::Constant { value }
    }

    pub fn identity() -> Self {
        ScalarFn::Power { coef: 1.0, exponent: 1.0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ScalarFn::Constant { value } => *value,
            ScalarFn::Power { coef, exponent } => {
                if exponent.fract() == 0.0 && exponent.abs() < 64.0 {
                    coef * x.powi(*exponent as i32)
                } else {
                    coef * x.powf(*exponent)
                }
            }
            ScalarFn::ExpQuad { rate } => (rate * x * x).exp(),
            ScalarFn::ExpAbs { rate } => (rate * x.abs()).exp(),
            ScalarFn::Exp { rate } => (rate * x).exp(),
            ScalarFn::Cosh { rate } => (rate * x).cosh(),
            ScalarFn::Sine { amp, freq } => amp * (freq * x).sin(),
            ScalarFn::Tabulated { xs, ys } => interpolate(xs, ys, x),
        }
    }

    /// Checks `f(x) == f(-x)` on a sample of `[0, extent]`.
    pub fn is_even_on(&self, extent: f64) -> bool {
        (0..=64).all(|k| {
            let x = extent * k as f64 / 64.0;
            let (a, b) = (self.eval(x), self.eval(-x));
            (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
        })
    }

    pub fn validate(&self) -> Result<(), String> {
        if let ScalarFn::Tabulated { xs, ys } = self {
            if xs.len() < 2 || xs.len() != ys.len() {
                return Err("tabulated function needs matching xs/ys with at least two samples".into());
            }
            if xs.windows(2).any(|w| !(w[1] > w[0])) {
                return Err("tabulated xs must be strictly increasing".into());
            }
        }
        Ok(())
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let k = xs.partition_point(|&v| v <= x) - 1;
    let w = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] + w * (ys[k + 1] - ys[k])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_values() {
        assert_eq!(ScalarFn::constant(2.0).eval(5.0), 2.0);
        assert_eq!(ScalarFn::identity().eval(-3.0), -3.0);
        assert_eq!(ScalarFn::Power { coef: 2.0, exponent: 2.0 }.eval(3.0), 18.0);
        assert_eq!(ScalarFn::ExpQuad { rate: -1.0 }.eval(1.0), (-1.0f64).exp());
        assert_eq!(ScalarFn::Cosh { rate: 1.0 }.eval(0.0), 1.0);
    }

    #[test]
    fn tabulated_interpolates_and_clamps() {
        let f = ScalarFn::Tabulated { xs: vec![0.0, 1.0, 3.0], ys: vec![1.0, 3.0, 4.0] };
        assert_eq!(f.eval(-1.0), 1.0);
        assert_eq!(f.eval(0.5), 2.0);
        assert_eq!(f.eval(2.0), 3.5);
        assert_eq!(f.eval(10.0), 4.0);
        assert!(f.validate().is_ok());
        let bad = ScalarFn::Tabulated { xs: vec![0.0, 0.0], ys: vec![1.0, 1.0] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn evenness() {
        assert!(ScalarFn::ExpQuad { rate: 1.0 }.is_even_on(3.0));
        assert!(ScalarFn::Cosh { rate: 2.0 }.is_even_on(3.0));
        assert!(!ScalarFn::Exp { rate: 1.0 }.is_even_on(3.0));
    }
}
