//! Integrated comparison from a pointwise slope comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonVerdict {
    /// `f(b) − f(a)`.
    pub f_gain: f64,
    /// `h(b) − h(a)`.
    pub h_gain: f64,
    /// `h_gain − f_gain`; never below `−tol` on success.
    pub margin: f64,
    /// Smallest slope gap `h' − f'` over the samples.
    pub min_slope_gap: f64,
    pub samples: usize,
}

/// Relative slack on slope and gain comparisons.
pub const COMPARISON_TOL: f64 = 1e-12;

/// Given `f` and `h` on a common increasing grid `xs`, checks that every
/// forward difference quotient of `f` is at most that of `h`, then checks
/// `f(b) − f(a) ≤ h(b) − h(a)`. A failing slope comparison is reported
/// with its sample.
pub fn check_derivative_comparison(xs: &[f64], f: &[f64], h: &[f64]) -> Result<ComparisonVerdict> {
    let n = xs.len();
    if n < 2 || f.len() != n || h.len() != n {
        return Err(Error::Precondition(format!(
            "need at least two common samples (x {}, f {}, h {})",
            n,
            f.len(),
            h.len()
        )));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) || f.iter().chain(h).any(|v| !v.is_finite()) {
        return Err(Error::Precondition("samples must be finite on a strictly increasing grid".into()));
    }
    let mut min_slope_gap = f64::INFINITY;
    for k in 0..n - 1 {
        let dx = xs[k + 1] - xs[k];
        let df = (f[k + 1] - f[k]) / dx;
        let dh = (h[k + 1] - h[k]) / dx;
        if df > dh + COMPARISON_TOL * df.abs().max(dh.abs()).max(1.0) {
            return Err(Error::HypothesisFails { index: k, x: xs[k], f_slope: df, h_slope: dh });
        }
        min_slope_gap = min_slope_gap.min(dh - df);
    }
    let f_gain = f[n - 1] - f[0];
    let h_gain = h[n - 1] - h[0];
    let margin = h_gain - f_gain;
    let scale = f.iter().chain(h).fold(1.0_f64, |m, v| m.max(v.abs()));
    if margin < -COMPARISON_TOL * scale * n as f64 {
        return Err(Error::Precondition(format!("gains violate the comparison: {f_gain} > {h_gain}")));
    }
    Ok(ComparisonVerdict { f_gain, h_gain, margin, min_slope_gap, samples: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn linear_pair() {
        let x = grid(0.0, 1.0, 11);
        let f: Vec<f64> = x.clone();
        let h: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let v = check_derivative_comparison(&x, &f, &h).unwrap();
        assert!((v.f_gain - 1.0).abs() < 1e-15 && (v.h_gain - 2.0).abs() < 1e-15);
    }

    #[test]
    fn equal_functions_tie() {
        let x = grid(0.0, 1.0, 11);
        let f: Vec<f64> = x.iter().map(|v| v * v).collect();
        assert_eq!(check_derivative_comparison(&x, &f, &f).unwrap().margin, 0.0);
    }

    #[test]
    fn sine_below_identity() {
        let x = grid(0.0, FRAC_PI_2, 101);
        let f: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let v = check_derivative_comparison(&x, &f, &x).unwrap();
        assert!((v.margin - (FRAC_PI_2 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn witness_is_reported() {
        let x = grid(0.0, 1.0, 11);
        let mut f = x.clone();
        f[6] += 0.5;
        let h: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        match check_derivative_comparison(&x, &f, &h) {
            Err(Error::HypothesisFails { index, .. }) => assert_eq!(index, 5),
            other => panic!("{other:?}"),
        }
    }
}
