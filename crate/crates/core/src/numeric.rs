//! Small numerical kernels shared by the geometric modules.
//!
//! Everything here is deterministic: summation is pairwise over a fixed
//! order, and the quasi-random generators are pure functions of their
//! index and seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Gauss-Kronrod 7/15 nodes on [-1, 1] (positive half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SUBDIVISIONS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// Refines the segment with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -integrate(f, b, a, rel_tol, abs_tol);
    }
    let mut segments = vec![kronrod15(&f, a, b)];
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.error).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || segments.len() >= MAX_SUBDIVISIONS {
            return pairwise_sum_by(&segments, |s| s.value);
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval can no longer be split in floating point.
            segments.push(Segment { error: 0.0, ..seg });
            continue;
        }
        segments.push(kronrod15(&f, seg.a, mid));
        segments.push(kronrod15(&f, mid, seg.b));
    }
}

/// Quadrature with the default tolerances used for fiber volumes.
pub fn integrate_default<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    integrate(f, a, b, 1e-12, 1e-300)
}

/// Finds `x` in `[lo, hi]` with `f(x) = target` for nondecreasing `f`.
///
/// Bisection until the bracket is narrower than `x_tol`; returns the
/// midpoint of the final bracket.
pub fn bisect_increasing<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64, x_tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= x_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Pairwise (cascade) summation in slice order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    pairwise_sum_by(values, |v| *v)
}

pub fn pairwise_sum_by<T, F: Fn(&T) -> f64 + Copy>(values: &[T], f: F) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().fold(0.0, |acc, v| acc + f(v));
    }
    let (left, right) = values.split_at(values.len() / 2);
    pairwise_sum_by(left, f) + pairwise_sum_by(right, f)
}

/// Least-squares fit of `y = c0 + c1 x + c2 x^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFit {
    pub intercept: f64,
    pub slope: f64,
    pub curvature: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    /// Standard error of the slope from the residual variance; zero when
    /// the fit is exactly determined.
    pub slope_std_error: f64,
}

pub fn fit_quadratic(xs: &[f64], ys: &[f64]) -> Option<QuadraticFit> {
    let n = xs.len();
    if n < 3 || ys.len() != n {
        return None;
    }
    let scale = xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return None;
    }
    // Normal equations in the scaled variable u = x / scale.
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let u = x / scale;
        let row = [1.0, u, u * u];
        for i in 0..3 {
            aty[i] += row[i] * y;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let inv = invert3(&ata)?;
    let mut coef = [0.0; 3];
    for i in 0..3 {
        coef[i] = (0..3).map(|j| inv[i][j] * aty[j]).sum();
    }
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let u = x / scale;
            let r = y - (coef[0] + coef[1] * u + coef[2] * u * u);
            r * r
        })
        .sum();
    let dof = n as f64 - 3.0;
    let slope_var = if dof > 0.0 { sse / dof * inv[1][1] } else { 0.0 };
    Some(QuadraticFit {
        intercept: coef[0],
        slope: coef[1] / scale,
        curvature: coef[2] / (scale * scale),
        residual: (sse / n as f64).sqrt(),
        slope_std_error: slope_var.max(0.0).sqrt() / scale,
    })
}

/// Linear least-squares solution for a small design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub coef: Vec<f64>,
    /// Root-mean-square residual.
    pub residual: f64,
    /// Standard errors of the coefficients from the residual variance.
    pub std_error: Vec<f64>,
}

/// Solves `min |A c − y|` through the normal equations with partially
/// pivoted elimination. Returns `None` for rank-deficient designs.
pub fn least_squares(rows: &[Vec<f64>], ys: &[f64]) -> Option<LeastSquares> {
    let n = rows.len();
    let m = rows.first()?.len();
    if n < m || ys.len() != n || rows.iter().any(|r| r.len() != m) {
        return None;
    }
    let mut ata = vec![vec![0.0; m]; m];
    let mut aty = vec![0.0; m];
    for (row, &y) in rows.iter().zip(ys) {
        for i in 0..m {
            aty[i] += row[i] * y;
            for j in 0..m {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let inv = invert(&ata)?;
    let coef: Vec<f64> = (0..m).map(|i| (0..m).map(|j| inv[i][j] * aty[j]).sum()).collect();
    let sse: f64 = rows
        .iter()
        .zip(ys)
        .map(|(row, &y)| {
            let r = y - row.iter().zip(&coef).map(|(a, c)| a * c).sum::<f64>();
            r * r
        })
        .sum();
    let dof = (n - m) as f64;
    let var = if dof > 0.0 { sse / dof } else { 0.0 };
    Some(LeastSquares {
        std_error: (0..m).map(|i| (var * inv[i][i]).max(0.0).sqrt()).collect(),
        coef,
        residual: (sse / n as f64).sqrt(),
    })
}

fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let m = a.len();
    let mut w: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..m).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    let scale = a.iter().flatten().fold(0.0_f64, |s, x| s.max(x.abs()));
    for col in 0..m {
        let piv = (col..m).max_by(|&x, &y| w[x][col].abs().total_cmp(&w[y][col].abs()))?;
        if !(w[piv][col].abs() > 1e-14 * scale) {
            return None;
        }
        w.swap(col, piv);
        let p = w[col][col];
        for x in w[col].iter_mut() {
            *x /= p;
        }
        for r in 0..m {
            if r != col {
                let f = w[r][col];
                if f != 0.0 {
                    for c in 0..2 * m {
                        w[r][c] -= f * w[col][c];
                    }
                }
            }
        }
    }
    Some(w.into_iter().map(|r| r[m..].to_vec()).collect())
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if !det.is_finite() || det.abs() < 1e-300 {
        return None;
    }
    let c = |r0: usize, c0: usize, r1: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let adj = [
        [c(1, 1, 2, 2), -c(0, 1, 2, 2), c(0, 1, 1, 2)],
        [-c(1, 0, 2, 2), c(0, 0, 2, 2), -c(0, 0, 1, 2)],
        [c(1, 0, 2, 1), -c(0, 0, 2, 1), c(0, 0, 1, 1)],
    ];
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = adj[i][j] / det;
        }
    }
    Some(out)
}

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut factor = inv;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * factor;
        index /= base;
        factor *= inv;
    }
    value
}

const HALTON_BASES: [u64; 6] = [2, 3, 5, 7, 11, 13];

/// Halton sequence with a Cranley-Patterson rotation drawn from `seed`.
///
/// Each `(seed, stream)` pair yields an independent randomization of the
/// same low-discrepancy point set, which is what the replicate-based
/// standard errors rely on.
#[derive(Debug, Clone)]
pub struct ShiftedHalton<const D: usize> {
    shift: [f64; D],
    skip: u64,
}

impl<const D: usize> ShiftedHalton<D> {
    pub fn new(seed: u64, stream: u64) -> Self {
        assert!(D <= HALTON_BASES.len(), "Halton dimension too large");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut shift = [0.0; D];
        for s in shift.iter_mut() {
            *s = rng.random::<f64>();
        }
        // Skip the first few points; they cluster near the origin.
        Self { shift, skip: 20 }
    }

    pub fn point(&self, index: u64) -> [f64; D] {
        let mut p = [0.0; D];
        for (d, out) in p.iter_mut().enumerate() {
            let v = radical_inverse(index + self.skip, HALTON_BASES[d]) + self.shift[d];
            *out = v - v.floor();
        }
        p
    }
}

/// Mean and standard error of the mean.
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}
