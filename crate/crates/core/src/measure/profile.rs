//! Boundary measure of profile regions from their sheets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::regions::{ProfileRegion, SliceForm};
use crate::spaces::{FiberChart, WarpedSpace};

/// Slopes beyond this are treated as a discontinuity.
pub(crate) const JUMP_SLOPE: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePerimeter {
    /// Measure of the sheets over the sampled base range.
    pub perimeter: f64,
    /// Faces closing the region at sampled ends interior to the base.
    pub end_caps: f64,
    pub total: f64,
    /// Richardson estimate of the polyline error, from the same sum over
    /// every other sample.
    pub discretization: Option<f64>,
}

/// One boundary sheet of a slice: its fiber coordinate and whether the
/// slice lies below it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Sheet {
    pub y: f64,
    pub sign: f64,
}

/// Kind of slice for sheet bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum SliceState {
    Empty,
    Full,
    Partial,
}

pub(crate) fn slice_state(space: &WarpedSpace, form: SliceForm, r: f64, c: f64) -> SliceState {
    match form {
        SliceForm::LowerRay => {
            if c == f64::NEG_INFINITY {
                SliceState::Empty
            } else {
                SliceState::Partial
            }
        }
        SliceForm::Ball => {
            if r <= 0.0 {
                return SliceState::Empty;
            }
            let full = match space.fiber.chart() {
                FiberChart::Signed { period: Some(l), .. } => 2.0 * r >= l,
                FiberChart::Radial { .. } if space.fiber.is_compact() => r >= space.fiber.max_radius(),
                _ => false,
            };
            if full {
                SliceState::Full
            } else {
                SliceState::Partial
            }
        }
    }
}

fn two_sided(space: &WarpedSpace, form: SliceForm) -> bool {
    form == SliceForm::Ball && matches!(space.fiber.chart(), FiberChart::Signed { lo, .. } if lo < 0.0)
}

/// Sheets of slice `(r, c)`: upper then lower for two-sided balls.
pub(crate) fn sheets(space: &WarpedSpace, form: SliceForm, r: f64, c: f64) -> Vec<Sheet> {
    match form {
        SliceForm::LowerRay => vec![Sheet { y: c, sign: 1.0 }],
        SliceForm::Ball if two_sided(space, form) => {
            let r = match space.fiber.period() {
                Some(l) => r.min(0.5 * l),
                None => r,
            };
            vec![Sheet { y: c + r, sign: 1.0 }, Sheet { y: c - r, sign: -1.0 }]
        }
        SliceForm::Ball => vec![Sheet { y: r, sign: 1.0 }],
    }
}

/// Centers made continuous along the base on periodic fibers.
pub(crate) fn unwrapped_centers(space: &WarpedSpace, profile: &ProfileRegion) -> Vec<f64> {
    let mut out = profile.center.clone();
    if space.fiber.period().is_some() {
        for k in 1..out.len() {
            out[k] = out[k - 1] + space.fiber.delta(profile.center[k - 1], profile.center[k]);
        }
    }
    out
}

/// Density of the boundary measure per unit sheet length at `(b, y)`.
pub(crate) fn sheet_weight(space: &WarpedSpace, b: f64, y: f64) -> f64 {
    let n = space.n() as i32;
    let sigma = match space.fiber.chart() {
        FiberChart::Radial { .. } => space.fiber.sphere_area(y),
        FiberChart::Signed { .. } => 1.0,
    };
    space.phi(b) * space.g(b).powi(n - 1) * space.psi(y) * sigma
}

fn polyline(space: &WarpedSpace, profile: &ProfileRegion, centers: &[f64], idx: &[usize]) -> Result<f64> {
    let form = profile.form;
    let mut parts = Vec::new();
    for w in idx.windows(2) {
        let (k0, k1) = (w[0], w[1]);
        let s0 = slice_state(space, form, profile.radius[k0], profile.center[k0]);
        let s1 = slice_state(space, form, profile.radius[k1], profile.center[k1]);
        if (s0 == SliceState::Empty && s1 == SliceState::Empty) || (s0 == SliceState::Full && s1 == SliceState::Full) {
            continue;
        }
        if form == SliceForm::LowerRay && (s0 == SliceState::Empty || s1 == SliceState::Empty) {
            return Err(Error::Jump { index: k0 });
        }
        let (b0, b1) = (profile.base[k0], profile.base[k1]);
        let db = b1 - b0;
        let bm = 0.5 * (b0 + b1);
        let g = space.g(bm);
        let lo = sheets(space, form, profile.radius[k0], centers[k0]);
        let hi = sheets(space, form, profile.radius[k1], centers[k1]);
        for (a, c) in lo.iter().zip(&hi) {
            let dy = c.y - a.y;
            let v = g * dy / db;
            if !v.is_finite() || v.abs() > JUMP_SLOPE {
                return Err(Error::Jump { index: k0 });
            }
            let ym = 0.5 * (a.y + c.y);
            parts.push(sheet_weight(space, bm, ym) * (db * db + g * g * dy * dy).sqrt());
        }
    }
    Ok(pairwise_sum(&parts))
}

/// Weighted perimeter of a profile region. Sheets are joined by straight
/// segments in `(b, t)`, each weighted at its midpoint.
pub fn profile_perimeter(space: &WarpedSpace, profile: &ProfileRegion) -> Result<ProfilePerimeter> {
    profile.validate(space)?;
    let centers = unwrapped_centers(space, profile);
    let n = profile.len();
    let all: Vec<usize> = (0..n).collect();
    let perimeter = polyline(space, profile, &centers, &all)?;
    let discretization = if n >= 5 && n % 2 == 1 {
        let half: Vec<usize> = (0..n).step_by(2).collect();
        polyline(space, profile, &centers, &half).ok().map(|p| (perimeter - p).abs() / 3.0)
    } else {
        None
    };
    let [lo, hi] = space.base;
    let tol = 1e-9 * (hi - lo).abs().max(1.0);
    let mut end_caps = 0.0;
    if profile.base[0] > lo + tol {
        end_caps += space.phi(profile.base[0]) * profile.slice_volume_at(space, 0);
    }
    if profile.base[n - 1] < hi - tol {
        end_caps += space.phi(profile.base[n - 1]) * profile.slice_volume_at(space, n - 1);
    }
    Ok(ProfilePerimeter { perimeter, end_caps, total: perimeter + end_caps, discretization })
}
