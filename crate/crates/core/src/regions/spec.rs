//! Declarative region descriptions in `(b, t)` chart coordinates.

use serde::{Deserialize, Serialize};

use super::{GridRegion, ProfileRegion, SliceForm};
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::spaces::{FiberChart, GridScheme, ScalarFn, WarpedSpace};

/// A region given by a closed-form shape in chart coordinates `(b, t)`,
/// where `t` is the signed or radial fiber coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegionSpec {
    Empty,
    Disk { center: [f64; 2], radius: f64 },
    Ellipse { center: [f64; 2], semi: [f64; 2] },
    Rect { lo: [f64; 2], hi: [f64; 2] },
    /// Slices `[offset + slope·b − half_width, offset + slope·b + half_width]`
    /// for `b` in `base`.
    TiltedStrip { base: [f64; 2], slope: f64, offset: f64, half_width: f64 },
    /// Slices of half-width `radius(b)` about `center(b) + center_shift`.
    Band {
        base: [f64; 2],
        radius: ScalarFn,
        center: ScalarFn,
        #[serde(default)]
        center_shift: f64,
    },
    /// Slices `t ≤ cut(b)`.
    Below { base: [f64; 2], cut: ScalarFn },
    Annulus { center: [f64; 2], inner: f64, outer: f64 },
    Union { parts: Vec<RegionSpec> },
    Difference { outer: Box<RegionSpec>, inner: Box<RegionSpec> },
}

fn in_base(base: &[f64; 2], b: f64) -> bool {
    b >= base[0] && b <= base[1]
}

fn chord(half: f64, center: f64) -> Vec<[f64; 2]> {
    if half > 0.0 {
        vec![[center - half, center + half]]
    } else {
        Vec::new()
    }
}

fn merge(mut parts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    parts.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(parts.len());
    for p in parts {
        match out.last_mut() {
            Some(last) if p[0] <= last[1] => last[1] = last[1].max(p[1]),
            _ => out.push(p),
        }
    }
    out
}

fn subtract(outer: Vec<[f64; 2]>, inner: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for [mut a, b] in outer {
        for &[c, d] in inner {
            if d <= a || c >= b {
                continue;
            }
            if c > a {
                out.push([a, c]);
            }
            a = a.max(d);
        }
        if a < b {
            out.push([a, b]);
        }
    }
    out
}

impl RegionSpec {
    pub fn contains(&self, b: f64, t: f64) -> bool {
        match self {
            RegionSpec::Empty => false,
            RegionSpec::Disk { center, radius } => (b - center[0]).hypot(t - center[1]) < *radius,
            RegionSpec::Ellipse { center, semi } => {
                ((b - center[0]) / semi[0]).powi(2) + ((t - center[1]) / semi[1]).powi(2) < 1.0
            }
            RegionSpec::Rect { lo, hi } => b > lo[0] && b < hi[0] && t > lo[1] && t < hi[1],
            RegionSpec::TiltedStrip { base, slope, offset, half_width } => {
                in_base(base, b) && (t - offset - slope * b).abs() < *half_width
            }
            RegionSpec::Band { base, radius, center, center_shift } => {
                in_base(base, b) && (t - center.eval(b) - center_shift).abs() < radius.eval(b)
            }
            RegionSpec::Below { base, cut } => in_base(base, b) && t <= cut.eval(b),
            RegionSpec::Annulus { center, inner, outer } => {
                let d = (b - center[0]).hypot(t - center[1]);
                d >= *inner && d < *outer
            }
            RegionSpec::Union { parts } => parts.iter().any(|p| p.contains(b, t)),
            RegionSpec::Difference { outer, inner } => outer.contains(b, t) && !inner.contains(b, t),
        }
    }

    /// The slice over `b` as sorted disjoint intervals of the fiber
    /// coordinate, up to endpoints.
    pub fn slice_intervals(&self, b: f64) -> Vec<[f64; 2]> {
        let half_chord = |semi_b: f64, semi_t: f64, x: f64| {
            let q = 1.0 - (x / semi_b).powi(2);
            if q > 0.0 {
                semi_t * q.sqrt()
            } else {
                0.0
            }
        };
        match self {
            RegionSpec::Empty => Vec::new(),
            RegionSpec::Disk { center, radius } => chord(half_chord(*radius, *radius, b - center[0]), center[1]),
            RegionSpec::Ellipse { center, semi } => chord(half_chord(semi[0], semi[1], b - center[0]), center[1]),
            RegionSpec::Rect { lo, hi } => {
                if b > lo[0] && b < hi[0] && hi[1] > lo[1] {
                    vec![[lo[1], hi[1]]]
                } else {
                    Vec::new()
                }
            }
            RegionSpec::TiltedStrip { base, slope, offset, half_width } => {
                if in_base(base, b) {
                    chord(*half_width, offset + slope * b)
                } else {
                    Vec::new()
                }
            }
            RegionSpec::Band { base, radius, center, center_shift } => {
                if in_base(base, b) {
                    chord(radius.eval(b), center.eval(b) + center_shift)
                } else {
                    Vec::new()
                }
            }
            RegionSpec::Below { base, cut } => {
                if in_base(base, b) {
                    vec![[f64::NEG_INFINITY, cut.eval(b)]]
                } else {
                    Vec::new()
                }
            }
            RegionSpec::Annulus { center, inner, outer } => {
                let x = b - center[0];
                let o = chord(half_chord(*outer, *outer, x), center[1]);
                subtract(o, &chord(half_chord(*inner, *inner, x), center[1]))
            }
            RegionSpec::Union { parts } => merge(parts.iter().flat_map(|p| p.slice_intervals(b)).collect()),
            RegionSpec::Difference { outer, inner } => subtract(outer.slice_intervals(b), &inner.slice_intervals(b)),
        }
    }

    /// Smallest base interval outside which every slice is empty.
    pub fn base_support(&self) -> Option<[f64; 2]> {
        match self {
            RegionSpec::Empty => None,
            RegionSpec::Disk { center, radius } => Some([center[0] - radius, center[0] + radius]),
            RegionSpec::Ellipse { center, semi } => Some([center[0] - semi[0], center[0] + semi[0]]),
            RegionSpec::Rect { lo, hi } => Some([lo[0], hi[0]]),
            RegionSpec::TiltedStrip { base, .. } | RegionSpec::Band { base, .. } | RegionSpec::Below { base, .. } => {
                Some(*base)
            }
            RegionSpec::Annulus { center, outer, .. } => Some([center[0] - outer, center[0] + outer]),
            RegionSpec::Union { parts } => parts
                .iter()
                .filter_map(RegionSpec::base_support)
                .reduce(|a, b| [a[0].min(b[0]), a[1].max(b[1])]),
            RegionSpec::Difference { outer, .. } => outer.base_support(),
        }
    }

    /// Unscaled fiber mass `∫ Ψ` of the slice over `b`, with the intervals
    /// clipped to the fiber chart.
    pub fn slice_mass(&self, space: &WarpedSpace, b: f64) -> f64 {
        let (lo, hi, radial) = match space.fiber.chart() {
            FiberChart::Signed { lo, hi, .. } => (lo, hi, false),
            FiberChart::Radial { hi } => (0.0, hi, true),
        };
        let masses: Vec<f64> = self
            .slice_intervals(b)
            .into_iter()
            .filter_map(|[a, c]| {
                let (a, c) = (a.max(lo), c.min(hi));
                (c > a).then(|| if radial { space.fiber.shell_mass(a, c) } else { space.fiber.interval_mass(a, c) })
            })
            .collect();
        pairwise_sum(&masses)
    }

    /// Cell-center rasterization.
    pub fn to_grid(&self, scheme: GridScheme) -> GridRegion {
        GridRegion::from_predicate(scheme, |b, t| self.contains(b, t))
    }

    /// Profile description with `samples` base samples, for the shapes whose
    /// slices are single intervals or rays; `None` otherwise.
    pub fn to_profile(&self, samples: usize) -> Option<Result<ProfileRegion>> {
        let half_chord = |semi_b: f64, semi_t: f64, x: f64| semi_t * (1.0 - (x / semi_b).powi(2)).max(0.0).sqrt();
        Some(match self {
            RegionSpec::Disk { center, radius } => {
                let (c0, c1, r) = (center[0], center[1], *radius);
                ProfileRegion::from_fn(c0 - r, c0 + r, samples, |b| (half_chord(r, r, b - c0), c1))
            }
            RegionSpec::Ellipse { center, semi } => {
                let (c0, c1) = (center[0], center[1]);
                ProfileRegion::from_fn(c0 - semi[0], c0 + semi[0], samples, |b| {
                    (half_chord(semi[0], semi[1], b - c0), c1)
                })
            }
            RegionSpec::Rect { lo, hi } => {
                ProfileRegion::from_fn(lo[0], hi[0], samples, |_| (0.5 * (hi[1] - lo[1]), 0.5 * (hi[1] + lo[1])))
            }
            RegionSpec::TiltedStrip { base, slope, offset, half_width } => {
                ProfileRegion::from_fn(base[0], base[1], samples, |b| (*half_width, offset + slope * b))
            }
            RegionSpec::Band { base, radius, center, center_shift } => {
                ProfileRegion::from_fn(base[0], base[1], samples, |b| (radius.eval(b).max(0.0), center.eval(b) + center_shift))
            }
            RegionSpec::Below { base, cut } => ProfileRegion::rays_from_fn(base[0], base[1], samples, |b| cut.eval(b)),
            RegionSpec::Empty => Err(Error::InvalidRegion("the empty region has no profile samples".into())),
            RegionSpec::Annulus { .. } | RegionSpec::Union { .. } | RegionSpec::Difference { .. } => return None,
        })
    }

    /// Slice form the profile of this shape would use.
    pub fn slice_form(&self) -> SliceForm {
        match self {
            RegionSpec::Below { .. } => SliceForm::LowerRay,
            _ => SliceForm::Ball,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::FiberGeometry;
    use approx::assert_relative_eq;

    #[test]
    fn disk_profile_and_grid_agree_on_volume() {
        let s = WarpedSpace::product("flat", [-1.0, 1.0], FiberGeometry::line(ScalarFn::ONE, 1.0));
        let spec = RegionSpec::Disk { center: [0.1, -0.2], radius: 0.5 };
        let p = spec.to_profile(401).unwrap().unwrap();
        let g = spec.to_grid(GridScheme::new(&s, 200, 200).unwrap());
        let pv = p.weighted_volume(&s);
        assert_relative_eq!(pv, std::f64::consts::PI * 0.25, max_relative = 2e-3);
        assert_relative_eq!(g.weighted_volume(&g.scheme.measure(&s)), pv, max_relative = 5e-3);
        assert!(RegionSpec::Annulus { center: [0.0; 2], inner: 0.1, outer: 0.2 }.to_profile(10).is_none());
    }

    #[test]
    fn spec_round_trips_through_toml_shaped_json() {
        let spec = RegionSpec::Difference {
            outer: Box::new(RegionSpec::Rect { lo: [0.0, 0.0], hi: [1.0, 1.0] }),
            inner: Box::new(RegionSpec::Disk { center: [0.5, 0.5], radius: 0.2 }),
        };
        let v = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<RegionSpec>(&v).unwrap(), spec);
        assert!(spec.contains(0.1, 0.1) && !spec.contains(0.5, 0.5));
    }

    #[test]
    fn slice_intervals_of_composites() {
        let s = WarpedSpace::product("flat", [-1.0, 1.0], FiberGeometry::line(ScalarFn::ONE, 1.0));
        let ann = RegionSpec::Annulus { center: [0.0, 0.0], inner: 0.3, outer: 0.5 };
        assert_eq!(ann.slice_intervals(0.0), vec![[-0.5, -0.3], [0.3, 0.5]]);
        assert_relative_eq!(ann.slice_mass(&s, 0.0), 0.4, epsilon = 1e-12);
        let u = RegionSpec::Union {
            parts: vec![
                RegionSpec::Rect { lo: [-1.0, 0.0], hi: [1.0, 0.4] },
                RegionSpec::Rect { lo: [-1.0, 0.2], hi: [1.0, 0.6] },
                RegionSpec::Rect { lo: [-1.0, 0.8], hi: [1.0, 2.0] },
            ],
        };
        assert_eq!(u.slice_intervals(0.0), vec![[0.0, 0.6], [0.8, 2.0]]);
        assert_relative_eq!(u.slice_mass(&s, 0.0), 0.8, epsilon = 1e-12);
        assert!(RegionSpec::Empty.slice_intervals(0.0).is_empty());
    }
}
