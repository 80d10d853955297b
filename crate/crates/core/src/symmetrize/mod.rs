//! Schwarz, Steiner, half-space and spherical symmetrization.
//!
//! Steiner symmetrization is the line-fiber case of Schwarz. Every operator
//! returns the rearranged region together with a volume audit.

mod bundle;

pub use bundle::{bundle_symmetrize, hopf_reduced_space, BundleSymmetrized, MIN_CELL_PROBES};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::bisect_increasing;
use crate::par;
use crate::regions::{slice_mass, GridRegion, ProfileRegion, Region, SliceForm};
use crate::spaces::{CellMeasure, FiberChart, FiberKind, WarpedSpace};

/// Stop filling once the accumulated mass is this close (relatively).
const FILL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Schwarz,
    Halfspace,
    Spherical,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Schwarz => "schwarz",
            Variant::Halfspace => "halfspace",
            Variant::Spherical => "spherical",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "schwarz" | "steiner" => Ok(Variant::Schwarz),
            "halfspace" => Ok(Variant::Halfspace),
            "spherical" => Ok(Variant::Spherical),
            o => Err(Error::Unsupported(format!("unknown symmetrization variant `{o}`"))),
        }
    }
}

/// Volume bookkeeping for one symmetrization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeAudit {
    pub variant: Variant,
    pub representation: String,
    pub input_volume: f64,
    pub output_volume: f64,
    pub relative_change: f64,
    /// Largest per-slice weighted volume error.
    pub max_slice_error: f64,
    /// Slices whose error exceeds their allowance (one fiber-cell mass for
    /// grids, 1e-9 relative for profiles). Expected 0.
    pub slices_over_allowance: usize,
    pub slices: usize,
}

impl VolumeAudit {
    fn new(variant: Variant, representation: &str, input: f64, output: f64, slice_errors: &[(f64, f64)]) -> Self {
        let relative_change = if input == 0.0 {
            output.abs()
        } else {
            (output - input).abs() / input.abs()
        };
        Self {
            variant,
            representation: representation.into(),
            input_volume: input,
            output_volume: output,
            relative_change,
            max_slice_error: slice_errors.iter().map(|e| e.0).fold(0.0, f64::max),
            slices_over_allowance: slice_errors.iter().filter(|(e, allow)| e > allow).count(),
            slices: slice_errors.len(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Symmetrized<R> {
    pub region: R,
    pub audit: VolumeAudit,
}

/// Applies `variant` to either representation.
pub fn symmetrize(space: &WarpedSpace, region: &Region, variant: Variant) -> Result<Symmetrized<Region>> {
    match region {
        Region::Grid(g) => {
            let s = match variant {
                Variant::Schwarz => schwarz_grid(space, g)?,
                Variant::Halfspace => halfspace_grid(space, g)?,
                Variant::Spherical => spherical_grid(space, g)?,
            };
            Ok(Symmetrized { region: Region::Grid(s.region), audit: s.audit })
        }
        Region::Profile(p) => {
            let s = match variant {
                Variant::Schwarz => schwarz_profile(space, p)?,
                Variant::Halfspace => halfspace_profile(space, p)?,
                Variant::Spherical => spherical_profile(space, p)?,
            };
            Ok(Symmetrized { region: Region::Profile(s.region), audit: s.audit })
        }
    }
}

pub fn schwarz_symmetrize(space: &WarpedSpace, region: &Region) -> Result<Symmetrized<Region>> {
    symmetrize(space, region, Variant::Schwarz)
}

pub fn halfspace_symmetrize(space: &WarpedSpace, region: &Region) -> Result<Symmetrized<Region>> {
    symmetrize(space, region, Variant::Halfspace)
}

pub fn spherical_symmetrize(space: &WarpedSpace, region: &Region) -> Result<Symmetrized<Region>> {
    symmetrize(space, region, Variant::Spherical)
}

/// Fills each row of `region` along `order` until its fiber mass is
/// matched; the last cell is taken whole.
fn greedy_fill(
    space: &WarpedSpace,
    region: &GridRegion,
    measure: &CellMeasure,
    order: &[usize],
    variant: Variant,
    skip_singular: bool,
) -> Result<Symmetrized<GridRegion>> {
    let s = &region.scheme;
    let nt = s.fiber_cells;
    let rows: Vec<Result<(Vec<bool>, (f64, f64))>> = par::map_indexed(s.base_cells, |i| {
        let mut row = vec![false; nt];
        let b = s.base_center(i);
        let target = region.slice_mass(measure, i);
        if target == 0.0 || (skip_singular && space.is_singular(b)) {
            return Ok((row, (0.0, 0.0)));
        }
        let mut acc = 0.0;
        let mut biggest = 0.0f64;
        for &j in order {
            if acc >= target - FILL_TOL * target {
                break;
            }
            row[j] = true;
            acc += measure.fiber_mass[j];
            biggest = biggest.max(measure.fiber_mass[j]);
        }
        if acc < target - FILL_TOL * target {
            return Err(Error::ExceedsCapacity { volume: target, capacity: acc });
        }
        let scale = if space.is_singular(b) { 0.0 } else { space.fiber_scale(b) };
        Ok((row, ((acc - target).abs() * scale, biggest * scale)))
    });
    let mut cells = Vec::with_capacity(s.len());
    let mut errors = Vec::with_capacity(s.base_cells);
    for r in rows {
        let (row, err) = r?;
        cells.extend(row);
        errors.push(err);
    }
    let out = GridRegion::from_cells(s.clone(), cells)?;
    let audit = VolumeAudit::new(
        variant,
        "grid",
        region.weighted_volume(measure),
        out.weighted_volume(measure),
        &errors,
    );
    Ok(Symmetrized { region: out, audit })
}

/// Schwarz (Steiner on line fibers) symmetrization of a grid region.
pub fn schwarz_grid(space: &WarpedSpace, region: &GridRegion) -> Result<Symmetrized<GridRegion>> {
    let measure = region.scheme.measure(space);
    schwarz_grid_with(space, region, &measure)
}

/// As [`schwarz_grid`], reusing a precomputed cell measure.
pub fn schwarz_grid_with(space: &WarpedSpace, region: &GridRegion, measure: &CellMeasure) -> Result<Symmetrized<GridRegion>> {
    let order = region.scheme.fill_order();
    greedy_fill(space, region, measure, &order, Variant::Schwarz, false)
}

pub fn spherical_grid(space: &WarpedSpace, region: &GridRegion) -> Result<Symmetrized<GridRegion>> {
    check_spherical(space)?;
    let measure = region.scheme.measure(space);
    let order = region.scheme.fill_order();
    greedy_fill(space, region, &measure, &order, Variant::Spherical, true)
}

pub fn halfspace_grid(space: &WarpedSpace, region: &GridRegion) -> Result<Symmetrized<GridRegion>> {
    check_halfspace(space)?;
    let measure = region.scheme.measure(space);
    let order: Vec<usize> = (0..region.scheme.fiber_cells).collect();
    greedy_fill(space, region, &measure, &order, Variant::Halfspace, false)
}

fn check_spherical(space: &WarpedSpace) -> Result<()> {
    if !matches!(space.fiber.kind, FiberKind::SphereCap { .. }) {
        return Err(Error::Precondition("spherical symmetrization needs a sphere fiber".into()));
    }
    if space.singular_base.is_empty() {
        return Err(Error::Precondition("spherical symmetrization needs a singular base point where g = 0".into()));
    }
    Ok(())
}

/// Fraction of the truncated fiber mass in the outer half of the left
/// tail above which the tail is treated as non-integrable.
const TAIL_RATIO: f64 = 1e-6;

/// Rays `(-∞, c]` need a line-like fiber whose density has an integrable
/// left tail. On a truncated line `[-T, T]` the tail counts as integrable
/// when `∫_{-T}^{-T/2} Ψ` is a negligible share of the whole fiber mass.
pub fn check_halfspace(space: &WarpedSpace) -> Result<()> {
    match space.fiber.kind {
        FiberKind::HalfLine => Ok(()),
        FiberKind::Line => {
            let t = space.fiber.max_radius();
            let tail = space.fiber.interval_mass(-t, -0.5 * t);
            let total = space.fiber.ball_mass(t);
            if tail > TAIL_RATIO * total {
                Err(Error::NonIntegrableTail(format!(
                    "∫ Ψ over [-{t}, -{}] is {:.3e} of the fiber mass",
                    0.5 * t,
                    tail / total
                )))
            } else {
                Ok(())
            }
        }
        _ => Err(Error::Precondition("half-space symmetrization needs a line or half-line fiber".into())),
    }
}

/// Each slice replaced by the centered ball of equal fiber mass. Slices
/// that are already centered balls are kept as they are.
pub fn schwarz_profile(space: &WarpedSpace, region: &ProfileRegion) -> Result<Symmetrized<ProfileRegion>> {
    profile_rearrange(space, region, Variant::Schwarz)
}

pub fn spherical_profile(space: &WarpedSpace, region: &ProfileRegion) -> Result<Symmetrized<ProfileRegion>> {
    check_spherical(space)?;
    profile_rearrange(space, region, Variant::Spherical)
}

pub fn halfspace_profile(space: &WarpedSpace, region: &ProfileRegion) -> Result<Symmetrized<ProfileRegion>> {
    check_halfspace(space)?;
    profile_rearrange(space, region, Variant::Halfspace)
}

/// Cut `c` with `∫_{lo}^{c} Ψ = mass` on a line-like fiber.
pub fn ray_cut_for_mass(space: &WarpedSpace, mass: f64) -> Result<f64> {
    let FiberChart::Signed { lo, hi, period: None } = space.fiber.chart() else {
        return Err(Error::Precondition("ray slices need a line or half-line fiber".into()));
    };
    if mass <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let total = slice_mass(space, SliceForm::LowerRay, 0.0, hi);
    if mass > total * (1.0 + 1e-10) {
        return Err(Error::ExceedsCapacity { volume: mass, capacity: total });
    }
    if mass >= total {
        return Ok(hi);
    }
    Ok(bisect_increasing(
        |c| slice_mass(space, SliceForm::LowerRay, 0.0, c),
        mass,
        lo,
        hi,
        1e-15 * hi.abs().max(1.0),
    ))
}

fn profile_rearrange(space: &WarpedSpace, region: &ProfileRegion, variant: Variant) -> Result<Symmetrized<ProfileRegion>> {
    region.validate(space)?;
    let n = region.len();
    let slices: Vec<Result<(f64, f64, f64)>> = par::map_indexed(n, |k| {
        let (r, c) = (region.radius[k], region.center[k]);
        let mass = region.slice_mass(space, k);
        match variant {
            Variant::Halfspace => {
                if region.form == SliceForm::LowerRay {
                    return Ok((0.0, c, mass));
                }
                let cut = ray_cut_for_mass(space, mass)?;
                Ok((0.0, cut, slice_mass(space, SliceForm::LowerRay, 0.0, cut)))
            }
            Variant::Schwarz | Variant::Spherical => {
                if region.form == SliceForm::Ball && c == 0.0 {
                    return Ok((r, 0.0, mass));
                }
                let rad = space.radius_for_mass(mass)?;
                Ok((rad, 0.0, slice_mass(space, SliceForm::Ball, rad, 0.0)))
            }
        }
    });
    let mut radius = Vec::with_capacity(n);
    let mut center = Vec::with_capacity(n);
    let mut errors = Vec::with_capacity(n);
    for (k, s) in slices.into_iter().enumerate() {
        let (r, c, new_mass) = s?;
        radius.push(r);
        center.push(c);
        let b = region.base[k];
        let scale = if space.is_singular(b) { 0.0 } else { space.fiber_scale(b) };
        let old = region.slice_volume_at(space, k);
        errors.push(((new_mass * scale - old).abs(), 1e-9 * old.abs().max(f64::MIN_POSITIVE)));
    }
    let form = if variant == Variant::Halfspace { SliceForm::LowerRay } else { SliceForm::Ball };
    let out = ProfileRegion::new(form, region.base.clone(), radius, center)?;
    let audit = VolumeAudit::new(
        variant,
        "profile",
        region.weighted_volume(space),
        out.weighted_volume(space),
        &errors,
    );
    Ok(Symmetrized { region: out, audit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{FiberGeometry, GridScheme, ScalarFn};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn flat() -> WarpedSpace {
        WarpedSpace::product("flat", [0.0, 1.0], FiberGeometry::line(ScalarFn::ONE, 4.0))
    }

    #[test]
    fn off_center_interval_is_translated() {
        let s = flat();
        let p = ProfileRegion::from_fn(0.0, 1.0, 5, |_| (0.7, 1.3)).unwrap();
        let out = schwarz_profile(&s, &p).unwrap();
        for k in 0..5 {
            assert_relative_eq!(out.region.radius[k], 0.7, max_relative = 1e-13);
            assert_eq!(out.region.center[k], 0.0);
        }
        assert!(out.audit.relative_change < 1e-12);
    }

    #[test]
    fn two_intervals_become_one() {
        let s = flat();
        let sch = GridScheme::with_spacing(&s, 0.1, 0.01).unwrap();
        let r = GridRegion::from_predicate(sch, |_, t| (0.0..1.0).contains(&t) || (2.0..3.0).contains(&t));
        let out = schwarz_grid(&s, &r).unwrap();
        let row = out.region.row(3);
        let sch = &out.region.scheme;
        let set: Vec<f64> = (0..sch.fiber_cells).filter(|&j| row[j]).map(|j| sch.fiber_center(j)).collect();
        assert_relative_eq!(set[0], -0.995, epsilon = 1e-9);
        assert_relative_eq!(*set.last().unwrap(), 0.995, epsilon = 1e-9);
        assert_eq!(out.audit.slices_over_allowance, 0);
    }

    #[test]
    fn grid_schwarz_is_idempotent() {
        let s = WarpedSpace::product("r", [0.0, 1.0], FiberGeometry::line(ScalarFn::ExpQuad { rate: 1.0 }, 2.0));
        let sch = GridScheme::new(&s, 20, 80).unwrap();
        let r = GridRegion::from_predicate(sch, |b, t| (t - b + 0.3).abs() < 0.4 + 0.2 * b);
        let once = schwarz_grid(&s, &r).unwrap().region;
        let twice = schwarz_grid(&s, &once).unwrap().region;
        assert_eq!(once, twice);
    }

    #[test]
    fn exponential_rays_cut_at_log_volume() {
        let s = WarpedSpace::product("e", [0.0, 1.0], FiberGeometry::line(ScalarFn::Exp { rate: 1.0 }, 40.0));
        let p = ProfileRegion::from_fn(0.0, 1.0, 3, |_| (0.5, 1.0)).unwrap();
        let v = p.slice_volume_at(&s, 0);
        let out = halfspace_profile(&s, &p).unwrap().region;
        assert_eq!(out.form, SliceForm::LowerRay);
        assert_relative_eq!(out.center[0], v.ln(), max_relative = 1e-10);
        let again = halfspace_profile(&s, &out).unwrap().region;
        assert_eq!(again, out);
        let empty = ProfileRegion::from_fn(0.0, 1.0, 3, |_| (0.0, 0.0)).unwrap();
        assert_eq!(halfspace_profile(&s, &empty).unwrap().region.center[1], f64::NEG_INFINITY);
    }

    #[test]
    fn flat_density_has_no_halfspace_rays() {
        let p = ProfileRegion::from_fn(0.0, 1.0, 3, |_| (0.5, 1.0)).unwrap();
        assert!(matches!(halfspace_profile(&flat(), &p), Err(Error::NonIntegrableTail(_))));
    }

    fn polar_plane() -> WarpedSpace {
        WarpedSpace::new(
            "polar",
            [0.0, 2.5],
            ScalarFn::identity(),
            ScalarFn::ONE,
            FiberGeometry::new(FiberKind::SphereCap { dim: 1, radius: 1.0 }, ScalarFn::ONE, None),
        )
        .with_singular(vec![0.0])
    }

    #[test]
    fn half_annulus_becomes_centered_sector() {
        let s = polar_plane();
        let p = ProfileRegion::from_fn(1.0, 2.0, 11, |_| (PI / 2.0, PI / 2.0)).unwrap();
        let out = spherical_profile(&s, &p).unwrap();
        for k in 0..11 {
            assert_relative_eq!(out.region.radius[k], PI / 2.0, max_relative = 1e-12);
        }
        let q = ProfileRegion::from_fn(1.0, 2.0, 11, |_| (PI / 4.0, 1.0)).unwrap();
        let vol = q.weighted_volume(&s);
        assert_relative_eq!(vol, 3.0 * PI / 4.0, max_relative = 1e-12);
        assert_relative_eq!(spherical_profile(&s, &q).unwrap().audit.output_volume, vol, max_relative = 1e-10);
    }

    #[test]
    fn full_annulus_is_unchanged_on_grid() {
        let s = polar_plane();
        let sch = GridScheme::new(&s, 50, 64).unwrap();
        let r = GridRegion::from_predicate(sch, |b, _| (1.0..2.0).contains(&b));
        let out = spherical_grid(&s, &r).unwrap().region;
        assert_eq!(out, r);
    }

    #[test]
    fn spherical_needs_a_sphere_fiber() {
        let p = ProfileRegion::from_fn(0.0, 1.0, 3, |_| (0.5, 0.0)).unwrap();
        assert!(spherical_profile(&flat(), &p).is_err());
    }
}
