//! Grid and profile regions, slices and weighted volumes.

mod grid;
mod io;
mod profile;
mod spec;

pub use grid::GridRegion;
pub(crate) use grid::neighbour_fiber;
pub use spec::RegionSpec;
pub use profile::{rasterize, slice_mass, ProfileRegion, Rasterized, SliceForm, SliceVolumeCurve};

use crate::error::Result;
use crate::spaces::WarpedSpace;

/// Either region representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Grid(GridRegion),
    Profile(ProfileRegion),
}

/// Weighted volume of the slice over base point `b`.
pub fn slice_volume(space: &WarpedSpace, region: &Region, b: f64) -> Result<f64> {
    match region {
        Region::Grid(g) => g.slice_volume(space, &g.scheme.measure(space), b),
        Region::Profile(p) => p.slice_volume(space, b),
    }
}

/// `∫ Φ(b)·Vol_b db`: exact cell sums for grids, trapezoid for profiles.
pub fn weighted_volume(space: &WarpedSpace, region: &Region) -> f64 {
    match region {
        Region::Grid(g) => g.weighted_volume(&g.scheme.measure(space)),
        Region::Profile(p) => p.weighted_volume(space),
    }
}

/// Slice volumes along the base with matching quadrature weights.
pub fn slice_volume_curve(space: &WarpedSpace, region: &Region) -> SliceVolumeCurve {
    match region {
        Region::Grid(g) => {
            let m = g.scheme.measure(space);
            let s = &g.scheme;
            let base: Vec<f64> = (0..s.base_cells).map(|i| s.base_center(i)).collect();
            let volume = (0..s.base_cells)
                .map(|i| {
                    let b = base[i];
                    if space.is_singular(b) {
                        0.0
                    } else {
                        space.fiber_scale(b) * g.slice_mass(&m, i)
                    }
                })
                .collect();
            SliceVolumeCurve { base, volume, weight: vec![s.h_base(); s.base_cells] }
        }
        Region::Profile(p) => p.slice_volume_curve(space),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{FiberGeometry, GridScheme, ScalarFn};
    use approx::assert_relative_eq;

    #[test]
    fn grid_curve_integrates_to_volume() {
        let s = WarpedSpace::new(
            "w",
            [0.0, 1.0],
            ScalarFn::Power { coef: 1.0, exponent: 1.0 },
            ScalarFn::Cosh { rate: 1.0 },
            FiberGeometry::line(ScalarFn::ExpQuad { rate: -1.0 }, 2.0),
        )
        .with_singular(vec![0.0]);
        let sch = GridScheme::new(&s, 40, 60).unwrap();
        let r = Region::Grid(GridRegion::from_predicate(sch, |b, t| t < b));
        let curve = slice_volume_curve(&s, &r);
        assert_relative_eq!(curve.integrate(&s), weighted_volume(&s, &r), max_relative = 1e-12);
    }
}
