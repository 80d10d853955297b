//! Enlarging the symmetral versus symmetrizing the enlargement.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measure::enlarge;
use crate::regions::GridRegion;
use crate::spaces::WarpedSpace;
use crate::symmetrize::{halfspace_grid, schwarz_grid, spherical_grid, Variant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub r: f64,
    /// Weighted volume of `sym(R)^r` outside a one-cell dilation of
    /// `sym(R^r)`.
    pub violation_volume: f64,
    pub violation_cells: usize,
    pub enlarged_symmetral_volume: f64,
    pub symmetrized_enlargement_volume: f64,
}

fn sym(space: &WarpedSpace, region: &GridRegion, variant: Variant) -> Result<GridRegion> {
    Ok(match variant {
        Variant::Schwarz => schwarz_grid(space, region)?.region,
        Variant::Halfspace => halfspace_grid(space, region)?.region,
        Variant::Spherical => spherical_grid(space, region)?.region,
    })
}

fn enlarge_or_empty(space: &WarpedSpace, region: &GridRegion, r: f64) -> Result<GridRegion> {
    if region.is_empty() || r == 0.0 {
        Ok(region.clone())
    } else {
        enlarge(space, region, r)
    }
}

/// Compares `sym(R)^r` with `sym(R^r)`; the first should lie inside the
/// second up to one cell.
pub fn containment_check(space: &WarpedSpace, region: &GridRegion, r: f64, variant: Variant) -> Result<ContainmentReport> {
    let m = region.scheme.measure(space);
    let sym_r = sym(space, region, variant)?;
    let first = enlarge_or_empty(space, &sym_r, r)?;
    let second = sym(space, &enlarge_or_empty(space, region, r)?, variant)?;
    let allowance = second.dilate();
    let violation_volume = first.difference_volume(&allowance, &m);
    let violation_cells = first.cells().iter().zip(allowance.cells()).filter(|&(&a, &b)| a && !b).count();
    Ok(ContainmentReport {
        r,
        violation_volume,
        violation_cells,
        enlarged_symmetral_volume: first.weighted_volume(&m),
        symmetrized_enlargement_volume: second.weighted_volume(&m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::RegionSpec;
    use crate::spaces::{FiberGeometry, GridScheme, ScalarFn};

    fn flat() -> WarpedSpace {
        WarpedSpace::product("flat", [-1.0, 1.0], FiberGeometry::line(ScalarFn::ONE, 1.0))
    }

    #[test]
    fn off_center_square() {
        let s = flat();
        let sch = GridScheme::new(&s, 200, 200).unwrap();
        let h = sch.h_base();
        let sq = RegionSpec::Rect { lo: [-0.3, 0.05], hi: [0.2, 0.45] }.to_grid(sch);
        let rep = containment_check(&s, &sq, 10.0 * h, Variant::Schwarz).unwrap();
        assert_eq!(rep.violation_volume, 0.0);
    }

    #[test]
    fn centered_and_zero_radius() {
        let s = flat();
        let sch = GridScheme::new(&s, 100, 100).unwrap();
        let disk = RegionSpec::Disk { center: [0.0, 0.0], radius: 0.4 }.to_grid(sch.clone());
        assert_eq!(containment_check(&s, &disk, 0.1, Variant::Schwarz).unwrap().violation_volume, 0.0);
        let off = RegionSpec::Disk { center: [0.0, 0.3], radius: 0.4 }.to_grid(sch.clone());
        assert_eq!(containment_check(&s, &off, 0.0, Variant::Schwarz).unwrap().violation_volume, 0.0);
        let e = GridRegion::empty(sch);
        assert_eq!(containment_check(&s, &e, 0.1, Variant::Schwarz).unwrap().violation_volume, 0.0);
    }
}
