use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::par;
use crate::spaces::{CellMeasure, GridScheme, WarpedSpace};

/// Indicator of a region over a base × fiber cell grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRegion {
    pub scheme: GridScheme,
    cells: Vec<bool>,
}

impl GridRegion {
    pub fn empty(scheme: GridScheme) -> Self {
        let n = scheme.len();
        Self { scheme, cells: vec![false; n] }
    }

    pub fn full(scheme: GridScheme) -> Self {
        let n = scheme.len();
        Self { scheme, cells: vec![true; n] }
    }

    pub fn from_cells(scheme: GridScheme, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != scheme.len() {
            return Err(Error::InvalidRegion(format!(
                "indicator has {} cells, scheme expects {}",
                cells.len(),
                scheme.len()
            )));
        }
        Ok(Self { scheme, cells })
    }

    /// Cells whose centers `(b, t)` satisfy `inside`.
    pub fn from_predicate<F>(scheme: GridScheme, inside: F) -> Self
    where
        F: Fn(f64, f64) -> bool + Sync + Send,
    {
        let nt = scheme.fiber_cells;
        let mut cells = vec![false; scheme.len()];
        par::for_each_chunk_mut(&mut cells, nt, |row, start| {
            let i = start / nt;
            let b = scheme.base_center(i);
            for (j, c) in row.iter_mut().enumerate() {
                *c = inside(b, scheme.fiber_center(j));
            }
        });
        Self { scheme, cells }
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[self.scheme.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let k = self.scheme.index(i, j);
        self.cells[k] = value;
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [bool] {
        &mut self.cells
    }

    pub fn row(&self, i: usize) -> &[bool] {
        let nt = self.scheme.fiber_cells;
        &self.cells[i * nt..(i + 1) * nt]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    pub fn is_subset_of(&self, other: &GridRegion) -> bool {
        self.cells.iter().zip(&other.cells).all(|(&a, &b)| !a || b)
    }

    /// Unscaled fiber mass `Σ_j ∫_cell Ψ` of the slice in base cell `i`.
    pub fn slice_mass(&self, measure: &CellMeasure, i: usize) -> f64 {
        let masses: Vec<f64> = self
            .row(i)
            .iter()
            .zip(&measure.fiber_mass)
            .map(|(&c, &m)| if c { m } else { 0.0 })
            .collect();
        pairwise_sum(&masses)
    }

    /// Weighted slice volume over base point `b` (must lie in the base range).
    pub fn slice_volume(&self, space: &WarpedSpace, measure: &CellMeasure, b: f64) -> Result<f64> {
        let i = self.scheme.base_cell_of(b).ok_or(Error::OutOfRange {
            what: "base point",
            value: b,
            lo: self.scheme.base_lo,
            hi: self.scheme.base_hi,
        })?;
        let bc = self.scheme.base_center(i);
        if space.is_singular(bc) {
            return Ok(0.0);
        }
        Ok(space.fiber_scale(bc) * self.slice_mass(measure, i))
    }

    /// `Σ_cells Φ(b)·g(b)^n·h_b·∫_cell Ψ`, summed in a fixed order.
    pub fn weighted_volume(&self, measure: &CellMeasure) -> f64 {
        let rows = par::map_indexed(self.scheme.base_cells, |i| measure.base_weight[i] * self.slice_mass(measure, i));
        pairwise_sum(&rows)
    }

    /// Weighted volume of the cells set here but not in `other`.
    pub fn difference_volume(&self, other: &GridRegion, measure: &CellMeasure) -> f64 {
        let nt = self.scheme.fiber_cells;
        let rows = par::map_indexed(self.scheme.base_cells, |i| {
            let masses: Vec<f64> = (0..nt)
                .filter(|&j| self.get(i, j) && !other.get(i, j))
                .map(|j| measure.fiber_mass[j])
                .collect();
            measure.base_weight[i] * pairwise_sum(&masses)
        });
        pairwise_sum(&rows)
    }

    /// One-cell dilation with the 8-neighbour stencil.
    pub fn dilate(&self) -> GridRegion {
        let s = &self.scheme;
        let (nb, nt) = (s.base_cells, s.fiber_cells);
        let mut out = self.clone();
        par::for_each_chunk_mut(&mut out.cells, nt, |row, start| {
            let i = start / nt;
            for (j, c) in row.iter_mut().enumerate() {
                if *c {
                    continue;
                }
                'search: for di in -1isize..=1 {
                    let ii = i as isize + di;
                    if ii < 0 || ii >= nb as isize {
                        continue;
                    }
                    for dj in -1isize..=1 {
                        let Some(jj) = neighbour_fiber(s, j, dj) else { continue };
                        if self.get(ii as usize, jj) {
                            *c = true;
                            break 'search;
                        }
                    }
                }
            }
        });
        out
    }

    /// Bounding box `(b_lo, b_hi, t_lo, t_hi)` of the set cells, by cell edges.
    pub fn bounding_box(&self) -> Option<(f64, f64, f64, f64)> {
        let s = &self.scheme;
        let (mut i0, mut i1, mut j0, mut j1) = (usize::MAX, 0, usize::MAX, 0);
        for i in 0..s.base_cells {
            for j in 0..s.fiber_cells {
                if self.get(i, j) {
                    i0 = i0.min(i);
                    i1 = i1.max(i);
                    j0 = j0.min(j);
                    j1 = j1.max(j);
                }
            }
        }
        if i0 == usize::MAX {
            return None;
        }
        let (hb, ht) = (s.h_base(), s.h_fiber());
        Some((
            s.base_lo + i0 as f64 * hb,
            s.base_lo + (i1 + 1) as f64 * hb,
            s.fiber_lo + j0 as f64 * ht,
            s.fiber_lo + (j1 + 1) as f64 * ht,
        ))
    }
}

/// Fiber neighbour of `j` at offset `dj`, wrapping on periodic grids.
pub(crate) fn neighbour_fiber(s: &GridScheme, j: usize, dj: isize) -> Option<usize> {
    let jj = j as isize + dj;
    let n = s.fiber_cells as isize;
    if s.periodic {
        Some(jj.rem_euclid(n) as usize)
    } else if jj < 0 || jj >= n {
        None
    } else {
        Some(jj as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{FiberGeometry, ScalarFn};
    use approx::assert_relative_eq;

    fn flat_plane() -> WarpedSpace {
        WarpedSpace::product("flat", [-1.0, 2.0], FiberGeometry::line(ScalarFn::ONE, 2.0))
    }

    #[test]
    fn unit_square_volume() {
        let s = flat_plane();
        let sch = GridScheme::new(&s, 60, 80).unwrap();
        let m = sch.measure(&s);
        let sq = GridRegion::from_predicate(sch.clone(), |b, t| (0.0..1.0).contains(&b) && (0.0..1.0).contains(&t));
        assert_relative_eq!(sq.weighted_volume(&m), 1.0, max_relative = 1e-12);
        assert_eq!(GridRegion::empty(sch).weighted_volume(&m), 0.0);
    }

    #[test]
    fn slice_volume_of_interval() {
        let s = flat_plane();
        let sch = GridScheme::new(&s, 30, 40).unwrap();
        let m = sch.measure(&s);
        let r = GridRegion::from_predicate(sch, |_, t| t.abs() < 1.0);
        assert_relative_eq!(r.slice_volume(&s, &m, 0.5).unwrap(), 2.0, max_relative = 1e-12);
        assert!(r.slice_volume(&s, &m, 5.0).is_err());
    }

    #[test]
    fn dilation_grows_by_one_cell() {
        let s = flat_plane();
        let sch = GridScheme::new(&s, 9, 9).unwrap();
        let mut r = GridRegion::empty(sch);
        r.set(4, 4, true);
        let d = r.dilate();
        assert_eq!(d.count(), 9);
        assert!(r.is_subset_of(&d));
    }

    #[test]
    fn wrong_size_indicator_is_rejected() {
        let s = flat_plane();
        let sch = GridScheme::new(&s, 3, 3).unwrap();
        assert!(GridRegion::from_cells(sch, vec![true; 8]).is_err());
    }
}
