use serde::{Deserialize, Serialize};

use super::fiber::FiberChart;
use super::warped::WarpedSpace;
use crate::error::{Error, Result};
use crate::par;

/// Uniform base × fiber cell grid.
///
/// The base range always spans the space's base interval; the fiber range
/// follows the fiber chart (truncated for non-compact fibers).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScheme {
    pub base_lo: f64,
    pub base_hi: f64,
    pub base_cells: usize,
    pub fiber_lo: f64,
    pub fiber_hi: f64,
    pub fiber_cells: usize,
    /// Fiber coordinate wraps around (circle fibers).
    pub periodic: bool,
    /// Fiber coordinate is the distance from `p` (radial fibers, `n ≥ 2`).
    pub radial: bool,
}

/// Per-cell weighted measures of a scheme within a particular space.
#[derive(Debug, Clone)]
pub struct CellMeasure {
    /// `Φ(b_i)·g(b_i)^n·h_b` at each base-cell midpoint.
    pub base_weight: Vec<f64>,
    /// `∫_cell Ψ` (times the radial weight on radial charts).
    pub fiber_mass: Vec<f64>,
}

impl CellMeasure {
    pub fn cell(&self, i: usize, j: usize) -> f64 {
        self.base_weight[i] * self.fiber_mass[j]
    }
}

impl GridScheme {
    pub fn new(space: &WarpedSpace, base_cells: usize, fiber_cells: usize) -> Result<Self> {
        if base_cells == 0 || fiber_cells == 0 {
            return Err(Error::InvalidRegion("grid needs at least one cell in each direction".into()));
        }
        let (fiber_lo, fiber_hi, periodic, radial) = match space.fiber.chart() {
            FiberChart::Signed { lo, hi, period } => (lo, hi, period.is_some(), false),
            FiberChart::Radial { hi } => (0.0, hi, false, true),
        };
        if !fiber_hi.is_finite() {
            return Err(Error::Truncation("fiber needs a finite extent for gridding".into()));
        }
        Ok(Self {
            base_lo: space.base[0],
            base_hi: space.base[1],
            base_cells,
            fiber_lo,
            fiber_hi,
            fiber_cells,
            periodic,
            radial,
        })
    }

    /// Scheme with cell widths as close to `h` as the ranges allow.
    pub fn with_spacing(space: &WarpedSpace, h_base: f64, h_fiber: f64) -> Result<Self> {
        let probe = Self::new(space, 1, 1)?;
        let nb = ((probe.base_hi - probe.base_lo) / h_base).round().max(1.0) as usize;
        let nt = ((probe.fiber_hi - probe.fiber_lo) / h_fiber).round().max(1.0) as usize;
        Self::new(space, nb, nt)
    }

    pub fn h_base(&self) -> f64 {
        (self.base_hi - self.base_lo) / self.base_cells as f64
    }

    pub fn h_fiber(&self) -> f64 {
        (self.fiber_hi - self.fiber_lo) / self.fiber_cells as f64
    }

    pub fn base_center(&self, i: usize) -> f64 {
        self.base_lo + (i as f64 + 0.5) * self.h_base()
    }

    pub fn fiber_center(&self, j: usize) -> f64 {
        self.fiber_lo + (j as f64 + 0.5) * self.h_fiber()
    }

    pub fn len(&self) -> usize {
        self.base_cells * self.fiber_cells
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.fiber_cells + j
    }

    /// Base cell containing `b`, if any.
    pub fn base_cell_of(&self, b: f64) -> Option<usize> {
        let x = (b - self.base_lo) / self.h_base();
        if x < 0.0 || x > self.base_cells as f64 {
            return None;
        }
        Some((x.floor() as usize).min(self.base_cells - 1))
    }

    /// Distance of a fiber cell's center from `p`.
    pub fn fiber_distance_from_p(&self, j: usize) -> f64 {
        self.fiber_center(j).abs()
    }

    /// Fiber cells ordered by distance from `p`; ties go to the positive
    /// side first, then by index.
    pub fn fill_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.fiber_cells).collect();
        order.sort_by(|&a, &b| {
            let (da, db) = (self.fiber_distance_from_p(a), self.fiber_distance_from_p(b));
            let key = |d: f64| (d / self.h_fiber() * 1e9).round() as i64;
            key(da)
                .cmp(&key(db))
                .then_with(|| (self.fiber_center(b) > 0.0).cmp(&(self.fiber_center(a) > 0.0)))
                .then(a.cmp(&b))
        });
        order
    }

    pub fn measure(&self, space: &WarpedSpace) -> CellMeasure {
        let hb = self.h_base();
        let base_weight = (0..self.base_cells)
            .map(|i| {
                let b = self.base_center(i);
                if space.is_singular(b) {
                    0.0
                } else {
                    space.phi(b) * space.fiber_scale(b) * hb
                }
            })
            .collect();
        let ht = self.h_fiber();
        let fiber_mass = par::map_indexed(self.fiber_cells, |j| {
            let a = self.fiber_lo + j as f64 * ht;
            if self.radial {
                space.fiber.shell_mass(a, a + ht)
            } else {
                space.fiber.interval_mass(a, a + ht)
            }
        });
        CellMeasure { base_weight, fiber_mass }
    }

    /// Signed fiber-index offset from `j1` to `j2`, wrapped on circles.
    pub fn fiber_offset(&self, j1: usize, j2: usize) -> isize {
        let n = self.fiber_cells as isize;
        let mut d = j2 as isize - j1 as isize;
        if self.periodic {
            d = d.rem_euclid(n);
            if d > n / 2 {
                d -= n;
            }
        }
        d
    }

    /// Metric length of the edge between two adjacent cells (8-neighbour
    /// stencil), with `g` at the midpoint base coordinate.
    pub fn edge_length(&self, space: &WarpedSpace, a: (usize, usize), b: (usize, usize)) -> Result<f64> {
        let di = b.0 as isize - a.0 as isize;
        let dj = self.fiber_offset(a.1, b.1);
        if a == b || di.abs() > 1 || dj.abs() > 1 || a.0 >= self.base_cells || b.0 >= self.base_cells {
            return Err(Error::NonAdjacent(a, b));
        }
        let db = di as f64 * self.h_base();
        let dt = dj as f64 * self.h_fiber();
        let g = space.g(0.5 * (self.base_center(a.0) + self.base_center(b.0)));
        Ok((db * db + g * g * dt * dt).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{FiberGeometry, ScalarFn};
    use approx::assert_relative_eq;

    fn flat() -> WarpedSpace {
        WarpedSpace::product("flat", [0.0, 1.0], FiberGeometry::line(ScalarFn::ONE, 1.0))
    }

    #[test]
    fn edge_length_examples() {
        let s = flat();
        let sch = GridScheme::new(&s, 10, 20).unwrap();
        let h = 0.1;
        assert_relative_eq!(sch.edge_length(&s, (2, 3), (3, 3)).unwrap(), h, max_relative = 1e-12);
        assert_relative_eq!(sch.edge_length(&s, (2, 3), (3, 4)).unwrap(), h * 2f64.sqrt(), max_relative = 1e-12);
        assert!(sch.edge_length(&s, (2, 3), (4, 3)).is_err());
        assert!(sch.edge_length(&s, (2, 3), (2, 3)).is_err());
        let warped = WarpedSpace::new("w", [0.0, 1.0], ScalarFn::constant(2.0), ScalarFn::ONE, FiberGeometry::line(ScalarFn::ONE, 1.0));
        let sch = GridScheme::new(&warped, 10, 20).unwrap();
        assert_relative_eq!(sch.edge_length(&warped, (2, 3), (2, 4)).unwrap(), 2.0 * 0.1, max_relative = 1e-12);
        // Symmetric in its arguments.
        assert_eq!(sch.edge_length(&warped, (2, 3), (3, 4)), sch.edge_length(&warped, (3, 4), (2, 3)));
    }

    #[test]
    fn periodic_edges_wrap() {
        let s = WarpedSpace::product("c", [0.0, 1.0], FiberGeometry::circle(1.0, ScalarFn::ONE));
        let sch = GridScheme::new(&s, 4, 10).unwrap();
        assert!(sch.edge_length(&s, (0, 0), (0, 9)).is_ok());
        assert_eq!(sch.fiber_offset(9, 0), 1);
    }

    #[test]
    fn fill_order_alternates_positive_first() {
        let sch = GridScheme::new(&flat(), 1, 6).unwrap();
        // centers: -5/6, -1/2, -1/6, 1/6, 1/2, 5/6
        assert_eq!(sch.fill_order(), vec![3, 2, 4, 1, 5, 0]);
    }

    #[test]
    fn measure_sums_to_total_volume() {
        let s = flat();
        let sch = GridScheme::new(&s, 10, 20).unwrap();
        let m = sch.measure(&s);
        let total: f64 = (0..10).flat_map(|i| (0..20).map(move |j| (i, j))).map(|(i, j)| m.cell(i, j)).sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-12);
    }
}
