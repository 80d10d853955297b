//! Distance fields and r-enlargements of grid regions.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::regions::{neighbour_fiber, GridRegion};
use crate::spaces::{FiberChart, FiberKind, GridScheme, WarpedSpace};

/// How distances to the region are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMethod {
    /// Chord distance from each cell center to the nearest point on the
    /// boundary faces of the region.
    #[default]
    Exact,
    /// Sum of 8-neighbour edge lengths along grid paths from boundary cell
    /// centers.
    Chamfer,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    cell: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.cell.cmp(&self.cell))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Fiber rows whose far side is an artificial truncation rather than a
/// true end of the fiber.
/// Density at a truncated edge, relative to the largest cell density,
/// below which the mass cut off there is ignored.
const NEGLIGIBLE_EDGE_DENSITY: f64 = 1e-6;

fn truncated_edges(space: &WarpedSpace, s: &GridScheme) -> (bool, bool) {
    if s.periodic {
        return (false, false);
    }
    let (lo, hi) = match (space.fiber.chart(), &space.fiber.kind) {
        (FiberChart::Radial { .. }, FiberKind::SphereCap { .. }) => (false, false),
        (FiberChart::Radial { .. }, _) => (false, true),
        (FiberChart::Signed { .. }, FiberKind::HalfLine) => (false, true),
        _ => (true, true),
    };
    let peak = (0..s.fiber_cells).map(|j| space.psi(s.fiber_center(j))).fold(0.0, f64::max);
    let matters = |t: f64| space.psi(t) > NEGLIGIBLE_EDGE_DENSITY * peak;
    (lo && matters(s.fiber_lo), hi && matters(s.fiber_hi))
}

fn neighbours(s: &GridScheme, c: usize) -> [usize; 8] {
    let (nb, nt) = (s.base_cells, s.fiber_cells);
    let (i, j) = (c / nt, c % nt);
    let mut out = [usize::MAX; 8];
    let mut k = 0;
    for di in -1isize..=1 {
        let ii = i as isize + di;
        if ii < 0 || ii >= nb as isize {
            continue;
        }
        for dj in -1isize..=1 {
            if di == 0 && dj == 0 {
                continue;
            }
            if let Some(jj) = neighbour_fiber(s, j, dj) {
                out[k] = ii as usize * nt + jj;
                k += 1;
            }
        }
    }
    out
}

/// Chamfer distances from the region's boundary cell centers, out to
/// `r_max`.
fn chamfer_field(space: &WarpedSpace, region: &GridRegion, r_max: f64) -> Vec<f64> {
    let s = &region.scheme;
    let nt = s.fiber_cells;
    let (hb, ht) = (s.h_base(), s.h_fiber());
    let cells = region.cells();
    let mut dist = vec![f64::INFINITY; s.len()];
    let mut heap = BinaryHeap::new();
    for c in 0..s.len() {
        if cells[c] {
            dist[c] = 0.0;
            if neighbours(s, c).iter().any(|&n| n != usize::MAX && !cells[n]) {
                heap.push(Entry { dist: 0.0, cell: c });
            }
        }
    }
    while let Some(Entry { dist: d, cell: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for v in neighbours(s, u) {
            if v == usize::MAX || cells[v] {
                continue;
            }
            let di = (v / nt) as f64 - (u / nt) as f64;
            let dj = s.fiber_offset(u % nt, v % nt) as f64;
            let g = space.g(0.5 * (s.base_center(u / nt) + s.base_center(v / nt)));
            let cand = d + ((di * hb).powi(2) + (g * dj * ht).powi(2)).sqrt();
            if cand <= r_max && cand < dist[v] {
                dist[v] = cand;
                heap.push(Entry { dist: cand, cell: v });
            }
        }
    }
    dist
}

/// Midpoints of faces between a region cell and a 4-neighbour outside it,
/// grouped into lines of constant base coordinate and sorted by fiber
/// coordinate. Line `2i + 1` holds the fiber-facing faces of base row `i`,
/// line `2i` the base-facing faces between rows `i - 1` and `i`.
struct Faces {
    lines: Vec<Vec<f64>>,
}

fn boundary_faces(region: &GridRegion) -> Faces {
    let s = &region.scheme;
    let (nb, nt) = (s.base_cells, s.fiber_cells);
    let ht = s.h_fiber();
    let cells = region.cells();
    let mut lines: Vec<Vec<f64>> = par::map_indexed(2 * nb + 1, |k| {
        let mut line = Vec::new();
        if k % 2 == 1 {
            let i = k / 2;
            for j in 0..nt {
                if !cells[i * nt + j] {
                    continue;
                }
                let t = s.fiber_center(j);
                for (dj, sign) in [(-1isize, -1.0), (1, 1.0)] {
                    if let Some(jj) = neighbour_fiber(s, j, dj) {
                        if !cells[i * nt + jj] {
                            line.push(t + sign * 0.5 * ht);
                        }
                    }
                }
            }
        } else {
            let i = k / 2;
            if i > 0 && i < nb {
                for j in 0..nt {
                    if cells[(i - 1) * nt + j] != cells[i * nt + j] {
                        line.push(s.fiber_center(j));
                    }
                }
            }
        }
        line
    });
    for line in &mut lines {
        line.sort_by(f64::total_cmp);
    }
    Faces { lines }
}

/// Chord distance from the center of cell `c` to the nearest point of a
/// boundary face whose base coordinate lies within `r`.
///
/// Along a line of constant base coordinate the chord distance grows with
/// `|Δt|`, so only the faces on either side of the cell's fiber coordinate
/// (cyclically on circles) can be nearest.
fn nearest_face(space: &WarpedSpace, s: &GridScheme, faces: &Faces, c: usize, r: f64) -> f64 {
    let nt = s.fiber_cells;
    let (i, j) = (c / nt, c % nt);
    let p = (s.base_center(i), s.fiber_center(j));
    let (hb, ht) = (s.h_base(), s.h_fiber());
    let w = (r / hb).ceil() as isize * 2 + 2;
    let k_mid = 2 * i as isize + 1;
    let last = faces.lines.len() as isize - 1;
    let periodic = s.periodic;
    let mut best = f64::INFINITY;
    for k in (k_mid - w).max(0)..=(k_mid + w).min(last) {
        let line = &faces.lines[k as usize];
        if line.is_empty() {
            continue;
        }
        let b_line = s.base_lo + 0.5 * k as f64 * hb;
        // Fiber-facing faces span a base cell; base-facing faces span a
        // fiber cell.
        let (b, half_t) = if k % 2 == 1 {
            (p.0.clamp(b_line - 0.5 * hb, b_line + 0.5 * hb), 0.0)
        } else {
            (b_line, 0.5 * ht)
        };
        if (b - p.0).abs() >= best.min(r + hb) {
            continue;
        }
        let n = line.len();
        let at = line.partition_point(|&t| t < p.1);
        let candidates = if periodic {
            [Some((at + n - 1) % n), Some(at % n)]
        } else {
            [at.checked_sub(1), (at < n).then_some(at)]
        };
        for q in candidates.into_iter().flatten() {
            let t = line[q] + space.fiber.delta(line[q], p.1).clamp(-half_t, half_t);
            best = best.min(space.chord_distance((b, t), p));
        }
    }
    best
}

/// Distance from every cell to `region`, computed out to `r_max`; cells
/// farther away hold `f64::INFINITY`, cells of the region hold 0.
///
/// Any cell outside the region within `r_max` that lies on a truncated
/// fiber edge is an error.
pub fn distance_field(space: &WarpedSpace, region: &GridRegion, r_max: f64, method: DistanceMethod) -> Result<Vec<f64>> {
    let s = &region.scheme;
    let nt = s.fiber_cells;
    let dist = match method {
        DistanceMethod::Chamfer => chamfer_field(space, region, r_max),
        DistanceMethod::Exact => {
            // Paths along two 8-neighbour steps less than a right angle
            // apart are at most √2 times the straight chord, so the chamfer
            // ball of radius √2·r + 2h covers the exact one.
            let h = s.h_base().max(s.h_fiber());
            let coarse = chamfer_field(space, region, std::f64::consts::SQRT_2 * r_max + 2.0 * h);
            let faces = boundary_faces(region);
            let cells = region.cells();
            par::map_indexed(s.len(), |c| {
                if cells[c] {
                    0.0
                } else if coarse[c].is_finite() {
                    let d = nearest_face(space, s, &faces, c, r_max);
                    if d <= r_max {
                        d
                    } else {
                        f64::INFINITY
                    }
                } else {
                    f64::INFINITY
                }
            })
        }
    };
    let (trunc_lo, trunc_hi) = truncated_edges(space, s);
    let cells = region.cells();
    for c in 0..s.len() {
        let j = c % nt;
        if !cells[c] && dist[c] <= r_max && ((trunc_lo && j == 0) || (trunc_hi && j == nt - 1)) {
            return Err(Error::Truncation(format!(
                "enlargement by {r_max} reaches the fiber truncation at cell ({}, {j})",
                c / nt
            )));
        }
    }
    Ok(dist)
}

/// Cells within distance `r` of `region`.
pub fn enlarge(space: &WarpedSpace, region: &GridRegion, r: f64) -> Result<GridRegion> {
    enlarge_with(space, region, r, DistanceMethod::Exact)
}

pub fn enlarge_with(space: &WarpedSpace, region: &GridRegion, r: f64, method: DistanceMethod) -> Result<GridRegion> {
    if !(r >= 0.0) {
        return Err(Error::OutOfRange { what: "enlargement radius", value: r, lo: 0.0, hi: f64::INFINITY });
    }
    if region.is_empty() {
        return Err(Error::InvalidRegion("cannot enlarge an empty region".into()));
    }
    let dist = distance_field(space, region, r, method)?;
    GridRegion::from_cells(region.scheme.clone(), dist.iter().map(|&d| d <= r).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{FiberGeometry, ScalarFn};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn plane(extent: f64) -> WarpedSpace {
        WarpedSpace::product("flat", [-extent, extent], FiberGeometry::line(ScalarFn::ONE, extent))
    }

    #[test]
    fn square_enlargement_matches_tube_formula() {
        let s = plane(1.0);
        let sch = GridScheme::new(&s, 400, 400).unwrap();
        let m = sch.measure(&s);
        let sq = GridRegion::from_predicate(sch, |b, t| b.abs() < 0.5 && t.abs() < 0.5);
        let big = enlarge(&s, &sq, 0.1).unwrap();
        let expect = 1.0 + 0.4 + PI * 0.01;
        assert!((big.weighted_volume(&m) - expect).abs() / expect < 0.02);
        assert!(sq.is_subset_of(&big));
        assert!(sq.is_subset_of(&enlarge(&s, &sq, 0.5 * 0.005).unwrap()));
    }

    #[test]
    fn warp_shrinks_fiber_reach() {
        let s = WarpedSpace::new("w", [-1.0, 1.0], ScalarFn::constant(2.0), ScalarFn::ONE, FiberGeometry::line(ScalarFn::ONE, 1.0));
        let sch = GridScheme::new(&s, 200, 200).unwrap();
        let mut r = GridRegion::empty(sch.clone());
        r.set(100, 100, true);
        let e = enlarge(&s, &r, 0.2).unwrap();
        let (b0, b1, t0, t1) = e.bounding_box().unwrap();
        assert_relative_eq!(b1 - b0, 0.41, epsilon = 0.011);
        assert_relative_eq!(t1 - t0, 0.21, epsilon = 0.011);
    }

    #[test]
    fn truncation_is_detected() {
        let s = plane(1.0);
        let sch = GridScheme::new(&s, 40, 40).unwrap();
        let r = GridRegion::from_predicate(sch, |_, t| t.abs() < 0.9);
        assert!(matches!(enlarge(&s, &r, 0.2), Err(Error::Truncation(_))));
        assert!(enlarge(&s, &r, 0.04).is_ok());
    }

    #[test]
    fn chamfer_is_anisotropic() {
        let s = plane(1.0);
        let sch = GridScheme::new(&s, 200, 200).unwrap();
        let mut r = GridRegion::empty(sch.clone());
        r.set(100, 100, true);
        let m = sch.measure(&s);
        let a = enlarge_with(&s, &r, 0.5, DistanceMethod::Exact).unwrap().weighted_volume(&m);
        let c = enlarge_with(&s, &r, 0.5, DistanceMethod::Chamfer).unwrap().weighted_volume(&m);
        let disk = PI * 0.25;
        assert!((a - disk).abs() / disk < 0.03, "{a}");
        assert!((c - disk).abs() / disk > (a - disk).abs() / disk);
    }
}
