//! Sparse proximity graph over line-box centers.
//!
//! Two lines are connected when the open disk whose diameter is the
//! segment between their centers contains no other line's center (the
//! beta-skeleton at beta = 1). The graph is what downstream clustering
//! scores and merges; "hop" pairs (two-hop neighbors) extend its reach
//! for row merging.
//!
//! [`gabriel_edges_brute`] is the O(n^3) reference construction;
//! [`gabriel_edges_grid`] is an accelerated path over a uniform spatial
//! grid that must produce the identical edge set. Both share one
//! blocking predicate, so they can only differ if candidate enumeration
//! is incomplete — the grid path therefore only stops expanding its
//! search when a coverage certificate proves every farther point is
//! either blocked or outside the population's bounding box (where no
//! point exists at all).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use thiserror::Error;

use crate::geometry::{circular_mean, min_containing_box, AABox, Point, RotatedBox};
use crate::signals::{LineId, TextLine};

/// A witness blocks an edge only if it is inside the diameter disk by
/// more than this; a witness exactly on the circle never blocks.
pub const GABRIEL_TOL: f64 = 1e-9;

/// Offset applied per line id to separate exactly coincident centers.
const DUPLICATE_NUDGE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum SkeletonError {
    #[error("cannot build a skeleton over zero lines")]
    EmptyInput,
    #[error("duplicate line id {0}")]
    DuplicateLineId(LineId),
}

/// Undirected proximity graph over a document's lines.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonGraph {
    nodes: Vec<LineId>,
    edges: Vec<(LineId, LineId)>,
    adjacency: BTreeMap<LineId, Vec<LineId>>,
}

impl SkeletonGraph {
    /// Node ids in document order.
    pub fn nodes(&self) -> &[LineId] {
        &self.nodes
    }

    /// Canonical edge list: each pair `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> &[(LineId, LineId)] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: LineId, b: LineId) -> bool {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.edges.binary_search(&key).is_ok()
    }

    pub fn neighbors(&self, id: LineId) -> &[LineId] {
        self.adjacency.get(&id).map_or(&[], |v| v.as_slice())
    }

    /// Non-adjacent pairs that share at least one common neighbor,
    /// canonical and sorted like [`Self::edges`].
    pub fn hop_edges(&self) -> Vec<(LineId, LineId)> {
        let mut hops = BTreeSet::new();
        for neighbors in self.adjacency.values() {
            for (i, &a) in neighbors.iter().enumerate() {
                for &b in &neighbors[i + 1..] {
                    if !self.has_edge(a, b) {
                        hops.insert((a, b));
                    }
                }
            }
        }
        hops.into_iter().collect()
    }
}

/// Smallest box containing both line boxes, oriented at the mean of
/// their angles.
pub fn edge_box(a: &RotatedBox, b: &RotatedBox) -> RotatedBox {
    let mean = circular_mean(&[a.angle, b.angle]).expect("two angles are never empty");
    let mut pts = Vec::with_capacity(8);
    pts.extend(a.corners());
    pts.extend(b.corners());
    min_containing_box(&pts, mean).expect("eight corners are never empty")
}

/// Build the proximity graph over `lines`. Exactly coincident centers
/// are nudged apart deterministically before the geometry runs.
pub fn build_skeleton(lines: &[TextLine]) -> Result<SkeletonGraph, SkeletonError> {
    if lines.is_empty() {
        return Err(SkeletonError::EmptyInput);
    }
    let mut ids_seen = BTreeSet::new();
    for line in lines {
        if !ids_seen.insert(line.id) {
            return Err(SkeletonError::DuplicateLineId(line.id));
        }
    }

    let mut centers: Vec<Point> = lines.iter().map(|l| l.bbox.center()).collect();
    let mut occupancy: HashMap<(u64, u64), u32> = HashMap::new();
    for c in &centers {
        *occupancy.entry((c.x.to_bits(), c.y.to_bits())).or_insert(0) += 1;
    }
    for (line, c) in lines.iter().zip(centers.iter_mut()) {
        if occupancy[&(c.x.to_bits(), c.y.to_bits())] > 1 {
            c.x += f64::from(line.id) * DUPLICATE_NUDGE;
        }
    }

    let index_edges = gabriel_edges_grid(&centers);
    let mut edges: Vec<(LineId, LineId)> = index_edges
        .into_iter()
        .map(|(i, j)| {
            let (a, b) = (lines[i].id, lines[j].id);
            if a <= b {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect();
    edges.sort_unstable();

    let mut adjacency: BTreeMap<LineId, Vec<LineId>> = BTreeMap::new();
    for &(a, b) in &edges {
        adjacency.entry(a).or_default().push(b);
        adjacency.entry(b).or_default().push(a);
    }
    for neighbors in adjacency.values_mut() {
        neighbors.sort_unstable();
    }

    Ok(SkeletonGraph {
        nodes: lines.iter().map(|l| l.id).collect(),
        edges,
        adjacency,
    })
}

/// Whether `k` falls strictly inside the open disk whose diameter is
/// the segment `(i, j)`, beyond [`GABRIEL_TOL`]. By Thales' theorem the
/// disk test reduces to the sign of one dot product.
#[inline]
fn blocks(i: Point, j: Point, k: Point) -> bool {
    let dot = (k.x - i.x) * (k.x - j.x) + (k.y - i.y) * (k.y - j.y);
    dot < -GABRIEL_TOL
}

/// Reference construction: test every pair against every witness.
/// Returns index pairs `(i, j)` with `i < j`, sorted.
pub fn gabriel_edges_brute(points: &[Point]) -> Vec<(usize, usize)> {
    let n = points.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let open = (0..n)
                .filter(|&k| k != i && k != j)
                .all(|k| !blocks(points[i], points[j], points[k]));
            if open {
                edges.push((i, j));
            }
        }
    }
    edges
}

struct Grid {
    origin: Point,
    bounds: AABox,
    cell: f64,
    nx: i64,
    ny: i64,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl Grid {
    fn build(points: &[Point]) -> Grid {
        let n = points.len() as f64;
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for p in points {
            x_min = x_min.min(p.x);
            x_max = x_max.max(p.x);
            y_min = y_min.min(p.y);
            y_max = y_max.max(p.y);
        }
        let w = x_max - x_min;
        let h = y_max - y_min;
        // Aim for roughly one point per cell; degenerate extents fall
        // back to a 1-D grid, then to a single cell.
        let mut cell = (w * h / n).sqrt();
        if !(cell > 0.0) {
            cell = w.max(h) / n;
        }
        if !(cell > 0.0 && cell.is_finite()) {
            cell = 1.0;
        }
        let nx = ((w / cell).floor() as i64 + 1).max(1);
        let ny = ((h / cell).floor() as i64 + 1).max(1);
        let mut grid = Grid {
            origin: Point::new(x_min, y_min),
            bounds: AABox {
                x_min,
                x_max,
                y_min,
                y_max,
            },
            cell,
            nx,
            ny,
            cells: HashMap::new(),
        };
        for (idx, p) in points.iter().enumerate() {
            let c = grid.coords(*p);
            grid.cells.entry(c).or_default().push(idx);
        }
        grid
    }

    fn coords(&self, p: Point) -> (i64, i64) {
        let cx = ((p.x - self.origin.x) / self.cell).floor() as i64;
        let cy = ((p.y - self.origin.y) / self.cell).floor() as i64;
        (cx.clamp(0, self.nx - 1), cy.clamp(0, self.ny - 1))
    }

    fn cell_min_dist2(&self, cx: i64, cy: i64, p: Point) -> f64 {
        let x_lo = self.origin.x + cx as f64 * self.cell;
        let y_lo = self.origin.y + cy as f64 * self.cell;
        let dx = (x_lo - p.x).max(p.x - (x_lo + self.cell)).max(0.0);
        let dy = (y_lo - p.y).max(p.y - (y_lo + self.cell)).max(0.0);
        dx * dx + dy * dy
    }

    fn for_each_ring_cell(&self, ci: i64, cj: i64, r: i64, mut f: impl FnMut(i64, i64)) {
        let in_x = |x: i64| x >= 0 && x < self.nx;
        let in_y = |y: i64| y >= 0 && y < self.ny;
        if r == 0 {
            if in_x(ci) && in_y(cj) {
                f(ci, cj);
            }
            return;
        }
        for cx in (ci - r)..=(ci + r) {
            if !in_x(cx) {
                continue;
            }
            if in_y(cj - r) {
                f(cx, cj - r);
            }
            if in_y(cj + r) {
                f(cx, cj + r);
            }
        }
        for cy in (cj - r + 1)..=(cj + r - 1) {
            if !in_y(cy) {
                continue;
            }
            if in_x(ci - r) {
                f(ci - r, cy);
            }
            if in_x(ci + r) {
                f(ci + r, cy);
            }
        }
    }

    /// True when every cell of the grid lies within Chebyshev radius
    /// `r` of `(ci, cj)` — no unexplored point can remain.
    fn exhausted(&self, ci: i64, cj: i64, r: i64) -> bool {
        ci - r < 0 && ci + r >= self.nx - 1 && cj - r < 0 && cj + r >= self.ny - 1
    }

    /// Whether the open diameter disk of `(i, j)` is free of blocking
    /// witnesses.
    fn disk_empty(&self, points: &[Point], i: usize, j: usize) -> bool {
        let pi = points[i];
        let pj = points[j];
        let m = Point::new((pi.x + pj.x) / 2.0, (pi.y + pj.y) / 2.0);
        let r2 = pi.dist2(pj) / 4.0;
        let r = r2.sqrt();
        let (cx_lo, cy_lo) = self.coords(Point::new(m.x - r, m.y - r));
        let (cx_hi, cy_hi) = self.coords(Point::new(m.x + r, m.y + r));
        for cy in cy_lo..=cy_hi {
            for cx in cx_lo..=cx_hi {
                if self.cell_min_dist2(cx, cy, m) > r2 {
                    continue;
                }
                if let Some(cell) = self.cells.get(&(cx, cy)) {
                    for &k in cell {
                        if k != i && k != j && blocks(pi, pj, points[k]) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

// Margins that keep the coverage certificate conservative with respect
// to the blocking predicate: a point closer than MIN_LEN contributes no
// cone, cone widths are computed from the distance padded by LEN_MARGIN
// and then shrunk by ANG_MARGIN, and the certified radius is pulled in
// by a relative ulp guard.
const COVER_MIN_LEN: f64 = 1e-3;
const COVER_LEN_MARGIN: f64 = 1e-6;
const COVER_ANG_MARGIN: f64 = 1e-9;
const RADIUS_GUARD: f64 = 1.0 - 1e-9;

/// Directions within `half` of `ang` are ruled out by an obstacle at
/// distance `len`: a witness point blocks them, a bounding-box side
/// means no point exists there at all. Same conservative margins either
/// way.
fn cone(ang: f64, len: f64, d: f64) -> Option<(f64, f64)> {
    let ratio = (len + COVER_LEN_MARGIN) / d;
    if ratio >= 1.0 {
        return None;
    }
    let half = ratio.acos() - COVER_ANG_MARGIN;
    (half > 0.0).then_some((ang - half, ang + half))
}

/// Certificate that every point at distance >= `d` from `p` is blocked
/// by one of the already-seen points or lies outside `bounds`, where no
/// point exists: each seen point `q` blocks a cone of directions around
/// `q - p`, each bounding side rules out a cone around its outward
/// normal, and if the cones jointly cover the full circle no farther
/// Gabriel neighbor can exist. Without the sides, a point on the
/// population's hull could never close its outward directions and every
/// border point would pay a full-grid sweep.
fn covered(p: Point, seen: &[usize], points: &[Point], bounds: &AABox, d: f64) -> bool {
    let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(seen.len() + 4);
    let walls = [
        (0.0, bounds.x_max - p.x),
        (PI, p.x - bounds.x_min),
        (FRAC_PI_2, bounds.y_max - p.y),
        (-FRAC_PI_2, p.y - bounds.y_min),
    ];
    for (ang, gap) in walls {
        if let Some(iv) = cone(ang, gap, d) {
            intervals.push(iv);
        }
    }
    for &k in seen {
        let q = points[k];
        let vx = q.x - p.x;
        let vy = q.y - p.y;
        let len = vx.hypot(vy);
        if len < COVER_MIN_LEN {
            continue;
        }
        if let Some(iv) = cone(vy.atan2(vx), len, d) {
            intervals.push(iv);
        }
    }
    circle_covered(intervals)
}

fn circle_covered(intervals: Vec<(f64, f64)>) -> bool {
    if intervals.is_empty() {
        return false;
    }
    let mut segs: Vec<(f64, f64)> = Vec::with_capacity(intervals.len() + 1);
    for (lo, hi) in intervals {
        if hi - lo >= TAU {
            return true;
        }
        let lo_n = lo.rem_euclid(TAU);
        let hi_n = lo_n + (hi - lo);
        if hi_n > TAU {
            segs.push((lo_n, TAU));
            segs.push((0.0, hi_n - TAU));
        } else {
            segs.push((lo_n, hi_n));
        }
    }
    segs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut reach = 0.0;
    for (s, e) in segs {
        if s > reach {
            return false;
        }
        reach = reach.max(e);
    }
    reach >= TAU
}

/// Accelerated construction over a uniform grid. Produces the same
/// edge set as [`gabriel_edges_brute`] for any input.
pub fn gabriel_edges_grid(points: &[Point]) -> Vec<(usize, usize)> {
    let n = points.len();
    if n < 2 {
        return Vec::new();
    }
    let grid = Grid::build(points);
    let mut edges = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    let mut ring_points: Vec<usize> = Vec::new();
    for i in 0..n {
        seen.clear();
        let p = points[i];
        let (ci, cj) = grid.coords(p);
        let mut r: i64 = 0;
        loop {
            ring_points.clear();
            grid.for_each_ring_cell(ci, cj, r, |cx, cy| {
                if let Some(cell) = grid.cells.get(&(cx, cy)) {
                    for &idx in cell {
                        if idx != i {
                            ring_points.push(idx);
                        }
                    }
                }
            });
            for &j in &ring_points {
                // Each unordered pair is decided once, from its lower
                // index; the disk query consults the grid directly so
                // it never depends on the exploration state.
                if j > i && grid.disk_empty(points, i, j) {
                    edges.push((i, j));
                }
            }
            seen.extend_from_slice(&ring_points);
            if grid.exhausted(ci, cj, r) {
                break;
            }
            if r >= 1 {
                let certified = r as f64 * grid.cell * RADIUS_GUARD;
                if covered(p, &seen, points, &grid.bounds, certified) {
                    break;
                }
            }
            r += 1;
        }
    }
    edges.sort_unstable();
    edges
}
