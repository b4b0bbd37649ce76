//! The r-parameterized square grid over a point set, anchored at the source,
//! and its parametric stabilization: shrinking a radius interval until the
//! grid's combinatorial structure (row/column assignment and the pruned point
//! set) is constant over the open interior.

use crate::core_geom::{interval_shrink, DecisionOracle, PointSet, RadiusInterval};

pub type Cell = (i32, i32); // (row, col)

/// Sorted-vector map from occupied cell to its point list. Lookups are binary
/// searches over a contiguous array; `pos`/`by_pos` expose stable positional
/// handles so hot loops can skip the key search entirely.
#[derive(Clone, Debug, Default)]
pub struct CellMap {
    entries: Vec<(Cell, Vec<usize>)>,
}

impl CellMap {
    fn from_sorted(entries: Vec<(Cell, Vec<usize>)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        CellMap { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pos(&self, c: Cell) -> Option<usize> {
        self.entries.binary_search_by_key(&c, |e| e.0).ok()
    }

    pub fn by_pos(&self, i: usize) -> (Cell, &[usize]) {
        let e = &self.entries[i];
        (e.0, &e.1)
    }

    /// Bounding box (x_lo, x_hi, y_lo, y_hi) of the points in entry `i`.
    pub fn bbox(&self, ps: &PointSet, i: usize) -> (f64, f64, f64, f64) {
        let mut bb = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &q in &self.entries[i].1 {
            let p = ps.pts[q];
            bb = (bb.0.min(p.x), bb.1.max(p.x), bb.2.min(p.y), bb.3.max(p.y));
        }
        bb
    }

    pub fn get(&self, c: Cell) -> Option<&Vec<usize>> {
        self.pos(c).map(|i| &self.entries[i].1)
    }

    pub fn keys(&self) -> impl Iterator<Item = &Cell> {
        self.entries.iter().map(|e| &e.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Cell, &Vec<usize>)> {
        self.entries.iter().map(|e| (&e.0, &e.1))
    }
}

impl std::ops::Index<&Cell> for CellMap {
    type Output = Vec<usize>;
    fn index(&self, c: &Cell) -> &Vec<usize> {
        self.get(*c).expect("cell not occupied")
    }
}

impl<'a> IntoIterator for &'a CellMap {
    type Item = (&'a Cell, &'a Vec<usize>);
    type IntoIter = std::iter::Map<
        std::slice::Iter<'a, (Cell, Vec<usize>)>,
        fn(&'a (Cell, Vec<usize>)) -> (&'a Cell, &'a Vec<usize>),
    >;
    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter().map(|e| (&e.0, &e.1))
    }
}

#[derive(Clone, Debug)]
pub struct Grid {
    pub r: f64,
    /// Cell side length: r/√2 for the L2 grid, r/2 for the L∞ (rotated-L1) grid.
    pub side: f64,
    pub anchor: usize,
    /// Chebyshev cell offset up to which cells can hold points within distance
    /// r of each other: 2 for L2 at side r/√2, 3 for L∞ at side r/2.
    pub max_offset: i32,
    pub v_lines: Vec<f64>,
    pub h_lines: Vec<f64>,
    /// Points inside the grid rectangle; everything pruned is unreachable.
    pub live_points: Vec<usize>,
    /// Per point: its cell, or None if pruned.
    pub cell_of: Vec<Option<Cell>>,
    /// Occupied cells with their points, in x-sorted order (y-sorted for L∞
    /// grids built over rotated coordinates the order is by u).
    pub occupied: CellMap,
    /// Row index over the occupied cells: (row, sorted (column, position in
    /// `occupied`)). Neighbor lookups are computed from this on demand rather
    /// than precomputed for every cell — BFS from a small radius only touches
    /// a fraction of them.
    rows: Vec<(i32, Vec<(i32, u32)>)>,
}

impl Grid {
    /// Positions in `occupied` of the neighbor cells N(C) (Chebyshev offset
    /// ≤ max_offset, excluding C itself), appended to `out`.
    pub fn neighbor_positions(&self, c: Cell, out: &mut Vec<u32>) {
        for dr in -self.max_offset..=self.max_offset {
            if let Ok(k) = self.rows.binary_search_by_key(&(c.0 + dr), |e| e.0) {
                let cols = &self.rows[k].1;
                let start = cols.partition_point(|&(x, _)| x < c.1 - self.max_offset);
                for &(cc, pos) in &cols[start..] {
                    if cc > c.1 + self.max_offset {
                        break;
                    }
                    if dr == 0 && cc == c.1 {
                        continue;
                    }
                    out.push(pos);
                }
            }
        }
    }

    /// Occupied neighbor cells N(C) themselves.
    pub fn neighbors_of(&self, c: Cell) -> Vec<Cell> {
        let mut pos = Vec::new();
        self.neighbor_positions(c, &mut pos);
        pos.into_iter().map(|p| self.occupied.by_pos(p as usize).0).collect()
    }
}

/// Walk the sorted order outward from the anchor and stop at the first
/// coordinate gap > r; returns the allowed [min, max] coordinate range.
fn prune_range(coords: &[f64], order: &[usize], anchor_coord: f64, r: f64) -> (f64, f64) {
    // Position of the first point with coord >= anchor_coord that is the
    // anchor side; the anchor itself is in the order.
    let pos = order.partition_point(|&i| coords[i] < anchor_coord);
    let mut hi = anchor_coord;
    let mut cur = anchor_coord;
    for &i in &order[pos..] {
        if coords[i] - cur > r {
            break;
        }
        cur = coords[i];
        hi = cur;
    }
    let mut lo = anchor_coord;
    cur = anchor_coord;
    for &i in order[..pos].iter().rev() {
        if cur - coords[i] > r {
            break;
        }
        cur = coords[i];
        lo = cur;
    }
    (lo, hi)
}

fn build_grid_inner(ps: &PointSet, s: usize, r: f64, side: f64, max_offset: i32) -> Grid {
    let n = ps.len();
    let xs: Vec<f64> = ps.pts.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = ps.pts.iter().map(|p| p.y).collect();
    let ax = xs[s];
    let ay = ys[s];
    let (x_lo, x_hi) = prune_range(&xs, &ps.by_x, ax, r);
    let (y_lo, y_hi) = prune_range(&ys, &ps.by_y, ay, r);

    let mut cell_of = vec![None; n];
    let mut live_points = Vec::new();
    // Assign in by_x order so each cell's point list stays x-sorted after the
    // stable group-by below.
    let mut tagged: Vec<(Cell, usize)> = Vec::with_capacity(n);
    for &i in &ps.by_x {
        let (x, y) = (xs[i], ys[i]);
        if x < x_lo || x > x_hi || y < y_lo || y > y_hi {
            continue;
        }
        // Boundary rule: a point on a vertical edge belongs to the right
        // cell, on a horizontal edge to the top cell — floor() does exactly
        // that with lines at anchor + k·side.
        let col = ((x - ax) / side).floor() as i32;
        let row = ((y - ay) / side).floor() as i32;
        cell_of[i] = Some((row, col));
        tagged.push(((row, col), i));
        live_points.push(i);
    }
    tagged.sort_by_key(|&(c, _)| c);
    let mut grouped: Vec<(Cell, Vec<usize>)> = Vec::new();
    {
        let mut it = tagged.into_iter().peekable();
        while let Some((c, i)) = it.next() {
            let mut pts = vec![i];
            while let Some(&(c2, j)) = it.peek() {
                if c2 != c {
                    break;
                }
                pts.push(j);
                it.next();
            }
            grouped.push((c, pts));
        }
    }
    let occupied = CellMap::from_sorted(grouped);

    // Row index over the occupied cells (already (row, col)-sorted) so each
    // neighbor lookup is a handful of binary searches instead of per-offset
    // map lookups.
    let mut rows: Vec<(i32, Vec<(i32, u32)>)> = Vec::new();
    for (pos, &(row, col)) in occupied.keys().enumerate() {
        match rows.last_mut() {
            Some((r0, cols)) if *r0 == row => cols.push((col, pos as u32)),
            _ => rows.push((row, vec![(col, pos as u32)])),
        }
    }

    let (col_min, col_max, row_min, row_max) = occupied.keys().fold(
        (i32::MAX, i32::MIN, i32::MAX, i32::MIN),
        |(cl, ch, rl, rh), &(row, col)| (cl.min(col), ch.max(col), rl.min(row), rh.max(row)),
    );
    let v_lines: Vec<f64> = (col_min..=col_max + 1).map(|k| ax + k as f64 * side).collect();
    let h_lines: Vec<f64> = (row_min..=row_max + 1).map(|k| ay + k as f64 * side).collect();

    Grid {
        r,
        side,
        anchor: s,
        max_offset,
        v_lines,
        h_lines,
        live_points,
        cell_of,
        occupied,
        rows,
    }
}

/// The L2 grid of side r/√2: any two points in one cell are within distance r.
pub fn build_grid(ps: &PointSet, s: usize, r: f64) -> Grid {
    build_grid_inner(ps, s, r, r * std::f64::consts::FRAC_1_SQRT_2, 2)
}

/// The L∞ grid of side r/2 over rotated (u,v) coordinates, used by the L1
/// decision oracles. Cells three apart can still touch at distance exactly r,
/// hence the 7×7 neighbor patch.
pub fn build_grid_linf(ps_rot: &PointSet, s: usize, r: f64) -> Grid {
    build_grid_inner(ps_rot, s, r, r * 0.5, 3)
}

/// Minimum Euclidean distance between the two closed cell squares.
pub fn min_cell_distance(c: Cell, c2: Cell, grid: &Grid) -> f64 {
    let gap = |a: i32, b: i32| -> f64 {
        let d = (a - b).abs();
        if d <= 1 {
            0.0
        } else {
            (d - 1) as f64 * grid.side
        }
    };
    gap(c.0, c2.0).hypot(gap(c.1, c2.1))
}

/// The on-demand sorted matrix of one directional sweep: entry(i,j) =
/// vals[i]/j for j = 1..=cols, with vals[i] = √2·(coordinate offset of point i
/// from the anchor) ≥ 0. Entries are non-increasing along a row and the row
/// multiset over all rows covers every radius at which a point can change
/// column in that sweep direction.
#[derive(Clone, Debug)]
pub struct SortedMatrixSpec {
    pub vals: Vec<f64>,
    pub cols: usize,
}

impl SortedMatrixSpec {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        debug_assert!(j >= 1 && j <= self.cols);
        self.vals[i] / j as f64
    }

    pub fn all_entries(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.vals.len() * self.cols);
        for &a in &self.vals {
            for j in 1..=self.cols {
                out.push(a / j as f64);
            }
        }
        out
    }
}

/// Shrink the interval until no matrix entry lies strictly inside, without
/// materializing the matrix: each round counts, per row, the entries inside
/// the open interval (a contiguous j-range since rows are monotone), tests the
/// weighted median of row-middle representatives, and discards at least a
/// quarter of the surviving entries. O(log(m·cols)) oracle calls.
pub fn sorted_matrix_shrink(
    spec: &SortedMatrixSpec,
    d: &DecisionOracle,
    iv: RadiusInterval,
) -> RadiusInterval {
    let mut lo = iv.lo;
    let mut hi = iv.hi;
    let cols = spec.cols;
    if cols == 0 {
        return iv;
    }
    loop {
        // Per-row j-range of entries strictly inside (lo, hi).
        let mut samples: Vec<(f64, u64)> = Vec::new();
        let mut total: u64 = 0;
        for &a in &spec.vals {
            if a <= 0.0 {
                continue;
            }
            let jmin = if hi.is_finite() { (a / hi).floor() as i64 + 1 } else { 1 };
            let jmax = if lo > 0.0 { (a / lo).ceil() as i64 - 1 } else { cols as i64 };
            let jmin = jmin.max(1);
            let jmax = jmax.min(cols as i64);
            if jmin > jmax {
                continue;
            }
            // Floating-point guard: the open-interval bounds must hold for the
            // representative; entries equal to lo/hi are outside.
            let jmid = (jmin + jmax) / 2;
            let v = a / jmid as f64;
            if v > lo && v < hi {
                samples.push((v, (jmax - jmin + 1) as u64));
                total += (jmax - jmin + 1) as u64;
            }
        }
        if samples.is_empty() || total == 0 {
            break;
        }
        samples.sort_unstable_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut acc = 0u64;
        let mut med = samples[0].0;
        for &(v, w) in &samples {
            acc += w;
            if acc * 2 >= total {
                med = v;
                break;
            }
        }
        if d.feasible(med) {
            hi = med;
        } else {
            lo = med;
        }
    }
    RadiusInterval { lo, hi }
}

/// Exhaustive fallback with the same contract (for differential testing).
pub fn sorted_matrix_shrink_exhaustive(
    spec: &SortedMatrixSpec,
    d: &DecisionOracle,
    iv: RadiusInterval,
) -> RadiusInterval {
    interval_shrink(iv, &spec.all_entries(), d)
}

fn sweep_spec(ps: &PointSet, s: usize, axis_x: bool, positive: bool) -> SortedMatrixSpec {
    let coord = |i: usize| if axis_x { ps.pts[i].x } else { ps.pts[i].y };
    let c0 = coord(s);
    let mut vals = Vec::new();
    for i in 0..ps.len() {
        let delta = if positive { coord(i) - c0 } else { c0 - coord(i) };
        if delta >= 0.0 {
            vals.push(std::f64::consts::SQRT_2 * delta);
        }
    }
    let m = vals.len();
    SortedMatrixSpec { vals, cols: 2 * m }
}

/// Shrink the interval so the grid's combinatorial structure is constant over
/// its open interior, and build the grid at the interior midpoint. Four
/// sorted-matrix sweeps (right/left of the anchor on x, above/below on y) fix
/// column/row membership; an extra shrink over consecutive coordinate gaps
/// fixes the pruned point set (a gap threshold need not be a matrix entry).
pub fn parametric_grid(
    ps: &PointSet,
    s: usize,
    d: &DecisionOracle,
    iv: RadiusInterval,
) -> (Grid, RadiusInterval) {
    let mut iv = iv;
    for &(axis_x, positive) in &[(true, true), (true, false), (false, true), (false, false)] {
        let spec = sweep_spec(ps, s, axis_x, positive);
        iv = sorted_matrix_shrink(&spec, d, iv);
    }
    let mut gaps = Vec::with_capacity(2 * ps.len());
    for w in ps.by_x.windows(2) {
        gaps.push(ps.pts[w[1]].x - ps.pts[w[0]].x);
    }
    for w in ps.by_y.windows(2) {
        gaps.push(ps.pts[w[1]].y - ps.pts[w[0]].y);
    }
    iv = interval_shrink(iv, &gaps, d);
    d.note("parametric_grid", iv);
    (build_grid(ps, s, iv.midpoint()), iv)
}
