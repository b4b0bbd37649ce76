//! Single-source shortest paths in unit-disk graphs at a fixed radius, and
//! the `decide` feasibility wrapper ("is the s–t shortest path ≤ λ at radius
//! r?") that all parametric solvers binary-search against.
//!
//! Unweighted distances come from a grid BFS whose per-step work is: absorb
//! whole cells (any two points in one cell are adjacent), then resolve each
//! (frontier cell, neighbor cell) pair bichromatically — brute force when the
//! pair is small, upper arc envelope otherwise. Weighted distances come from a
//! grid-restricted Dijkstra (relaxations only reach the ≤ max_offset cell
//! patch).

use crate::core_geom::{dist, DecisionOracle, Metric, Point, PointSet, REL_TOL};
use crate::envelope::{below_envelope, build_envelope, SepLine};
use crate::grid::{build_grid, build_grid_linf, Cell, Grid};
use crate::rsp_l1::rotate45;
use crate::{oracle_cap, Result, UdgError};
use std::collections::{BinaryHeap, BTreeMap};

/// Distances from the source and the number of BFS rounds executed (0 for
/// Dijkstra). Unreachable points hold +∞; unweighted distances are hop counts.
#[derive(Clone, Debug)]
pub struct SsspResult {
    pub dist: Vec<f64>,
    pub steps: u64,
}

/// The axis-parallel grid line separating two distinct cells (they differ in
/// column or row by at least 1; columns win when both differ). The boundary
/// rule (points on a line belong to the right/top cell) makes red-side
/// membership strict.
pub fn sep_line_between(ps: &PointSet, g: &Grid, red: Cell, blue: Cell) -> SepLine {
    let ax = ps.pts[g.anchor].x;
    let ay = ps.pts[g.anchor].y;
    if blue.1 != red.1 {
        if blue.1 > red.1 {
            SepLine::Vertical { x: ax + blue.1 as f64 * g.side, blues_right: true }
        } else {
            SepLine::Vertical { x: ax + (blue.1 + 1) as f64 * g.side, blues_right: false }
        }
    } else if blue.0 > red.0 {
        SepLine::Horizontal { y: ay + blue.0 as f64 * g.side, blues_above: true }
    } else {
        SepLine::Horizontal { y: ay + (blue.0 + 1) as f64 * g.side, blues_above: false }
    }
}

/// Canonicalize point indices and sort by canonical x, remembering each
/// point's position in the input slice.
pub fn canon_sorted(ps: &PointSet, idx: &[usize], sep: SepLine) -> Vec<(Point, usize)> {
    let mut v: Vec<(Point, usize)> = idx
        .iter()
        .enumerate()
        .map(|(pos, &i)| (sep.canon(ps.pts[i]), pos))
        .collect();
    v.sort_by(|a, b| (a.0.x, a.0.y).partial_cmp(&(b.0.x, b.0.y)).unwrap());
    v
}

/// Per blue point (aligned with `blues`): is some red within L2 distance r?
/// The two index sets must come from distinct cells of `g`.
pub fn cell_pair_within_r(
    ps: &PointSet,
    g: &Grid,
    red_cell: Cell,
    reds: &[usize],
    blue_cell: Cell,
    blues: &[usize],
    r: f64,
) -> Vec<bool> {
    if reds.len() * blues.len() <= 1024 {
        return blues
            .iter()
            .map(|&b| reds.iter().any(|&a| dist(ps.pts[a], ps.pts[b], Metric::L2) <= r))
            .collect();
    }
    let sep = sep_line_between(ps, g, red_cell, blue_cell);
    let creds = canon_sorted(ps, reds, sep);
    let cblues = canon_sorted(ps, blues, sep);
    let env = build_envelope(&creds, r);
    let flags = below_envelope(&env, &cblues);
    let mut out = vec![false; blues.len()];
    for (k, &(_, pos)) in cblues.iter().enumerate() {
        out[pos] = flags[k];
    }
    out
}

/// Per blue: is some red within L∞ distance r? Requires all reds to share one
/// grid cell of side r/2 (v-span < 2r), which reduces the two-sided v-window
/// test to window-max/min checks; both inputs are rotated-coordinate points.
/// O(|R| log |R| + |B| log |B|).
pub fn cell_pair_within_r_linf(
    ps: &PointSet,
    reds: &[usize],
    blues: &[usize],
    r: f64,
) -> Vec<bool> {
    if reds.len() * blues.len() <= 1024 {
        return blues
            .iter()
            .map(|&b| {
                reds.iter().any(|&a| {
                    let du = (ps.pts[a].x - ps.pts[b].x).abs();
                    let dv = (ps.pts[a].y - ps.pts[b].y).abs();
                    du.max(dv) <= r
                })
            })
            .collect();
    }
    let mut rs: Vec<(f64, f64)> = reds.iter().map(|&i| (ps.pts[i].x, ps.pts[i].y)).collect();
    rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut bs: Vec<(f64, f64, usize)> = blues
        .iter()
        .enumerate()
        .map(|(pos, &i)| (ps.pts[i].x, ps.pts[i].y, pos))
        .collect();
    bs.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());

    let mut out = vec![false; blues.len()];
    let (mut lo, mut hi) = (0usize, 0usize); // reds in [bu−r, bu+r] are rs[lo..hi]
    let mut max_dq: std::collections::VecDeque<usize> = Default::default();
    let mut min_dq: std::collections::VecDeque<usize> = Default::default();
    for &(bu, bv, pos) in &bs {
        while hi < rs.len() && rs[hi].0 <= bu + r {
            while max_dq.back().map_or(false, |&k| rs[k].1 <= rs[hi].1) {
                max_dq.pop_back();
            }
            max_dq.push_back(hi);
            while min_dq.back().map_or(false, |&k| rs[k].1 >= rs[hi].1) {
                min_dq.pop_back();
            }
            min_dq.push_back(hi);
            hi += 1;
        }
        while lo < hi && rs[lo].0 < bu - r {
            if max_dq.front() == Some(&lo) {
                max_dq.pop_front();
            }
            if min_dq.front() == Some(&lo) {
                min_dq.pop_front();
            }
            lo += 1;
        }
        if lo < hi {
            let vmax = rs[*max_dq.front().unwrap()].1;
            let vmin = rs[*min_dq.front().unwrap()].1;
            // Reds span < 2r in v, so they cannot straddle the window: these
            // two one-sided checks imply a red inside [bv−r, bv+r].
            out[pos] = vmax >= bv - r && vmin <= bv + r;
        }
    }
    out
}

/// Grid BFS from s in G_r. `linf` selects L∞ edges (rotated-coordinate point
/// set with an r/2 grid) instead of L2 (r/√2 grid). Stops early after
/// `max_steps` rounds or once `target` is reached.
pub fn bfs_unweighted(
    ps: &PointSet,
    g: &Grid,
    r: f64,
    s: usize,
    max_steps: Option<u64>,
    target: Option<usize>,
    linf: bool,
) -> SsspResult {
    let n = ps.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut frontier = Vec::new();
    if g.cell_of[s].is_some() {
        dist[s] = 0.0;
        frontier.push(s);
    }
    let mut steps = 0u64;
    let limit = max_steps.unwrap_or(u64::MAX);
    let mut blues: Vec<usize> = Vec::new();
    let mut npos: Vec<u32> = Vec::new();
    // Per-cell point bounding boxes and uncovered counts: most of the ≤48
    // neighbor-cell resolutions die on an O(1) gap or coverage test.
    let ncells = g.occupied.len();
    let bboxes: Vec<(f64, f64, f64, f64)> = (0..ncells).map(|i| g.occupied.bbox(ps, i)).collect();
    let mut uncovered: Vec<u32> = (0..ncells).map(|i| g.occupied.by_pos(i).1.len() as u32).collect();
    let pos_of = |c: Cell| g.occupied.pos(c).expect("occupied cell");
    if g.cell_of[s].is_some() {
        uncovered[pos_of(g.cell_of[s].unwrap())] -= 1;
    }
    while !frontier.is_empty() && steps < limit {
        if target.map_or(false, |t| dist[t].is_finite()) {
            break;
        }
        steps += 1;
        let mut next = Vec::new();
        // Group the frontier by cell: sort, then walk runs.
        frontier.sort_unstable_by_key(|&i| g.cell_of[i]);
        let mut lo = 0;
        while lo < frontier.len() {
            let cell = g.cell_of[frontier[lo]].expect("frontier point must be in the grid");
            let mut hi = lo + 1;
            while hi < frontier.len() && g.cell_of[frontier[hi]] == Some(cell) {
                hi += 1;
            }
            let fpts = &frontier[lo..hi];
            lo = hi;
            let mut fb = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
            for &a in fpts {
                let p = ps.pts[a];
                fb = (fb.0.min(p.x), fb.1.max(p.x), fb.2.min(p.y), fb.3.max(p.y));
            }
            // Whole-cell absorption: everything in the frontier's cell is
            // adjacent to any frontier point there.
            let cpos = pos_of(cell);
            if uncovered[cpos] > 0 {
                for &q in g.occupied.by_pos(cpos).1 {
                    if dist[q].is_infinite() {
                        dist[q] = steps as f64;
                        uncovered[cpos] -= 1;
                        next.push(q);
                    }
                }
            }
            npos.clear();
            g.neighbor_positions(cell, &mut npos);
            for &pos in &npos {
                let pos = pos as usize;
                if uncovered[pos] == 0 {
                    continue;
                }
                let bb = bboxes[pos];
                let gx = (bb.0 - fb.1).max(fb.0 - bb.1).max(0.0);
                let gy = (bb.2 - fb.3).max(fb.2 - bb.3).max(0.0);
                let gap = if linf { gx.max(gy) } else { gx.hypot(gy) };
                if gap > r {
                    continue;
                }
                let (c2, c2_pts) = g.occupied.by_pos(pos);
                if fpts.len() * c2_pts.len() <= 1024 {
                    // Small pair: brute force in place, no scratch buffers.
                    for &q in c2_pts {
                        if dist[q].is_finite() {
                            continue;
                        }
                        let pq = ps.pts[q];
                        let hit = fpts.iter().any(|&a| {
                            let pa = ps.pts[a];
                            if linf {
                                (pa.x - pq.x).abs().max((pa.y - pq.y).abs()) <= r
                            } else {
                                dist_l2(pa, pq) <= r
                            }
                        });
                        if hit {
                            dist[q] = steps as f64;
                            uncovered[pos] -= 1;
                            next.push(q);
                        }
                    }
                    continue;
                }
                blues.clear();
                blues.extend(c2_pts.iter().copied().filter(|&q| dist[q].is_infinite()));
                if blues.is_empty() {
                    continue;
                }
                let flags = if linf {
                    cell_pair_within_r_linf(ps, fpts, &blues, r)
                } else {
                    cell_pair_within_r(ps, g, cell, fpts, c2, &blues, r)
                };
                for (k, &q) in blues.iter().enumerate() {
                    if flags[k] && dist[q].is_infinite() {
                        dist[q] = steps as f64;
                        uncovered[pos] -= 1;
                        next.push(q);
                    }
                }
            }
        }
        if next.is_empty() {
            // The round discovered nothing; don't count it.
            steps -= 1;
            break;
        }
        frontier = next;
    }
    SsspResult { dist, steps }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Min-heap behavior in std's max-heap: smaller (dist, index) wins.
        other
            .0
            .partial_cmp(&self.0)
            .unwrap()
            .then_with(|| other.1.cmp(&self.1))
    }
}

/// Grid-restricted Dijkstra in G_r with edge weights = metric distances
/// (L∞ over rotated coordinates when `linf`). `budget` stops the search once
/// the smallest unsettled distance exceeds it.
pub fn wx_weighted(
    ps: &PointSet,
    g: &Grid,
    r: f64,
    s: usize,
    budget: Option<f64>,
    target: Option<usize>,
    linf: bool,
) -> SsspResult {
    let n = ps.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    let edge_len = |a: usize, b: usize| -> f64 {
        if linf {
            let du = (ps.pts[a].x - ps.pts[b].x).abs();
            let dv = (ps.pts[a].y - ps.pts[b].y).abs();
            du.max(dv)
        } else {
            dist_l2(ps.pts[a], ps.pts[b])
        }
    };
    if g.cell_of[s].is_some() {
        dist[s] = 0.0;
        heap.push(HeapItem(0.0, s));
    }
    let mut npos: Vec<u32> = Vec::new();
    while let Some(HeapItem(dz, z)) = heap.pop() {
        if settled[z] || dz > dist[z] {
            continue;
        }
        if budget.map_or(false, |b| dz > b) {
            break;
        }
        settled[z] = true;
        if target == Some(z) {
            break;
        }
        let cell = g.cell_of[z].unwrap();
        let mut relax = |q: usize, heap: &mut BinaryHeap<HeapItem>| {
            let w = edge_len(z, q);
            if w <= r {
                let nd = dz + w;
                if nd < dist[q] {
                    dist[q] = nd;
                    heap.push(HeapItem(nd, q));
                }
            }
        };
        for &q in &g.occupied[&cell] {
            if !settled[q] && q != z {
                relax(q, &mut heap);
            }
        }
        npos.clear();
        g.neighbor_positions(cell, &mut npos);
        for &pos in &npos {
            for &q in g.occupied.by_pos(pos as usize).1 {
                if !settled[q] {
                    relax(q, &mut heap);
                }
            }
        }
    }
    SsspResult { dist, steps: 0 }
}

fn dist_l2(a: Point, b: Point) -> f64 {
    dist(a, b, Metric::L2)
}

/// WX-style partition: given U sorted by increasing tentative distance and a
/// blue set V on the other side of `sep`, assign each v the smallest i with
/// ‖u_i − v‖ ≤ r (None if no u covers v). Divide and conquer on U: vs that
/// are below the envelope of the first half resolve there. O((|U|+|V|) log |U|)
/// envelope work.
pub fn partition_v(
    us: &[Point],
    vs: &[Point],
    sep: SepLine,
    r: f64,
) -> Vec<Option<usize>> {
    let mut out = vec![None; vs.len()];
    let cvs: Vec<(Point, usize)> = vs.iter().enumerate().map(|(k, &v)| (sep.canon(v), k)).collect();
    let active: Vec<usize> = (0..vs.len()).collect();
    partition_rec(us, &cvs, sep, r, &active, 0, us.len(), &mut out);
    out
}

fn partition_rec(
    us: &[Point],
    cvs: &[(Point, usize)],
    sep: SepLine,
    r: f64,
    active: &[usize],
    ulo: usize,
    uhi: usize,
    out: &mut Vec<Option<usize>>,
) {
    if active.is_empty() || ulo >= uhi {
        return;
    }
    if uhi - ulo == 1 {
        let cu = sep.canon(us[ulo]);
        for &k in active {
            if dist_l2(cvs[k].0, cu) <= r {
                out[cvs[k].1] = Some(ulo);
            }
        }
        return;
    }
    let mid = (ulo + uhi) / 2;
    let covered: Vec<bool> = if (mid - ulo) * active.len() <= 256 {
        active
            .iter()
            .map(|&k| us[ulo..mid].iter().any(|&u| dist_l2(cvs[k].0, sep.canon(u)) <= r))
            .collect()
    } else {
        let mut creds: Vec<(Point, usize)> =
            us[ulo..mid].iter().map(|&u| (sep.canon(u), 0)).collect();
        creds.sort_by(|a, b| (a.0.x, a.0.y).partial_cmp(&(b.0.x, b.0.y)).unwrap());
        let env = build_envelope(&creds, r);
        let mut blues: Vec<(Point, usize)> = active.iter().map(|&k| (cvs[k].0, k)).collect();
        blues.sort_by(|a, b| (a.0.x, a.0.y).partial_cmp(&(b.0.x, b.0.y)).unwrap());
        let flags = below_envelope(&env, &blues);
        let mut cov = vec![false; active.len()];
        let posmap: BTreeMap<usize, usize> =
            active.iter().enumerate().map(|(pos, &k)| (k, pos)).collect();
        for (j, &(_, k)) in blues.iter().enumerate() {
            cov[posmap[&k]] = flags[j];
        }
        cov
    };
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (pos, &k) in active.iter().enumerate() {
        if covered[pos] {
            left.push(k);
        } else {
            right.push(k);
        }
    }
    partition_rec(us, cvs, sep, r, &left, ulo, mid, out);
    partition_rec(us, cvs, sep, r, &right, mid, uhi, out);
}

/// Brute-force reference for `partition_v` (no separation requirement).
pub fn partition_v_brute(us: &[Point], vs: &[Point], r: f64) -> Vec<Option<usize>> {
    vs.iter()
        .map(|&v| us.iter().position(|&u| dist_l2(u, v) <= r))
        .collect()
}

/// Additive-weight nearest neighbor with insertions: minimizes
/// weight(p) + ‖q − p‖ over stored points. Logarithmic method: power-of-two
/// buckets merged on insert, linear scans inside each bucket.
#[derive(Default, Clone, Debug)]
pub struct AwnnIndex {
    buckets: Vec<Vec<(Point, f64, usize)>>,
}

impl AwnnIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, p: Point, weight: f64, id: usize) {
        let mut carry = vec![(p, weight, id)];
        let mut level = 0;
        loop {
            if level == self.buckets.len() {
                self.buckets.push(carry);
                return;
            }
            if self.buckets[level].is_empty() {
                self.buckets[level] = carry;
                return;
            }
            let mut merged = std::mem::take(&mut self.buckets[level]);
            merged.append(&mut carry);
            carry = merged;
            level += 1;
        }
    }

    /// Best (weight + distance, id) over all stored points, smallest id on ties.
    pub fn nearest(&self, q: Point) -> Option<(f64, usize)> {
        self.nearest_filtered(q, f64::INFINITY)
    }

    /// Like `nearest`, but only points within metric distance r of q qualify.
    pub fn nearest_within(&self, q: Point, r: f64) -> Option<(f64, usize)> {
        self.nearest_filtered(q, r)
    }

    fn nearest_filtered(&self, q: Point, r: f64) -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for b in &self.buckets {
            for &(p, w, id) in b {
                let d = dist_l2(p, q);
                if d <= r {
                    let v = w + d;
                    if best.map_or(true, |(bv, bi)| (v, id) < (bv, bi)) {
                        best = Some((v, id));
                    }
                }
            }
        }
        best
    }
}

/// Explicit-graph O(n²) reference SSSP, gated by `UDG_ORACLE_CAP`.
pub fn reference_sssp(
    ps: &PointSet,
    m: Metric,
    weighted: bool,
    r: f64,
    s: usize,
) -> Result<Vec<f64>> {
    let n = ps.len();
    let cap = oracle_cap();
    if n > cap {
        return Err(UdgError::OracleCap(n, cap));
    }
    let adj = |a: usize, b: usize| dist(ps.pts[a], ps.pts[b], m) <= r;
    let mut dist_out = vec![f64::INFINITY; n];
    dist_out[s] = 0.0;
    if !weighted {
        let mut frontier = vec![s];
        let mut step = 0.0;
        while !frontier.is_empty() {
            step += 1.0;
            let mut next = Vec::new();
            for &z in &frontier {
                for q in 0..n {
                    if dist_out[q].is_infinite() && adj(z, q) {
                        dist_out[q] = step;
                        next.push(q);
                    }
                }
            }
            frontier = next;
        }
    } else {
        let mut settled = vec![false; n];
        for _ in 0..n {
            let mut z = usize::MAX;
            for i in 0..n {
                if !settled[i]
                    && dist_out[i].is_finite()
                    && (z == usize::MAX || dist_out[i] < dist_out[z])
                {
                    z = i;
                }
            }
            if z == usize::MAX {
                break;
            }
            settled[z] = true;
            for q in 0..n {
                if !settled[q] && adj(z, q) {
                    let nd = dist_out[z] + dist(ps.pts[z], ps.pts[q], m);
                    if nd < dist_out[q] {
                        dist_out[q] = nd;
                    }
                }
            }
        }
    }
    Ok(dist_out)
}

/// What a feasibility query asks: which metric, hop counts or lengths, the
/// budget λ, the source, and either one target or all of them.
#[derive(Clone, Copy, Debug)]
pub struct DecideSpec {
    pub metric: Metric,
    pub weighted: bool,
    pub lambda: f64,
    pub s: usize,
    pub t: usize,
    pub single_source: bool,
}

/// A reusable decision context: validates the spec once and caches the
/// rotated point set for L1 queries.
pub struct Decider<'a> {
    ps: &'a PointSet,
    rot: Option<PointSet>,
    pub spec: DecideSpec,
}

impl<'a> Decider<'a> {
    pub fn new(ps: &'a PointSet, spec: DecideSpec) -> Result<Self> {
        let n = ps.len();
        if spec.s >= n || (!spec.single_source && spec.t >= n) {
            return Err(UdgError::BadInput(format!(
                "terminal out of range (n={n}, s={}, t={})",
                spec.s, spec.t
            )));
        }
        if !spec.lambda.is_finite() || spec.lambda < 0.0 {
            return Err(UdgError::BadInput(format!("bad lambda {}", spec.lambda)));
        }
        let rot = if spec.metric == Metric::L1 { Some(rotate45(ps)) } else { None };
        Ok(Decider { ps, rot, spec })
    }

    /// Is the (hop or length) budget met at radius r? Monotone in r.
    pub fn feasible(&self, r: f64) -> bool {
        let sp = self.spec;
        if !(r > 0.0) {
            return !sp.single_source && sp.s == sp.t || self.ps.len() == 1;
        }
        let hop_budget = sp.lambda.floor() as u64;
        if !sp.weighted && hop_budget == 0 {
            return !sp.single_source && sp.s == sp.t || self.ps.len() == 1;
        }
        // Probes arrive from frames that round independently of the original
        // coordinates (the rotated frame for L1, canonical subproblem frames
        // for the parametric L2 solvers), so a critical value can sit a few
        // ulps below the edge length it represents. Widen the threshold by one
        // relative epsilon so such probes land on the feasible side.
        let (work_ps, re, linf): (&PointSet, f64, bool) = match sp.metric {
            Metric::L2 => (self.ps, r * (1.0 + REL_TOL), false),
            Metric::L1 => (self.rot.as_ref().unwrap(), r * (1.0 + REL_TOL), true),
        };
        let g = if linf {
            build_grid_linf(work_ps, sp.s, re)
        } else {
            build_grid(work_ps, sp.s, re)
        };
        let target = if sp.single_source { None } else { Some(sp.t) };
        let dist_vec = if sp.weighted {
            wx_weighted(work_ps, &g, re, sp.s, Some(sp.lambda), target, linf).dist
        } else {
            bfs_unweighted(work_ps, &g, re, sp.s, Some(hop_budget), target, linf).dist
        };
        let budget = if sp.weighted { sp.lambda * (1.0 + REL_TOL) } else { hop_budget as f64 };
        if sp.single_source {
            dist_vec.iter().all(|&d| d <= budget)
        } else {
            dist_vec[sp.t] <= budget
        }
    }

    /// A `DecisionOracle` view over this decider.
    pub fn oracle(&'a self, trace: bool) -> DecisionOracle<'a> {
        if trace {
            DecisionOracle::with_trace(move |r| self.feasible(r))
        } else {
            DecisionOracle::new(move |r| self.feasible(r))
        }
    }
}

/// One-shot feasibility query.
pub fn decide(ps: &PointSet, spec: DecideSpec, r: f64) -> Result<bool> {
    Ok(Decider::new(ps, spec)?.feasible(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut st = seed;
        move || {
            st = st.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((st >> 33) % 1_000_000) as f64 / 1_000_000.0
        }
    }

    fn random_ps(rnd: &mut impl FnMut() -> f64, n: usize, scale: f64) -> PointSet {
        PointSet::new((0..n).map(|_| p(rnd() * scale, rnd() * scale)).collect())
    }

    #[test]
    fn bfs_line_of_points() {
        let ps = PointSet::new((0..6).map(|i| p(i as f64, 0.0)).collect());
        let g = build_grid(&ps, 0, 1.0);
        let res = bfs_unweighted(&ps, &g, 1.0, 0, None, None, false);
        for i in 0..6 {
            assert_eq!(res.dist[i], i as f64);
        }
        assert_eq!(res.steps, 5);
    }

    #[test]
    fn bfs_respects_max_steps_and_target() {
        let ps = PointSet::new((0..6).map(|i| p(i as f64, 0.0)).collect());
        let g = build_grid(&ps, 0, 1.0);
        let res = bfs_unweighted(&ps, &g, 1.0, 0, Some(2), None, false);
        assert!(res.steps <= 2);
        assert!(res.dist[5].is_infinite());
        let res2 = bfs_unweighted(&ps, &g, 1.0, 0, None, Some(3), false);
        assert_eq!(res2.dist[3], 3.0);
        assert!(res2.steps <= 4);
    }

    #[test]
    fn bfs_matches_reference_l2() {
        let mut rnd = lcg(31);
        for trial in 0..40 {
            let n = 8 + (trial % 5) * 16;
            let ps = random_ps(&mut rnd, n, 4.0);
            let r = 0.3 + rnd();
            let g = build_grid(&ps, 0, r);
            let got = bfs_unweighted(&ps, &g, r, 0, None, None, false).dist;
            let want = reference_sssp(&ps, Metric::L2, false, r, 0).unwrap();
            assert_eq!(got, want, "trial {trial} r={r}");
        }
    }

    #[test]
    fn bfs_matches_reference_l1() {
        let mut rnd = lcg(57);
        for trial in 0..40 {
            let n = 8 + (trial % 5) * 16;
            let ps = random_ps(&mut rnd, n, 4.0);
            let r = 0.3 + rnd();
            let rot = rotate45(&ps);
            let g = build_grid_linf(&rot, 0, r);
            let got = bfs_unweighted(&rot, &g, r, 0, None, None, true).dist;
            let want = reference_sssp(&ps, Metric::L1, false, r, 0).unwrap();
            assert_eq!(got, want, "trial {trial} r={r}");
        }
    }

    #[test]
    fn dijkstra_matches_reference() {
        let mut rnd = lcg(73);
        for trial in 0..40 {
            let n = 8 + (trial % 5) * 16;
            let ps = random_ps(&mut rnd, n, 4.0);
            let r = 0.3 + rnd();
            for metric in [Metric::L2, Metric::L1] {
                let want = reference_sssp(&ps, metric, true, r, 0).unwrap();
                let got = match metric {
                    Metric::L2 => {
                        let g = build_grid(&ps, 0, r);
                        wx_weighted(&ps, &g, r, 0, None, None, false).dist
                    }
                    Metric::L1 => {
                        let rot = rotate45(&ps);
                        let g = build_grid_linf(&rot, 0, r);
                        wx_weighted(&rot, &g, r, 0, None, None, true).dist
                    }
                };
                for i in 0..n {
                    assert!(
                        (got[i] - want[i]).abs() <= 1e-9 * (1.0 + want[i].abs())
                            || (got[i].is_infinite() && want[i].is_infinite()),
                        "trial {trial} {metric:?} i={i}: {} vs {}",
                        got[i],
                        want[i]
                    );
                }
            }
        }
    }

    #[test]
    fn linf_pair_matches_brute() {
        let mut rnd = lcg(91);
        for trial in 0..100 {
            // Reds confined to an r/2 cell, blues anywhere nearby.
            let r = 0.4 + rnd();
            let (cu, cv) = (rnd(), rnd());
            let pts: Vec<Point> = (0..80)
                .map(|i| {
                    if i < 40 {
                        p(cu + rnd() * r / 2.0, cv + rnd() * r / 2.0)
                    } else {
                        p(cu + (rnd() - 0.5) * 3.0 * r, cv + (rnd() - 0.5) * 3.0 * r)
                    }
                })
                .collect();
            let ps = PointSet::new(pts);
            let reds: Vec<usize> = (0..40).collect();
            let blues: Vec<usize> = (40..80).collect();
            let got = cell_pair_within_r_linf(&ps, &reds, &blues, r);
            let want: Vec<bool> = blues
                .iter()
                .map(|&b| {
                    reds.iter().any(|&a| {
                        (ps.pts[a].x - ps.pts[b].x)
                            .abs()
                            .max((ps.pts[a].y - ps.pts[b].y).abs())
                            <= r
                    })
                })
                .collect();
            assert_eq!(got, want, "trial {trial}");
        }
    }

    #[test]
    fn partition_matches_brute() {
        let mut rnd = lcg(17);
        for trial in 0..60 {
            let r = 0.3 + rnd() * 0.8;
            let nu = 1 + (trial % 9);
            let nv = 1 + (trial % 13);
            // Us below y=0, vs above: a horizontal separating line.
            let us: Vec<Point> = (0..nu).map(|_| p(rnd() * 2.0, -rnd() - 1e-6)).collect();
            let vs: Vec<Point> = (0..nv).map(|_| p(rnd() * 2.0, rnd())).collect();
            let sep = SepLine::Horizontal { y: 0.0, blues_above: true };
            let got = partition_v(&us, &vs, sep, r);
            let want = partition_v_brute(&us, &vs, r);
            assert_eq!(got, want, "trial {trial} r={r}");
        }
    }

    #[test]
    fn awnn_matches_scan() {
        let mut rnd = lcg(3);
        let mut idx = AwnnIndex::new();
        let mut items: Vec<(Point, f64)> = Vec::new();
        for step in 0..200 {
            let q = p(rnd() * 2.0, rnd() * 2.0);
            let r = 0.5 + rnd();
            let want = items
                .iter()
                .enumerate()
                .filter(|(_, &(pt, _))| dist_l2(pt, q) <= r)
                .map(|(id, &(pt, w))| (w + dist_l2(pt, q), id))
                .min_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(idx.nearest_within(q, r), want, "step {step}");
            let np = p(rnd() * 2.0, rnd() * 2.0);
            let w = rnd();
            idx.insert(np, w, items.len());
            items.push((np, w));
        }
    }

    #[test]
    fn decide_basics() {
        let ps = PointSet::new((0..5).map(|i| p(i as f64, 0.0)).collect());
        let spec = DecideSpec {
            metric: Metric::L2,
            weighted: false,
            lambda: 4.0,
            s: 0,
            t: 4,
            single_source: false,
        };
        assert!(decide(&ps, spec, 1.0).unwrap());
        assert!(!decide(&ps, spec, 0.9).unwrap());
        let tight = DecideSpec { lambda: 3.0, ..spec };
        assert!(!decide(&ps, tight, 1.0).unwrap());
        assert!(decide(&ps, tight, 2.0).unwrap());
        // λ floors: 3.9 hops budget is still 3.
        let frac = DecideSpec { lambda: 3.9, ..spec };
        assert!(!decide(&ps, frac, 1.0).unwrap());
        let wspec = DecideSpec { weighted: true, lambda: 4.0, ..spec };
        assert!(decide(&ps, wspec, 1.0).unwrap());
        let wtight = DecideSpec { weighted: true, lambda: 3.9, ..spec };
        assert!(!decide(&ps, wtight, 1.0).unwrap());
        // A weighted path can never beat the straight-line distance 4.
        assert!(!decide(&ps, wtight, 10.0).unwrap());
        let ss = DecideSpec { single_source: true, lambda: 1.0, ..spec };
        assert!(!decide(&ps, ss, 1.0).unwrap());
        assert!(decide(&ps, ss, 4.0).unwrap());
        assert!(decide(&ps, DecideSpec { s: 2, t: 2, lambda: 0.0, ..spec }, 0.5).unwrap());
    }

    #[test]
    fn decide_monotone_random() {
        let mut rnd = lcg(201);
        for trial in 0..20 {
            let ps = random_ps(&mut rnd, 24, 3.0);
            let spec = DecideSpec {
                metric: if trial % 2 == 0 { Metric::L2 } else { Metric::L1 },
                weighted: trial % 3 == 0,
                lambda: 1.0 + rnd() * 6.0,
                s: 0,
                t: 23,
                single_source: trial % 5 == 0,
            };
            let dec = Decider::new(&ps, spec).unwrap();
            let mut prev = false;
            for k in 1..=12 {
                let cur = dec.feasible(k as f64 * 0.4);
                assert!(!prev || cur, "monotonicity violated, trial {trial} step {k}");
                prev = cur;
            }
        }
    }

    #[test]
    fn decide_rejects_bad_input() {
        let ps = PointSet::new(vec![p(0.0, 0.0), p(1.0, 0.0)]);
        let spec = DecideSpec {
            metric: Metric::L2,
            weighted: false,
            lambda: 1.0,
            s: 0,
            t: 5,
            single_source: false,
        };
        assert!(decide(&ps, spec, 1.0).is_err());
        assert!(decide(&ps, DecideSpec { t: 1, lambda: f64::NAN, ..spec }, 1.0).is_err());
    }

    #[test]
    fn reference_cap_guard() {
        let ps = PointSet::new((0..3).map(|i| p(i as f64, 0.0)).collect());
        std::env::set_var("UDG_ORACLE_CAP", "2");
        let res = reference_sssp(&ps, Metric::L2, false, 1.0, 0);
        std::env::remove_var("UDG_ORACLE_CAP");
        assert!(matches!(res, Err(UdgError::OracleCap(3, 2))));
    }
}
