//! Reverse shortest path under L2: the quadratic baseline and the parametric
//! grid/envelope solvers (two unweighted variants and the weighted one).
//!
//! All parametric solvers share one schema: maintain a half-open interval
//! (lo, hi] containing r*, with lo infeasible (or 0) and hi feasible; shrink
//! it with batched critical values until the algorithm's combinatorial course
//! is constant over the open interior. The run at the interior midpoint then
//! comes out infeasible (everything strictly below r* is), so r* = hi.

use crate::core_geom::{
    dist, interval_shrink, pairwise_distances, verify_rstar, DecisionOracle, Metric, Point,
    PointSet, RadiusInterval,
};
use crate::envelope::{solve_subproblems_parametric, SubInstance};
use crate::grid::{parametric_grid, Cell, Grid};
use crate::sssp::{canon_sorted, cell_pair_within_r, sep_line_between, DecideSpec, Decider};
use crate::{oracle_cap, Result, UdgError};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

/// One reverse-shortest-path question: minimize r subject to
/// "shortest s–t path length in G_r ≤ λ" (hops if unweighted).
#[derive(Clone, Copy, Debug)]
pub struct RspQuery {
    pub metric: Metric,
    pub weighted: bool,
    pub lambda: f64,
    pub s: usize,
    pub t: usize,
    /// Require the budget from s to every point instead of just t.
    pub single_source: bool,
}

impl RspQuery {
    pub fn decide_spec(&self) -> DecideSpec {
        DecideSpec {
            metric: self.metric,
            weighted: self.weighted,
            lambda: self.lambda,
            s: self.s,
            t: self.t,
            single_source: self.single_source,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RspOptions {
    /// Record all parametric intervals on the oracle (see `RspOutcome::trace`).
    pub trace: bool,
    /// Snap and cross-check the result against the pairwise distance oracle
    /// (only honored when n fits under `UDG_ORACLE_CAP`).
    pub verify: bool,
    /// Override for the large-cell point-count threshold.
    pub threshold: Option<f64>,
    /// Expander degree for the L1 staged solver (None = default 64).
    pub expander_degree: Option<usize>,
    /// Seed for the L1 solver's randomized candidate generation.
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct RspOutcome {
    pub r_star: f64,
    pub decision_calls: u64,
    /// BFS rounds executed by the unweighted parametric solvers (0 elsewhere).
    pub bfs_steps: u64,
    /// Compression stages run by the L1 staged solver (0 elsewhere).
    pub stages: u64,
    /// Whether the L1 solver hit its stage cap and fell back to bisection.
    pub fallback: bool,
    pub oracle_checked: bool,
    pub trace: Vec<(&'static str, RadiusInterval)>,
}

pub(crate) fn trivial_outcome(ps: &PointSet, q: &RspQuery) -> Option<RspOutcome> {
    let lone = ps.len() == 1;
    if (q.s == q.t && !q.single_source || lone) && q.lambda >= 0.0 {
        return Some(RspOutcome {
            r_star: 0.0,
            decision_calls: 0,
            bfs_steps: 0,
            stages: 0,
            fallback: false,
            oracle_checked: false,
            trace: Vec::new(),
        });
    }
    None
}

pub(crate) fn finish(
    mut r_star: f64,
    ps: &PointSet,
    q: &RspQuery,
    opts: &RspOptions,
    d: &DecisionOracle,
    bfs_steps: u64,
) -> Result<RspOutcome> {
    let mut oracle_checked = false;
    if opts.verify && ps.len() >= 2 && ps.len() <= oracle_cap() {
        r_star = verify_rstar(r_star, ps, q.metric, d, 1e-9)?;
        oracle_checked = true;
    }
    Ok(RspOutcome {
        r_star,
        decision_calls: d.call_count(),
        bfs_steps,
        stages: 0,
        fallback: false,
        oracle_checked,
        trace: d.take_trace(),
    })
}

/// Decision-oracle view of a query; tests use `trace` to audit interval
/// soundness of the parametric subroutines.
pub fn make_decision_oracle<'a>(dec: &'a Decider<'a>, trace: bool) -> DecisionOracle<'a> {
    dec.oracle(trace)
}

/// Baseline: r* is a pairwise distance, so search those directly with the
/// decision oracle. Small inputs materialize and binary-search the sorted
/// distance list; large ones repeat O(n²) passes that count the candidates
/// still inside the interval and keep an evenly strided sample to shrink
/// against, collecting everything once few enough remain (O(n) memory,
/// O(log) oracle calls).
pub fn rsp_baseline(ps: &PointSet, q: RspQuery, opts: RspOptions) -> Result<RspOutcome> {
    if let Some(out) = trivial_outcome(ps, &q) {
        return Ok(out);
    }
    let dec = Decider::new(ps, q.decide_spec())?;
    let d = make_decision_oracle(&dec, opts.trace);
    let rmax = ps.radius_upper_bound(q.metric);
    if !d.feasible(rmax) {
        return Err(UdgError::Infeasible(format!(
            "no radius satisfies the budget lambda={}",
            q.lambda
        )));
    }
    let n = ps.len();
    let r_star = if n <= oracle_cap() {
        let mut vals = pairwise_distances(ps, q.metric)?;
        vals.dedup();
        let mut lo = 0usize;
        let mut hi = vals.len() - 1; // rmax feasible ⇒ the largest value is
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if d.feasible(vals[mid]) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        vals[lo]
    } else {
        let mut iv = RadiusInterval::new(0.0, rmax);
        let collect_cap = 1024;
        let mut stride = (n * (n - 1) / 2 / 32).max(1);
        loop {
            // One pass: count interior candidates, stride-sample them, and
            // opportunistically collect them all while few enough.
            let mut count = 0usize;
            let mut until_sample = stride;
            let mut sample = Vec::new();
            let mut all: Option<Vec<f64>> = Some(Vec::new());
            let mut visit = |v: f64| {
                count += 1;
                until_sample -= 1;
                if until_sample == 0 {
                    sample.push(v);
                    until_sample = stride;
                }
                if all.as_ref().is_some_and(|a| a.len() >= collect_cap) {
                    all = None;
                }
                if let Some(a) = all.as_mut() {
                    a.push(v);
                }
            };
            match q.metric {
                Metric::L2 => {
                    let (lo2, hi2) = (iv.lo * iv.lo, iv.hi * iv.hi);
                    for i in 0..n {
                        let pi = ps.pts[i];
                        for j in i + 1..n {
                            let dx = pi.x - ps.pts[j].x;
                            let dy = pi.y - ps.pts[j].y;
                            let d2 = dx * dx + dy * dy;
                            if d2 > lo2 && d2 < hi2 {
                                visit(d2.sqrt());
                            }
                        }
                    }
                }
                Metric::L1 => {
                    for i in 0..n {
                        let pi = ps.pts[i];
                        for j in i + 1..n {
                            let v = (pi.x - ps.pts[j].x).abs() + (pi.y - ps.pts[j].y).abs();
                            if v > iv.lo && v < iv.hi {
                                visit(v);
                            }
                        }
                    }
                }
            }
            drop(visit);
            if let Some(a) = all {
                iv = interval_shrink(iv, &a, &d);
                break;
            }
            iv = interval_shrink(iv, &sample, &d);
            // Fixed schedule (not count-based) so the number of passes is a
            // deterministic function of n.
            let _ = count;
            stride = (stride / 32).max(1);
        }
        iv.hi
    };
    finish(r_star, ps, &q, &opts, &d, 0)
}

fn default_threshold_unweighted(n: usize) -> f64 {
    let nf = n as f64;
    if n < 4 {
        return f64::INFINITY;
    }
    (nf / nf.log2()).powf(0.75).max(1.0)
}

fn default_threshold_weighted(n: usize) -> f64 {
    let nf = n as f64;
    if n < 4 {
        return f64::INFINITY;
    }
    nf.powf(0.75) * nf.log2().powf(1.5)
}

/// Enumerate each listed cell pair's inter-cell distances and shrink the
/// interval until none lies strictly inside, so those pairs' adjacency is
/// constant over the open interior. Rounds of per-pair active-range medians,
/// one batched shrink per round.
pub fn small_pair_preprocess(
    ps: &PointSet,
    g: &Grid,
    pairs: &[(Cell, Cell)],
    d: &DecisionOracle,
    iv: RadiusInterval,
) -> RadiusInterval {
    let mut lists: Vec<Vec<f64>> = Vec::with_capacity(pairs.len());
    for &(a, b) in pairs {
        let mut l = Vec::new();
        for &i in &g.occupied[&a] {
            for &j in &g.occupied[&b] {
                l.push(dist(ps.pts[i], ps.pts[j], Metric::L2));
            }
        }
        l.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
        lists.push(l);
    }
    let mut iv = iv;
    loop {
        let mut reps = Vec::new();
        for l in &lists {
            let a = l.partition_point(|&v| v <= iv.lo);
            let b = l.partition_point(|&v| v < iv.hi);
            if a < b {
                reps.push(l[(a + b) / 2]);
            }
        }
        if reps.is_empty() {
            break;
        }
        iv = interval_shrink(iv, &reps, d);
    }
    d.note("small_pair_preprocess", iv);
    iv
}

struct BfsEngine<'a> {
    ps: &'a PointSet,
    g: Grid,
    iv: RadiusInterval,
    /// Cells with at least `threshold` points; pairs touching one are solved
    /// parametrically, all others non-parametrically after preprocessing.
    large: BTreeSet<Cell>,
}

impl<'a> BfsEngine<'a> {
    /// One parametric BFS; returns (steps, iv). The reachability outcome is
    /// deliberately unused — the answer is always iv.hi (see module docs).
    fn run(&mut self, q: &RspQuery, d: &DecisionOracle) -> u64 {
        let n = self.ps.len();
        let max_steps = q.lambda.floor() as u64;
        let mut hops = vec![u64::MAX; n];
        let mut frontier = Vec::new();
        if self.g.cell_of[q.s].is_some() {
            hops[q.s] = 0;
            frontier.push(q.s);
        }
        let mut steps = 0u64;
        while !frontier.is_empty() && steps < max_steps {
            if !q.single_source && hops[q.t] != u64::MAX {
                break;
            }
            steps += 1;
            let mut next = Vec::new();
            let mut by_cell: BTreeMap<Cell, Vec<usize>> = BTreeMap::new();
            for &i in &frontier {
                by_cell.entry(self.g.cell_of[i].unwrap()).or_default().push(i);
            }
            // Whole-cell absorption first: same-cell points are adjacent at
            // every radius in the interval.
            for cell in by_cell.keys() {
                for &p in &self.g.occupied[cell] {
                    if hops[p] == u64::MAX {
                        hops[p] = steps;
                        next.push(p);
                    }
                }
            }
            // Bichromatic cell pairs; blues fixed before the batch solve.
            let mut insts: Vec<SubInstance> = Vec::new();
            let mut direct: Vec<(Vec<usize>, Vec<bool>)> = Vec::new();
            let mid = self.iv.midpoint();
            for (&cell, fpts) in &by_cell {
                for c2 in self.g.neighbors_of(cell) {
                    let blues: Vec<usize> = self.g.occupied[&c2]
                        .iter()
                        .copied()
                        .filter(|&p| hops[p] == u64::MAX)
                        .collect();
                    if blues.is_empty() {
                        continue;
                    }
                    if !self.large.contains(&cell) && !self.large.contains(&c2) {
                        // Small pair: adjacency constant over the interval
                        // after preprocessing; resolve at the midpoint.
                        let flags =
                            cell_pair_within_r(self.ps, &self.g, cell, fpts, c2, &blues, mid);
                        direct.push((blues, flags));
                    } else {
                        let sep = sep_line_between(self.ps, &self.g, cell, c2);
                        let reds: Vec<(Point, usize)> = canon_sorted(self.ps, fpts, sep)
                            .into_iter()
                            .map(|(p, pos)| (p, fpts[pos]))
                            .collect();
                        let cblues: Vec<(Point, usize)> = canon_sorted(self.ps, &blues, sep)
                            .into_iter()
                            .map(|(p, pos)| (p, blues[pos]))
                            .collect();
                        insts.push(SubInstance { reds, blues: cblues });
                    }
                }
            }
            if !insts.is_empty() {
                let (flags, iv2) = solve_subproblems_parametric(&insts, d, self.iv);
                self.iv = iv2;
                for (k, inst) in insts.iter().enumerate() {
                    for (j, &(_, p)) in inst.blues.iter().enumerate() {
                        if flags[k][j] && hops[p] == u64::MAX {
                            hops[p] = steps;
                            next.push(p);
                        }
                    }
                }
            }
            for (blues, flags) in direct {
                for (j, &p) in blues.iter().enumerate() {
                    if flags[j] && hops[p] == u64::MAX {
                        hops[p] = steps;
                        next.push(p);
                    }
                }
            }
            if next.is_empty() {
                steps -= 1;
                break;
            }
            frontier = next;
        }
        steps
    }
}

fn parametric_unweighted(
    ps: &PointSet,
    q: RspQuery,
    opts: RspOptions,
    classify: bool,
) -> Result<RspOutcome> {
    if q.metric != Metric::L2 || q.weighted {
        return Err(UdgError::BadInput(
            "this solver handles unweighted L2 queries".into(),
        ));
    }
    if let Some(out) = trivial_outcome(ps, &q) {
        return Ok(out);
    }
    let dec = Decider::new(ps, q.decide_spec())?;
    let d = make_decision_oracle(&dec, opts.trace);
    let rmax = ps.radius_upper_bound(Metric::L2);
    if !d.feasible(rmax) {
        return Err(UdgError::Infeasible(format!(
            "no radius satisfies the budget lambda={}",
            q.lambda
        )));
    }
    let iv = RadiusInterval::new(0.0, rmax);
    let (g, mut iv) = parametric_grid(ps, q.s, &d, iv);
    let mut large = BTreeSet::new();
    if classify {
        let thr = opts.threshold.unwrap_or_else(|| default_threshold_unweighted(ps.len()));
        for (&c, pts) in &g.occupied {
            if pts.len() as f64 >= thr {
                large.insert(c);
            }
        }
        let mut pairs = Vec::new();
        for &c in g.occupied.keys() {
            if large.contains(&c) {
                continue;
            }
            for c2 in g.neighbors_of(c) {
                if c < c2 && !large.contains(&c2) {
                    pairs.push((c, c2));
                }
            }
        }
        iv = small_pair_preprocess(ps, &g, &pairs, &d, iv);
    } else {
        // No classification: every pair is solved parametrically.
        for &c in g.occupied.keys() {
            large.insert(c);
        }
    }
    let mut engine = BfsEngine { ps, g, iv, large };
    let steps = engine.run(&q, &d);
    finish(engine.iv.hi, ps, &q, &opts, &d, steps)
}

/// Unweighted parametric solver, every cell pair handled parametrically.
pub fn rsp_unweighted_algo1(ps: &PointSet, q: RspQuery, opts: RspOptions) -> Result<RspOutcome> {
    parametric_unweighted(ps, q, opts, false)
}

/// Unweighted parametric solver with cell classification: pairs of two small
/// cells are fully preprocessed (their adjacency becomes interval-constant)
/// and then resolved non-parametrically; only pairs touching a large cell go
/// through the parametric subproblem machinery.
pub fn rsp_unweighted_algo2(ps: &PointSet, q: RspQuery, opts: RspOptions) -> Result<RspOutcome> {
    parametric_unweighted(ps, q, opts, true)
}

/// WX-style partition, parametric: assign each v the first u (in the given
/// order) within distance r, consistently for every r in the open output
/// interval. Levelwise divide and conquer on U; each level is one batched
/// subproblem solve, the unit base is one batched membership shrink.
pub fn partition_v_parametric(
    us: &[Point],
    vs: &[Point],
    sep: crate::envelope::SepLine,
    d: &DecisionOracle,
    iv: RadiusInterval,
) -> (Vec<Option<usize>>, RadiusInterval) {
    let mut iv = iv;
    let mut out = vec![None; vs.len()];
    let cvs: Vec<Point> = vs.iter().map(|&v| sep.canon(v)).collect();
    let mut nodes: Vec<(usize, usize, Vec<usize>)> =
        vec![(0, us.len(), (0..vs.len()).collect())];
    while nodes.iter().any(|n| n.1 - n.0 > 1 && !n.2.is_empty()) {
        let mut insts = Vec::new();
        let mut inst_nodes = Vec::new();
        for (k, &(ulo, uhi, ref active)) in nodes.iter().enumerate() {
            if uhi - ulo <= 1 || active.is_empty() {
                continue;
            }
            let mid = (ulo + uhi) / 2;
            let mut reds: Vec<(Point, usize)> =
                us[ulo..mid].iter().map(|&u| (sep.canon(u), 0)).collect();
            reds.sort_by(|a, b| (a.0.x, a.0.y).partial_cmp(&(b.0.x, b.0.y)).unwrap());
            let mut blues: Vec<(Point, usize)> = active.iter().map(|&v| (cvs[v], v)).collect();
            blues.sort_by(|a, b| (a.0.x, a.0.y).partial_cmp(&(b.0.x, b.0.y)).unwrap());
            insts.push(SubInstance { reds, blues });
            inst_nodes.push(k);
        }
        let (flags, iv2) = solve_subproblems_parametric(&insts, d, iv);
        iv = iv2;
        let mut next = Vec::new();
        let mut split: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for (i, &k) in inst_nodes.iter().enumerate() {
            let entry = split.entry(k).or_default();
            for (j, &(_, v)) in insts[i].blues.iter().enumerate() {
                if flags[i][j] {
                    entry.0.push(v);
                } else {
                    entry.1.push(v);
                }
            }
        }
        for (k, node) in nodes.into_iter().enumerate() {
            if let Some((mut left, mut right)) = split.remove(&k) {
                left.sort_unstable();
                right.sort_unstable();
                let mid = (node.0 + node.1) / 2;
                next.push((node.0, mid, left));
                next.push((mid, node.1, right));
            } else {
                next.push(node);
            }
        }
        nodes = next;
    }
    // Unit base: each v's membership against its single remaining u flips at
    // their distance — exclude all of those, then assign at the midpoint.
    let mut cand = Vec::new();
    for &(ulo, _, ref active) in &nodes {
        let cu = sep.canon(us[ulo]);
        for &v in active {
            cand.push(dist(cvs[v], cu, Metric::L2));
        }
    }
    iv = interval_shrink(iv, &cand, d);
    let mid = iv.midpoint();
    for &(ulo, _, ref active) in &nodes {
        let cu = sep.canon(us[ulo]);
        for &v in active {
            if dist(cvs[v], cu, Metric::L2) <= mid {
                out[v] = Some(ulo);
            }
        }
    }
    d.note("partition_V_parametric", iv);
    (out, iv)
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
        other
            .0
            .partial_cmp(&self.0)
            .unwrap()
            .then_with(|| other.1.cmp(&self.1))
    }
}

/// Weighted parametric solver: grid stabilization, full preprocessing of
/// small cell pairs, then Dijkstra whose adjacency questions on large pairs
/// are answered parametrically (edge weights are plain distances and never
/// depend on r).
pub fn rsp_weighted(ps: &PointSet, q: RspQuery, opts: RspOptions) -> Result<RspOutcome> {
    if q.metric != Metric::L2 || !q.weighted {
        return Err(UdgError::BadInput("this solver handles weighted L2 queries".into()));
    }
    if let Some(out) = trivial_outcome(ps, &q) {
        return Ok(out);
    }
    let dec = Decider::new(ps, q.decide_spec())?;
    let d = make_decision_oracle(&dec, opts.trace);
    let rmax = ps.radius_upper_bound(Metric::L2);
    if !d.feasible(rmax) {
        return Err(UdgError::Infeasible(format!(
            "no radius satisfies the budget lambda={}",
            q.lambda
        )));
    }
    let iv = RadiusInterval::new(0.0, rmax);
    let (g, mut iv) = parametric_grid(ps, q.s, &d, iv);
    let n = ps.len();
    let thr = opts.threshold.unwrap_or_else(|| default_threshold_weighted(n));
    let mut large = BTreeSet::new();
    for (&c, pts) in &g.occupied {
        if pts.len() as f64 >= thr {
            large.insert(c);
        }
    }
    let mut pairs = Vec::new();
    for &c in g.occupied.keys() {
        if large.contains(&c) {
            continue;
        }
        for c2 in g.neighbors_of(c) {
            if c < c2 && !large.contains(&c2) {
                pairs.push((c, c2));
            }
        }
    }
    iv = small_pair_preprocess(ps, &g, &pairs, &d, iv);

    let mut distv = vec![f64::INFINITY; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    if g.cell_of[q.s].is_some() {
        distv[q.s] = 0.0;
        heap.push(HeapItem(0.0, q.s));
    }
    while let Some(HeapItem(dz, z)) = heap.pop() {
        if settled[z] || dz > distv[z] {
            continue;
        }
        if dz > q.lambda {
            break;
        }
        settled[z] = true;
        if !q.single_source && z == q.t {
            break;
        }
        let cell = g.cell_of[z].unwrap();
        for &p in &g.occupied[&cell] {
            if !settled[p] && p != z {
                let nd = dz + dist(ps.pts[z], ps.pts[p], Metric::L2);
                if nd < distv[p] {
                    distv[p] = nd;
                    heap.push(HeapItem(nd, p));
                }
            }
        }
        for c2 in g.neighbors_of(cell) {
            let blues: Vec<usize> =
                g.occupied[&c2].iter().copied().filter(|&p| !settled[p]).collect();
            if blues.is_empty() {
                continue;
            }
            let covered: Vec<bool> = if !large.contains(&cell) && !large.contains(&c2) {
                let mid = iv.midpoint();
                blues
                    .iter()
                    .map(|&p| dist(ps.pts[z], ps.pts[p], Metric::L2) <= mid)
                    .collect()
            } else {
                let sep = sep_line_between(ps, &g, cell, c2);
                let vs: Vec<Point> = blues.iter().map(|&p| ps.pts[p]).collect();
                let (assign, iv2) = partition_v_parametric(&[ps.pts[z]], &vs, sep, &d, iv);
                iv = iv2;
                assign.iter().map(|a| a.is_some()).collect()
            };
            for (j, &p) in blues.iter().enumerate() {
                if covered[j] {
                    let nd = dz + dist(ps.pts[z], ps.pts[p], Metric::L2);
                    if nd < distv[p] {
                        distv[p] = nd;
                        heap.push(HeapItem(nd, p));
                    }
                }
            }
        }
    }
    finish(iv.hi, ps, &q, &opts, &d, 0)
}
