//! L1 reverse shortest path and L1 distance selection via the rotated
//! (L∞) frame, a 2D range tree over canonical rectangles, and staged
//! pair-set compression.
//!
//! The value we search for is always a pairwise L1 distance. Instead of
//! materializing all O(n²) of them, we keep a half-open interval (lo, hi]
//! containing the answer and track the multiset Π∩I of pairwise distances
//! inside it implicitly: each point's annulus {q : lo < ‖p−q‖∞ ≤ hi} in the
//! rotated frame splits into four rectangles, and a range tree turns those
//! into O(log²n) canonical subsets. Stages sample candidate distances from
//! the grouped canonical pairs (expander edges between the two sides), shrink
//! the interval through the decision oracle, and repeat until at most n pairs
//! survive; those are enumerated exactly.

use crate::core_geom::{
    interval_shrink, DecisionOracle, Metric, Point, PointSet, RadiusInterval,
};
use crate::rsp_l2::{finish, make_decision_oracle, trivial_outcome, RspOptions, RspOutcome, RspQuery};
use crate::sssp::Decider;
use crate::{Result, UdgError};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Rotate into u = x+y, v = x−y: L1 distances become L∞ distances.
pub fn rotate45(ps: &PointSet) -> PointSet {
    PointSet::new(ps.pts.iter().map(|p| Point::new(p.x + p.y, p.x - p.y)).collect())
}

#[cfg(test)]
fn linf(p: Point, q: Point) -> f64 {
    (p.x - q.x).abs().max((p.y - q.y).abs())
}

/// |a − b| rounded toward +∞ instead of to nearest: the smallest float that
/// is ≥ the real difference.
fn abs_diff_up(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let s = a - b;
    let t = s - a;
    let e = (a - (s - t)) + (-b - t);
    let (s, e) = if s < 0.0 { (-s, -e) } else { (s, e) };
    if e > 0.0 { s.next_up() } else { s }
}

/// The pair's L∞ distance as the counting structure sees it: the smallest
/// radius whose square around `p` admits `q` under exact boundary
/// comparisons. Rounding the distance to nearest instead can land one ulp
/// below that threshold, and a candidate value the predicate refuses to
/// count derails the selection.
fn pair_value(p: Point, q: Point) -> f64 {
    abs_diff_up(p.x, q.x).max(abs_diff_up(p.y, q.y))
}

pub const DEFAULT_EXPANDER_DEGREE: usize = 64;

/// Per-stage cap on generated candidate distances. At large n a full-degree
/// pass over every canonical pair would dwarf the rest of the run; scaling
/// the expander rounds down (and striding complete enumerations) keeps each
/// stage bounded. Candidates are sound regardless — only the contraction
/// rate depends on how many we draw.
const EDGE_BUDGET: u64 = 1 << 21;

const STAGE_TAG: &str = "rsp_l1_stage";

/// One rectangle boundary: the exact real value `v + e` of `base ± radius`,
/// kept as a TwoSum pair. Rounding `base ± radius` to a single float would
/// make rect membership disagree (by one ulp) with distances computed as
/// rounded coordinate differences, and a counting predicate that is off by
/// one at a candidate value selects the wrong pair. With the residual kept,
/// every comparison against a stored coordinate is exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bound {
    pub v: f64,
    pub e: f64,
}

impl Bound {
    pub fn exact(v: f64) -> Self {
        Bound { v, e: 0.0 }
    }

    /// `base + off` with the exact rounding residual (Knuth's TwoSum).
    pub fn sum(base: f64, off: f64) -> Self {
        let v = base + off;
        let t = v - base;
        let e = (base - (v - t)) + (off - t);
        Bound { v, e }
    }

    // |e| <= ulp(v)/2, so v decides unless the floats are equal.
    fn gt(self, x: f64) -> bool {
        self.v > x || (self.v == x && self.e > 0.0)
    }
    fn ge(self, x: f64) -> bool {
        self.v > x || (self.v == x && self.e >= 0.0)
    }
    fn lt(self, x: f64) -> bool {
        self.v < x || (self.v == x && self.e < 0.0)
    }
    fn le(self, x: f64) -> bool {
        self.v < x || (self.v == x && self.e <= 0.0)
    }
}

/// Axis-aligned rectangle in the rotated frame with per-side open/closed
/// flags (true = inclusive).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub u_lo: Bound,
    pub u_lo_inc: bool,
    pub u_hi: Bound,
    pub u_hi_inc: bool,
    pub v_lo: Bound,
    pub v_lo_inc: bool,
    pub v_hi: Bound,
    pub v_hi_inc: bool,
}

impl Rect {
    pub fn contains(&self, u: f64, v: f64) -> bool {
        let lo_ok = |x: f64, b: Bound, inc: bool| if inc { b.le(x) } else { b.lt(x) };
        let hi_ok = |x: f64, b: Bound, inc: bool| if inc { b.ge(x) } else { b.gt(x) };
        lo_ok(u, self.u_lo, self.u_lo_inc)
            && hi_ok(u, self.u_hi, self.u_hi_inc)
            && lo_ok(v, self.v_lo, self.v_lo_inc)
            && hi_ok(v, self.v_hi, self.v_hi_inc)
    }
}

/// Decompose the annulus {q : a < ‖q−p‖∞ ≤ b} around `p` into up to four
/// disjoint rectangles (left, right, bottom, top). `b` is clamped to
/// `clamp`, so an unbounded interval still yields finite rectangles.
pub fn annulus_rects(p: Point, iv: RadiusInterval, clamp: f64) -> Vec<Rect> {
    let a = iv.lo;
    let b = iv.hi.min(clamp);
    if !(b > a) || a < 0.0 {
        return Vec::new();
    }
    vec![
        Rect {
            u_lo: Bound::sum(p.x, -b),
            u_lo_inc: true,
            u_hi: Bound::sum(p.x, -a),
            u_hi_inc: false,
            v_lo: Bound::sum(p.y, -b),
            v_lo_inc: true,
            v_hi: Bound::sum(p.y, b),
            v_hi_inc: true,
        },
        Rect {
            u_lo: Bound::sum(p.x, a),
            u_lo_inc: false,
            u_hi: Bound::sum(p.x, b),
            u_hi_inc: true,
            v_lo: Bound::sum(p.y, -b),
            v_lo_inc: true,
            v_hi: Bound::sum(p.y, b),
            v_hi_inc: true,
        },
        Rect {
            u_lo: Bound::sum(p.x, -a),
            u_lo_inc: true,
            u_hi: Bound::sum(p.x, a),
            u_hi_inc: true,
            v_lo: Bound::sum(p.y, -b),
            v_lo_inc: true,
            v_hi: Bound::sum(p.y, -a),
            v_hi_inc: false,
        },
        Rect {
            u_lo: Bound::sum(p.x, -a),
            u_lo_inc: true,
            u_hi: Bound::sum(p.x, a),
            u_hi_inc: true,
            v_lo: Bound::sum(p.y, a),
            v_lo_inc: false,
            v_hi: Bound::sum(p.y, b),
            v_hi_inc: true,
        },
    ]
}

/// A canonical subset: a contiguous, alignment-stable block `[lo, hi)` of the
/// v-sorted list at primary-tree node `node`. Equal refs from different
/// queries denote the same point set, which is what lets pairs be grouped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CanonicalRef {
    pub node: u32,
    pub lo: u32,
    pub hi: u32,
}

struct NodeLists {
    vs: Vec<f64>,
    ids: Vec<u32>,
}

/// Range tree: implicit segment tree over the u-sorted points; every node
/// stores its points v-sorted. Rectangle queries decompose into O(log n)
/// primary nodes, and within each node the v-range splits into O(log n)
/// aligned blocks (halving boundaries of the node's list), so the same
/// big blocks recur across queries.
pub struct RangeTree2D {
    m: usize,
    pub n: usize,
    us: Vec<f64>,
    nodes: Vec<NodeLists>,
}

fn lower_pos(arr: &[f64], bound: Bound, inclusive: bool) -> usize {
    if inclusive {
        arr.partition_point(|&x| bound.gt(x))
    } else {
        arr.partition_point(|&x| bound.ge(x))
    }
}

fn upper_pos(arr: &[f64], bound: Bound, inclusive: bool) -> usize {
    if inclusive {
        arr.partition_point(|&x| bound.ge(x))
    } else {
        arr.partition_point(|&x| bound.gt(x))
    }
}

impl RangeTree2D {
    pub fn new(ps: &PointSet) -> Self {
        let n = ps.len();
        let m = n.max(1).next_power_of_two();
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_by(|&i, &j| {
            let (p, q) = (ps.pts[i as usize], ps.pts[j as usize]);
            (p.x, p.y, i).partial_cmp(&(q.x, q.y, j)).unwrap()
        });
        let us: Vec<f64> = order.iter().map(|&i| ps.pts[i as usize].x).collect();
        let mut nodes: Vec<NodeLists> = (0..2 * m)
            .map(|_| NodeLists { vs: Vec::new(), ids: Vec::new() })
            .collect();
        for (slot, &id) in order.iter().enumerate() {
            nodes[m + slot].vs.push(ps.pts[id as usize].y);
            nodes[m + slot].ids.push(id);
        }
        for i in (1..m).rev() {
            let (a, b) = (2 * i, 2 * i + 1);
            let mut vs = Vec::with_capacity(nodes[a].vs.len() + nodes[b].vs.len());
            let mut ids = Vec::with_capacity(vs.capacity());
            let (mut x, mut y) = (0, 0);
            while x < nodes[a].vs.len() || y < nodes[b].vs.len() {
                let take_a = y >= nodes[b].vs.len()
                    || (x < nodes[a].vs.len()
                        && (nodes[a].vs[x], nodes[a].ids[x]) <= (nodes[b].vs[y], nodes[b].ids[y]));
                if take_a {
                    vs.push(nodes[a].vs[x]);
                    ids.push(nodes[a].ids[x]);
                    x += 1;
                } else {
                    vs.push(nodes[b].vs[y]);
                    ids.push(nodes[b].ids[y]);
                    y += 1;
                }
            }
            nodes[i] = NodeLists { vs, ids };
        }
        RangeTree2D { m, n, us, nodes }
    }

    /// Primary decomposition: heap indices of the O(log n) nodes whose
    /// leaf ranges tile the u-position range of the rectangle.
    fn primary_nodes(&self, rect: &Rect) -> Vec<usize> {
        let i0 = lower_pos(&self.us, rect.u_lo, rect.u_lo_inc);
        let i1 = upper_pos(&self.us, rect.u_hi, rect.u_hi_inc);
        let mut out = Vec::new();
        let (mut l, mut r) = (i0 + self.m, i1 + self.m);
        while l < r {
            if l & 1 == 1 {
                out.push(l);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                out.push(r);
            }
            l >>= 1;
            r >>= 1;
        }
        out
    }

    fn v_range(&self, node: usize, rect: &Rect) -> (usize, usize) {
        let vs = &self.nodes[node].vs;
        (
            lower_pos(vs, rect.v_lo, rect.v_lo_inc),
            upper_pos(vs, rect.v_hi, rect.v_hi_inc),
        )
    }

    pub fn count_in_rect(&self, rect: &Rect) -> u64 {
        let mut total = 0u64;
        for node in self.primary_nodes(rect) {
            let (j0, j1) = self.v_range(node, rect);
            total += (j1 - j0) as u64;
        }
        total
    }

    /// Ids (original indices) of all points in the rectangle.
    pub fn report(&self, rect: &Rect) -> Vec<u32> {
        let mut out = Vec::new();
        for node in self.primary_nodes(rect) {
            let (j0, j1) = self.v_range(node, rect);
            out.extend_from_slice(&self.nodes[node].ids[j0..j1]);
        }
        out
    }

    /// Disjoint canonical decomposition: O(log²n) refs whose point sets
    /// partition the rectangle's contents. Blocks within a node follow the
    /// halving boundaries of its list, so distinct queries share the big
    /// interior blocks.
    pub fn canonical_report(&self, rect: &Rect) -> Vec<CanonicalRef> {
        let mut out = Vec::new();
        for node in self.primary_nodes(rect) {
            let (j0, j1) = self.v_range(node, rect);
            if j0 >= j1 {
                continue;
            }
            let len = self.nodes[node].vs.len();
            let m2 = len.max(1).next_power_of_two();
            aligned_blocks(0, m2, j0, j1, &mut |a, b| {
                out.push(CanonicalRef { node: node as u32, lo: a as u32, hi: b as u32 })
            });
        }
        out
    }

    pub fn ref_points(&self, r: &CanonicalRef) -> &[u32] {
        &self.nodes[r.node as usize].ids[r.lo as usize..r.hi as usize]
    }
}

fn aligned_blocks(a: usize, b: usize, j0: usize, j1: usize, out: &mut impl FnMut(usize, usize)) {
    if j0 >= j1 {
        return;
    }
    if a == j0 && b == j1 {
        out(a, b);
        return;
    }
    let mid = (a + b) / 2;
    if j1 <= mid {
        aligned_blocks(a, mid, j0, j1, out);
    } else if j0 >= mid {
        aligned_blocks(mid, b, j0, j1, out);
    } else {
        aligned_blocks(a, mid, j0, mid, out);
        aligned_blocks(mid, b, mid, j1, out);
    }
}

/// One grouped incidence: the query points `ks` all received canonical
/// subset `lref` in their annulus decomposition.
#[derive(Clone, Debug)]
pub struct CanonicalPair {
    pub lref: CanonicalRef,
    pub ks: Vec<u32>,
}

/// Invert point→refs into ref→points. The resulting groups satisfy
/// Σ_g |K_g|·|L_g| = 2·|Π∩I| (each unordered pair in the annulus interval
/// appears once from each endpoint's query).
pub fn collect_pairs(
    tree: &RangeTree2D,
    rot: &PointSet,
    iv: RadiusInterval,
    clamp: f64,
) -> Vec<CanonicalPair> {
    let mut incid: Vec<(CanonicalRef, u32)> = Vec::new();
    for p in 0..rot.len() {
        for rect in annulus_rects(rot.pts[p], iv, clamp) {
            for r in tree.canonical_report(&rect) {
                incid.push((r, p as u32));
            }
        }
    }
    incid.sort_unstable();
    let mut out: Vec<CanonicalPair> = Vec::new();
    for (r, p) in incid {
        match out.last_mut() {
            Some(g) if g.lref == r => g.ks.push(p),
            _ => out.push(CanonicalPair { lref: r, ks: vec![p] }),
        }
    }
    out
}

fn mix(seed: u64, g: u64, i: u64) -> u64 {
    // splitmix64 over a combined key
    let mut z = seed ^ g.wrapping_mul(0x9e3779b97f4a7c15) ^ i.wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic bipartite expander-ish edge set via the configuration
/// model: `d` rounds, each assigning every A-vertex one B-stub from a
/// balanced cyclic pool, shuffled per round. Requires |B| ≤ |A| < 2|B|
/// for the stated degree bounds; duplicates are removed.
pub fn expander_edges(a: &[u32], b: &[u32], d: usize, seed: u64) -> Vec<(u32, u32)> {
    if a.is_empty() || b.is_empty() || d == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(a.len() * d);
    let mut offset = 0usize;
    for _ in 0..d {
        // Balanced stub pool: consecutive slice of the cyclic repetition of
        // B, so across rounds every B-vertex is used ⌈d|A|/|B|⌉ times at most.
        let mut stubs: Vec<u32> = (0..a.len()).map(|i| b[(offset + i) % b.len()]).collect();
        offset = (offset + a.len()) % b.len();
        stubs.shuffle(&mut rng);
        for (i, &s) in stubs.iter().enumerate() {
            edges.push((a[i], s));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    edges
}

/// Candidate distances from the grouped pairs. Each group's larger side is
/// cut into blocks of size [|B|, 2|B|); tiny blocks are enumerated
/// completely, the rest get expander edges. When the projected edge count
/// exceeds `budget` the rounds are scaled down and complete enumerations
/// strided, deterministically.
fn candidate_values(
    tree: &RangeTree2D,
    rot: &PointSet,
    pairs: &[CanonicalPair],
    degree: usize,
    seed: u64,
    budget: u64,
) -> Vec<f64> {
    let d = degree.max(1);
    let mut est: u128 = 0;
    let mut sides: Vec<(Vec<u32>, Vec<u32>)> = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let l = tree.ref_points(&pair.lref);
        let (a, b): (Vec<u32>, Vec<u32>) = if pair.ks.len() >= l.len() {
            (pair.ks.clone(), l.to_vec())
        } else {
            (l.to_vec(), pair.ks.clone())
        };
        let blocks = (a.len() / b.len()).max(1);
        let base = a.len() / blocks;
        est += blocks as u128 * (d as u128 * (base + 1) as u128).min(((base + 1) * b.len()) as u128);
        sides.push((a, b));
    }
    let scale = if est > budget as u128 { budget as f64 / est as f64 } else { 1.0 };
    let stride = (1.0 / scale).ceil().max(1.0) as usize;
    let d_eff = ((d as f64 * scale).round() as usize).max(1);
    let mut w = Vec::new();
    let mut phase = 0usize;
    for (g, (a, b)) in sides.iter().enumerate() {
        let blocks = (a.len() / b.len()).max(1);
        let base = a.len() / blocks;
        let rem = a.len() % blocks;
        let mut start = 0usize;
        for i in 0..blocks {
            let size = base + usize::from(i < rem);
            let ai = &a[start..start + size];
            start += size;
            if ai.is_empty() {
                continue;
            }
            let tot = ai.len() * b.len();
            if tot <= 2 * d * (ai.len() + b.len()) {
                // Complete enumeration (strided under budget pressure); the
                // phase carries the stride across blocks so sampling stays even.
                let mut c = phase;
                while c < tot {
                    let (x, y) = (ai[c / b.len()], b[c % b.len()]);
                    if x != y {
                        w.push(pair_value(rot.pts[x as usize], rot.pts[y as usize]));
                    }
                    c += stride;
                }
                phase = if tot > phase { (stride - (tot - phase) % stride) % stride } else { phase - tot };
            } else {
                for (x, y) in expander_edges(ai, b, d_eff, mix(seed, g as u64, i as u64)) {
                    if x != y {
                        w.push(pair_value(rot.pts[x as usize], rot.pts[y as usize]));
                    }
                }
            }
        }
    }
    w
}

/// Number of unordered pairs at L∞ distance ≤ r in the rotated frame
/// (= L1 distance ≤ r originally).
pub fn count_pairs_leq(tree: &RangeTree2D, rot: &PointSet, r: f64) -> u64 {
    if r < 0.0 {
        return 0;
    }
    let mut total = 0u64;
    for p in rot.pts.iter() {
        let rect = Rect {
            u_lo: Bound::sum(p.x, -r),
            u_lo_inc: true,
            u_hi: Bound::sum(p.x, r),
            u_hi_inc: true,
            v_lo: Bound::sum(p.y, -r),
            v_lo_inc: true,
            v_hi: Bound::sum(p.y, r),
            v_hi_inc: true,
        };
        total += tree.count_in_rect(&rect);
    }
    // every point counts itself (distance 0 ≤ r); each pair counted twice
    (total - rot.len() as u64) / 2
}

/// |Π∩I|: unordered pairs with distance in (iv.lo, min(iv.hi, clamp)].
pub fn count_pairs_in_interval(
    tree: &RangeTree2D,
    rot: &PointSet,
    iv: RadiusInterval,
    clamp: f64,
) -> u64 {
    let mut total = 0u64;
    for p in rot.pts.iter() {
        for rect in annulus_rects(*p, iv, clamp) {
            total += tree.count_in_rect(&rect);
        }
    }
    total / 2
}

pub fn stage_cap(n: usize) -> u64 {
    (4.0 * (n.max(2) as f64).log2()).ceil() as u64
}

fn bisect_mid(iv: RadiusInterval, integer: bool) -> Option<f64> {
    if integer {
        let mut m = ((iv.lo + iv.hi) * 0.5).floor();
        if m <= iv.lo {
            m = iv.lo.floor() + 1.0;
        }
        (m > iv.lo && m < iv.hi).then_some(m)
    } else {
        if iv.hi - iv.lo <= 1e-12 * iv.hi.abs().max(1.0) {
            return None;
        }
        Some(0.5 * (iv.lo + iv.hi))
    }
}

/// Core staged search. Invariants: `d` is monotone, `hi0` feasible, the
/// answer is a pairwise distance in (0, hi0]. Returns (value, stages,
/// fell back to bisection).
fn staged_search(
    rot: &PointSet,
    tree: &RangeTree2D,
    d: &DecisionOracle,
    hi0: f64,
    degree: usize,
    seed: u64,
    max_stages: u64,
) -> (f64, u64, bool) {
    let n = rot.len() as u64;
    let clamp = hi0;
    let mut iv = RadiusInterval::new(0.0, hi0);
    let mut stages = 0u64;
    let mut fallback = false;
    loop {
        let count = count_pairs_in_interval(tree, rot, iv, clamp);
        if count <= n {
            break;
        }
        if stages >= max_stages {
            fallback = true;
        }
        if !fallback {
            let pairs = collect_pairs(tree, rot, iv, clamp);
            let w = candidate_values(tree, rot, &pairs, degree, seed.wrapping_add(stages), EDGE_BUDGET);
            let iv2 = interval_shrink(iv, &w, d);
            d.note(STAGE_TAG, iv2);
            stages += 1;
            // A stage that moves nothing (massively duplicated distances)
            // would spin to the cap; bail to bisection right away.
            if iv2.lo == iv.lo && iv2.hi == iv.hi {
                fallback = true;
            }
            iv = iv2;
        }
        if fallback {
            let mut c = count_pairs_in_interval(tree, rot, iv, clamp);
            while c > n {
                match bisect_mid(iv, rot.integer_mode) {
                    None => break,
                    Some(m) => {
                        if d.feasible(m) {
                            iv = RadiusInterval::new(iv.lo, m);
                        } else {
                            iv = RadiusInterval::new(m, iv.hi);
                        }
                    }
                }
                c = count_pairs_in_interval(tree, rot, iv, clamp);
            }
            d.note(STAGE_TAG, iv);
            break;
        }
    }
    // Enumerate the survivors exactly and finish.
    let mut cands: Vec<f64> = Vec::new();
    for p in 0..rot.len() {
        for rect in annulus_rects(rot.pts[p], iv, clamp) {
            for id in tree.report(&rect) {
                cands.push(pair_value(rot.pts[p], rot.pts[id as usize]));
            }
        }
    }
    cands.sort_unstable_by(f64::total_cmp);
    cands.dedup();
    iv = interval_shrink(iv, &cands, d);
    d.note(STAGE_TAG, iv);
    (iv.hi, stages, fallback)
}

/// L1 reverse shortest path (weighted or hop-count) through the staged
/// pair-compression search.
pub fn rsp_l1(ps: &PointSet, q: RspQuery, opts: RspOptions) -> Result<RspOutcome> {
    if q.metric != Metric::L1 {
        return Err(UdgError::BadInput("rsp_l1 requires the L1 metric".into()));
    }
    if let Some(out) = trivial_outcome(ps, &q) {
        return Ok(out);
    }
    let dec = Decider::new(ps, q.decide_spec())?;
    let d = make_decision_oracle(&dec, opts.trace);
    let rmax = ps.radius_upper_bound(Metric::L1);
    if !d.feasible(rmax) {
        return Err(UdgError::Infeasible(format!(
            "no radius satisfies the budget lambda={}",
            q.lambda
        )));
    }
    let rot = rotate45(ps);
    let tree = RangeTree2D::new(&rot);
    let degree = opts.expander_degree.unwrap_or(DEFAULT_EXPANDER_DEGREE);
    let (r, stages, fallback) =
        staged_search(&rot, &tree, &d, rmax, degree, opts.seed, stage_cap(ps.len()));
    let mut out = finish(r, ps, &q, &opts, &d, 0)?;
    out.stages = stages;
    out.fallback = fallback;
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct SelectOutcome {
    pub value: f64,
    /// Calls made to the counting predicate.
    pub count_calls: u64,
    pub stages: u64,
    pub fallback: bool,
    pub trace: Vec<(&'static str, RadiusInterval)>,
}

/// k-th smallest pairwise L1 distance (1-based, duplicates counted), using
/// the same staged search with a counting predicate as the oracle.
pub fn l1_distance_select(ps: &PointSet, k: u64, opts: RspOptions) -> Result<SelectOutcome> {
    let n = ps.len() as u64;
    if n < 2 {
        return Err(UdgError::BadInput("selection needs at least two points".into()));
    }
    let total = n * (n - 1) / 2;
    if k < 1 || k > total {
        return Err(UdgError::BadInput(format!(
            "k={} out of range 1..={}",
            k, total
        )));
    }
    let rot = rotate45(ps);
    let tree = RangeTree2D::new(&rot);
    if count_pairs_leq(&tree, &rot, 0.0) >= k {
        return Ok(SelectOutcome {
            value: 0.0,
            count_calls: 1,
            stages: 0,
            fallback: false,
            trace: Vec::new(),
        });
    }
    let pred = |r: f64| count_pairs_leq(&tree, &rot, r) >= k;
    let d = if opts.trace {
        DecisionOracle::with_trace(pred)
    } else {
        DecisionOracle::new(pred)
    };
    let rmax = ps.radius_upper_bound(Metric::L1);
    let degree = opts.expander_degree.unwrap_or(DEFAULT_EXPANDER_DEGREE);
    let (value, stages, fallback) =
        staged_search(&rot, &tree, &d, rmax, degree, opts.seed, stage_cap(ps.len()));
    Ok(SelectOutcome {
        value,
        count_calls: d.call_count() + 1,
        stages,
        fallback,
        trace: d.take_trace(),
    })
}
