//! Bichromatic "is some red within distance r" machinery: the upper envelope
//! of equal-radius circular arcs above an axis-parallel separating line, plus
//! the parametric subroutines (structure critical values, batched parametric
//! sorting, arc-membership critical values) that keep the envelope outcome
//! constant over a radius interval containing r*.
//!
//! All envelope computations happen in a canonical frame: the separating line
//! is y = 0, reds strictly below, blues on or above. `SepLine::canon` maps
//! into that frame with an isometry, so distances are preserved.

use crate::core_geom::{dist, interval_shrink, DecisionOracle, Metric, Point, RadiusInterval, REL_TOL};
use spade::{DelaunayTriangulation, HasPosition, Point2, Triangulation};

#[derive(Clone, Copy, Debug)]
pub enum SepLine {
    Horizontal { y: f64, blues_above: bool },
    Vertical { x: f64, blues_right: bool },
}

impl SepLine {
    /// Isometry into the canonical frame (line y=0, blues above).
    pub fn canon(&self, p: Point) -> Point {
        match *self {
            SepLine::Horizontal { y, blues_above: true } => Point::new(p.x, p.y - y),
            SepLine::Horizontal { y, blues_above: false } => Point::new(p.x, y - p.y),
            SepLine::Vertical { x, blues_right: true } => Point::new(p.y, p.x - x),
            SepLine::Vertical { x, blues_right: false } => Point::new(p.y, x - p.x),
        }
    }
}

/// One arc of the upper envelope: the piece of the radius-r circle around
/// `center` (a red point, y < 0) that is exposed on [lo, hi].
#[derive(Clone, Copy, Debug)]
pub struct Seg {
    /// Caller-supplied id of the defining red point.
    pub red: usize,
    pub center: Point,
    /// Envelope start of this arc.
    pub lo: f64,
    /// Domain end of the arc (x where the circle meets the line); the
    /// envelope end is min(dom_hi, next seg's lo).
    pub dom_hi: f64,
    /// True iff `lo` is a crossing with the previous envelope arc (an
    /// envelope vertex) rather than the arc's own domain start.
    pub starts_at_crossing: bool,
}

#[derive(Clone, Debug)]
pub struct ArcEnvelope {
    pub r: f64,
    pub segs: Vec<Seg>,
}

impl ArcEnvelope {
    /// Envelope x-extent of seg k.
    pub fn cover(&self, k: usize) -> (f64, f64) {
        let hi = if k + 1 < self.segs.len() {
            self.segs[k].dom_hi.min(self.segs[k + 1].lo)
        } else {
            self.segs[k].dom_hi
        };
        (self.segs[k].lo, hi)
    }

    /// Breakpoints between consecutive arcs (x-coordinate and the two red ids).
    pub fn vertices(&self) -> Vec<(f64, usize, usize)> {
        let mut out = Vec::new();
        for k in 1..self.segs.len() {
            if self.segs[k].starts_at_crossing {
                out.push((self.segs[k].lo, self.segs[k - 1].red, self.segs[k].red));
            }
        }
        out
    }

    /// The seg spanning x, if any (boundaries inclusive).
    pub fn seg_at(&self, x: f64) -> Option<&Seg> {
        if self.segs.is_empty() {
            return None;
        }
        let k = self.segs.partition_point(|s| s.lo <= x);
        for idx in [k.wrapping_sub(1), k] {
            if idx < self.segs.len() {
                let (lo, hi) = self.cover(idx);
                if x >= lo && x <= hi {
                    return Some(&self.segs[idx]);
                }
            }
        }
        None
    }
}

/// Arc height above the line at x (caller guarantees |x − cx| ≤ r).
fn arc_y(center: Point, r: f64, x: f64) -> f64 {
    center.y + (r * r - (x - center.x) * (x - center.x)).max(0.0).sqrt()
}

/// The x at which arc `a` (right center) overtakes arc `t` (left center):
/// the circle intersection lying on both upper semicircles. None if the
/// graphs do not cross.
fn crossing_x(t: Point, a: Point, r: f64) -> Option<f64> {
    let dx = a.x - t.x;
    let dy = a.y - t.y;
    let d = dx.hypot(dy);
    if d < 1e-300 || d > 2.0 * r {
        return None;
    }
    let h2 = (r * r - d * d / 4.0).max(0.0).sqrt();
    let (mx, my) = ((t.x + a.x) / 2.0, (t.y + a.y) / 2.0);
    let (ux, uy) = (-dy / d, dx / d);
    let floor_y = t.y.max(a.y) - 1e-9 * r.max(1.0);
    let p1 = (mx + h2 * ux, my + h2 * uy);
    let p2 = (mx - h2 * ux, my - h2 * uy);
    let mut best: Option<(f64, f64)> = None;
    for (x, y) in [p1, p2] {
        if y >= floor_y && best.map_or(true, |(_, by)| y > by) {
            best = Some((x, y));
        }
    }
    best.map(|(x, _)| x)
}

/// Build the upper envelope of the radius-r arcs of `reds` (canonical frame,
/// y < 0, sorted by x; reds farther than r from the line contribute nothing).
pub fn build_envelope(reds: &[(Point, usize)], r: f64) -> ArcEnvelope {
    // Arcs with their domains; same-x reds keep only the highest (it
    // dominates the other everywhere).
    let mut arcs: Vec<(Point, usize, f64, f64)> = Vec::with_capacity(reds.len());
    for &(c, id) in reds {
        debug_assert!(c.y <= 0.0, "red on the wrong side of the line");
        if -c.y > r {
            continue;
        }
        let h = (r * r - c.y * c.y).max(0.0).sqrt();
        if let Some(last) = arcs.last_mut() {
            if last.0.x == c.x {
                if c.y > last.0.y {
                    *last = (c, id, c.x - h, c.x + h);
                }
                continue;
            }
        }
        arcs.push((c, id, c.x - h, c.x + h));
    }

    let mut segs: Vec<Seg> = Vec::with_capacity(arcs.len());
    for (c, id, alo, ahi) in arcs {
        let mut start = alo;
        let mut crossing = false;
        while let Some(t) = segs.last() {
            let ov_lo = t.lo.max(alo);
            let ov_hi = t.dom_hi.min(ahi);
            let start_rel = if let Some(x) = crossing_x(t.center, c, r) {
                alo.max(x.min(t.dom_hi))
            } else if ov_lo < ov_hi {
                // No graph crossing: one arc dominates the whole overlap.
                let x0 = 0.5 * (ov_lo + ov_hi);
                if arc_y(c, r, x0) > arc_y(t.center, r, x0) {
                    ov_lo
                } else {
                    ov_hi
                }
            } else {
                // Disjoint domains: the new arc starts on its own.
                alo.max(t.dom_hi.min(alo))
            };
            if start_rel <= t.lo {
                segs.pop();
                continue;
            }
            start = alo.max(start_rel);
            crossing = start > alo && start < t.dom_hi;
            break;
        }
        if start < ahi {
            segs.push(Seg { red: id, center: c, lo: start, dom_hi: ahi, starts_at_crossing: crossing });
        }
    }
    ArcEnvelope { r, segs }
}

/// Per blue (canonical frame, y ≥ 0, sorted by x): true iff the blue is on or
/// below the envelope, i.e. some red is within distance r.
pub fn below_envelope(env: &ArcEnvelope, blues: &[(Point, usize)]) -> Vec<bool> {
    let rtol = env.r * (1.0 + REL_TOL);
    blues
        .iter()
        .map(|&(b, _)| {
            env.seg_at(b.x)
                .map_or(false, |s| dist(b, s.center, Metric::L2) <= rtol)
        })
        .collect()
}

/// Brute-force reference for `below_envelope`.
pub fn below_envelope_brute(reds: &[(Point, usize)], blues: &[(Point, usize)], r: f64) -> Vec<bool> {
    blues
        .iter()
        .map(|&(b, _)| reds.iter().any(|&(p, _)| dist(b, p, Metric::L2) <= r * (1.0 + REL_TOL)))
        .collect()
}

struct SpadePoint(Point);

impl HasPosition for SpadePoint {
    type Scalar = f64;
    fn position(&self) -> Point2<f64> {
        Point2::new(self.0.x, self.0.y)
    }
}

/// Radii at which the envelope's combinatorial structure can change because
/// three arcs become concurrent: for every Voronoi vertex v of the red set,
/// the distance from v to its nearest reds (the circumradius of the
/// corresponding Delaunay face). Fewer than 3 distinct reds yield none.
pub fn envelope_critical_values(reds: &[Point]) -> Vec<f64> {
    if reds.len() < 3 {
        return Vec::new();
    }
    let mut tri: DelaunayTriangulation<SpadePoint> = DelaunayTriangulation::new();
    for &p in reds {
        let _ = tri.insert(SpadePoint(p)); // finite inputs; errors only for non-finite coords
    }
    let mut out = Vec::new();
    for face in tri.inner_faces() {
        let c = face.circumcenter();
        let v = face.vertices()[0].position();
        out.push((c.x - v.x).hypot(c.y - v.y));
    }
    out
}

/// O(k⁴) reference: circumradii of all triples with an empty circumcircle.
pub fn envelope_critical_values_brute(reds: &[Point]) -> Vec<f64> {
    let n = reds.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = (reds[i], reds[j], reds[k]);
                let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
                if d.abs() < 1e-12 {
                    continue; // collinear
                }
                let a2 = a.x * a.x + a.y * a.y;
                let b2 = b.x * b.x + b.y * b.y;
                let c2 = c.x * c.x + c.y * c.y;
                let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
                let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
                let v = Point::new(ux, uy);
                let rad = dist(v, a, Metric::L2);
                let empty = reds
                    .iter()
                    .all(|&q| dist(v, q, Metric::L2) >= rad * (1.0 - 1e-9));
                if empty {
                    out.push(rad);
                }
            }
        }
    }
    out
}

/// Radii at which the graphs of two equal-radius arcs start crossing above
/// both centers: r = d²/(2|Δx|) per pair. All pairs up to 2048 reds; beyond
/// that, consecutive x-neighbors only (far pairs need a near-degenerate
/// constellation to matter and are then caught by the endpoint-key sort).
pub fn pair_crossing_critical_values(reds: &[Point]) -> Vec<f64> {
    let n = reds.len();
    let mut out = Vec::new();
    let mut push = |p: Point, q: Point| {
        let dx = (q.x - p.x).abs();
        if dx > 1e-300 {
            let d2 = (q.x - p.x).powi(2) + (q.y - p.y).powi(2);
            out.push(d2 / (2.0 * dx));
        }
    };
    if n <= 2048 {
        for i in 0..n {
            for j in i + 1..n {
                push(reds[i], reds[j]);
            }
        }
    } else {
        for w in reds.windows(2) {
            push(w[0], w[1]);
        }
    }
    out
}

/// A sort key of the common parametric form x(r) = c + a·√(max(0, r² − q)):
/// a = 0 gives a fixed key (blue point), |a| = 1 an arc endpoint on the line,
/// and general a an envelope vertex moving along a bisector.
#[derive(Clone, Copy, Debug)]
pub struct SortKey {
    pub c: f64,
    pub a: f64,
    pub q: f64,
}

impl SortKey {
    pub fn fixed(x: f64) -> Self {
        SortKey { c: x, a: 0.0, q: 0.0 }
    }

    /// Left (sign=−1) or right (sign=+1) endpoint of the arc of `center`.
    pub fn endpoint(center: Point, sign: f64) -> Self {
        SortKey { c: center.x, a: sign, q: center.y * center.y }
    }

    /// The envelope vertex between arcs of p (left) and q (right): the upper
    /// circle intersection, moving along the perpendicular bisector.
    pub fn vertex(p: Point, q: Point) -> Self {
        let dx = q.x - p.x;
        let dy = q.y - p.y;
        let d = dx.hypot(dy);
        let (mut ux, uy) = (-dy / d, dx / d);
        if uy < 0.0 {
            ux = -ux; // flip so the + branch is the upper intersection
        }
        SortKey { c: (p.x + q.x) / 2.0, a: ux, q: d * d / 4.0 }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.c + self.a * (r * r - self.q).max(0.0).sqrt()
    }
}

/// Radii strictly inside `iv` at which the two keys' x-coordinates coincide
/// (all real solutions; a pair may have up to two).
pub fn comparison_roots(k1: SortKey, k2: SortKey, iv: RadiusInterval) -> Vec<f64> {
    let mut out = Vec::new();
    let mut push = |r: f64| {
        if r.is_finite()
            && iv.interior_contains(r)
            && (k1.eval(r) - k2.eval(r)).abs() <= 1e-8 * (1.0 + k1.eval(r).abs())
        {
            out.push(r);
        }
    };
    let delta = k2.c - k1.c;
    if k1.a == 0.0 && k2.a == 0.0 {
        return out;
    }
    if k1.a != 0.0 && k2.a == 0.0 {
        let s1 = delta / k1.a;
        if s1 >= 0.0 {
            push((k1.q + s1 * s1).sqrt());
        }
        return out;
    }
    if k1.a == 0.0 && k2.a != 0.0 {
        let s2 = -delta / k2.a;
        if s2 >= 0.0 {
            push((k2.q + s2 * s2).sqrt());
        }
        return out;
    }
    // a1·s1 − a2·s2 = Δ with s1 = √(r²−q1), s2 = √(r²−q2):
    // substituting s1 = (Δ + a2·s2)/a1 into s1² − s2² = q2 − q1 yields a
    // quadratic in s2.
    let (a1, a2) = (k1.a, k2.a);
    let e = k2.q - k1.q;
    let qa = a1 * a1 - a2 * a2;
    let qb = -2.0 * delta * a2;
    let qc = a1 * a1 * e - delta * delta;
    let mut s2_roots = Vec::new();
    if qa.abs() < 1e-14 {
        if qb.abs() > 1e-300 {
            s2_roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            s2_roots.push((-qb + sq) / (2.0 * qa));
            s2_roots.push((-qb - sq) / (2.0 * qa));
        }
    }
    for s2 in s2_roots {
        if s2 >= 0.0 {
            let s1 = (delta + a2 * s2) / a1;
            if s1 >= -1e-12 {
                push((k2.q + s2 * s2).sqrt());
            }
        }
    }
    out
}

/// Comparator stages of Batcher's odd-even mergesort network for n inputs
/// (comparators within one stage touch disjoint positions).
pub fn batcher_stages(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut stages = Vec::new();
    if n < 2 {
        return stages;
    }
    let n2 = n.next_power_of_two();
    let mut p = 1;
    while p < n2 {
        let mut k = p;
        while k >= 1 {
            let mut stage = Vec::new();
            let mut j = k % p;
            while j + k < n2 {
                for i in 0..k {
                    let a = i + j;
                    let b = i + j + k;
                    if a / (2 * p) == b / (2 * p) && b < n {
                        stage.push((a, b));
                    }
                }
                j += 2 * k;
            }
            if !stage.is_empty() {
                stages.push(stage);
            }
            k /= 2;
        }
        p *= 2;
    }
    stages
}

/// Sort the keys at every radius in the open output interval: per network
/// stage, gather each comparator's roots inside the current interval, shrink
/// once over the batch, then resolve all comparators at the midpoint (ties
/// broken by original index, making every comparison decidable).
pub fn batched_parametric_sort(
    keys: &[SortKey],
    d: &DecisionOracle,
    iv: RadiusInterval,
) -> (Vec<usize>, RadiusInterval) {
    let mut iv = iv;
    let mut perm: Vec<usize> = (0..keys.len()).collect();
    for stage in batcher_stages(keys.len()) {
        let mut roots = Vec::new();
        for &(i, j) in &stage {
            roots.extend(comparison_roots(keys[perm[i]], keys[perm[j]], iv));
        }
        if !roots.is_empty() {
            iv = interval_shrink(iv, &roots, d);
        }
        let mid = iv.midpoint();
        for &(i, j) in &stage {
            let (a, b) = (perm[i], perm[j]);
            if (keys[b].eval(mid), b) < (keys[a].eval(mid), a) {
                perm.swap(i, j);
            }
        }
    }
    (perm, iv)
}

/// Radii at which each blue lands exactly on its assigned spanning arc.
pub fn arc_membership_critical_values(assignments: &[(Point, Point)]) -> Vec<f64> {
    assignments
        .iter()
        .map(|&(b, red)| dist(b, red, Metric::L2))
        .collect()
}

/// One bichromatic subproblem instance in canonical coordinates: reds below
/// the line (y<0) and blues above (y≥0), both sorted by x. The usize payloads
/// are caller-side ids carried through.
#[derive(Clone, Debug, Default)]
pub struct SubInstance {
    pub reds: Vec<(Point, usize)>,
    pub blues: Vec<(Point, usize)>,
}

/// Solve a batch of instances parametrically: shrink the interval with the
/// structure critical values of every instance, one joint parametric sort of
/// all envelope vertices/endpoints/blues, then the arc-membership critical
/// values; finally evaluate the flags at the midpoint, which are then constant
/// over the open output interval.
pub fn solve_subproblems_parametric(
    instances: &[SubInstance],
    d: &DecisionOracle,
    iv: RadiusInterval,
) -> (Vec<Vec<bool>>, RadiusInterval) {
    let mut iv = iv;

    // Subroutine 1: envelope-structure critical values — arc existence
    // thresholds, Voronoi-vertex radii (triple concurrency), and the pair
    // radii r = d²/(2|Δx|) at which two arcs' graphs start crossing on the
    // upper semicircles (the all-pairs set is skipped for very large
    // instances, where the joint sort's endpoint keys cover the line-level
    // events).
    let mut crit = Vec::new();
    for inst in instances {
        for &(c, _) in &inst.reds {
            crit.push(-c.y);
        }
        let pts: Vec<Point> = inst.reds.iter().map(|&(c, _)| c).collect();
        crit.extend(envelope_critical_values(&pts));
        crit.extend(pair_crossing_critical_values(&pts));
    }
    iv = interval_shrink(iv, &crit, d);

    // Subroutine 2: joint parametric sort of vertices, arc endpoints and blue
    // x-coordinates across all instances.
    let mid = iv.midpoint();
    let mut keys = Vec::new();
    for inst in instances {
        // Endpoint keys of every existing arc (on-envelope or not), so arcs
        // entering the envelope at the line are key coincidences.
        for &(c, _) in &inst.reds {
            if -c.y <= mid {
                keys.push(SortKey::endpoint(c, -1.0));
                keys.push(SortKey::endpoint(c, 1.0));
            }
        }
        let env = build_envelope(&inst.reds, mid);
        for (k, seg) in env.segs.iter().enumerate() {
            if seg.starts_at_crossing && k > 0 {
                keys.push(SortKey::vertex(env.segs[k - 1].center, seg.center));
            }
        }
        for &(b, _) in &inst.blues {
            keys.push(SortKey::fixed(b.x));
        }
    }
    let (_, iv2) = batched_parametric_sort(&keys, d, iv);
    iv = iv2;

    // Subroutine 3: membership critical values of each blue against its
    // spanning arc at the (now structurally stable) midpoint.
    let mid = iv.midpoint();
    let mut member = Vec::new();
    let mut envs = Vec::with_capacity(instances.len());
    for inst in instances {
        let env = build_envelope(&inst.reds, mid);
        let mut assigns = Vec::new();
        for &(b, _) in &inst.blues {
            if let Some(seg) = env.seg_at(b.x) {
                assigns.push((b, seg.center));
            }
        }
        member.extend(arc_membership_critical_values(&assigns));
        envs.push(env);
    }
    iv = interval_shrink(iv, &member, d);

    // Evaluate flags at the final midpoint; rebuild envelopes only if the
    // interval moved (structure is stable, but arcs' numeric extents change).
    let mid = iv.midpoint();
    let mut flags = Vec::with_capacity(instances.len());
    for inst in instances {
        let env = build_envelope(&inst.reds, mid);
        flags.push(below_envelope(&env, &inst.blues));
    }
    d.note("solve_subproblem_parametric", iv);
    (flags, iv)
}

/// Single-instance wrapper (reds/blues in canonical frame, sorted by x).
pub fn solve_subproblem_parametric(
    reds: &[(Point, usize)],
    blues: &[(Point, usize)],
    d: &DecisionOracle,
    iv: RadiusInterval,
) -> (Vec<bool>, RadiusInterval) {
    let inst = SubInstance { reds: reds.to_vec(), blues: blues.to_vec() };
    let (mut flags, iv) = solve_subproblems_parametric(std::slice::from_ref(&inst), d, iv);
    (flags.pop().unwrap(), iv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn single_arc() {
        let env = build_envelope(&[(p(0.0, -0.5), 0)], 1.0);
        assert_eq!(env.segs.len(), 1);
        let h = 0.75f64.sqrt();
        assert!((env.segs[0].lo + h).abs() < 1e-12);
        assert!((env.segs[0].dom_hi - h).abs() < 1e-12);
    }

    #[test]
    fn two_arc_breakpoint() {
        let env = build_envelope(&[(p(-0.5, -0.1), 0), (p(0.5, -0.1), 1)], 1.0);
        assert_eq!(env.segs.len(), 2);
        let vs = env.vertices();
        assert_eq!(vs.len(), 1);
        assert!(vs[0].0.abs() < 1e-12, "breakpoint at x=0 by symmetry");
    }

    #[test]
    fn two_arc_gap() {
        // At r=1 the arcs of reds at x=±1 end short of x=0: two segs, a gap
        // in between, and no envelope vertex.
        let env = build_envelope(&[(p(-1.0, -0.1), 0), (p(1.0, -0.1), 1)], 1.0);
        assert_eq!(env.segs.len(), 2);
        assert!(env.vertices().is_empty());
        assert!(env.seg_at(0.0).is_none());
        assert_eq!(below_envelope(&env, &[(p(0.0, 0.0), 0)]), vec![false]);
    }

    #[test]
    fn deep_red_no_arc() {
        let env = build_envelope(&[(p(0.0, -2.0), 0)], 1.0);
        assert!(env.segs.is_empty());
        assert_eq!(below_envelope(&env, &[(p(0.0, 0.1), 0)]), vec![false]);
    }

    #[test]
    fn below_basic() {
        let env = build_envelope(&[(p(0.0, -0.5), 0)], 1.0);
        assert_eq!(below_envelope(&env, &[(p(0.0, 0.4), 0)]), vec![true]);
        assert_eq!(below_envelope(&env, &[(p(0.0, 0.6), 0)]), vec![false]);
    }

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut st = seed;
        move || {
            st = st.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((st >> 33) % 1_000_000) as f64 / 1_000_000.0
        }
    }

    #[test]
    fn below_matches_brute_random() {
        let mut rnd = lcg(42);
        for trial in 0..300 {
            let nr = 1 + (trial % 17);
            let nb = 1 + (trial % 13);
            let r = 0.05 + rnd() * 0.6;
            let mut reds: Vec<(Point, usize)> =
                (0..nr).map(|i| (p(rnd() * 2.0, -rnd() * 0.9 - 1e-6), i)).collect();
            reds.sort_by(|a, b| a.0.x.partial_cmp(&b.0.x).unwrap());
            let mut blues: Vec<(Point, usize)> =
                (0..nb).map(|i| (p(rnd() * 2.0, rnd() * 0.9), i)).collect();
            blues.sort_by(|a, b| a.0.x.partial_cmp(&b.0.x).unwrap());
            let env = build_envelope(&reds, r);
            let got = below_envelope(&env, &blues);
            let want = below_envelope_brute(&reds, &blues, r);
            assert_eq!(got, want, "trial {trial} r={r} reds={reds:?} blues={blues:?}");
        }
    }

    #[test]
    fn critical_values_triangle() {
        let vals = envelope_critical_values(&[p(-1.0, -1.0), p(1.0, -1.0), p(0.0, -2.0)]);
        assert!(vals.iter().any(|&v| (v - 1.0).abs() < 1e-9), "{vals:?}");
        assert!(envelope_critical_values(&[p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)]).is_empty());
        let square = envelope_critical_values(&[
            p(0.0, 0.0),
            p(1.0, 0.0),
            p(0.0, 1.0),
            p(1.0, 1.0),
        ]);
        assert!(square.iter().any(|&v| (v - 0.5f64.sqrt()).abs() < 1e-9), "{square:?}");
    }

    #[test]
    fn critical_values_match_brute() {
        let mut rnd = lcg(7);
        for trial in 0..30 {
            let k = 3 + trial % 10;
            let reds: Vec<Point> = (0..k).map(|_| p(rnd() * 4.0, -rnd() * 2.0 - 0.01)).collect();
            let mut a = envelope_critical_values(&reds);
            let mut b = envelope_critical_values_brute(&reds);
            a.sort_by(|x, y| x.partial_cmp(y).unwrap());
            b.sort_by(|x, y| x.partial_cmp(y).unwrap());
            a.dedup_by(|x, y| (*x - *y).abs() < 1e-6);
            b.dedup_by(|x, y| (*x - *y).abs() < 1e-6);
            assert_eq!(a.len(), b.len(), "trial {trial}: {a:?} vs {b:?}");
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn envelope_structure_stable_between_criticals() {
        let mut rnd = lcg(11);
        for _ in 0..20 {
            let reds: Vec<(Point, usize)> = {
                let mut v: Vec<(Point, usize)> =
                    (0..8).map(|i| (p(rnd() * 2.0, -rnd() - 0.01), i)).collect();
                v.sort_by(|a, b| a.0.x.partial_cmp(&b.0.x).unwrap());
                v
            };
            let pts: Vec<Point> = reds.iter().map(|x| x.0).collect();
            // Full structural event set: triple concurrency, arc existence,
            // pair-crossing existence, and endpoint coincidences at the line.
            let mut crit: Vec<f64> = envelope_critical_values(&pts);
            crit.extend(pts.iter().map(|c| -c.y));
            crit.extend(pair_crossing_critical_values(&pts));
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    for si in [-1.0, 1.0] {
                        for sj in [-1.0, 1.0] {
                            crit.extend(comparison_roots(
                                SortKey::endpoint(pts[i], si),
                                SortKey::endpoint(pts[j], sj),
                                RadiusInterval::new(0.2, 3.0),
                            ));
                        }
                    }
                }
            }
            crit.retain(|&v| v > 0.2 && v < 3.0);
            crit.push(0.2);
            crit.push(3.0);
            crit.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for w in crit.windows(2) {
                if w[1] - w[0] < 1e-9 {
                    continue;
                }
                let r1 = w[0] + (w[1] - w[0]) * 0.25;
                let r2 = w[0] + (w[1] - w[0]) * 0.75;
                let s1: Vec<usize> = build_envelope(&reds, r1).segs.iter().map(|s| s.red).collect();
                let s2: Vec<usize> = build_envelope(&reds, r2).segs.iter().map(|s| s.red).collect();
                assert_eq!(s1, s2, "structure changed inside critical-free interval {w:?}");
            }
        }
    }

    #[test]
    fn batcher_network_sorts() {
        let mut rnd = lcg(5);
        for n in [0usize, 1, 2, 3, 5, 8, 13, 31, 64] {
            let vals: Vec<f64> = (0..n).map(|_| rnd()).collect();
            let mut arr = vals.clone();
            for stage in batcher_stages(n) {
                for (i, j) in stage {
                    if arr[j] < arr[i] {
                        arr.swap(i, j);
                    }
                }
            }
            let mut want = vals;
            want.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(arr, want, "n={n}");
        }
    }

    #[test]
    fn parametric_sort_constant_keys() {
        let keys = [SortKey::fixed(3.0), SortKey::fixed(1.0), SortKey::fixed(2.0)];
        let d = DecisionOracle::new(|r| r >= 1.0);
        let (perm, iv) = batched_parametric_sort(&keys, &d, RadiusInterval::initial());
        assert_eq!(perm, vec![1, 2, 0]);
        assert_eq!((iv.lo, iv.hi), (0.0, f64::INFINITY));
        assert_eq!(d.call_count(), 0);
    }

    #[test]
    fn parametric_sort_symmetric_tie() {
        // Vertex of a symmetric red pair sits at x=0 for every r; a blue at
        // x=0 ties with it — resolved stably by input index, no oracle calls.
        let keys = [SortKey::vertex(p(-1.0, -0.1), p(1.0, -0.1)), SortKey::fixed(0.0)];
        let d = DecisionOracle::new(|r| r >= 1.5);
        let (perm, _) = batched_parametric_sort(&keys, &d, RadiusInterval::new(1.1, 3.0));
        assert_eq!(perm, vec![0, 1]);
    }

    #[test]
    fn parametric_sort_crossing_excluded() {
        // A vertex key crossing a fixed key at a known radius: the output
        // interval avoids the crossing and the order matches the upper end.
        let v = SortKey::vertex(p(0.0, -0.5), p(0.6, -0.2));
        let b = SortKey::fixed(0.1);
        // Find the crossing radius numerically.
        let mut roots = comparison_roots(v, b, RadiusInterval::new(0.4, 5.0));
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(!roots.is_empty());
        let rho = roots[0];
        let rstar = rho * 1.3;
        let d = DecisionOracle::new(move |r| r >= rstar);
        let (perm, iv) = batched_parametric_sort(&[v, b], &d, RadiusInterval::new(0.4, 5.0));
        assert!(!iv.interior_contains(rho));
        assert!(iv.contains(rstar));
        let want = if v.eval(rstar) <= b.eval(rstar) { vec![0, 1] } else { vec![1, 0] };
        assert_eq!(perm, want);
    }

    #[test]
    fn membership_values() {
        assert!(arc_membership_critical_values(&[]).is_empty());
        let vals = arc_membership_critical_values(&[(p(0.0, 0.9), p(-1.0, -0.1))]);
        assert!((vals[0] - 2f64.sqrt()).abs() < 1e-12);
        let vals2 = arc_membership_critical_values(&[(p(0.5, 1.0), p(0.5, -0.25))]);
        assert!((vals2[0] - 1.25).abs() < 1e-12);
    }

    #[test]
    fn subproblem_single_pair() {
        let delta = 2f64.sqrt();
        let reds = [(p(0.0, -1.0), 0)];
        let blues = [(p(1.0, 0.0), 0)];
        let rstar = delta * 1.5;
        let d = DecisionOracle::new(move |r| r >= rstar);
        let (flags, iv) = solve_subproblem_parametric(&reds, &blues, &d, RadiusInterval::initial());
        assert_eq!(flags, vec![true]);
        assert!(iv.lo >= delta - 1e-12);
        assert!(iv.contains(rstar));
    }

    #[test]
    fn subproblem_no_reds() {
        let d = DecisionOracle::new(|r| r >= 1.0);
        let (flags, iv) =
            solve_subproblem_parametric(&[], &[(p(0.0, 0.5), 0)], &d, RadiusInterval::initial());
        assert_eq!(flags, vec![false]);
        assert_eq!((iv.lo, iv.hi), (0.0, f64::INFINITY));
    }

    #[test]
    fn subproblem_matches_brute_at_rstar() {
        let mut rnd = lcg(23);
        for trial in 0..60 {
            let mut reds: Vec<(Point, usize)> =
                (0..32).map(|i| (p(rnd() * 3.0, -rnd() - 1e-3), i)).collect();
            reds.sort_by(|a, b| a.0.x.partial_cmp(&b.0.x).unwrap());
            let mut blues: Vec<(Point, usize)> =
                (0..32).map(|i| (p(rnd() * 3.0, rnd()), i)).collect();
            blues.sort_by(|a, b| a.0.x.partial_cmp(&b.0.x).unwrap());
            let rstar = 0.3 + rnd() * 1.2;
            let d = DecisionOracle::new(move |r| r >= rstar);
            let (flags, iv) =
                solve_subproblem_parametric(&reds, &blues, &d, RadiusInterval::initial());
            assert!(iv.contains(rstar), "trial {trial}: {iv:?} misses r*={rstar}");
            let want = below_envelope_brute(&reds, &blues, rstar);
            assert_eq!(flags, want, "trial {trial} at r*={rstar}");
        }
    }
}
