//! Points, metrics, radius intervals, decision oracles and the generic
//! "shrink an interval by binary search over a candidate set" engine that
//! every parametric algorithm in this crate is built on.

use crate::{Result, UdgError};
use std::cell::{Cell, RefCell};

/// Relative tolerance for radius comparisons throughout the crate.
pub const REL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    L1,
    L2,
}

/// Metric distance; exact integer result under L1 when coordinates are integers.
pub fn dist(p: Point, q: Point, m: Metric) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    match m {
        Metric::L1 => dx.abs() + dy.abs(),
        Metric::L2 => dx.hypot(dy),
    }
}

/// An immutable planar point set with both coordinate orders precomputed.
#[derive(Clone, Debug)]
pub struct PointSet {
    pub pts: Vec<Point>,
    /// Indices sorted by (x, y, index).
    pub by_x: Vec<usize>,
    /// Indices sorted by (y, x, index).
    pub by_y: Vec<usize>,
    /// True iff every coordinate is an integer (enables exact L1 arithmetic).
    pub integer_mode: bool,
}

impl PointSet {
    pub fn new(pts: Vec<Point>) -> Self {
        let mut by_x: Vec<usize> = (0..pts.len()).collect();
        by_x.sort_by(|&a, &b| {
            (pts[a].x, pts[a].y, a)
                .partial_cmp(&(pts[b].x, pts[b].y, b))
                .unwrap()
        });
        let mut by_y: Vec<usize> = (0..pts.len()).collect();
        by_y.sort_by(|&a, &b| {
            (pts[a].y, pts[a].x, a)
                .partial_cmp(&(pts[b].y, pts[b].x, b))
                .unwrap()
        });
        let integer_mode = pts
            .iter()
            .all(|p| p.x.fract() == 0.0 && p.y.fract() == 0.0 && p.x.abs() < 9e15 && p.y.abs() < 9e15);
        PointSet { pts, by_x, by_y, integer_mode }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    /// (min, max) corner points of the bounding box.
    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.pts {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// An r that is ≥ every pairwise distance (bbox diagonal), so G_r is complete.
    pub fn radius_upper_bound(&self, m: Metric) -> f64 {
        let (lo, hi) = self.bbox();
        dist(lo, hi, m).max(1.0)
    }
}

/// All C(n,2) pairwise distances, ascending, duplicates retained.
pub fn pairwise_distances(ps: &PointSet, m: Metric) -> Result<Vec<f64>> {
    let n = ps.len();
    if n < 2 {
        return Err(UdgError::BadInput("pairwise_distances needs n >= 2".into()));
    }
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(dist(ps.pts[i], ps.pts[j], m));
        }
    }
    out.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}

/// Half-open interval (lo, hi] known to contain r*. `hi` may be +∞ before the
/// first feasible candidate has been found.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusInterval {
    /// Exclusive lower end.
    pub lo: f64,
    /// Inclusive upper end.
    pub hi: f64,
}

impl RadiusInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo < hi);
        RadiusInterval { lo, hi }
    }

    /// The full search range (0, ∞].
    pub fn initial() -> Self {
        RadiusInterval { lo: 0.0, hi: f64::INFINITY }
    }

    pub fn contains(&self, r: f64) -> bool {
        r > self.lo && r <= self.hi
    }

    /// Whether r is strictly inside the open interior (lo, hi).
    pub fn interior_contains(&self, r: f64) -> bool {
        r > self.lo && r < self.hi
    }

    /// A representative radius in the open interior (any point of the interior
    /// yields the same combinatorial structure once the interval is stable).
    pub fn midpoint(&self) -> f64 {
        if self.hi.is_finite() {
            0.5 * (self.lo + self.hi)
        } else if self.lo > 0.0 {
            2.0 * self.lo
        } else {
            1.0
        }
    }
}

/// A monotone feasibility predicate on radii ("is r ≥ r*?") with call counting,
/// result memoization and an optional interval trace used by the soundness
/// instrumentation tests.
pub struct DecisionOracle<'a> {
    pred: Box<dyn Fn(f64) -> bool + 'a>,
    calls: Cell<u64>,
    cache: RefCell<Vec<(u64, bool)>>,
    trace: Option<RefCell<Vec<(&'static str, RadiusInterval)>>>,
}

impl<'a> DecisionOracle<'a> {
    pub fn new(pred: impl Fn(f64) -> bool + 'a) -> Self {
        DecisionOracle {
            pred: Box::new(pred),
            calls: Cell::new(0),
            cache: RefCell::new(Vec::new()),
            trace: None,
        }
    }

    /// Same oracle, but recording every interval emitted by parametric
    /// operations (see `take_trace`).
    pub fn with_trace(pred: impl Fn(f64) -> bool + 'a) -> Self {
        let mut d = Self::new(pred);
        d.trace = Some(RefCell::new(Vec::new()));
        d
    }

    pub fn feasible(&self, r: f64) -> bool {
        self.calls.set(self.calls.get() + 1);
        let key = r.to_bits();
        if let Some(&(_, v)) = self.cache.borrow().iter().find(|&&(k, _)| k == key) {
            return v;
        }
        let v = (self.pred)(r);
        let mut cache = self.cache.borrow_mut();
        if cache.len() < 512 {
            cache.push((key, v));
        }
        v
    }

    pub fn call_count(&self) -> u64 {
        self.calls.get()
    }

    /// Record an interval produced by a parametric operation (no-op unless the
    /// oracle was created with tracing).
    pub fn note(&self, tag: &'static str, iv: RadiusInterval) {
        if let Some(t) = &self.trace {
            t.borrow_mut().push((tag, iv));
        }
    }

    pub fn take_trace(&self) -> Vec<(&'static str, RadiusInterval)> {
        match &self.trace {
            Some(t) => std::mem::take(&mut *t.borrow_mut()),
            None => Vec::new(),
        }
    }
}

/// Shrink `iv` against a candidate set: the result (lo', hi'] has lo' = the
/// largest infeasible candidate inside iv (or iv.lo) and hi' = the smallest
/// feasible candidate inside iv (or iv.hi); no candidate remains strictly
/// inside. Selection-based: O(|candidates|) time, O(log) oracle calls;
/// unsorted input with duplicates accepted, candidates outside iv ignored.
pub fn interval_shrink(iv: RadiusInterval, candidates: &[f64], d: &DecisionOracle) -> RadiusInterval {
    let mut c: Vec<f64> = candidates
        .iter()
        .copied()
        .filter(|&v| v > iv.lo && v < iv.hi)
        .collect();
    let mut lo = iv.lo;
    let mut hi = iv.hi;
    while !c.is_empty() {
        let mid = c.len() / 2;
        let (_, &mut med, _) = c.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
        if d.feasible(med) {
            hi = med;
            c.retain(|&v| v < med);
        } else {
            lo = med;
            c.retain(|&v| v > med);
        }
        c.retain(|&v| v > lo && v < hi);
    }
    RadiusInterval { lo, hi }
}

/// Snap a solver result onto the pairwise distance it must equal: returns the
/// smallest feasible pairwise distance d*, checking |d* − r| ≤ tol·max(1,r)
/// (exact equality in L1 integer mode). A miss signals a solver bug.
pub fn verify_rstar(r: f64, ps: &PointSet, m: Metric, d: &DecisionOracle, tol: f64) -> Result<f64> {
    let mut vals = pairwise_distances(ps, m)?;
    vals.dedup();
    // Binary search for the first feasible value (monotone oracle).
    let mut lo = 0usize; // all below lo infeasible
    let mut hi = vals.len(); // first feasible is < hi... hi may be len (none feasible)
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if d.feasible(vals[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    if lo == vals.len() {
        return Err(UdgError::Consistency(format!(
            "no feasible pairwise distance, but r={r} claimed feasible"
        )));
    }
    let dstar = vals[lo];
    let ok = if ps.integer_mode && m == Metric::L1 {
        dstar == r
    } else {
        (dstar - r).abs() <= tol * r.abs().max(1.0)
    };
    if ok {
        Ok(dstar)
    } else {
        Err(UdgError::Consistency(format!(
            "result {r} does not match smallest feasible pairwise distance {dstar}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn dist_basics() {
        assert_eq!(dist(p(0.0, 0.0), p(3.0, 4.0), Metric::L2), 5.0);
        assert_eq!(dist(p(0.0, 0.0), p(3.0, 4.0), Metric::L1), 7.0);
        assert_eq!(dist(p(1.0, 1.0), p(1.0, 1.0), Metric::L1), 0.0);
    }

    #[test]
    fn pairwise_sorted() {
        let ps = PointSet::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(3.0, 0.0)]);
        assert_eq!(pairwise_distances(&ps, Metric::L1).unwrap(), vec![1.0, 2.0, 3.0]);
        let ps2 = PointSet::new(vec![p(0.0, 0.0), p(1.0, 1.0)]);
        let d = pairwise_distances(&ps2, Metric::L2).unwrap();
        assert!((d[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!(pairwise_distances(&PointSet::new(vec![p(0.0, 0.0)]), Metric::L2).is_err());
    }

    #[test]
    fn pairwise_matches_double_loop() {
        // Deterministic pseudo-random 8-point set.
        let mut pts = Vec::new();
        let mut st = 12345u64;
        for _ in 0..8 {
            st = st.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = ((st >> 33) % 1000) as f64 / 10.0;
            st = st.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let y = ((st >> 33) % 1000) as f64 / 10.0;
            pts.push(p(x, y));
        }
        let ps = PointSet::new(pts.clone());
        let fast = pairwise_distances(&ps, Metric::L2).unwrap();
        let mut brute = Vec::new();
        for i in 0..8 {
            for j in 0..8 {
                if i < j {
                    brute.push(dist(pts[i], pts[j], Metric::L2));
                }
            }
        }
        brute.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(fast, brute);
    }

    #[test]
    fn shrink_basic() {
        let d = DecisionOracle::new(|r| r >= 2.5);
        let iv = interval_shrink(RadiusInterval::initial(), &[1.0, 2.0, 3.0], &d);
        assert_eq!((iv.lo, iv.hi), (2.0, 3.0));
    }

    #[test]
    fn shrink_empty_and_clamped() {
        let d = DecisionOracle::new(|r| r >= 2.0);
        let iv = interval_shrink(RadiusInterval::initial(), &[], &d);
        assert_eq!((iv.lo, iv.hi), (0.0, f64::INFINITY));
        let iv2 = interval_shrink(RadiusInterval::new(1.0, 4.0), &[0.5, 5.0], &d);
        assert_eq!((iv2.lo, iv2.hi), (1.0, 4.0));
    }

    #[test]
    fn shrink_duplicates_and_bounds() {
        // Candidate equal to lo is outside (half-open); equal to hi is kept as hi.
        let d = DecisionOracle::new(|r| r >= 1.5);
        let iv = interval_shrink(RadiusInterval::new(1.0, 4.0), &[1.0, 1.0, 2.0, 2.0, 4.0], &d);
        assert_eq!((iv.lo, iv.hi), (1.0, 2.0));
        assert!(d.call_count() <= 4);
    }

    #[test]
    fn verify_snaps() {
        let pts: Vec<Point> = (0..6).map(|i| p(i as f64, 0.0)).collect();
        let ps = PointSet::new(pts);
        let d = DecisionOracle::new(|r| r >= 1.0);
        assert_eq!(verify_rstar(1.0000000001, &ps, Metric::L2, &d, 1e-9).unwrap(), 1.0);
        assert_eq!(verify_rstar(1.0, &ps, Metric::L2, &d, 1e-9).unwrap(), 1.0);
        let d2 = DecisionOracle::new(|r| r >= 2.0);
        assert!(verify_rstar(0.5, &ps, Metric::L2, &d2, 1e-9).is_err());
    }

    #[test]
    fn oracle_monotone_samples() {
        let d = DecisionOracle::new(|r| r >= std::f64::consts::PI);
        let samples = [0.5, 1.0, 3.0, 3.2, 10.0];
        for (i, &a) in samples.iter().enumerate() {
            for &b in &samples[i + 1..] {
                if d.feasible(a) {
                    assert!(d.feasible(b), "monotonicity violated at {a} < {b}");
                }
            }
        }
    }
}
