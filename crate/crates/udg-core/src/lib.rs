//! Exact reverse-shortest-path (RSP) and distance-selection algorithms on
//! unit-disk graphs over planar point sets.
//!
//! Given a point set P, a hop/length budget λ and terminals s, t, the RSP
//! problem asks for the minimum radius r* such that the s–t shortest path in
//! the unit-disk graph G_r(P) (edge iff distance ≤ r) has length at most λ.
//! The crate provides:
//!
//! - `core_geom`: metrics, half-open radius intervals, the monotone decision
//!   oracle abstraction and the generic candidate-set interval shrink.
//! - `grid`: the r-parameterized square grid and its parametric (sorted-matrix)
//!   stabilization over an interval containing r*.
//! - `envelope`: upper envelopes of equal-radius arcs above a separating line
//!   and the parametric subproblem solver built on them.
//! - `sssp`: decision oracles — grid BFS (unweighted), the weighted grid
//!   algorithm, explicit-graph references, and the `decide` wrapper.
//! - `rsp_l2`: the L2 solvers (baseline, two unweighted parametric algorithms,
//!   weighted parametric).
//! - `rsp_l1`: the L1 solver and L1 distance selection via a rotated range
//!   tree, canonical bipartite pairs and expander-compressed candidate sets.

pub mod core_geom;
pub mod envelope;
pub mod grid;
pub mod rsp_l1;
pub mod rsp_l2;
pub mod sssp;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum UdgError {
    /// No radius makes the instance satisfy the budget (e.g. unweighted λ < 1,
    /// weighted λ < dist(s,t)).
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("bad input: {0}")]
    BadInput(String),
    /// A solver produced a value inconsistent with the oracle — a bug signal.
    #[error("consistency error: {0}")]
    Consistency(String),
    /// An O(n²) reference oracle was asked to run above the configured cap.
    #[error("oracle cap exceeded: n={0} > cap={1} (set UDG_ORACLE_CAP)")]
    OracleCap(usize, usize),
}

pub type Result<T> = std::result::Result<T, UdgError>;

/// Upper bound on n for the O(n²) reference oracles, from `UDG_ORACLE_CAP`
/// (default 4096).
pub fn oracle_cap() -> usize {
    std::env::var("UDG_ORACLE_CAP")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(4096)
}
