use crate::report::RunReport;
use std::time::Instant;
use udg_core::core_geom::{dist, Metric, PointSet};
use udg_core::rsp_l1::{l1_distance_select, rsp_l1};
use udg_core::rsp_l2::{
    rsp_baseline, rsp_unweighted_algo1, rsp_unweighted_algo2, rsp_weighted, RspOptions, RspOutcome,
    RspQuery,
};
use udg_core::{oracle_cap, UdgError};

#[derive(Debug)]
pub enum CliError {
    /// No radius satisfies the budget: exit code 2.
    Infeasible(String),
    /// Solver disagrees with the brute-force oracle (a bug): exit code 3.
    OracleMismatch(String),
    /// Invalid flags or data: exit code 4.
    BadInput(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Infeasible(_) => 2,
            CliError::OracleMismatch(_) => 3,
            CliError::BadInput(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Infeasible(_) => "infeasible",
            CliError::OracleMismatch(_) => "oracle_mismatch",
            CliError::BadInput(_) => "bad_input",
        }
    }

    pub fn detail(&self) -> &str {
        match self {
            CliError::Infeasible(s) | CliError::OracleMismatch(s) | CliError::BadInput(s) => s,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind(), self.detail())
    }
}

impl From<UdgError> for CliError {
    fn from(e: UdgError) -> Self {
        match e {
            UdgError::Infeasible(s) => CliError::Infeasible(s),
            UdgError::Consistency(s) => CliError::OracleMismatch(s),
            other => CliError::BadInput(other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    Baseline,
    Algo1,
    Algo2,
    Weighted,
    L1,
    Select,
}

impl std::str::FromStr for Algo {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "baseline" => Ok(Algo::Baseline),
            "algo1" => Ok(Algo::Algo1),
            "algo2" => Ok(Algo::Algo2),
            "weighted" => Ok(Algo::Weighted),
            "l1" => Ok(Algo::L1),
            "select" => Ok(Algo::Select),
            other => Err(format!(
                "unknown algorithm {other:?} (baseline, algo1, algo2, weighted, l1, select)"
            )),
        }
    }
}

impl Algo {
    pub fn name(&self) -> &'static str {
        match self {
            Algo::Baseline => "baseline",
            Algo::Algo1 => "algo1",
            Algo::Algo2 => "algo2",
            Algo::Weighted => "weighted",
            Algo::L1 => "l1",
            Algo::Select => "select",
        }
    }
}

pub fn metric_name(m: Metric) -> &'static str {
    match m {
        Metric::L1 => "l1",
        Metric::L2 => "l2",
    }
}

fn same_radius(ps: &PointSet, metric: Metric, a: f64, b: f64) -> bool {
    if ps.integer_mode && metric == Metric::L1 {
        a == b
    } else {
        (a - b).abs() <= 1e-9 * b.abs().max(1.0)
    }
}

/// Run one RSP solver; with `check`, also run `rsp_baseline` and require the
/// identical candidate distance.
pub fn run_rsp(
    ps: &PointSet,
    algo: Algo,
    q: RspQuery,
    opts: RspOptions,
    check: bool,
    seed: u64,
) -> Result<RunReport, CliError> {
    let t0 = Instant::now();
    let out: RspOutcome = match algo {
        Algo::Baseline => rsp_baseline(ps, q, opts)?,
        Algo::Algo1 => rsp_unweighted_algo1(ps, q, opts)?,
        Algo::Algo2 => rsp_unweighted_algo2(ps, q, opts)?,
        Algo::Weighted => rsp_weighted(ps, q, opts)?,
        Algo::L1 => rsp_l1(ps, q, opts)?,
        Algo::Select => {
            return Err(CliError::BadInput(
                "algo 'select' needs --k; use run_select".into(),
            ))
        }
    };
    let wall_ms = t0.elapsed().as_secs_f64() * 1e3;
    let mut oracle_checked = out.oracle_checked;
    if check && algo != Algo::Baseline {
        let base = rsp_baseline(ps, q, RspOptions::default())?;
        if !same_radius(ps, q.metric, out.r_star, base.r_star) {
            return Err(CliError::OracleMismatch(format!(
                "{} returned {} but baseline says {}",
                algo.name(),
                out.r_star,
                base.r_star
            )));
        }
        oracle_checked = true;
    }
    Ok(RunReport {
        algorithm: algo.name().into(),
        metric: metric_name(q.metric).into(),
        weighted: q.weighted,
        n: ps.len(),
        lambda: q.lambda,
        r_star: Some(out.r_star),
        decision_call_count: out.decision_calls,
        bfs_steps: out.bfs_steps,
        stages: out.stages,
        fallback: out.fallback,
        wall_ms,
        seed,
        oracle_checked,
    })
}

/// k-th smallest pairwise L1 distance; `check` compares against the sorted
/// pairwise list when n fits under the oracle cap.
pub fn run_select(
    ps: &PointSet,
    k: u64,
    opts: RspOptions,
    check: bool,
    seed: u64,
) -> Result<RunReport, CliError> {
    let t0 = Instant::now();
    let out = l1_distance_select(ps, k, opts)?;
    let wall_ms = t0.elapsed().as_secs_f64() * 1e3;
    let mut oracle_checked = false;
    if check {
        if ps.len() > oracle_cap() {
            return Err(CliError::BadInput(format!(
                "--check on select needs n <= UDG_ORACLE_CAP ({})",
                oracle_cap()
            )));
        }
        let mut vals = Vec::new();
        for i in 0..ps.len() {
            for j in i + 1..ps.len() {
                vals.push(dist(ps.pts[i], ps.pts[j], Metric::L1));
            }
        }
        vals.sort_by(f64::total_cmp);
        let want = vals[(k - 1) as usize];
        if !same_radius(ps, Metric::L1, out.value, want) {
            return Err(CliError::OracleMismatch(format!(
                "select returned {} but sorted list says {want}",
                out.value
            )));
        }
        oracle_checked = true;
    }
    Ok(RunReport {
        algorithm: "select".into(),
        metric: "l1".into(),
        weighted: false,
        n: ps.len(),
        lambda: k as f64,
        r_star: Some(out.value),
        decision_call_count: out.count_calls,
        bfs_steps: 0,
        stages: out.stages,
        fallback: out.fallback,
        wall_ms,
        seed,
        oracle_checked,
    })
}
