use crate::gen::{gen_points, Dist};
use crate::report::RunReport;
use crate::run::{run_rsp, Algo, CliError};
use udg_core::core_geom::Metric;
use udg_core::rsp_l2::{RspOptions, RspQuery};

/// Least-squares slope of ln(y) against ln(x).
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return f64::NAN;
    }
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[derive(Clone, Debug)]
pub struct BenchSummary {
    pub algorithm: String,
    /// Median wall-time (ms) per ladder size.
    pub rows: Vec<(usize, f64)>,
    pub slope: f64,
}

/// Run each algorithm over the size ladder, `reps` fresh seeded instances
/// per size (reps = 0 yields nothing). Single s–t queries with s = 0,
/// t = n−1.
#[allow(clippy::too_many_arguments)]
pub fn run_bench(
    algos: &[Algo],
    sizes: &[usize],
    reps: u32,
    metric: Metric,
    weighted: bool,
    dist: Dist,
    seed0: u64,
    lambda: f64,
) -> Result<(Vec<RunReport>, Vec<BenchSummary>), CliError> {
    let mut reports = Vec::new();
    let mut summaries = Vec::new();
    for &algo in algos {
        let mut rows = Vec::new();
        for &n in sizes {
            if n < 2 {
                return Err(CliError::BadInput("bench sizes must be >= 2".into()));
            }
            let mut times = Vec::new();
            for rep in 0..reps {
                let seed = seed0.wrapping_add(rep as u64);
                let ps = gen_points(n, dist, seed, false);
                let q = RspQuery {
                    metric,
                    weighted,
                    lambda,
                    s: 0,
                    t: n - 1,
                    single_source: false,
                };
                let opts = RspOptions { seed, ..Default::default() };
                let rep = run_rsp(&ps, algo, q, opts, false, seed)?;
                times.push(rep.wall_ms);
                reports.push(rep);
            }
            if !times.is_empty() {
                times.sort_by(f64::total_cmp);
                rows.push((n, times[times.len() / 2]));
            }
        }
        let slope = log_log_slope(
            &rows.iter().map(|&(n, ms)| (n as f64, ms.max(1e-3))).collect::<Vec<_>>(),
        );
        summaries.push(BenchSummary { algorithm: algo.name().into(), rows, slope });
    }
    Ok((reports, summaries))
}
