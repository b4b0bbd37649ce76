use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::exit;
use udg_cli::bench::run_bench;
use udg_cli::io::{points_to_csv, points_to_json, read_points};
use udg_cli::run::metric_name;
use udg_cli::{gen_points, run_rsp, run_select, Algo, CliError, Dist, RunReport};
use udg_core::core_geom::{Metric, PointSet};
use udg_core::grid::{build_grid, build_grid_linf};
use udg_core::rsp_l1::rotate45;
use udg_core::rsp_l2::{RspOptions, RspQuery};
use udg_core::sssp::{bfs_unweighted, decide, reference_sssp, wx_weighted, DecideSpec};

#[derive(Parser)]
#[command(name = "udg", about = "Reverse shortest path on unit-disk graphs", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded point set and print it
    Gen(GenArgs),
    /// Reverse shortest path: minimum radius meeting a path-length budget
    Rsp(RspArgs),
    /// Single-source shortest paths at a fixed radius
    Sssp(SsspArgs),
    /// Feasibility of one (radius, budget) pair
    Decide(DecideArgs),
    /// k-th smallest pairwise L1 distance
    Select(SelectArgs),
    /// Timing ladder with fitted log-log slopes
    Bench(BenchArgs),
}

#[derive(Args)]
struct InputArgs {
    /// CSV ("x,y" lines) or JSON ([[x,y],...]) point file
    #[arg(long, conflicts_with = "gen")]
    input: Option<PathBuf>,
    /// Generate this many points instead of reading a file
    #[arg(long)]
    gen: Option<usize>,
    /// Distribution for --gen
    #[arg(long, default_value = "uniform-square")]
    dist: Dist,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Generate integer coordinates
    #[arg(long)]
    integer: bool,
}

impl InputArgs {
    fn load(&self) -> Result<PointSet, CliError> {
        match (&self.input, self.gen) {
            (Some(path), _) => read_points(path),
            (None, Some(n)) if n >= 1 => Ok(gen_points(n, self.dist, self.seed, self.integer)),
            (None, Some(_)) => Err(CliError::BadInput("--gen needs n >= 1".into())),
            (None, None) => Err(CliError::BadInput("need --input or --gen".into())),
        }
    }
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    match s {
        "l1" => Ok(Metric::L1),
        "l2" => Ok(Metric::L2),
        other => Err(format!("unknown metric {other:?} (l1, l2)")),
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "uniform-square")]
    dist: Dist,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    integer: bool,
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    out: String,
    /// Write to this path instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RspArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "l2", value_parser = parse_metric)]
    metric: Metric,
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0)]
    source: usize,
    #[arg(long)]
    target: Option<usize>,
    #[arg(long)]
    single_source: bool,
    #[arg(long, default_value = "baseline")]
    algo: Algo,
    /// k for --algo select
    #[arg(long)]
    k: Option<u64>,
    /// Cross-check against rsp_baseline (exit 3 on mismatch)
    #[arg(long)]
    check: bool,
    /// Large-cell threshold override
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    expander_degree: Option<usize>,
    #[arg(long, default_value = "json", value_parser = ["csv", "json"])]
    out: String,
}

#[derive(Args)]
struct SsspArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "l2", value_parser = parse_metric)]
    metric: Metric,
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    radius: f64,
    #[arg(long, default_value_t = 0)]
    source: usize,
    /// Also print every distance
    #[arg(long)]
    full: bool,
    /// Compare against the brute-force reference (needs n under the cap)
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct DecideArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "l2", value_parser = parse_metric)]
    metric: Metric,
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    radius: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    source: usize,
    #[arg(long)]
    target: Option<usize>,
    #[arg(long)]
    single_source: bool,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    k: u64,
    #[arg(long)]
    check: bool,
    #[arg(long)]
    expander_degree: Option<usize>,
    #[arg(long, default_value = "json", value_parser = ["csv", "json"])]
    out: String,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated algorithms
    #[arg(long, default_value = "baseline,l1", value_delimiter = ',')]
    algos: Vec<Algo>,
    /// Comma-separated ladder sizes
    #[arg(long, default_value = "8192,16384,32768,65536", value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    reps: u32,
    #[arg(long, default_value = "l1", value_parser = parse_metric)]
    metric: Metric,
    #[arg(long)]
    weighted: bool,
    #[arg(long, default_value = "uniform-square")]
    dist: Dist,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32.0)]
    lambda: f64,
    #[arg(long, default_value = "json", value_parser = ["csv", "json"])]
    out: String,
}

fn emit_report(rep: &RunReport, out: &str, with_header: bool) {
    if out == "csv" {
        if with_header {
            println!("{}", RunReport::csv_header());
        }
        println!("{}", rep.to_csv_row());
    } else {
        println!("{}", rep.to_json_line());
    }
}

fn cmd_gen(a: GenArgs) -> Result<(), CliError> {
    if a.n < 1 {
        return Err(CliError::BadInput("--n must be >= 1".into()));
    }
    let ps = gen_points(a.n, a.dist, a.seed, a.integer);
    let text = if a.out == "json" { points_to_json(&ps) } else { points_to_csv(&ps) };
    match a.output {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| CliError::BadInput(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_rsp(a: RspArgs) -> Result<(), CliError> {
    let ps = a.input.load()?;
    let opts = RspOptions {
        verify: false,
        trace: false,
        threshold: a.threshold,
        expander_degree: a.expander_degree,
        seed: a.input.seed,
    };
    let rep = if a.algo == Algo::Select {
        let k = a.k.ok_or_else(|| CliError::BadInput("--algo select needs --k".into()))?;
        run_select(&ps, k, opts, a.check, a.input.seed)?
    } else {
        let lambda = a
            .lambda
            .ok_or_else(|| CliError::BadInput("--lambda is required".into()))?;
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(CliError::BadInput(format!("bad lambda {lambda}")));
        }
        let q = RspQuery {
            metric: a.metric,
            weighted: a.weighted,
            lambda,
            s: a.source,
            t: a.target.unwrap_or(ps.len() - 1),
            single_source: a.single_source,
        };
        run_rsp(&ps, a.algo, q, opts, a.check, a.input.seed)?
    };
    emit_report(&rep, &a.out, true);
    Ok(())
}

fn cmd_sssp(a: SsspArgs) -> Result<(), CliError> {
    let ps = a.input.load()?;
    if a.source >= ps.len() {
        return Err(CliError::BadInput(format!("source {} out of range", a.source)));
    }
    if !(a.radius > 0.0) || !a.radius.is_finite() {
        return Err(CliError::BadInput(format!("bad radius {}", a.radius)));
    }
    let rot;
    let (work, linf) = match a.metric {
        Metric::L2 => (&ps, false),
        Metric::L1 => {
            rot = rotate45(&ps);
            (&rot, true)
        }
    };
    let t0 = std::time::Instant::now();
    let g = if linf {
        build_grid_linf(work, a.source, a.radius)
    } else {
        build_grid(work, a.source, a.radius)
    };
    let res = if a.weighted {
        wx_weighted(work, &g, a.radius, a.source, None, None, linf)
    } else {
        bfs_unweighted(work, &g, a.radius, a.source, None, None, linf)
    };
    let wall_ms = t0.elapsed().as_secs_f64() * 1e3;
    let mut checked = false;
    if a.check {
        let want = reference_sssp(&ps, a.metric, a.weighted, a.radius, a.source)?;
        for (i, (&got, &w)) in res.dist.iter().zip(&want).enumerate() {
            let ok = if a.weighted {
                (got - w).abs() <= 1e-9 * w.abs().max(1.0) || (got.is_infinite() && w.is_infinite())
            } else {
                got == w
            };
            if !ok {
                return Err(CliError::OracleMismatch(format!(
                    "dist[{i}] = {got}, reference says {w}"
                )));
            }
        }
        checked = true;
    }
    let reached = res.dist.iter().filter(|d| d.is_finite()).count();
    let max_finite = res.dist.iter().copied().filter(|d| d.is_finite()).fold(0.0, f64::max);
    let mut obj = serde_json::json!({
        "algorithm": if a.weighted { "wx_weighted" } else { "bfs_unweighted" },
        "metric": metric_name(a.metric),
        "n": ps.len(),
        "radius": a.radius,
        "source": a.source,
        "reached": reached,
        "max_finite": max_finite,
        "steps": res.steps,
        "wall_ms": wall_ms,
        "checked": checked,
    });
    if a.full {
        obj["dist"] = serde_json::json!(res.dist);
    }
    println!("{obj}");
    Ok(())
}

fn cmd_decide(a: DecideArgs) -> Result<(), CliError> {
    let ps = a.input.load()?;
    let spec = DecideSpec {
        metric: a.metric,
        weighted: a.weighted,
        lambda: a.lambda,
        s: a.source,
        t: a.target.unwrap_or(ps.len() - 1),
        single_source: a.single_source,
    };
    let feasible = decide(&ps, spec, a.radius)?;
    println!(
        "{}",
        serde_json::json!({ "radius": a.radius, "lambda": a.lambda, "feasible": feasible })
    );
    Ok(())
}

fn cmd_select(a: SelectArgs) -> Result<(), CliError> {
    let ps = a.input.load()?;
    let opts = RspOptions {
        expander_degree: a.expander_degree,
        seed: a.input.seed,
        ..Default::default()
    };
    let rep = run_select(&ps, a.k, opts, a.check, a.input.seed)?;
    emit_report(&rep, &a.out, true);
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<(), CliError> {
    let (reports, summaries) = run_bench(
        &a.algos, &a.sizes, a.reps, a.metric, a.weighted, a.dist, a.seed, a.lambda,
    )?;
    let mut first = true;
    for rep in &reports {
        emit_report(rep, &a.out, first);
        first = false;
    }
    for s in &summaries {
        if a.out == "csv" {
            println!("# {} slope {:.3}", s.algorithm, s.slope);
        } else {
            println!(
                "{}",
                serde_json::json!({
                    "summary": s.algorithm,
                    "slope": s.slope,
                    "rows": s.rows.iter().map(|&(n, ms)| serde_json::json!([n, ms])).collect::<Vec<_>>(),
                })
            );
        }
    }
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap's help/version go to stdout with success; flag errors are bad input
            if e.use_stderr() {
                eprintln!("{e}");
                exit(4);
            }
            print!("{e}");
            exit(0);
        }
    };
    let res = match cli.cmd {
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Rsp(a) => cmd_rsp(a),
        Cmd::Sssp(a) => cmd_sssp(a),
        Cmd::Decide(a) => cmd_decide(a),
        Cmd::Select(a) => cmd_select(a),
        Cmd::Bench(a) => cmd_bench(a),
    };
    if let Err(e) = res {
        println!(
            "{}",
            serde_json::json!({ "error": e.kind(), "detail": e.detail() })
        );
        exit(e.exit_code());
    }
}
