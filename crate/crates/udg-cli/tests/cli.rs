//! End-to-end tests of the `udg` binary: exit codes, report schema, and the
//! machine-readable error objects.

use std::io::Write;
use std::process::{Command, Output};

fn udg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udg")).args(args).output().expect("spawn udg")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    let s = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(s.trim()).unwrap_or_else(|e| panic!("bad JSON {e}: {s}"))
}

#[test]
fn rsp_chain_with_check() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "x,y").unwrap();
    for i in 0..6 {
        writeln!(f, "{i},0").unwrap();
    }
    let path = f.path().to_str().unwrap();
    let out = udg(&[
        "rsp", "--algo", "algo1", "--metric", "l2", "--lambda", "3", "--source", "0", "--target",
        "5", "--input", path, "--check",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rep = stdout_json(&out);
    assert_eq!(rep["r_star"], 2.0);
    assert_eq!(rep["oracle_checked"], true);
    assert_eq!(rep["n"], 6);
    assert_eq!(rep["algorithm"], "algo1");
}

#[test]
fn rsp_two_point_weighted_l1() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, "0,0\n3,4\n").unwrap();
    let path = f.path().to_str().unwrap();
    let out = udg(&[
        "rsp", "--algo", "l1", "--metric", "l1", "--weighted", "--lambda", "7", "--target", "1",
        "--input", path, "--check",
    ]);
    assert!(out.status.success());
    let rep = stdout_json(&out);
    assert_eq!(rep["r_star"], 7.0); // the single edge must span the full L1 gap
}

#[test]
fn infeasible_exits_2_with_error_object() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, "0,0\n3,4\n").unwrap();
    let path = f.path().to_str().unwrap();
    // Weighted budget below the straight-line distance: no radius works.
    let out = udg(&[
        "rsp", "--algo", "baseline", "--metric", "l2", "--weighted", "--lambda", "1", "--target",
        "1", "--input", path,
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stdout_json(&out);
    assert_eq!(err["error"], "infeasible");
}

#[test]
fn bad_input_file_exits_4() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, "not,a,point\nfoo").unwrap();
    let path = f.path().to_str().unwrap();
    let out = udg(&["rsp", "--lambda", "1", "--input", path]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stdout_json(&out)["error"], "bad_input");
}

#[test]
fn bad_flags_exit_4_and_help_exits_0() {
    let out = udg(&["rsp", "--algo", "nope", "--gen", "4", "--lambda", "1"]);
    assert_eq!(out.status.code(), Some(4));
    let help = udg(&["--help"]);
    assert!(help.status.success());
}

#[test]
fn gen_roundtrips_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("pts.csv");
    let json = dir.path().join("pts.json");
    for (fmt, path) in [("csv", &csv), ("json", &json)] {
        let out = udg(&[
            "gen", "--n", "24", "--seed", "11", "--integer", "--out", fmt, "--output",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    // Same points either way: the k-th distance agrees exactly.
    let mut vals = Vec::new();
    for path in [&csv, &json] {
        let out = udg(&["select", "--k", "5", "--check", "--input", path.to_str().unwrap()]);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        let rep = stdout_json(&out);
        assert_eq!(rep["oracle_checked"], true);
        vals.push(rep["r_star"].as_f64().unwrap());
    }
    assert_eq!(vals[0], vals[1]);
}

#[test]
fn report_schema_and_determinism() {
    let run = || {
        let out = udg(&[
            "rsp", "--gen", "48", "--seed", "21", "--algo", "l1", "--metric", "l1", "--lambda",
            "5", "--check",
        ]);
        assert!(out.status.success());
        stdout_json(&out)
    };
    let mut a = run();
    let mut b = run();
    for rep in [&a, &b] {
        for key in [
            "algorithm",
            "metric",
            "weighted",
            "n",
            "lambda",
            "r_star",
            "decision_call_count",
            "bfs_steps",
            "stages",
            "fallback",
            "wall_ms",
            "seed",
            "oracle_checked",
        ] {
            assert!(rep.get(key).is_some(), "missing {key} in {rep}");
        }
    }
    a["wall_ms"] = 0.into();
    b["wall_ms"] = 0.into();
    assert_eq!(a, b);
}

#[test]
fn sssp_reports_distances() {
    let out = udg(&[
        "sssp", "--gen", "64", "--seed", "4", "--metric", "l2", "--radius", "30", "--check",
        "--full",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rep = stdout_json(&out);
    assert_eq!(rep["dist"].as_array().unwrap().len(), 64);
    assert_eq!(rep["dist"][0], 0.0);
}

#[test]
fn csv_report_output() {
    let out = udg(&[
        "rsp", "--gen", "32", "--seed", "2", "--metric", "l1", "--algo", "baseline", "--lambda",
        "4", "--out", "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    let row = lines.next().unwrap();
    assert!(header.starts_with("algorithm,"));
    assert_eq!(header.split(',').count(), row.split(',').count());
}
