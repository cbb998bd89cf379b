use std::fs;
use std::process::{Command, Output};

use serde_json::Value;
use uaamg::sparse::io::{write_graph, write_matrix_market_file, MmSymmetry};
use uaamg::{generate_structured_grid, Aggregation, BoundaryCondition};

fn uaamg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uaamg")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn setup_csv_lists_every_level() {
    let text = stdout(&uaamg(&["setup", "--grid", "32", "--t", "4", "--format", "csv"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("problem,t,level,n,nnz,ratio,max_aggregate"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.len() >= 3);
    assert_eq!(rows[0][3], "1024");
    let last: usize = rows.last().unwrap()[3].parse().unwrap();
    assert!(last <= 100);
}

#[test]
fn setup_is_repeatable_and_thread_independent() {
    let args = ["setup", "--grid", "40", "--bc", "neumann", "--reshape", "1", "--format", "csv"];
    let one = stdout(&uaamg(&[&["--threads", "1"], &args[..]].concat()));
    let four = stdout(&uaamg(&[&["--threads", "4"], &args[..]].concat()));
    assert_eq!(one, four);
}

#[test]
fn solve_json_reports_convergence() {
    let text = stdout(&uaamg(&["solve", "--grid", "32", "--format", "json"]));
    let v: Value = serde_json::from_str(&text).unwrap();
    let report = &v[0]["report"];
    assert_eq!(report["converged"], Value::Bool(true));
    let history = report["residual_history"].as_array().unwrap();
    assert_eq!(history.len(), report["iterations"].as_u64().unwrap() as usize + 1);
    assert!(history.last().unwrap().as_f64().unwrap() <= 1e-6);
}

#[test]
fn reads_graph_and_matrix_market_files() {
    let dir = tempfile::tempdir().unwrap();
    let g = generate_structured_grid(12, BoundaryCondition::Dirichlet, (1.0, 1.0)).unwrap();
    let graph_path = dir.path().join("grid.graph");
    write_graph(&g, fs::File::create(&graph_path).unwrap()).unwrap();
    let mtx_path = dir.path().join("grid.mtx");
    write_matrix_market_file(&g.assemble_laplacian(), MmSymmetry::Symmetric, &mtx_path).unwrap();

    let from_graph =
        stdout(&uaamg(&["setup", "--file", graph_path.to_str().unwrap(), "--n0", "10", "--format", "csv"]));
    let from_mtx = stdout(&uaamg(&["setup", "--file", mtx_path.to_str().unwrap(), "--n0", "10", "--format", "csv"]));
    let from_grid = stdout(&uaamg(&["setup", "--grid", "12", "--n0", "10", "--format", "csv"]));
    let strip = |s: &str| s.lines().skip(1).map(|l| l.split_once(',').unwrap().1.to_string()).collect::<Vec<_>>();
    assert_eq!(strip(&from_graph), strip(&from_grid));
    assert_eq!(strip(&from_mtx), strip(&from_grid));
}

#[test]
fn out_and_dump_agg_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("levels.csv");
    let agg = dir.path().join("fine.agg");
    let res = uaamg(&[
        "setup",
        "--grid",
        "20",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
        "--dump-agg",
        agg.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    assert!(res.stdout.is_empty());
    assert!(fs::read_to_string(&out).unwrap().starts_with("problem,t,level"));
    let a = Aggregation::read(fs::File::open(&agg).unwrap()).unwrap();
    assert_eq!(a.n_fine(), 400);
    assert!(a.max_size() <= 5);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"grid": [24], "t": ["2"], "format": "csv"}"#).unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = stdout(&uaamg(&["--config", cfg, "setup"]));
    assert_eq!(from_file, stdout(&uaamg(&["setup", "--grid", "24", "--t", "2", "--format", "csv"])));
    let overridden = stdout(&uaamg(&["--config", cfg, "setup", "--t", "5"]));
    assert_eq!(overridden, stdout(&uaamg(&["setup", "--grid", "24", "--t", "5", "--format", "csv"])));
}

#[test]
fn bad_inputs_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"grid": [8], "colour": "red"}"#).unwrap();
    assert_eq!(uaamg(&["--config", cfg.to_str().unwrap(), "setup"]).status.code(), Some(1));
    assert_eq!(uaamg(&["setup", "--grid", "8", "--t", "0"]).status.code(), Some(1));
    let missing = dir.path().join("missing.mtx");
    assert_eq!(uaamg(&["setup", "--file", missing.to_str().unwrap()]).status.code(), Some(2));
    let garbage = dir.path().join("garbage.mtx");
    fs::write(&garbage, "not a matrix\n").unwrap();
    assert_eq!(uaamg(&["setup", "--file", garbage.to_str().unwrap()]).status.code(), Some(2));
    let stalled = uaamg(&["solve", "--grid", "32", "--max-iters", "1", "--tol", "1e-12"]);
    assert_eq!(stalled.status.code(), Some(3));
    assert!(!stalled.stdout.is_empty());
}

#[test]
fn quality_reports_mean_and_spread() {
    let text = stdout(&uaamg(&["quality", "--grid", "16", "--t", "3,inf", "--seeds", "3", "--e-norm"]));
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("problem,t,seeds,ratio_mean,ratio_std,q_energy_sq_mean,q_energy_sq_std,e_norm_mean,e_norm_std")
    );
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').skip(3).map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!(r[0] > 1.0 && r[2] >= 1.0 && r[4] > 0.0 && r[4] < 1.0);
    }
}
