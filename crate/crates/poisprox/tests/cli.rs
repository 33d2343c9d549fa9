use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use poisprox::config::RunConfig;
use poisprox::io::{load_counts, load_image, load_matrix};
use poisprox::trace::{read_trace, write_trace};
use poisprox_core::objective::ExtendedReal;
use poisprox_core::solvers::{SolverTrace, TraceRecord};

fn poisprox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poisprox"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = poisprox(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_consistent_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let stdout = ok(&["simulate", "--out", path(&out)]);
    assert!(stdout.contains("total counts") && stdout.contains("max count"));
    let truth = load_image(&out.join("truth.txt")).unwrap();
    let counts = load_counts(&out.join("counts.txt")).unwrap();
    let psf = load_matrix(&out.join("psf.txt")).unwrap();
    assert_eq!(truth.shape(), (32, 32));
    assert_eq!((counts.width(), counts.height()), (32, 32));
    assert_eq!(psf.shape(), (7, 7));
    assert!((psf.sum() - 1.0).abs() < 1e-12);
    assert!(stdout.contains(&format!("total counts {}", counts.total())));
    let cfg = RunConfig::load(&out.join("config.json")).unwrap();
    assert_eq!(cfg.seed, 42);
}

#[test]
fn fixed_seed_counts_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("c"),
    );
    ok(&["simulate", "--seed", "5", "--out", path(&a)]);
    ok(&["simulate", "--seed", "5", "--out", path(&b)]);
    ok(&["simulate", "--seed", "6", "--out", path(&c)]);
    let read = |d: &Path| fs::read(d.join("counts.txt")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn delta_psf_constant_scene_counts_average_the_level() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "simulate",
        "--phantom",
        "constant:scale=10,size=32",
        "--psf",
        "delta",
        "--out",
        path(dir.path()),
    ]);
    let counts = load_counts(&dir.path().join("counts.txt")).unwrap();
    let mean = counts.total() as f64 / 1024.0;
    assert!(
        (mean - 10.0).abs() <= 3.0 * (10.0f64 / 1024.0).sqrt(),
        "mean {mean}"
    );
}

#[test]
fn deconv_outputs_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let stdout = ok(&[
            "deconv",
            "--iters",
            "20",
            "--alg",
            "both",
            "--out",
            path(out),
        ]);
        assert!(stdout.contains("relative_objective_discrepancy"));
        assert!(stdout.contains("wall-clock"));
    }
    for name in ["primal", "primal_dual"] {
        let trace = read_trace(&a.join(format!("trace_{name}.csv"))).unwrap();
        assert_eq!(trace.len(), 21);
        assert!(trace
            .records
            .windows(2)
            .all(|w| w[1].elapsed_s >= w[0].elapsed_s));
        assert!(trace.records.iter().all(|r| r.mae.is_some()));
        let recon = load_image(&a.join(format!("recon_{name}.txt"))).unwrap();
        assert!(recon.pixels().iter().all(|&v| v >= -1e-9));
    }
    let csv = fs::read_to_string(a.join("trace_primal.csv")).unwrap();
    assert!(csv.starts_with("iter,objective,fidelity,penalty,pos_violation,mae,elapsed_s\n"));
    // The zero start of the primal scheme is infeasible.
    assert!(csv.lines().nth(1).unwrap().starts_with("0,inf,inf,"));
    let summary = |d: &Path| fs::read(d.join("summary.txt")).unwrap();
    assert_eq!(summary(&a), summary(&b));
    let text = String::from_utf8(summary(&a)).unwrap();
    for key in ["gamma = 0.38", "final_objective", "mae", "iterations = 20"] {
        assert!(text.contains(key), "{key} missing from\n{text}");
    }
    assert!(a.join("timing.txt").exists());
}

#[test]
fn single_algorithm_uses_plain_names() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    ok(&["simulate", "--out", path(&sim)]);
    let out = dir.path().join("pd");
    ok(&[
        "deconv",
        "--input",
        path(&sim),
        "--alg",
        "primal-dual",
        "--iters",
        "15",
        "--out",
        path(&out),
    ]);
    assert_eq!(read_trace(&out.join("trace.csv")).unwrap().len(), 16);
    assert!(out.join("recon.txt").exists());
    assert!(!out.join("trace_primal.csv").exists());
}

#[test]
fn saved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&[
        "deconv",
        "--iters",
        "10",
        "--alg",
        "primal",
        "--gamma",
        "0.5",
        "--out",
        path(&a),
    ]);
    let cfg = a.join("config.json");
    ok(&["deconv", "--config", path(&cfg), "--out", path(&b)]);
    let read = |d: &Path, f: &str| fs::read_to_string(d.join(f)).unwrap();
    assert_eq!(read(&a, "summary.txt"), read(&b, "summary.txt"));
    let (ca, cb) = (
        RunConfig::load(&cfg).unwrap(),
        RunConfig::load(&b.join("config.json")).unwrap(),
    );
    assert_eq!(
        RunConfig {
            out: ca.out.clone(),
            ..cb
        },
        ca
    );
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());
    for args in [
        vec!["deconv", "--gamma", "0", "--out", out],
        vec!["deconv", "--theta", "2", "--out", out],
        vec!["deconv", "--iters", "0", "--out", out],
        vec!["deconv", "--sigma", "5", "--tau", "5", "--out", out],
        vec!["simulate", "--phantom", "spiral", "--out", out],
        vec!["deconv", "--alg", "newton"],
    ] {
        let res = poisprox(&args);
        assert_eq!(
            res.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&res.stderr)
        );
    }
    assert!(!dir.path().join("trace_primal.csv").exists());
}

#[test]
fn runtime_errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nothing-here");
    let res = poisprox(&[
        "deconv",
        "--input",
        path(&missing),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(res.status.code(), Some(1));
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "iter,objective\n0,1\n").unwrap();
    let res = poisprox(&["compare", path(&bad), path(&bad), "--out", path(dir.path())]);
    assert_eq!(res.status.code(), Some(1));
}

fn synthetic(c: f64) -> SolverTrace {
    SolverTrace {
        records: (0..=200)
            .map(|t| {
                let j = 1000.0 + c / (t.max(1) as f64);
                TraceRecord {
                    iter: t,
                    objective: ExtendedReal::Finite(j),
                    fidelity: ExtendedReal::Finite(j),
                    penalty: 0.0,
                    pos_violation: 0.0,
                    mae: None,
                    elapsed_s: 0.01 * t as f64,
                }
            })
            .collect(),
    }
}

#[test]
fn compare_reports_crossings_and_merged_tables() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_trace(&synthetic(100.0), &a).unwrap();
    write_trace(&synthetic(50.0), &b).unwrap();
    let out = dir.path().join("cmp");
    let stdout = ok(&["compare", path(&a), path(&b), "--out", path(&out)]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert!(lines[0].contains("iteration 10 "), "{stdout}");
    assert!(lines[1].contains("iteration 5 "), "{stdout}");
    let merged = fs::read_to_string(out.join("compare_iter.csv")).unwrap();
    assert_eq!(merged.lines().count(), 202);
    assert!(merged.starts_with("iter,objective_a,objective_b,elapsed_s_a,elapsed_s_b\n"));
    let timed = fs::read_to_string(out.join("compare_time.csv")).unwrap();
    assert!(timed.starts_with("elapsed_s,objective_a,objective_b\n"));
    let same = ok(&["compare", path(&a), path(&a), "--out", path(&out)]);
    let same: Vec<&str> = same.lines().collect();
    assert_eq!(same[0], same[1]);
}
