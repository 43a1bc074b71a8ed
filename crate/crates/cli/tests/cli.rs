use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dflm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dflm"))
        .args(args)
        .env("DFOLM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = dflm(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bench_run_then_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    ok(&[
        "bench", "run", "--problems", "ex4,mgh9-mod-n50", "--solvers", "fd,ossv1", "--reps", "2", "--seed", "7",
        "--tau", "1e-3", "--out", s(&out),
    ]);
    let records = fs::read_to_string(out.join("records.csv")).unwrap();
    let mut lines = records.lines();
    assert_eq!(
        lines.next().unwrap(),
        "problem_id,solver_id,rep,seed,start_scale,niter,nf,f_final,status,converged"
    );
    // 2 problems × 3 scales × (1 fd + 2 ossv1)
    assert_eq!(lines.count(), 18);
    assert!(out.join("summary.csv").exists());
    let grid: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("grid.json")).unwrap()).unwrap();
    assert_eq!(grid["reps"], 2);

    let curves = dir.path().join("curves.csv");
    ok(&["bench", "profile", "--in", s(&out), "--tau", "1e-3", "--out", s(&curves)]);
    let text = fs::read_to_string(&curves).unwrap();
    assert!(text.starts_with("solver_id,alpha,pi\n"));
    assert!(text.contains("dflm-fd,1,"));
    assert!(text.contains("dflm-ossv1,1,"));
}

#[test]
fn sequential_and_parallel_runs_write_identical_records() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let base = ["bench", "run", "--problems", "ex1", "--solvers", "ossv1,ossv2", "--reps", "3", "--seed", "5"];
    ok(&[&base[..], &["--out", s(&a), "--sequential"]].concat());
    ok(&[&base[..], &["--out", s(&b)]].concat());
    assert_eq!(
        fs::read(a.join("records.csv")).unwrap(),
        fs::read(b.join("records.csv")).unwrap()
    );
}

#[test]
fn solve_writes_trace_and_result() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let result = dir.path().join("result.json");
    ok(&[
        "solve", "--problem", "ex4", "--solver", "fd", "--seed", "1", "--trace", s(&trace), "--result", s(&result),
    ]);
    let res: serde_json::Value = serde_json::from_str(&fs::read_to_string(&result).unwrap()).unwrap();
    assert_eq!(res["status"], "gradient_small");
    assert_eq!(res["converged"], true);
    let niter = res["niter"].as_u64().unwrap() as usize;
    let trace = fs::read_to_string(&trace).unwrap();
    assert!(trace.starts_with("k,theta,lambda,rho,"));
    // one row per step plus the terminal record
    assert_eq!(trace.lines().count(), 1 + niter + 1);
    let last = trace.lines().last().unwrap();
    assert!(last.ends_with(",true"));
    assert!(last.contains(&format!(",{},", res["nf"])));
}

#[test]
fn probe_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    ok(&["probe", "run", "--probe", "bias", "--seed", "3", "--out", s(&out)]);
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rep["probe"], "bias");
    assert_eq!(rep["passed"], true);
    assert!(rep["bias_bound"].as_f64().unwrap() > 0.0);
}

#[test]
fn usage_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    for args in [
        vec!["bench", "run", "--problems", "nope", "--out", s(&out)],
        vec!["bench", "run", "--problems", "ex1", "--solvers", "bfgs", "--out", s(&out)],
        vec!["bench", "run", "--problems", "ex1", "--reps", "0", "--out", s(&out)],
        vec!["probe", "run", "--probe", "tail", "--out", s(&out)],
        vec!["solve", "--problem", "ex1", "--solver", "newton"],
    ] {
        let res = dflm(&args);
        assert!(!res.status.success(), "{args:?}");
        assert!(!res.stderr.is_empty());
    }
}

#[test]
fn profile_of_missing_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let res = dflm(&["bench", "profile", "--in", s(&dir.path().join("none")), "--out", s(&dir.path().join("c.csv"))]);
    assert!(!res.status.success());
}
