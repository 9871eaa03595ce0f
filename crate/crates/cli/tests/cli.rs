//! End-to-end CLI tests against the built binary: pipelines, file formats,
//! and the documented exit codes (0 ok, 1 validation, 2 contract, 3 budget).

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn calsched<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_calsched"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

const SINGLE_LONG_JOB: &str = r#"{
  "lambda": 1,
  "T": 9,
  "jobs": [
    {
      "id": 0,
      "r": 0,
      "d": 4
    }
  ]
}
"#;

const ORACLE_FIXTURE: &str = r#"{
  "lambda": 1,
  "T": 3,
  "jobs": [
    { "id": 0, "r": 0, "d": 2 },
    { "id": 1, "r": 0, "d": 2 },
    { "id": 2, "r": 5, "d": 8 }
  ]
}
"#;

#[test]
fn gen_writes_deterministic_instances() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = calsched([
            "gen",
            "--seed",
            "42",
            "-n",
            "12",
            "--lambda",
            "1",
            "-T",
            "9",
            "--horizon",
            "20",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let out = calsched(["validate", "--instance", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("ok"));
}

#[test]
fn run_single_long_job_uses_four_calibrations() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let sched = dir.path().join("sched.json");
    write(&inst, SINGLE_LONG_JOB);
    let out = calsched([
        "run",
        "--alg",
        "integrated",
        "--alpha",
        "1/3",
        "--instance",
        inst.to_str().unwrap(),
        "--schedule-out",
        sched.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("calibrations 4"), "{}", stdout(&out));

    // pipeline property: the written schedule validates
    let out = calsched([
        "validate",
        "--instance",
        inst.to_str().unwrap(),
        "--schedule",
        sched.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn oracle_fixture_needs_three_calibrations() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    write(&inst, ORACLE_FIXTURE);
    let out = calsched(["oracle", "--instance", inst.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("opt 3"), "{text}");
    assert!(text.contains("witness"), "{text}");
}

#[test]
fn oracle_budget_exceeded_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    write(&inst, ORACLE_FIXTURE);
    let out = calsched([
        "oracle",
        "--instance",
        inst.to_str().unwrap(),
        "--budget",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stdout(&out).contains("lower_bound"));
}

#[test]
fn validate_rejects_bad_instances_and_schedules() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    // window < 1 + lambda
    write(
        &inst,
        r#"{"lambda": 2, "T": 3, "jobs": [{"id": 0, "r": 0, "d": 2}]}"#,
    );
    let out = calsched(["validate", "--instance", inst.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("window"));

    // missing lambda field: parse diagnostic names the field
    write(&inst, r#"{"T": 3, "jobs": []}"#);
    let out = calsched(["validate", "--instance", inst.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("lambda"), "{}", stderr(&out));

    // schedule with an assignment past the deadline
    write(
        &inst,
        r#"{"lambda": 1, "T": 3, "jobs": [{"id": 0, "r": 0, "d": 2}]}"#,
    );
    let sched = dir.path().join("sched.json");
    write(
        &sched,
        r#"{"calibrations": [{"start": 0}], "assignments": [{"job": 0, "calibration": 0, "t": 2}]}"#,
    );
    let out = calsched([
        "validate",
        "--instance",
        inst.to_str().unwrap(),
        "--schedule",
        sched.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("deadline"));
}

#[test]
fn run_rejects_misclassified_corpus_with_contract_code() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    write(&inst, SINGLE_LONG_JOB); // long job, short controller
    let out = calsched([
        "run",
        "--alg",
        "short",
        "--alpha",
        "1/3",
        "--instance",
        inst.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn decimal_alpha_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    write(&inst, SINGLE_LONG_JOB);
    let out = calsched([
        "run",
        "--alg",
        "integrated",
        "--alpha",
        "0.33",
        "--instance",
        inst.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("fractions"), "{}", stderr(&out));
}

#[test]
fn lambda_adversary_reports_ratio_at_least_lambda() {
    let out = calsched([
        "adversary",
        "--kind",
        "lambda",
        "--alg",
        "integrated",
        "--alpha",
        "1/3",
        "--lambda",
        "2",
        "-T",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("opt 1"), "{text}");
    let alg: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("alg_calibrations "))
        .and_then(|v| v.parse().ok())
        .expect("alg_calibrations line");
    assert!(alg >= 2, "ALG must pay at least lambda: {text}");
}

#[test]
fn e_adversary_emits_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = calsched([
        "adversary",
        "--kind",
        "e",
        "--alg",
        "integrated",
        "--alpha",
        "1/3",
        "--lambda",
        "0",
        "-T",
        "10",
        "--epsilon",
        "1/10",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,released_total,online,offline,ratio"));
    assert!(lines.next().is_some(), "at least one trajectory row");
}

#[test]
fn ratio_report_passes_on_clean_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let out = calsched([
        "gen",
        "--seed",
        "100",
        "--count",
        "6",
        "-n",
        "6",
        "--lambda",
        "1",
        "-T",
        "6",
        "--horizon",
        "10",
        "--alpha",
        "1/3",
        "--short-fraction",
        "1/2",
        "--out-dir",
        corpus.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let report = dir.path().join("report.csv");
    let out = calsched([
        "ratio",
        "--corpus",
        corpus.to_str().unwrap(),
        "--algs",
        "integrated",
        "--alpha",
        "1/3",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(&report).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "seed,algorithm,alpha,lambda,T,n,alg_cost,opt,opt_kind,ratio,bound,pass"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 12, "{row}");
        assert_eq!(fields[1], "integrated");
        assert_eq!(fields[8], "exact");
        assert_eq!(fields[11], "true");
    }
}

#[test]
fn ratio_skips_incompatible_algorithms_with_notice() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    fs::create_dir_all(&corpus).unwrap();
    write(&corpus.join("7.json"), SINGLE_LONG_JOB);
    let out = calsched([
        "ratio",
        "--corpus",
        corpus.to_str().unwrap(),
        "--algs",
        "long,short",
        "--alpha",
        "1/3",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(
        stderr(&out).contains("skipped seed 7 for short"),
        "{}",
        stderr(&out)
    );
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("7,long,")), "{text}");
}
