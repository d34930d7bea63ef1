use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use densap::report::{PhaseReport, RunReport};
use tempfile::TempDir;

fn densap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_densap"))
        .args(args)
        .output()
        .expect("spawn densap")
}

fn ok(args: &[&str]) -> String {
    let out = densap(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str]) -> String {
    let out = densap(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(!err.trim().is_empty());
    err
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn without_elapsed(json: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v.as_object_mut().unwrap().remove("elapsed_seconds");
    v
}

fn gen_points(dir: &TempDir, kind: &str, n: usize) -> PathBuf {
    let p = dir.path().join(format!("{kind}-{n}.csv"));
    ok(&["gen", "--kind", kind, "--n", &n.to_string(), "--seed", "7", "-o", s(&p)]);
    p
}

#[test]
fn gen_writes_deterministic_csv() {
    let dir = TempDir::new().unwrap();
    let a = gen_points(&dir, "random2d", 100);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 100);
    assert!(text.lines().all(|l| l.split(',').count() == 2));
    assert_eq!(ok(&["gen", "--kind", "random2d", "--n", "100", "--seed", "7"]), text);
    assert_ne!(ok(&["gen", "--kind", "random2d", "--n", "100", "--seed", "8"]), text);
    let sphere = ok(&["gen", "--kind", "punctured-sphere", "--n", "5", "--noise", "0.01"]);
    assert!(sphere.lines().all(|l| l.split(',').count() == 3));
}

#[test]
fn gen_rejects_bad_flags() {
    fails(&["gen", "--kind", "random2d", "--n", "0"]);
    fails(&["gen", "--kind", "moons", "--n", "10"]);
    fails(&["gen", "--kind", "gaussian", "--n", "10", "--noise", "-1"]);
}

#[test]
fn single_point_any_algorithm() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "one.csv", "-3.5\n");
    let p = write(&dir, "pt.csv", "1,2\n");
    for algo in ["ap", "pap", "lap"] {
        let report = RunReport::from_json(&ok(&["cluster", "--matrix", s(&m), "--algo", algo])).unwrap();
        assert_eq!(report.result.exemplars, vec![0]);
        assert_eq!(report.result.netsim, -3.5);
        let report = RunReport::from_json(&ok(&[
            "cluster",
            "--input",
            s(&p),
            "--algo",
            algo,
            "--preference",
            "-2",
        ]))
        .unwrap();
        assert_eq!((report.result.idx, report.result.netsim), (vec![0], -2.0));
    }
}

#[test]
fn pap_report_separates_phases() {
    let dir = TempDir::new().unwrap();
    let pts = gen_points(&dir, "random2d", 1000);
    let report = RunReport::from_json(&ok(&["cluster", "--input", s(&pts), "--algo", "pap", "--k", "4"])).unwrap();
    let PhaseReport::Pap {
        block_sizes,
        block_iterations,
        outer_iterations,
        ..
    } = &report.phases
    else {
        panic!("expected a PAP phase report");
    };
    assert_eq!(block_sizes, &vec![250; 4]);
    assert_eq!(block_iterations.len(), 4);
    assert!(block_iterations.iter().all(|&i| i > 0));
    assert!(*outer_iterations > 0);
    assert_eq!(report.result.iterations, *outer_iterations);
    assert!(report.result.is_valid_configuration());
    assert_eq!(report.algorithm, "pap");
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let pts = gen_points(&dir, "twin_peaks", 150);
    for algo in ["ap", "pap", "lap"] {
        let args = [
            "cluster",
            "--input",
            s(&pts),
            "--algo",
            algo,
            "--seed",
            "3",
            "--landmarks",
            "30",
            "--trace",
        ];
        let (a, b) = (ok(&args), ok(&args));
        assert_eq!(without_elapsed(&a), without_elapsed(&b), "{algo}");
        let report = RunReport::from_json(&a).unwrap();
        assert_eq!(RunReport::from_json(&report.to_json().unwrap()).unwrap(), report);
        assert!(!report.trace.is_empty());
        assert_eq!(report.result.netsim, report.trace.last().unwrap().netsim);
    }
}

#[test]
fn labels_and_trace_files() {
    let dir = TempDir::new().unwrap();
    let pts = gen_points(&dir, "gaussian", 80);
    let labels = dir.path().join("labels.csv");
    let trace = dir.path().join("trace.csv");
    let out = dir.path().join("report.json");
    let stdout = ok(&[
        "cluster",
        "--input",
        s(&pts),
        "--labels-out",
        s(&labels),
        "--trace-csv",
        s(&trace),
        "-o",
        s(&out),
    ]);
    assert!(stdout.is_empty());
    let report = RunReport::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    let written: Vec<usize> = fs::read_to_string(&labels)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(written, report.result.idx);
    let trace_text = fs::read_to_string(&trace).unwrap();
    let mut lines = trace_text.lines();
    assert_eq!(lines.next(), Some("phase,step,netsim"));
    assert_eq!(lines.count(), report.result.iterations);
}

#[test]
fn matrix_input_keeps_or_replaces_the_diagonal() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "s.csv", "-1,-2,-9\n-2,-1,-9\n-9,-9,-1\n");
    let given = RunReport::from_json(&ok(&["cluster", "--matrix", s(&m)])).unwrap();
    assert_eq!(given.input.preference, "given");
    assert_eq!(given.result.exemplars.len(), 3);
    assert_eq!(given.result.netsim, -3.0);
    let prefs = write(&dir, "p.csv", "-100\n-100\n-1\n");
    let from_file = RunReport::from_json(&ok(&["cluster", "--matrix", s(&m), "--preference-file", s(&prefs)])).unwrap();
    assert_eq!(from_file.result.exemplars, vec![2]);
    let median = RunReport::from_json(&ok(&["cluster", "--matrix", s(&m), "--preference", "median"])).unwrap();
    assert_eq!(median.input.preference, "median");
    assert_eq!(median.result.expref, -9.0 * median.result.exemplars.len() as f64);
}

#[test]
fn cluster_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let ragged = write(&dir, "ragged.csv", "0,0\n1\n");
    assert!(fails(&["cluster", "--input", s(&ragged)]).contains("line 2"));
    let text = write(&dir, "text.csv", "a,b\n");
    fails(&["cluster", "--input", s(&text)]);
    let rect = write(&dir, "rect.csv", "0,1\n1,0\n2,2\n");
    fails(&["cluster", "--matrix", s(&rect)]);
    fails(&["cluster", "--input", "/nonexistent/points.csv"]);
    fails(&["cluster"]);

    let pts = gen_points(&dir, "random2d", 20);
    fails(&["cluster", "--input", s(&pts), "--algo", "kmeans"]);
    fails(&["cluster", "--input", s(&pts), "--lambda", "1.0"]);
    fails(&["cluster", "--input", s(&pts), "--algo", "pap", "--k", "1"]);
    fails(&["cluster", "--input", s(&pts), "--algo", "pap", "--k", "21"]);
    fails(&["cluster", "--input", s(&pts), "--algo", "lap", "--landmarks", "20"]);
    fails(&["cluster", "--input", s(&pts), "--preference", "high"]);
    let short = write(&dir, "short.csv", "-1\n");
    fails(&["cluster", "--input", s(&pts), "--preference-file", s(&short)]);
}

#[test]
fn pap_warns_above_the_block_bound() {
    let dir = TempDir::new().unwrap();
    let pts = gen_points(&dir, "random2d", 40);
    let out = densap(&[
        "cluster",
        "--input",
        s(&pts),
        "--algo",
        "pap",
        "--k",
        "4",
        "--expected-clusters",
        "10",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn metrics_modes() {
    let dir = TempDir::new().unwrap();
    let truth = write(&dir, "truth.csv", "0\n0\n1\n");
    let pred = write(&dir, "pred.csv", "0\n0\n0\n");
    assert_eq!(
        ok(&["metrics", s(&truth), s(&truth), "--mode", "rates"]),
        "tar 1.000000\nfar 0.000000\n"
    );
    assert_eq!(ok(&["metrics", s(&pred), s(&truth)]), "tar 1.000000\nfar 1.000000\n");
    let a = ok(&["metrics", s(&pred), s(&truth), "--mode", "agreement"]);
    assert_eq!(a, "agreement 0.333333\n");
    assert_eq!(ok(&["metrics", s(&truth), s(&pred), "--mode", "agreement"]), a);
    let long = write(&dir, "long.csv", "0\n0\n1\n1\n");
    fails(&["metrics", s(&long), s(&truth)]);
    fails(&["metrics", s(&pred), s(&truth), "--mode", "nmi"]);
}

#[test]
fn bench_csv_schema() {
    let text = ok(&[
        "bench",
        "--suite",
        "lap-accuracy",
        "--n",
        "120",
        "--landmarks",
        "20,40,60",
        "--seeds",
        "2",
    ]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 3 * 2 + 3);
    assert_eq!(lines.iter().filter(|l| l.starts_with("run,")).count(), 6);
    assert_eq!(lines.iter().filter(|l| l.starts_with("mean,")).count(), 3);
    assert!(lines[0].contains("agreement_with_ap"));

    let text = ok(&[
        "bench",
        "--suite",
        "pap-iterations",
        "--sizes",
        "60,80",
        "--k",
        "4",
        "--seeds",
        "2",
    ]);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert!(header.contains(&"ap_iterations") && header.contains(&"pap_outer_iterations"));
    let runs: Vec<&str> = text.lines().filter(|l| l.starts_with("run,")).collect();
    assert_eq!(runs.len(), 4);
    assert!(runs[0].starts_with("run,60,0,") && runs[3].starts_with("run,80,1,"));

    let text = ok(&[
        "bench",
        "--suite",
        "pap-k-sweep",
        "--n",
        "80",
        "--ks",
        "2,4",
        "--seeds",
        "1",
    ]);
    assert_eq!(text.lines().count(), 1 + 2 + 2);
    assert!(text.lines().next().unwrap().contains("tar_vs_ap"));

    fails(&["bench", "--suite", "everything"]);
    fails(&["bench", "--suite", "lap-accuracy", "--seeds", "0"]);
}
