use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spikemi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spikemi"))
        .args(args)
        .output()
        .expect("spawn spikemi")
}

fn ok(args: &[&str]) -> String {
    let out = spikemi(args);
    assert!(
        out.status.success(),
        "spikemi {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_toy_writes_one_row_per_response() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.csv");
    ok(&["gen-toy", "--ns", "10", "--nd", "3", "--nt", "10", "--seed", "1", "-o", p(&file)]);
    let text = fs::read_to_string(&file).unwrap();
    assert_eq!(text.lines().count(), 100);
    assert!(text.lines().all(|l| l.split(',').count() == 4));
}

#[test]
fn kernel_estimate_is_within_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.csv");
    ok(&["gen-toy", "--ns", "10", "--nd", "3", "--nt", "10", "--seed", "1", "-o", p(&file)]);
    let json: Value = serde_json::from_str(&ok(&[
        "estimate", "--input", p(&file), "--format", "csv-vectors", "--metric", "euclidean", "--kernel", "--nh",
        "10",
    ]))
    .unwrap();
    assert_eq!(json["estimator"], "kernel");
    assert_eq!(json["config"]["n_h"], 10);
    let bits = json["bits"].as_f64().unwrap();
    assert!((0.0..=10f64.log2()).contains(&bits), "bits = {bits}");
}

#[test]
fn noiseless_toy_gives_log2_ns_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.csv");
    ok(&["gen-toy", "--ns", "8", "--nd", "2", "--nt", "6", "--seed", "3", "--sigma2", "1e-12", "-o", p(&file)]);
    let json: Value = serde_json::from_str(&ok(&["estimate", "--input", p(&file)])).unwrap();
    assert_eq!(json["bits"].as_f64().unwrap(), 3.0);
}

#[test]
fn bias_corrected_output_has_fit_fields() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.csv");
    ok(&["gen-toy", "--ns", "4", "--nd", "2", "--nt", "20", "--seed", "5", "-o", p(&file)]);
    let json: Value = serde_json::from_str(&ok(&["estimate", "--input", p(&file), "--bias-correct", "--seed", "2"])).unwrap();
    assert_eq!(json["curve"].as_array().unwrap().len(), 10);
    for key in ["bits", "intercept_bits", "A_bits", "B_bits", "residual"] {
        assert!(json[key].as_f64().unwrap().is_finite(), "{key}");
    }
}

#[test]
fn other_estimators_and_distances() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.csv");
    ok(&["gen-toy", "--ns", "3", "--nd", "2", "--nt", "8", "--seed", "9", "-o", p(&file)]);

    let ksg: Value = serde_json::from_str(&ok(&["estimate", "--input", p(&file), "--ksg", "--nk", "2"])).unwrap();
    assert_eq!(ksg["estimator"], "ksg");
    assert_eq!(ksg["config"]["n_k"], 2);

    let hist: Value =
        serde_json::from_str(&ok(&["estimate", "--input", p(&file), "--histogram", "--bin-width", "0.5"])).unwrap();
    assert_eq!(hist["estimator"], "histogram");

    let matrix = ok(&["distances", "--input", p(&file)]);
    let rows: Vec<&str> = matrix.lines().collect();
    assert_eq!(rows.len(), 24);
    assert!(rows.iter().all(|r| r.split(',').count() == 24));
}

#[test]
fn spike_trains_need_a_metric() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.txt");
    fs::write(&file, "0 2 0.01 0.05\n0 2 0.012 0.049\n1 1 0.2\n1 1 0.21\n").unwrap();

    let out = spikemi(&["estimate", "--input", p(&file), "--format", "spike-text"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--metric"));

    let json: Value = serde_json::from_str(&ok(&[
        "estimate", "--input", p(&file), "--format", "spike-text", "--metric", "victor-purpura", "--q", "20",
    ]))
    .unwrap();
    assert_eq!(json["bits"].as_f64().unwrap(), 1.0);

    let vr = ok(&[
        "distances", "--input", p(&file), "--format", "spike-text", "--metric", "van-rossum", "--tau", "0.01",
    ]);
    assert_eq!(vr.lines().count(), 4);
}

#[test]
fn exit_codes() {
    // usage error
    assert_eq!(spikemi(&["estimate", "--kernel", "--ksg", "--input", "x"]).status.code(), Some(2));
    assert_eq!(spikemi(&["frobnicate"]).status.code(), Some(2));
    // runtime error names the file
    let out = spikemi(&["estimate", "--input", "/nonexistent/d.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("/nonexistent/d.csv"));
    assert_eq!(msg.trim().lines().count(), 1);
}

#[test]
fn parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.csv");
    fs::write(&file, "0,1.0\n1,oops\n").unwrap();
    let out = spikemi(&["estimate", "--input", p(&file)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.csv:2"));
}

#[test]
fn benchmark_writes_outputs_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = |out: &Path| {
        vec![
            "benchmark".to_string(),
            "--ns=10".into(),
            "--nd=3".into(),
            "--nt=10".into(),
            "--datasets=50".into(),
            "--seed=7".into(),
            "--mc-samples=2000".into(),
            "-o".into(),
            p(out).to_string(),
        ]
    };
    let run = |out: &Path, threads: &str| {
        let mut v = args(out);
        v.push(format!("--threads={threads}"));
        ok(&v.iter().map(String::as_str).collect::<Vec<_>>())
    };
    run(&a, "1");
    run(&b, "3");

    let records = fs::read_to_string(a.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 51);
    assert_eq!(
        records.lines().next().unwrap(),
        "seed,sigma2,true_bits,kernel_bits,hist_bits,hist_width"
    );
    let summary: Value = serde_json::from_str(&fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["produced"], 50);

    for f in ["records.csv", "summary.json", "scatter.dat", "scatter_hist.dat"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn commands_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let f1 = dir.path().join("1.csv");
    let f2 = dir.path().join("2.csv");
    ok(&["gen-toy", "--ns", "5", "--nd", "4", "--nt", "12", "--seed", "11", "-o", p(&f1)]);
    ok(&["gen-toy", "--ns", "5", "--nd", "4", "--nt", "12", "--seed", "11", "-o", p(&f2)]);
    assert_eq!(fs::read(&f1).unwrap(), fs::read(&f2).unwrap());

    let est = ["estimate", "--input", p(&f1), "--bias-correct", "--seed", "4"];
    assert_eq!(ok(&est), ok(&est));
    let dist = ["distances", "--input", p(&f1)];
    assert_eq!(ok(&dist), ok(&dist));
}
