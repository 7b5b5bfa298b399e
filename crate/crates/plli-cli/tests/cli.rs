use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn plli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plli"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn plli_ok(dir: &Path, args: &[&str]) -> String {
    let out = plli(dir, args);
    assert!(
        out.status.success(),
        "plli {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write_values(path: &Path, name: &str, values: &[f64]) {
    let mut text = format!("{name}\n");
    for v in values {
        text.push_str(&format!("{v}\n"));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn synth_formula_header_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    plli_ok(dir.path(), &["synth", "--n", "50", "--seed", "3", "--out", "a.csv"]);
    plli_ok(dir.path(), &["synth", "--n", "50", "--seed", "3", "--out", "b.csv"]);
    let a = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b, "same seed must give byte-identical files");

    let mut lines = a.lines();
    assert_eq!(lines.next(), Some("x1,x2,f"));
    let mut n = 0;
    for line in lines {
        let parts: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let (x1, x2, f) = (parts[0], parts[1], parts[2]);
        assert_eq!(f, (x1 + x2) * (x1 + x2));
        n += 1;
    }
    assert_eq!(n, 50);

    let c = plli_ok(dir.path(), &["synth", "--n", "50", "--seed", "4", "--out", "c.csv"]);
    assert!(c.contains("50 rows"));
    assert_ne!(a, fs::read_to_string(dir.path().join("c.csv")).unwrap());
}

#[test]
fn fit_smoke_determinism_and_stride_default() {
    let dir = tempfile::tempdir().unwrap();
    plli_ok(dir.path(), &["synth", "--n", "200", "--seed", "1", "--out", "d.csv"]);
    let base = [
        "fit", "--input", "d.csv", "--target-col", "f", "--h", "2", "--w", "2",
    ];
    let run = |out: &str, extra: &[&str]| {
        let mut args: Vec<&str> = base.to_vec();
        args.extend_from_slice(extra);
        args.extend_from_slice(&["--out", out]);
        plli_ok(dir.path(), &args)
    };
    let stdout = run("m1.json", &[]);
    assert!(stdout.contains("total regions: 4"));
    run("m2.json", &[]);
    run("m3.json", &["--stride", "1"]);
    let m1 = fs::read_to_string(dir.path().join("m1.json")).unwrap();
    assert_eq!(m1, fs::read_to_string(dir.path().join("m2.json")).unwrap());
    assert_eq!(m1, fs::read_to_string(dir.path().join("m3.json")).unwrap());

    let model: Value = serde_json::from_str(&m1).unwrap();
    assert_eq!(model["format_version"], 1);
    assert_eq!(model["intervals"].as_array().unwrap().len(), 2);
    let regions: usize = model["intervals"]
        .as_array()
        .unwrap()
        .iter()
        .map(|iv| iv["centroids"].as_array().unwrap().len())
        .sum();
    assert_eq!(regions, 4);
    assert!(model["training_risk"].as_f64().unwrap().is_finite());
}

#[test]
fn exit_codes_distinguish_failure_classes() {
    let dir = tempfile::tempdir().unwrap();
    plli_ok(dir.path(), &["synth", "--n", "30", "--seed", "0", "--out", "d.csv"]);
    // Bad configuration -> 2.
    let out = plli(
        dir.path(),
        &["fit", "--input", "d.csv", "--target-col", "f", "--h", "0", "--w", "1", "--out", "m.json"],
    );
    assert_eq!(out.status.code(), Some(2));
    // Unreadable input -> 3.
    let out = plli(
        dir.path(),
        &["fit", "--input", "missing.csv", "--target-col", "f", "--h", "1", "--w", "1", "--out", "m.json"],
    );
    assert_eq!(out.status.code(), Some(3));
    // Unknown target column -> 2.
    let out = plli(
        dir.path(),
        &["fit", "--input", "d.csv", "--target-col", "nope", "--h", "1", "--w", "1", "--out", "m.json"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn evaluate_reproduces_training_risk_and_matches_by_name() {
    let dir = tempfile::tempdir().unwrap();
    plli_ok(dir.path(), &["synth", "--n", "150", "--seed", "5", "--out", "d.csv"]);
    plli_ok(
        dir.path(),
        &["fit", "--input", "d.csv", "--target-col", "f", "--h", "2", "--w", "2", "--out", "m.json"],
    );
    let stdout = plli_ok(
        dir.path(),
        &["evaluate", "--model", "m.json", "--input", "d.csv", "--target-col", "f", "--report", "r.json"],
    );
    // No labels -> accuracy metrics absent but the command still succeeds.
    assert!(stdout.contains("MSE-p"));
    assert!(stdout.contains("n/a"));

    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    let model: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("m.json")).unwrap()).unwrap();
    let mse_f = report["mse_f"].as_f64().unwrap();
    let risk = model["training_risk"].as_f64().unwrap();
    assert!(
        (mse_f - risk).abs() <= 1e-9,
        "training-data MSE-f {mse_f} vs training risk {risk}"
    );

    // Permute the CSV columns; schema is matched by name, so the report is
    // unchanged.
    let data = fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let permuted: String = data
        .lines()
        .map(|l| {
            let p: Vec<&str> = l.split(',').collect();
            format!("{},{},{}\n", p[2], p[1], p[0])
        })
        .collect();
    fs::write(dir.path().join("p.csv"), permuted).unwrap();
    let out1 = plli_ok(
        dir.path(),
        &["evaluate", "--model", "m.json", "--input", "d.csv", "--target-col", "f"],
    );
    let out2 = plli_ok(
        dir.path(),
        &["evaluate", "--model", "m.json", "--input", "p.csv", "--target-col", "f"],
    );
    assert_eq!(out1, out2);
}

#[test]
fn explain_row_count_and_constant_importances() {
    let dir = tempfile::tempdir().unwrap();
    plli_ok(dir.path(), &["synth", "--n", "80", "--seed", "2", "--out", "d.csv"]);
    plli_ok(
        dir.path(),
        &[
            "fit", "--input", "d.csv", "--target-col", "f", "--h", "3", "--w", "2",
            "--model", "constant", "--out", "m.json",
        ],
    );
    let stdout = plli_ok(dir.path(), &["explain", "--model", "m.json", "--precision", "3"]);
    let model: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("m.json")).unwrap()).unwrap();
    let regions: usize = model["intervals"]
        .as_array()
        .unwrap()
        .iter()
        .map(|iv| iv["centroids"].as_array().unwrap().len())
        .sum();
    let rows: Vec<&str> = stdout
        .lines()
        .filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit()))
        .collect();
    assert_eq!(rows.len(), regions);
    // Constant local models carry no slope, so every importance is zero.
    for row in rows {
        assert!(!row.contains('*'));
        assert!(row.contains("[0.000, 0.000]"));
    }
}

#[test]
fn cluster1d_example_verify_and_k_too_large() {
    let dir = tempfile::tempdir().unwrap();
    write_values(&dir.path().join("v.csv"), "v", &[1.0, 2.0, 10.0, 11.0, 12.0]);
    let stdout = plli_ok(
        dir.path(),
        &["cluster1d", "--input", "v.csv", "--k", "2", "--verify"],
    );
    assert!(stdout.contains("total cost: 2.5"));
    assert!(stdout.contains("oracle match"));

    let out = plli(dir.path(), &["cluster1d", "--input", "v.csv", "--k", "9"]);
    assert_eq!(out.status.code(), Some(2));

    // Multi-column input needs --col.
    fs::write(dir.path().join("w.csv"), "a,b\n1,2\n3,4\n").unwrap();
    let out = plli(dir.path(), &["cluster1d", "--input", "w.csv", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let stdout = plli_ok(
        dir.path(),
        &["cluster1d", "--input", "w.csv", "--col", "b", "--k", "2"],
    );
    assert!(stdout.contains("centers: 2 4"));
}

#[test]
fn representatives_rows_and_coverage_consistency() {
    let dir = tempfile::tempdir().unwrap();
    plli_ok(dir.path(), &["synth", "--n", "120", "--seed", "9", "--out", "d.csv"]);
    plli_ok(
        dir.path(),
        &["fit", "--input", "d.csv", "--target-col", "f", "--h", "2", "--w", "2", "--out", "m.json"],
    );
    let stdout = plli_ok(
        dir.path(),
        &["representatives", "--model", "m.json", "--input", "d.csv", "--target-col", "f"],
    );
    let rows: Vec<&str> = stdout
        .lines()
        .filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit()))
        .collect();
    assert_eq!(rows.len(), 4, "one representative per region");

    // The printed feature coverage equals the coverage statistic computed
    // directly on the model's centroids.
    let model: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("m.json")).unwrap()).unwrap();
    let centroids: Vec<Vec<f64>> = model["intervals"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|iv| iv["centroids"].as_array().unwrap().iter())
        .map(|c| c.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect())
        .collect();
    let expected = plli_core::coverage(&centroids).unwrap();
    let printed: f64 = stdout
        .lines()
        .find(|l| l.starts_with("coverage (features):"))
        .and_then(|l| l.split_whitespace().last())
        .unwrap()
        .parse()
        .unwrap();
    assert!((printed - expected).abs() <= 1e-9 * expected.max(1.0));

    // Single-region model: coverage needs at least two points.
    plli_ok(
        dir.path(),
        &["fit", "--input", "d.csv", "--target-col", "f", "--h", "1", "--w", "1", "--out", "m1.json"],
    );
    let stdout = plli_ok(
        dir.path(),
        &["representatives", "--model", "m1.json", "--input", "d.csv", "--target-col", "f"],
    );
    assert!(stdout.contains("coverage (features):    n/a"));
}

#[test]
fn model_file_roundtrip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    plli_ok(dir.path(), &["synth", "--n", "60", "--seed", "8", "--out", "d.csv"]);
    plli_ok(
        dir.path(),
        &["fit", "--input", "d.csv", "--target-col", "f", "--h", "2", "--w", "1", "--out", "m.json"],
    );
    let loaded = plli_cli::model_file::load(&dir.path().join("m.json")).unwrap();
    plli_cli::model_file::save(&loaded, &dir.path().join("m2.json")).unwrap();
    let a = fs::read(dir.path().join("m.json")).unwrap();
    let b = fs::read(dir.path().join("m2.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn k_sweep_selects_a_factorization() {
    let dir = tempfile::tempdir().unwrap();
    plli_ok(dir.path(), &["synth", "--n", "120", "--seed", "6", "--out", "d.csv"]);
    let out = Command::new(env!("CARGO_BIN_EXE_plli"))
        .current_dir(dir.path())
        .env("PLLI_THREADS", "2")
        .args([
            "fit", "--input", "d.csv", "--target-col", "f", "--k", "4", "--out", "m.json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("selected H="));
    assert!(stdout.contains("total regions: 4"));
    assert!(dir.path().join("m.json").exists());
}
