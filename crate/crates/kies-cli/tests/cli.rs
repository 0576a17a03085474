//! End-to-end tests of the `kies` binary: command output, exit codes, and
//! schema conformance of the JSON surfaces.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn kies(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kies"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn assert_valid(schema_file: &str, doc: &serde_json::Value) {
    let schema_text =
        std::fs::read_to_string(schema_dir().join(schema_file)).expect("schema readable");
    let schema: serde_json::Value = serde_json::from_str(&schema_text).expect("schema is JSON");
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator
        .iter_errors(doc)
        .map(|e| format!("{e}"))
        .collect();
    assert!(errors.is_empty(), "{schema_file}: {errors:?}\n{doc}");
}

const UNIFORM: &str = r#"{"law":{"family":"exponential","params":{"theta":1.0}},"beta":1.0}"#;
const BIMODAL_WEIGHTED: &str = r#"{"law":{"family":"discrete","params":{"components":[{"lambda":0.1,"weight":0.25},{"lambda":2.0,"weight":0.75}]}},"beta":2.0}"#;

#[test]
fn eval_uniform_pdf_is_flat() {
    let out = kies(&["eval", "--model", UNIFORM, "--which", "pdf", "--grid", "9"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let values: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('t'))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 9);
    for v in values {
        assert!((v - 1.0).abs() < 1e-12);
    }
}

#[test]
fn eval_pdf_header_records_endpoints() {
    let model = r#"{"law":{"family":"gamma","params":{"alpha":2.0,"theta":1.0}},"beta":1.0}"#;
    let out = kies(&["eval", "--model", model, "--which", "pdf", "--grid", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# left_endpoint = 2.0"), "{text}");
    assert!(text.contains("# right_endpoint = 0.0"), "{text}");
}

#[test]
fn eval_cdf_matches_library() {
    let model = r#"{"law":{"family":"degenerate","params":{"lambda":1.0}},"beta":2.0}"#;
    let out = kies(&["eval", "--model", model, "--which", "cdf", "--grid", "3"]);
    assert!(out.status.success());
    let p = kies_mix::KiesParams::new(1.0, 2.0).unwrap();
    for (k, line) in stdout(&out).lines().skip(1).enumerate() {
        let mut fields = line.split(',');
        let t: f64 = fields.next().unwrap().parse().unwrap();
        let v: f64 = fields.next().unwrap().parse().unwrap();
        assert!((t - (k + 1) as f64 / 4.0).abs() < 1e-14);
        assert!((v - kies_mix::kies_cdf(&p, t).unwrap()).abs() < 1e-14);
    }
}

#[test]
fn eval_rejects_bad_json_with_exit_2() {
    let out = kies(&["eval", "--model", "{not json", "--which", "pdf"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_rejects_invalid_model_with_exit_3() {
    // Exponential mixing with β < 1 violates the convergence condition.
    let model = r#"{"law":{"family":"exponential","params":{"theta":1.0}},"beta":0.5}"#;
    let out = kies(&["eval", "--model", model, "--which", "pdf"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn model_can_be_passed_as_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    std::fs::write(&path, UNIFORM).unwrap();
    let out = kies(&["eval", "--model", path.to_str().unwrap(), "--which", "cdf", "--grid", "4"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 5);
}

#[test]
fn saturation_reproduces_published_bimodal_value() {
    let out = kies(&["saturation", "--model", BIMODAL_WEIGHTED]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((doc["d"].as_f64().unwrap() - 0.4440).abs() < 5e-4);
    assert_eq!(doc["methods_agree"], serde_json::Value::Bool(true));
    assert!(doc["residual"].as_f64().unwrap().abs() < 1e-10);
    assert_eq!(doc["tau"].as_array().unwrap().len(), 2);
    assert_valid("saturation_result.schema.json", &doc);
}

#[test]
fn saturation_of_uniform_model() {
    let out = kies(&["saturation", "--model", UNIFORM]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((doc["d"].as_f64().unwrap() - 0.5).abs() < 1e-10);
    assert!(doc["residual"].as_f64().unwrap().abs() < 1e-10);
    assert_valid("saturation_result.schema.json", &doc);
}

#[test]
fn sampling_is_deterministic_and_seed_sensitive() {
    let args = ["sample", "--model", UNIFORM, "-n", "5", "--seed", "7"];
    let a = kies(&args);
    let b = kies(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let header = stdout(&a).lines().next().unwrap().to_string();
    assert_eq!(header, "x");
    assert_eq!(stdout(&a).lines().count(), 6);

    let c = kies(&["sample", "--model", UNIFORM, "-n", "5", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn sample_mean_of_uniform_model() {
    let out = kies(&["sample", "--model", UNIFORM, "-n", "20000", "--seed", "1"]);
    let values: Vec<f64> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.parse().unwrap())
        .collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    assert!((mean - 0.5).abs() < 0.01, "mean = {mean}");
    assert!(values.iter().all(|v| *v > 0.0 && *v < 1.0));
}

#[test]
fn sample_rejects_zero_count() {
    let out = kies(&["sample", "--model", UNIFORM, "-n", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fit_recovers_synthetic_kies_data() {
    let dir = tempfile::tempdir().unwrap();
    let data_path = dir.path().join("data.csv");
    let model = kies_mix::MixedKies::new(
        kies_mix::MixingLaw::Degenerate { lambda: 2.0 },
        kies_mix::BetaSpec::Fixed(1.5),
    )
    .unwrap();
    let batch = kies_mix::sample(&model, 99, 20_000).unwrap();
    // Store on a raw scale so the divide preprocessing has work to do.
    let mut csv = String::from("value\n");
    for v in &batch.values {
        csv.push_str(&format!("{}\n", v * 1000.0));
    }
    std::fs::write(&data_path, csv).unwrap();

    let out_prefix = dir.path().join("fit_a1");
    let out = kies(&[
        "fit",
        "--data",
        data_path.to_str().unwrap(),
        "--family",
        "A1",
        "--preprocess",
        "divide:1000",
        "--bins",
        "30",
        "--restarts",
        "4",
        "--seed",
        "3",
        "--out",
        out_prefix.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_prefix.with_extension("json")).unwrap())
            .unwrap();
    assert_valid("fit_result.schema.json", &doc);
    let lambda = doc["parameters"]["lambda"].as_f64().unwrap();
    let beta = doc["parameters"]["beta"].as_f64().unwrap();
    assert!((lambda - 2.0).abs() / 2.0 < 0.15, "lambda = {lambda}");
    assert!((beta - 1.5).abs() / 1.5 < 0.15, "beta = {beta}");

    let table = std::fs::read_to_string(out_prefix.with_extension("csv")).unwrap();
    assert!(table.starts_with("center,l_emp,l_th\n"));
    assert_eq!(table.lines().count(), 31);
}

#[test]
fn fit_rejects_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    std::fs::write(&path, "").unwrap();
    let out = kies(&[
        "fit",
        "--data",
        path.to_str().unwrap(),
        "--family",
        "A1",
        "--preprocess",
        "minmax",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fit_rejects_unknown_family() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    std::fs::write(&path, "1\n2\n3\n").unwrap();
    let out = kies(&[
        "fit",
        "--data",
        path.to_str().unwrap(),
        "--family",
        "A9",
        "--preprocess",
        "minmax",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shape_outputs_match_known_cases() {
    let out = kies(&["shape", "--lambda", "2", "--beta", "1"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["case"], "BetaEq1Decreasing");
    assert_valid("shape_report.schema.json", &doc);

    let out = kies(&["shape", "--lambda", "1", "--beta", "1"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["case"], "BetaEq1Peaked");
    assert!((doc["critical_points"][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_valid("shape_report.schema.json", &doc);

    let out = kies(&["shape", "--lambda", "1", "--beta", "2"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["case"], "BetaAbove1");
    assert_eq!(doc["left_value"], 0.0);
    assert_valid("shape_report.schema.json", &doc);

    // β < 1 reports an infinite left endpoint as the string "inf".
    let out = kies(&["shape", "--lambda", "5", "--beta", "0.5"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["left_value"], "inf");
    assert_valid("shape_report.schema.json", &doc);
}

#[test]
fn shape_rejects_non_positive_parameters() {
    let out = kies(&["shape", "--lambda", "-1", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = kies(&["shape", "--lambda", "1", "--beta", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_use_15_significant_digits() {
    let out = kies(&["eval", "--model", UNIFORM, "--which", "cdf", "--grid", "2"]);
    let text = stdout(&out);
    let first_value = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    // d.dddddddddddddd e±e
    assert!(
        first_value.contains('e') && first_value.splitn(2, 'e').next().unwrap().len() == 16,
        "{first_value}"
    );
}
