//! End-to-end CLI tests: exit-code contract (0 success, 1 runtime failure,
//! 2 usage error), determinism, and artifact formats.

use std::path::Path;
use std::process::{Command, Output};

fn hyperfit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperfit"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn generate_writes_closed_form_stresses() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyperfit(
        dir.path(),
        &["generate", "--model", "yeoh", "--sigma", "0", "--out", "yeoh.csv"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("P11_max"));

    let text = std::fs::read_to_string(dir.path().join("yeoh.csv")).unwrap();
    // Yeoh P11 at F11 = 1.5 from the closed forms: q1 = I1 - 3.
    let l: f64 = 1.5;
    let q1 = l * l + 2.0 / l - 3.0;
    let dw = 40.0 + 2.0 * 10.0 * q1 + 3.0 * 30.0 * q1 * q1;
    let expected = 2.0 * (l - l.powi(-2)) * dw;
    let row = text
        .lines()
        .find(|line| line.starts_with("UTC,1.5,"))
        .expect("F11 = 1.5 sample present");
    let p11: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((p11 - expected).abs() < 1e-10, "{p11} vs {expected}");
}

#[test]
fn generate_is_deterministic_for_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = hyperfit(
            dir.path(),
            &[
                "generate", "--model", "ogden", "--sigma", "5", "--seed", "7", "--out", name,
            ],
        );
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn generate_rejects_unknown_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyperfit(dir.path(), &["generate", "--model", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("yeoh") && err.contains("ogden"), "{err}");
}

#[test]
fn discover_recovers_yeoh_and_leaves_input_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let gen = hyperfit(
        dir.path(),
        &["generate", "--model", "yeoh", "--sigma", "0", "--out", "yeoh.csv"],
    );
    assert!(gen.status.success());
    let before = std::fs::read(dir.path().join("yeoh.csv")).unwrap();

    let out = hyperfit(
        dir.path(),
        &[
            "discover",
            "--data",
            "yeoh.csv",
            "--method",
            "lars-lasso",
            "--select",
            "sparsity:3",
            "--out",
            "report.json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("40.00*(I1-3) + 10.00*(I1-3)^2 + 30.00*(I1-3)^3"),
        "{}",
        stdout(&out)
    );

    let report = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    for field in ["\"library\"", "\"method\"", "\"path\"", "\"selected\"", "\"refit\"", "\"energy\""] {
        assert!(report.contains(field), "missing {field}");
    }
    let after = std::fs::read(dir.path().join("yeoh.csv")).unwrap();
    assert_eq!(before, after, "input file must not be mutated");
}

#[test]
fn discover_cd_requires_alpha() {
    let dir = tempfile::tempdir().unwrap();
    hyperfit(
        dir.path(),
        &["generate", "--model", "neo-hookean", "--out", "nh.csv"],
    );
    let out = hyperfit(
        dir.path(),
        &["discover", "--data", "nh.csv", "--method", "cd"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--alpha"));
}

#[test]
fn discover_pathwise_emits_one_row_per_alpha() {
    let dir = tempfile::tempdir().unwrap();
    hyperfit(
        dir.path(),
        &[
            "generate", "--model", "ogden", "--n-utc", "12", "--n-ss", "12", "--out", "ogden.csv",
        ],
    );
    let out = hyperfit(
        dir.path(),
        &[
            "discover",
            "--data",
            "ogden.csv",
            "--method",
            "pathwise",
            "--n-alpha",
            "40",
            "--ogden",
            "--format",
            "csv",
            "--out",
            "path.csv",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("path.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("alpha,C10,C01,"));
    assert!(header.ends_with(",D,delta,mismatch"));
    assert_eq!(lines.count(), 40, "one row per alpha value");
}

#[test]
fn path_export_writes_lars_knots() {
    let dir = tempfile::tempdir().unwrap();
    hyperfit(
        dir.path(),
        &["generate", "--model", "mooney-rivlin", "--out", "mr.csv"],
    );
    let out = hyperfit(
        dir.path(),
        &[
            "path-export",
            "--data",
            "mr.csv",
            "--method",
            "lars-lasso",
            "--out",
            "mr_path.csv",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("mr_path.csv")).unwrap();
    assert!(csv.lines().count() > 2);
    // First knot is the all-zero solution at alpha_max.
    let first = csv.lines().nth(1).unwrap();
    let fields: Vec<&str> = first.split(',').collect();
    assert!(fields[1..fields.len() - 1]
        .iter()
        .all(|v| v.parse::<f64>().unwrap() == 0.0));
}

#[test]
fn grad_check_passes_on_mixed_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyperfit(dir.path(), &["grad-check", "--trials", "5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("PASS"));
}

#[test]
fn missing_dataset_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyperfit(
        dir.path(),
        &["discover", "--data", "absent.csv", "--method", "lars-lasso"],
    );
    assert_eq!(out.status.code(), Some(1));
}
