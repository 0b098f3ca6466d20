//! Drives the installed binary end to end: exit codes, determinism,
//! stated output shapes, and the documented command examples.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    p.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radsob"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn temp_path(name: &str) -> String {
    let p = std::env::temp_dir().join(format!("radsob-cli-{}-{name}", std::process::id()));
    p.to_str().unwrap().to_string()
}

#[test]
fn help_prints_and_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("validate"));
}

#[test]
fn usage_problems_exit_64() {
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&["validate"])), 64, "missing --manifold");
    let out = run(&[
        "validate",
        "--manifold",
        &fixture("euclidean3.json"),
        "--grid",
        "nonsense",
    ]);
    assert_eq!(code(&out), 64);
    // a sweep and an explicit profile are mutually exclusive
    let out = run(&[
        "quotient",
        "--manifold",
        &fixture("euclidean3.json"),
        "--profile",
        &fixture("at1.json"),
        "--b-sweep",
        "1,2",
    ]);
    assert_eq!(code(&out), 64);
    let out = run(&["quotient", "--manifold", &fixture("euclidean3.json")]);
    assert_eq!(code(&out), 64, "neither profile nor sweep");
}

#[test]
fn flat_model_validates_clean() {
    let out = run(&["validate", "--manifold", &fixture("euclidean3.json")]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("\"all_checks_pass\": true"));
    assert!(text.contains("\"failed_checks\": []"));
}

#[test]
fn concave_warp_fails_validation_naming_convexity() {
    let out = run(&[
        "validate",
        "--manifold",
        &fixture("sin_grid.json"),
        "--grid",
        "1e-6:3:60log",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("convexity"));
}

#[test]
fn malformed_spec_exits_2_with_the_file_named() {
    let out = run(&["validate", "--manifold", &fixture("malformed.json")]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("malformed.json"), "{err}");
}

#[test]
fn divergent_energy_exits_3() {
    // the full-space bubble has infinite energy on negative curvature
    let out = run(&[
        "quotient",
        "--manifold",
        &fixture("hyperbolic3.json"),
        "--profile",
        &fixture("at1.json"),
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn flat_transform_has_unit_density() {
    let out = run(&[
        "transform",
        "--manifold",
        &fixture("euclidean3.json"),
        "--r-min",
        "0.01",
        "--r-max",
        "10",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut rows = 0;
    for line in text.lines().skip(2) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 7);
        let r: f64 = cells[0].parse().unwrap();
        let s: f64 = cells[1].parse().unwrap();
        let rho: f64 = cells[2].parse().unwrap();
        assert!((s - r).abs() <= 1e-10 * r, "s at {r}");
        assert!((rho - 1.0).abs() <= 1e-10, "rho at {r}");
        rows += 1;
    }
    assert!(rows > 10);
}

#[test]
fn flat_shot_lands_on_the_closed_profile() {
    let out = run(&[
        "shoot",
        "--manifold",
        &fixture("euclidean3.json"),
        "--height",
        "1",
        "--r-max",
        "10",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let last = text.lines().last().unwrap();
    let cells: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
    let (r, u) = (cells[0], cells[1]);
    let closed = (1.0 + r * r / 3.0).powf(-0.5);
    assert!((u - closed).abs() < 1e-5, "{u} vs {closed}");
    assert!(text.lines().next().unwrap().contains("status=decayed"));
}

#[test]
fn flat_quotient_sweep_is_scale_free() {
    let out = run(&[
        "quotient",
        "--manifold",
        &fixture("euclidean3.json"),
        "--b-sweep",
        "0.5,1,2",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let values: Vec<f64> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 3);
    for v in &values {
        assert!((v - values[0]).abs() <= 1e-8 * values[0]);
    }
}

#[test]
fn truncated_sweep_on_curvature_exceeds_the_flat_sweep() {
    let curved = run(&[
        "quotient",
        "--manifold",
        &fixture("hyperbolic3.json"),
        "--b-sweep",
        "1,10",
        "--eps",
        "0.5",
    ]);
    assert_eq!(code(&curved), 0);
    let flat = run(&[
        "quotient",
        "--manifold",
        &fixture("euclidean3.json"),
        "--b-sweep",
        "1,10",
        "--eps",
        "0.5",
    ]);
    let parse = |out: &Output| -> Vec<f64> {
        stdout(out)
            .lines()
            .skip(2)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect()
    };
    let qc = parse(&curved);
    let qf = parse(&flat);
    for (c, f) in qc.iter().zip(&qf) {
        assert!(c > f, "curved quotient must dominate: {c} vs {f}");
    }
}

#[test]
fn symmetrize_reports_the_energy_drop() {
    let out = run(&[
        "symmetrize",
        "--manifold",
        &fixture("hyperbolic3.json"),
        "--profile",
        &fixture("truncated.json"),
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let l2n = v["l2_native"].as_f64().unwrap();
    let l2f = v["l2_flat"].as_f64().unwrap();
    let gn = v["grad_native"].as_f64().unwrap();
    let gf = v["grad_flat"].as_f64().unwrap();
    assert!((l2n - l2f).abs() < 1e-6 * l2n);
    assert!(gf < gn);
}

#[test]
fn symmetrize_works_on_sampled_profiles() {
    let out = run(&[
        "symmetrize",
        "--manifold",
        &fixture("hyperbolic3.json"),
        "--profile",
        &fixture("grid_profile.json"),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).lines().count() > 100);
}

#[test]
fn rigidity_verdicts_separate_the_models() {
    let curved = run(&[
        "rigidity",
        "--manifold",
        &fixture("hyperbolic3.json"),
        "--b-sweep",
        "1,10",
    ]);
    assert_eq!(code(&curved), 0, "exit 0 regardless of verdict");
    assert!(stdout(&curved).contains("strictly_non_euclidean"));

    let flat = run(&[
        "rigidity",
        "--manifold",
        &fixture("euclidean3.json"),
        "--b-sweep",
        "1,10",
    ]);
    assert_eq!(code(&flat), 0);
    assert!(stdout(&flat).contains("euclidean_within_tol"));
}

#[test]
fn rigidity_csv_carries_every_curve() {
    let out = run(&[
        "rigidity",
        "--manifold",
        &fixture("hyperbolic3.json"),
        "--b-sweep",
        "1,10",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for section in [
        "# curve=optimizer_quotient",
        "# curve=truncated_quotient",
        "# curve=flattening",
        "# curve=isoperimetric",
    ] {
        assert!(text.contains(section), "missing {section}");
    }
    assert!(text.lines().next().unwrap().contains("verdict=strictly_non_euclidean"));
}

#[test]
fn json_outputs_parse_for_every_command() {
    let h3 = fixture("hyperbolic3.json");
    let trunc = fixture("truncated.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["validate", "--manifold", &h3],
        vec!["transform", "--manifold", &h3, "--r-min", "0.01", "--r-max", "5"],
        vec!["shoot", "--manifold", &h3, "--r-max", "5"],
        vec!["quotient", "--manifold", &h3, "--profile", &trunc],
    ];
    for mut args in cases {
        args.push("--format");
        args.push("json");
        let out = run(&args);
        assert_eq!(code(&out), 0, "{args:?}");
        let parsed: Result<serde_json::Value, _> = serde_json::from_str(&stdout(&out));
        assert!(parsed.is_ok(), "JSON output for {args:?}");
    }
}

#[test]
fn out_flag_writes_atomically_into_new_directories() {
    let dir = temp_path("nested-out");
    let path = format!("{dir}/deep/report.csv");
    let out = run(&[
        "transform",
        "--manifold",
        &fixture("euclidean3.json"),
        "--r-min",
        "0.1",
        "--r-max",
        "2",
        "--out",
        &path,
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).is_empty(), "file mode writes nothing to stdout");
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("# transform"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn reruns_are_byte_identical() {
    let args = [
        "rigidity",
        "--manifold",
        &fixture("hyperbolic3.json"),
        "--b-sweep",
        "1,100",
        "--format",
        "csv",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    assert!(!first.stdout.is_empty());
}
