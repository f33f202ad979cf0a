use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const PUBLISHED: (f64, f64) = (0.24822302478255, 0.35172076526520);

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_euler-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_euler-lab"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn spectrum_reproduces_the_reference_quadruple() {
    let out = run(&["spectrum", "--p", "1,1", "--khat", "-3,-2", "--gamma", "1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let eig = v["eigenvalues"].as_array().unwrap();
    assert_eq!(eig.len(), 4);
    assert_eq!(v["band_halfwidth"].as_f64().unwrap(), 1.0);
    let first = eig
        .iter()
        .find(|e| e["normalized"]["re"].as_f64().unwrap() > 0.0 && e["normalized"]["im"].as_f64().unwrap() > 0.0)
        .unwrap();
    let (re, im) = (
        first["normalized"]["re"].as_f64().unwrap(),
        first["normalized"]["im"].as_f64().unwrap(),
    );
    assert!(
        (re - PUBLISHED.0).abs() < 1e-8 && (im - PUBLISHED.1).abs() < 1e-8,
        "{re} {im}"
    );
    assert!(eig.iter().all(|e| e["class"] == "quadruple"));
}

#[test]
fn spectrum_conventions_agree_after_normalization() {
    let a = json(&run(&[
        "spectrum",
        "--p",
        "1,1",
        "--khat",
        "-3,-2",
        "--gamma",
        "2",
        "--convention",
        "formula",
    ]));
    let b = json(&run(&["spectrum", "--p", "1,1", "--khat", "-3,-2", "--gamma", "2"]));
    let norm = |v: &Value| -> Vec<(f64, f64)> {
        v["eigenvalues"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| {
                (
                    e["normalized"]["re"].as_f64().unwrap(),
                    e["normalized"]["im"].as_f64().unwrap(),
                )
            })
            .collect()
    };
    for ((ar, ai), (br, bi)) in norm(&a).into_iter().zip(norm(&b)) {
        assert!((ar - br).abs() < 1e-12 && (ai - bi).abs() < 1e-12);
    }
}

#[test]
fn spectrum_by_truncation_matches_the_continued_fraction() {
    let cf = json(&run(&["spectrum", "--p", "1,1", "--khat", "-3,-2", "--gamma", "1"]));
    let tr = json(&run(&[
        "spectrum",
        "--p",
        "1,1",
        "--khat",
        "-3,-2",
        "--gamma",
        "1",
        "--method",
        "truncation",
        "--truncation-n",
        "100",
    ]));
    let pts = |v: &Value| -> Vec<(f64, f64)> {
        v["eigenvalues"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| (e["re"].as_f64().unwrap(), e["im"].as_f64().unwrap()))
            .collect()
    };
    let t = pts(&tr);
    for (r, i) in pts(&cf) {
        assert!(t.iter().any(|(a, b)| (a - r).hypot(b - i) < 1e-6));
    }
}

#[test]
fn spectrum_of_a_stable_class_is_empty() {
    let out = run(&["spectrum", "--p", "1,1", "--khat", "0,3", "--gamma", "1"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["eigenvalues"].as_array().unwrap().is_empty());
}

#[test]
fn spectrum_csv_has_a_header_and_four_rows() {
    let out = run(&[
        "spectrum", "--p", "1,1", "--khat", "-3,-2", "--gamma", "1", "--format", "csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn bad_arguments_exit_with_usage_code() {
    assert_eq!(code(&run(&["spectrum", "--bogus"])), 2);
    assert_eq!(
        code(&run(&["spectrum", "--p", "1,x", "--khat", "-3,-2", "--gamma", "1"])),
        2
    );
    assert_eq!(
        code(&run(&["spectrum", "--p", "0,0", "--khat", "-3,-2", "--gamma", "1"])),
        2
    );
    assert_eq!(code(&run(&["simulate", "--fixed-point", "1", "--t1", "1"])), 2);
    assert_eq!(
        code(&run(&["jacobi", "--grid", "64", "--degree", "40", "--trials", "1"])),
        2
    );
    assert_eq!(code(&run(&["nope"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn homoclinic_residual_check_passes() {
    let out = run(&["homoclinic", "--gamma", "1", "--check-residual"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["residual"]["max"].as_f64().unwrap() < 1e-9);
    assert!(v["level_set_deviation"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["orbit"], "heteroclinic-pair");
}

#[test]
fn homoclinic_orbit_csv_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("orbit.csv");
    let out = run(&[
        "homoclinic",
        "--gamma",
        "2",
        "--branch",
        "minus",
        "--samples",
        "101",
        "--orbit-csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 102);
    assert!(text.starts_with("t,"));
}

#[test]
fn simulate_from_the_fixed_point_is_constant() {
    let out = run(&["simulate", "--fixed-point", "1", "--t1", "10", "--dt", "0.01"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 1001);
    for r in &rows {
        assert_eq!(&r[1..8], &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    }
}

#[test]
fn simulate_from_a_json_state_with_drift_gate() {
    let dir = tempfile::tempdir().unwrap();
    let ic = dir.path().join("ic.json");
    std::fs::write(&ic, r#"{"w1":0.1,"w2":-0.2,"w3":0.3,"w4":0.05,"wp":0.9}"#).unwrap();
    let path = ic.to_str().unwrap();
    let out = run(&[
        "simulate",
        "--ic",
        path,
        "--t1",
        "5",
        "--tol",
        "1e-11",
        "--format",
        "json",
        "--max-drift",
        "1e-6",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let _ = json(&out);
    let strict = run(&[
        "simulate",
        "--ic",
        path,
        "--t1",
        "5",
        "--dt",
        "0.5",
        "--max-drift",
        "1e-15",
    ]);
    assert_eq!(code(&strict), 4);
}

#[test]
fn darboux_example_passes() {
    let out = run(&["darboux"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["max_residual"].as_f64().unwrap() < 1e-8);
    assert!(v["mask_fraction"].as_f64().unwrap() < 0.05);
}

fn darboux_round_trip(format: &str) {
    let dir = tempfile::tempdir().unwrap();
    let fields = dir.path().join("fields");
    std::fs::create_dir(&fields).unwrap();
    let f = fields.to_str().unwrap();
    let direct = run(&["darboux", "--grid", "64", "--dump-fields", f, "--field-format", format]);
    assert_eq!(code(&direct), 0);
    let reread = run(&["darboux", "--input-dir", f, "--field-format", format]);
    assert_eq!(code(&reread), 0, "{}", String::from_utf8_lossy(&reread.stderr));
    assert_eq!(json(&direct)["max_residual"], json(&reread)["max_residual"]);
}

#[test]
fn darboux_fields_round_trip_through_csv() {
    darboux_round_trip("csv");
}

#[test]
fn darboux_fields_round_trip_through_binary() {
    darboux_round_trip("binary");
}

#[test]
fn jacobi_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = run(&["jacobi", "--trials", "4", "-o", p.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v: Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert!(v["max_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let args = ["sweep", "--p", "1,1", "--radius", "4", "--gamma", "0.5,1"];
    let one = run_env(&args, "EULER_LAB_THREADS", "1");
    let four = run_env(&args, "EULER_LAB_THREADS", "4");
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    let v = json(&one);
    let jobs = v["jobs"].as_array().unwrap();
    assert!(!jobs.is_empty());
    assert!(jobs.iter().any(|j| !j["eigenvalues"].as_array().unwrap().is_empty()));
    assert_eq!(code(&run_env(&args, "EULER_LAB_THREADS", "zero")), 2);
}

#[test]
fn lax_square_and_random_pass() {
    for phi in ["square", "random"] {
        let out = run(&["lax", "--phi", phi, "--t1", "1", "--samples", "3"]);
        assert_eq!(code(&out), 0, "{phi}");
        assert!(json(&out)["compatibility_residual"].as_f64().unwrap() < 1e-10);
    }
}

#[test]
fn output_file_is_written_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("spectrum.json");
    let out = run(&[
        "spectrum",
        "--p",
        "1,1",
        "--khat",
        "-3,-2",
        "--gamma",
        "1",
        "-o",
        target.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    assert!(Path::new(&target).exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}
