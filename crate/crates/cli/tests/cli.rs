use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ccd_cli::matrix_file::{Kind, MatrixFile};
use ccd_cli::output::fmt_f64;
use ccd_core::forms::{random_local_unitary, Ket};
use ccd_core::intertwiners::{build_standard_entangler, build_standard_finagler};
use ccd_core::linalg::{
    random_special_orthogonal, random_special_unitary, seeded_rng, ComplexMatrix, C64,
};
use ccd_core::monotone::DensityMatrix;
use proptest::prelude::*;
use serde_json::Value;
use tempfile::TempDir;

fn ccd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, file: &MatrixFile) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, file.to_json()).unwrap();
    path
}

fn unitary_file(dir: &TempDir, name: &str, m: &ComplexMatrix) -> PathBuf {
    write(
        dir,
        name,
        &MatrixFile::from_matrix(Kind::Unitary, m).unwrap(),
    )
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn conj_by_entangler(n: usize, inner: &ComplexMatrix) -> ComplexMatrix {
    let e = build_standard_entangler(n).unwrap().matrix;
    e.matmul(inner).unwrap().matmul(&e.adjoint()).unwrap()
}

#[test]
fn decompose_identity() {
    let dir = TempDir::new().unwrap();
    let f = unitary_file(&dir, "id.json", &ComplexMatrix::identity(4));
    let out = ccd(&["decompose", "--input", p(&f)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["residual"].as_f64().unwrap() < 1e-14);
    for d in v["d"].as_array().unwrap() {
        assert!(
            (d[0].as_f64().unwrap() - 1.0).abs() < 1e-12 && d[1].as_f64().unwrap().abs() < 1e-12
        );
    }
}

#[test]
fn decompose_two_qubit_unitary_into_k_factors() {
    let dir = TempDir::new().unwrap();
    let v = random_special_unitary(2, 21).unwrap();
    let f = unitary_file(&dir, "v.json", &v);
    let out = ccd(&["decompose", "--input", p(&f), "--tol.residual", "1e-9"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["tolerance"].as_f64().unwrap(), 1e-9);
    assert!(r["k1_membership_residual"].as_f64().unwrap() < 1e-8);
    assert!(r["k2_membership_residual"].as_f64().unwrap() < 1e-8);
    // feed k1 back through verify
    let k1_file = dir.path().join("k1.json");
    let k1 = serde_json::json!({"n": 2, "kind": "unitary", "data": r["k1"]});
    std::fs::write(&k1_file, k1.to_string()).unwrap();
    let out = ccd(&["verify", "--input", p(&k1_file), "--group", "K"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["member"], Value::Bool(true));
}

#[test]
fn decompose_odd_n_exits_with_parity_code() {
    let dir = TempDir::new().unwrap();
    let f = unitary_file(&dir, "odd.json", &ComplexMatrix::identity(8));
    let out = ccd(&["decompose", "--input", p(&f)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("even"));
}

#[test]
fn malformed_inputs_exit_64() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n": 2, "kind": "unitary", "data": [[[1, 0]]]}"#).unwrap();
    assert_eq!(
        ccd(&["decompose", "--input", p(&bad)]).status.code(),
        Some(64)
    );
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(
        ccd(&["capacity", "--input", p(&bad)]).status.code(),
        Some(64)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        ccd(&["verify", "--input", p(&missing), "--group", "K"])
            .status
            .code(),
        Some(64)
    );
    assert_eq!(ccd(&["decompose"]).status.code(), Some(64));
    assert_eq!(ccd(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(
        ccd(&["decompose", "--input", "x", "--tol.bogus", "1"])
            .status
            .code(),
        Some(64)
    );
}

#[test]
fn help_exits_cleanly() {
    let out = ccd(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("decompose"));
}

#[test]
fn capacity_of_k_is_zero() {
    let dir = TempDir::new().unwrap();
    let mut rng = seeded_rng(22, 0);
    let o = ComplexMatrix::from_real(&random_special_orthogonal(4, &mut rng));
    let f = unitary_file(&dir, "k.json", &conj_by_entangler(2, &o));
    let out = ccd(&["capacity", "--input", p(&f)]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["kappa"].as_f64().unwrap(), 0.0);
    assert_eq!(r["zero_in_hull"], "outside");
}

#[test]
fn capacity_of_antipodal_spectrum_is_one() {
    let dir = TempDir::new().unwrap();
    let q = std::f64::consts::FRAC_PI_4;
    let d: Vec<C64> = (0..16)
        .map(|j| C64::from_polar(1.0, if j < 8 { q } else { -q }))
        .collect();
    let f = unitary_file(
        &dir,
        "a.json",
        &conj_by_entangler(4, &ComplexMatrix::from_diagonal(&d)),
    );
    let r = json(&ccd(&["capacity", "--input", p(&f)]));
    assert_eq!(r["kappa"].as_f64().unwrap(), 1.0);
    assert_ne!(r["zero_in_hull"], "outside");
}

#[test]
fn capacity_report_fields_for_random_unitary() {
    let dir = TempDir::new().unwrap();
    let f = unitary_file(&dir, "v.json", &random_special_unitary(4, 23).unwrap());
    let r = json(&ccd(&["capacity", "--input", p(&f)]));
    assert_eq!(r["spectrum"].as_array().unwrap().len(), 16);
    assert_eq!(r["argmax_witness"].as_array().unwrap().len(), 16);
    let kappa = r["kappa"].as_f64().unwrap();
    let lower = r["kappa_pairwise_lower"].as_f64().unwrap();
    assert!(lower <= kappa + 1e-12 && kappa <= 1.0);
    assert!(r["max_gap"].as_f64().is_some());
}

#[test]
fn sample_is_reproducible_and_validated() {
    let args = [
        "sample",
        "--n",
        "2,4",
        "--trials",
        "2000",
        "--seed",
        "5",
        "--no-wall-clock",
    ];
    let a = ccd(&args);
    let b = ccd(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,trials,p_hat,ci_lo,ci_hi,seed,wall_ms")
    );
    assert_eq!(lines.clone().count(), 2);
    assert!(lines.next().unwrap().starts_with("2,2000,"));

    assert_eq!(
        ccd(&["sample", "--n", "2", "--trials", "0", "--seed", "1"])
            .status
            .code(),
        Some(64)
    );
    assert_eq!(
        ccd(&["sample", "--n", "2", "--trials", "10"]).status.code(),
        Some(64)
    );
    assert_eq!(
        ccd(&["sample", "--n", "3", "--trials", "10", "--seed", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn sample_reads_config_and_writes_output() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    let out_path = dir.path().join("rows.json");
    std::fs::write(
        &cfg,
        serde_json::json!({"seed": 8, "trials": 500, "n_list": [2], "format": "json"}).to_string(),
    )
    .unwrap();
    let out = ccd(&[
        "sample",
        "--config",
        p(&cfg),
        "--output",
        p(&out_path),
        "--no-wall-clock",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let rows: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(rows[0]["n"], 2);
    assert_eq!(rows[0]["seed"], 8);
    assert_eq!(rows[0]["trials"], 500);
}

#[test]
fn verify_groups() {
    let dir = TempDir::new().unwrap();
    let mut rng = seeded_rng(24, 0);
    let local = unitary_file(&dir, "l.json", &random_local_unitary(3, &mut rng).unwrap());
    let r = json(&ccd(&["verify", "--input", p(&local), "--group", "K"]));
    assert_eq!(r["member"], true);

    let e = unitary_file(&dir, "e.json", &build_standard_entangler(4).unwrap().matrix);
    let out = ccd(&["verify", "--input", p(&e), "--group", "entangler"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["member"], true);
    assert!((r["xi"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let f = unitary_file(&dir, "f.json", &build_standard_finagler(3).unwrap().matrix);
    assert_eq!(
        ccd(&["verify", "--input", p(&f), "--group", "finagler"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        ccd(&["verify", "--input", p(&f), "--group", "entangler"])
            .status
            .code(),
        Some(2)
    );

    let v = unitary_file(&dir, "v.json", &random_special_unitary(2, 25).unwrap());
    let out = ccd(&["verify", "--input", p(&v), "--group", "K"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["member"], false);
    assert!(r["residual"].as_f64().unwrap() > 1e-3);

    let q = std::f64::consts::FRAC_PI_4;
    let d: Vec<C64> = (0..4)
        .map(|j| C64::from_polar(1.0, if j < 2 { q } else { -q }))
        .collect();
    let a = unitary_file(
        &dir,
        "a.json",
        &conj_by_entangler(2, &ComplexMatrix::from_diagonal(&d)),
    );
    assert_eq!(
        ccd(&["verify", "--input", p(&a), "--group", "a_algebra"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn concurrence_of_files_and_named_states() {
    let dir = TempDir::new().unwrap();
    let ghz = write(
        &dir,
        "ghz.json",
        &MatrixFile::from_ket(&Ket::ghz(4).unwrap()),
    );
    let r = json(&ccd(&["concurrence", "--input", p(&ghz)]));
    assert!((r["concurrence"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let w = write(&dir, "w.json", &MatrixFile::from_ket(&Ket::w(4).unwrap()));
    let r = json(&ccd(&["concurrence", "--input", p(&w)]));
    assert!(r["concurrence"].as_f64().unwrap() < 1e-12);

    let rho = DensityMatrix::maximally_mixed(2).unwrap();
    let dens = write(
        &dir,
        "rho.json",
        &MatrixFile::from_matrix(Kind::Density, rho.matrix()).unwrap(),
    );
    let r = json(&ccd(&["concurrence", "--input", p(&dens)]));
    assert_eq!(r["concurrence"].as_f64().unwrap(), 0.0);

    let r = json(&ccd(&["concurrence", "--state", "ghz", "--n", "6"]));
    assert!((r["concurrence"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(
        ccd(&["concurrence", "--state", "bell", "--n", "2"])
            .status
            .code(),
        Some(64)
    );
}

#[test]
fn monotone_default_sweep_passes() {
    let out = ccd(&["monotone", "--seed", "2024"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["trials"], 1000);
    assert_eq!(r["povm_violations"], 0);
    assert_eq!(r["convexity_violations"], 0);
    assert_eq!(r["pass"], true);
    assert_eq!(ccd(&["monotone"]).status.code(), Some(64));
    assert_eq!(
        ccd(&["monotone", "--n", "3", "--seed", "1"]).status.code(),
        Some(2)
    );
}

#[test]
fn json_floats_carry_seventeen_digits() {
    let out = ccd(&["concurrence", "--state", "ghz", "--n", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let value = text
        .split("\"concurrence\":")
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap();
    let mantissa = value.split('e').next().unwrap();
    assert_eq!(
        mantissa.chars().filter(|c| c.is_ascii_digit()).count(),
        17,
        "{text}"
    );
}

proptest! {
    #[test]
    fn printed_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let back: f64 = fmt_f64(x).parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }
}
