use std::path::PathBuf;
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_jetsym"));
    c.env_remove("JETSYM_TOL");
    c
}

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut a = vec!["--format", "json"];
    a.extend_from_slice(args);
    let out = run(&a);
    let doc = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), doc)
}

#[test]
fn symmetries_of_ricci() {
    let (code, doc) = json(&["symmetries", "--model", "ricci", "--degree", "1"]);
    assert_eq!(code, 0);
    assert_eq!(doc["report"]["dimension"], 4);
    assert_eq!(doc["report"]["reference"]["span_equal"], true);
    let (_, doc) = json(&["symmetries", "--model", "ricci", "--degree", "2"]);
    assert_eq!(doc["report"]["dimension"], 6);
}

#[test]
fn commutator_table() {
    let (code, doc) = json(&["commutators", "--model", "convdiff"]);
    assert_eq!(code, 0);
    assert_eq!(doc["report"]["table"][1][2], "V4");
    assert_eq!(doc["report"]["jacobi"], true);
}

#[test]
fn solutions_and_audit() {
    let (code, doc) = json(&[
        "verify-solution",
        "--model",
        "convdiff",
        "--solution",
        &data("convdiff-solutions.txt"),
    ]);
    assert_eq!(code, 0, "{doc}");
    let (code, doc) = json(&[
        "verify-solution",
        "--model",
        "convdiff",
        "--solution",
        &data("convdiff-audit.txt"),
    ]);
    assert_eq!(code, 1);
    let repairs = &doc["report"]["candidates"][0]["audit"]["repairs"];
    assert!(repairs.as_array().unwrap().iter().any(|r| r["passed"] == true));
    let (code, _) = json(&[
        "verify-solution",
        "--model",
        "ricci",
        "--solution",
        &data("ricci-solutions.txt"),
    ]);
    assert_eq!(code, 0);
}

#[test]
fn reports_are_deterministic() {
    let args = [
        "--format",
        "json",
        "verify-solution",
        "--model",
        "ricci",
        "--solution",
        &data("ricci-solutions.txt"),
    ];
    let a = run(&args).stdout;
    let b = run(&args).stdout;
    assert_eq!(a, b);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    let mut c: Value = serde_json::from_slice(&run(&seq).stdout).unwrap();
    let mut d: Value = serde_json::from_slice(&a).unwrap();
    c["config"]["execution"] = Value::Null;
    d["config"]["execution"] = Value::Null;
    assert_eq!(c, d);
}

#[test]
fn reduce_and_compare() {
    let (code, doc) = json(&[
        "reduce",
        "--model",
        "ricci",
        "--operator",
        "V1 + beta*V3",
        "--params",
        "beta",
        "--positive",
        "x, y",
        "--invariants",
        "t; y*x^(-beta); y^((1 + beta)/beta)*u",
        "--compare",
        "h_t*h^2*z^(-1/beta - 2) + beta*h*h_2z + beta*z^(-1)*h*h_z - beta*h_z^2",
    ]);
    assert_eq!(code, 0, "{doc}");
    assert_eq!(doc["report"]["compare"]["printed_passes"], true);
}

#[test]
fn verify_reduced_solution() {
    let eq = "h_t - 2*(alpha^2 + 1/4)*z^3*h*h_z - 4*(alpha^2+1/4)*z*h*h_z - 2*(alpha^2+1/4)*h^2";
    let (code, _) = json(&[
        "verify-reduced",
        "--equation",
        eq,
        "--h",
        "-1/(2*(alpha^2 + 1/4)*t - gamma)",
        "--params",
        "alpha, gamma",
    ]);
    assert_eq!(code, 0);
    let (code, _) = json(&[
        "verify-reduced",
        "--equation",
        eq,
        "--h",
        "1/(2*(alpha^2 + 1/4)*t - gamma)",
        "--params",
        "alpha, gamma",
    ]);
    assert_eq!(code, 1);
}

#[test]
fn inverse_from_files_and_builtins() {
    let (code, doc) = json(&[
        "inverse",
        "--symmetry",
        &data("linear-symmetry.txt"),
        "--family",
        &data("power-family.txt"),
    ]);
    assert_eq!(code, 0, "{doc}");
    let (code, _) = json(&["inverse", "--symmetry", "drift", "--family", "drift"]);
    assert_eq!(code, 0);
}

#[test]
fn tolerance_from_environment() {
    let out = bin()
        .env("JETSYM_TOL", "1e-6")
        .args(["--format", "json", "parse", "x"])
        .output()
        .unwrap();
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["config"]["tol"], 1e-6);
    let out = bin().env("JETSYM_TOL", "soon").args(["parse", "x"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["symmetries"],
        vec!["symmetries", "--model", "no-such-model"],
        vec!["verify-solution", "--model", "ricci", "--solution", "/nonexistent"],
        vec!["parse", "u_x*(x+"],
        vec!["reduce", "--model", "ricci", "--operator", "V1*V2"],
        vec!["inverse", "--symmetry", "linear", "--family", "nothing"],
        vec!["--grid", "0", "parse", "x"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn malformed_expressions_never_crash(s in "[a-z0-9_+*/^()., -]{0,24}") {
        let out = run(&["parse", &s]);
        let code = out.status.code().unwrap();
        prop_assert!(code == 0 || code == 2, "{s:?} -> {code}");
        prop_assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"));
    }

    #[test]
    fn malformed_model_files_never_crash(body in "[A-Gnamepositvu=0-9*+^()\n ]{0,60}") {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        std::fs::write(&path, &body).unwrap();
        let out = run(&["symmetries", "--model", path.to_str().unwrap()]);
        let code = out.status.code().unwrap();
        prop_assert!(code <= 2, "{body:?} -> {code}");
        prop_assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"));
    }
}
