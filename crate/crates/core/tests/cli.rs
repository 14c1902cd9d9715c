use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qensemble::io::EnsembleFile;
use serde_json::Value;

fn ensemble(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("ensembles").join(name)
}

fn qensemble(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qensemble"))
        .args(args)
        .env_remove("QENSEMBLE_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

/// The report with its wall-clock field removed.
fn without_clock(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"wall_clock_seconds\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn q_bell_local_product_certified() {
    let out = qensemble(&["q", path(&ensemble("bell4.json")), "--family", "local-product", "--certify", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((v["results"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-4);
    assert_eq!(v["results"]["direction"], "exact");
    assert_eq!(v["config"]["seed"], 0x5eed);
    assert_eq!(v["command"][0], "qensemble");
}

#[test]
fn q_orthogonal_pair_and_zero_plus() {
    let out = qensemble(&["q", path(&ensemble("orthogonal-pair.json")), "--family", "full", "--json"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["results"]["value"].as_f64().unwrap().abs() < 1e-9);

    let out = qensemble(&["q", path(&ensemble("zero-plus.json")), "--family", "full", "--json"]);
    assert_eq!(code(&out), 0);
    assert!((json(&out)["results"]["value"].as_f64().unwrap() - 0.5).abs() < 1e-4);
}

#[test]
fn q_csv_has_header() {
    let out = qensemble(&["q", path(&ensemble("zero-plus.json")), "--csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("value,direction,family,lower_bound,lower_bound_source,evaluations,budget_exhausted\n"));
}

#[test]
fn q_explicit_basis_file() {
    let family = format!("explicit:{}", path(&ensemble("three-bell-basis.json")));
    let out = qensemble(&["q", path(&ensemble("three-bell.json")), "--family", &family, "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((v["results"]["value"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(v["results"]["basis_status"], "asserted-by-user");
}

#[test]
fn parse_errors_exit_two_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"format_version":"1","dim":2,"states":[{"probability":0.5,"kind":"pure","amplitudes":[[1,0]]},
            {"probability":0.5,"kind":"pure","amplitudes":[[0,0],[1,0]]}]}"#,
    )
    .unwrap();
    let out = qensemble(&["q", path(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("states[0].amplitudes"));

    std::fs::write(&bad, r#"{"format_version":"1","dim":2,"states":[{"probability":"half"}]}"#).unwrap();
    let out = qensemble(&["iacc", path(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("states[0]"));

    assert_eq!(code(&qensemble(&["check", "/nonexistent/file.json"])), 2);
    assert_eq!(code(&qensemble(&["q", path(&ensemble("zero-plus.json")), "--family", "local-product"])), 2);
    assert_eq!(code(&qensemble(&["q"])), 2);
}

#[test]
fn exhausted_budget_exits_three() {
    let out = qensemble(&["q", path(&ensemble("zero-plus.json")), "--family", "full", "--max-evals", "3", "--restarts", "2"]);
    assert_eq!(code(&out), 3);
    let out = qensemble(&["iacc", path(&ensemble("zero-plus.json")), "--max-evals", "3", "--restarts", "2"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn iacc_bell_bounds() {
    let out = qensemble(&["iacc", path(&ensemble("bell4.json")), "--local", "--bounds", "--json"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["results"];
    assert!((r["lower"].as_f64().unwrap() - 1.0).abs() < 1e-4);
    assert!((r["entanglement_bound"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((r["holevo"].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let out = qensemble(&["iacc", path(&ensemble("orthogonal-pair.json")), "--json"]);
    assert!((json(&out)["results"]["lower"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let out = qensemble(&["iacc", path(&ensemble("zero-plus.json")), "--local"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn check_verdicts() {
    let out = qensemble(&["check", path(&ensemble("bell4.json")), "--json"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["results"];
    assert_eq!(r["verdict"], "confirmed");
    assert_eq!(r["saturated"], true);

    let out = qensemble(&["check", path(&ensemble("zero-plus.json")), "--json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["results"]["verdict"], "confirmed");

    let family = format!("explicit:{}", path(&ensemble("three-bell-basis.json")));
    let out = qensemble(&["check", path(&ensemble("three-bell.json")), "--family", &family, "--family", "local-product", "--json"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["results"];
    assert_eq!(r["verdict"], "consistent");
    let sum = r["iacc_lower"].as_f64().unwrap() + r["q_upper"].as_f64().unwrap();
    assert!((sum - 3f64.log2()).abs() < 1e-3);

    let out = qensemble(&["check", path(&ensemble("zero-plus.json")), "--family", "full", "--family", path(&ensemble("x"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn catalog_commands() {
    let out = qensemble(&["catalog", "list"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in qensemble::catalog::ENTRY_NAMES {
        assert!(text.contains(name));
    }

    let out = qensemble(&["catalog", "run", "bell-four"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));

    let out = qensemble(&["catalog", "run", "b-prime", "--a2", "0.3", "--c2", "0.5", "--csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("b-prime,Q,0.9406454496153"));

    // a single unconverged evaluation cannot certify the exact expectation
    let out = qensemble(&["catalog", "run", "b-prime", "--max-evals", "1", "--restarts", "1"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));

    assert_eq!(code(&qensemble(&["catalog", "run", "no-such-entry"])), 2);
    assert_eq!(code(&qensemble(&["catalog", "run", "b-prime", "--a2", "1.5"])), 2);
}

#[test]
fn sweep_writes_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = qensemble(&["sweep", "--kind", "random-heisenberg", "--samples", "5", "--bases", "50", "--out", path(&csv)]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), qensemble::sweep::CSV_HEADER.join(","));
    assert_eq!(text.lines().count(), 6);

    let out = qensemble(&["sweep", "--kind", "local-dephasing-monotonicity", "--source", "bell-four", "--samples", "1", "--restarts", "2"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!(!row[9].is_empty(), "delta_q populated");
}

#[test]
fn reports_are_deterministic() {
    let runs: &[&[&str]] = &[
        &["q", "--family", "local-product", "--certify", "--json", "--restarts", "4"],
        &["iacc", "--local", "--bounds", "--json", "--restarts", "4"],
        &["check", "--json", "--restarts", "4"],
    ];
    let file = ensemble("bell4.json");
    for args in runs {
        let mut full = vec![args[0], path(&file)];
        full.extend_from_slice(&args[1..]);
        let a = qensemble(&full);
        let b = qensemble(&full);
        assert_eq!(code(&a), 0);
        assert_eq!(without_clock(&a), without_clock(&b), "{args:?}");
    }
    let a = qensemble(&["catalog", "run", "two-state-qubit", "--json", "--restarts", "4"]);
    let b = qensemble(&["catalog", "run", "two-state-qubit", "--json", "--restarts", "4"]);
    assert_eq!(without_clock(&a), without_clock(&b));

    let sweep = ["sweep", "--kind", "conjecture-er-gap", "--samples", "2", "--restarts", "2"];
    assert_eq!(qensemble(&sweep).stdout, qensemble(&sweep).stdout);
}

#[test]
fn seed_from_environment_and_execution_mode_agree() {
    let file = ensemble("zero-plus.json");
    let with_flag = qensemble(&["q", path(&file), "--json", "--seed", "99", "--restarts", "4"]);
    let with_env = Command::new(env!("CARGO_BIN_EXE_qensemble"))
        .args(["q", path(&file), "--json", "--restarts", "4"])
        .env("QENSEMBLE_SEED", "99")
        .output()
        .unwrap();
    let a = json(&with_flag);
    let b = json(&with_env);
    assert_eq!(b["config"]["seed"], 99);
    assert_eq!(a["results"], b["results"]);

    let sequential = qensemble(&["q", path(&file), "--json", "--seed", "99", "--restarts", "4", "--sequential"]);
    assert_eq!(json(&sequential)["results"], a["results"]);
}

#[test]
fn ensemble_files_round_trip() {
    for name in ["bell4.json", "three-bell.json", "zero-plus.json", "orthogonal-pair.json"] {
        let text = std::fs::read_to_string(ensemble(name)).unwrap();
        let original: Value = serde_json::from_str(&text).unwrap();
        let parsed = EnsembleFile::parse(&text).unwrap();
        let again: Value = serde_json::from_str(&EnsembleFile::from_ensemble(&parsed.to_ensemble().unwrap()).to_json()).unwrap();
        assert_numbers_close(&original, &again, name);
    }
}

fn assert_numbers_close(a: &Value, b: &Value, ctx: &str) {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            assert!((x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300), "{ctx}: {x} vs {y}");
        }
        (Value::Array(x), Value::Array(y)) => {
            assert_eq!(x.len(), y.len(), "{ctx}");
            x.iter().zip(y).for_each(|(p, q)| assert_numbers_close(p, q, ctx));
        }
        (Value::Object(x), Value::Object(y)) => {
            assert_eq!(x.keys().collect::<Vec<_>>(), y.keys().collect::<Vec<_>>(), "{ctx}");
            x.iter().for_each(|(k, v)| assert_numbers_close(v, &y[k], ctx));
        }
        _ => assert_eq!(a, b, "{ctx}"),
    }
}
