//! End-to-end tests of the command-line interface: documented example values,
//! the exit-code contract, output formats, and report determinism.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ddcalc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn ddcalc")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn first_value(out: &Output) -> f64 {
    stdout(out)
        .lines()
        .next()
        .expect("nonempty stdout")
        .trim()
        .parse()
        .expect("numeric first line")
}

#[test]
fn dd_documented_values() {
    let out = run(&["dd", "--nodes", "1:1,2:1", "--func", "log"]);
    assert!(out.status.success());
    assert_eq!(first_value(&out), 2.0f64.ln());

    // Double node at 1: the confluent value is log'(1) = 1.
    let out = run(&["dd", "--nodes", "1:2", "--func", "log"]);
    assert!(out.status.success());
    assert_eq!(first_value(&out), 1.0);

    let out = run(&["dd", "--nodes", "0:1,1:1", "--func", "exp"]);
    assert!(out.status.success());
    assert!((first_value(&out) - (1.0f64.exp() - 1.0)).abs() < 1e-15);
}

#[test]
fn dd_oracle_reports_small_delta() {
    for oracle in ["hermite", "contour"] {
        let out = run(&["dd", "--nodes", "1:1,2:1,3:1", "--func", "log", "--oracle", oracle]);
        assert!(out.status.success(), "oracle {oracle}");
        let text = stdout(&out);
        let delta_line = text
            .lines()
            .find(|l| l.starts_with("delta:"))
            .unwrap_or_else(|| panic!("no delta line for {oracle}: {text}"));
        let delta: f64 = delta_line.trim_start_matches("delta:").trim().parse().unwrap();
        assert!(delta.abs() < 1e-8, "oracle {oracle}: delta {delta}");
    }
}

#[test]
fn dd_json_format() {
    let out = run(&["dd", "--nodes", "1:2", "--func", "log", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["value"], 1.0);
}

#[test]
fn special_function_documented_values() {
    let out = run(&["hcm", "--indices", "1,1,1", "--a", "2", "--b", "3"]);
    assert!(out.status.success());
    assert!((first_value(&out) - 0.14384103622589046).abs() < 1e-14);

    // H with alpha = (0,0), s = 2, m = 0 is [1, 2]log = log 2, and the same
    // value arises from M at s = (1, 2).
    let out = run(&["hfun", "--alpha", "0,0", "--s", "2", "--m", "0"]);
    assert!(out.status.success());
    assert_eq!(first_value(&out), 2.0f64.ln());

    let out = run(&["mfun", "--alpha", "0,0", "--s", "1,2", "--m", "0"]);
    assert!(out.status.success());
    assert_eq!(first_value(&out), 2.0f64.ln());
}

#[test]
fn exit_code_contract() {
    // Usage errors: unknown flag, malformed node list, unknown function.
    let out = run(&["dd", "--nonsense"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["dd", "--nodes", "1:1,abc", "--func", "log"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["dd", "--nodes", "1:1", "--func", "nosuch"]);
    assert_eq!(out.status.code(), Some(1));

    // Domain error: log is not defined at 0.
    let out = run(&["dd", "--nodes", "0:1,1:1", "--func", "log"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8(out.stderr).unwrap().is_empty());

    // Help and version are not errors.
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn verify_suite_passes_and_is_deterministic() {
    let a = run(&["verify", "identities", "--cases", "4", "--seed", "11", "--format", "json"]);
    assert_eq!(a.status.code(), Some(0));
    let b = run(&["verify", "identities", "--cases", "4", "--seed", "11", "--format", "json"]);
    assert_eq!(a.stdout, b.stdout, "same seed must give byte-identical output");

    let v: serde_json::Value = serde_json::from_str(stdout(&a).trim()).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["status"], "pass");
    assert_eq!(v["seed"], 11);

    // A different seed changes the cases but still passes.
    let c = run(&["verify", "identities", "--cases", "4", "--seed", "12", "--format", "json"]);
    assert_eq!(c.status.code(), Some(0));
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn verify_seed_env_fallback() {
    let flagged = run(&["verify", "ddcore", "--cases", "2", "--seed", "9", "--format", "json"]);
    let via_env = bin()
        .args(["verify", "ddcore", "--cases", "2", "--format", "json"])
        .env("DDCALC_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(flagged.status.code(), Some(0));
    assert_eq!(flagged.stdout, via_env.stdout);

    // An explicit flag wins over the environment.
    let overridden = bin()
        .args(["verify", "ddcore", "--cases", "2", "--seed", "9", "--format", "json"])
        .env("DDCALC_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(flagged.stdout, overridden.stdout);
}

#[test]
fn table_csv_contract() {
    let out = run(&["table", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "function,a,b,dd_value,closed_form,delta"
    );
    // Default grid: off-diagonal pairs from {0.5, 1.5, 2, 3}, five functions.
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5 * 12);
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 6, "row {row}");
        let delta: f64 = fields[5].parse().unwrap();
        assert!(delta.abs() < 1e-10, "row {row}");
    }

    // Single point: one row per function.
    let out = run(&["table", "--grid", "2:3", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1 + 5);
    assert!(text.lines().nth(1).unwrap().starts_with("H_111,2,3,"));
}
