//! End-to-end runs of the binary: golden JSON reports, text and JSON
//! agreement, exit codes.
//!
//! Set `CRNALG_UPDATE_GOLDEN=1` to rewrite the golden files.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

const GOLDEN: &[(&str, &[&str])] = &[
    ("parse_restriction", &["parse", "models/restriction.crn"]),
    ("ode_two_compartment", &["ode", "models/two_compartment.crn"]),
    ("glue_complex", &["glue", "models/glue_complex_1.crn", "models/glue_complex_2.crn"]),
    (
        "join_over_leak",
        &["join", "models/two_compartment.crn", "models/one_compartment.crn", "--scenario", "1", "--map", "X2:X3"],
    ),
    ("io_eq_restriction", &["io-eq", "models/restriction.crn", "--output", "X1"]),
    ("identifiability_two_compartment", &["identifiability", "models/two_compartment.crn"]),
    ("identifiability_leaky_pair", &["identifiability", "models/leaky_pair.crn"]),
    ("observe_two_compartment", &["observe", "models/two_compartment.crn", "--output", "X1"]),
    (
        "invariants_complex_glue",
        &["invariants", "models/glue_complex_1.crn", "models/glue_complex_2.crn", "--eliminate", "X1"],
    ),
    (
        "invariants_reaction_glue",
        &["invariants", "models/glue_reaction_1.crn", "models/glue_reaction_2.crn", "--eliminate", "X3"],
    ),
    (
        "invariants_mono_chain",
        &["invariants", "models/mono_chain_1.crn", "models/mono_chain_2.crn", "--eliminate", "X4", "--glue-at", "X3"],
    ),
    ("elim_reaction_glue", &["elim", "models/glue_reaction_1.crn", "--eliminate", "X3"]),
    ("mss_quadratic_kappa", &["mss", "models/quadratic.crn", "--kappa", "k1=2,k2=3,k3=1"]),
    ("mss_degenerate_equal", &["mss", "models/degenerate.crn", "--kappa", "k1=3,k2=3"]),
    ("mss_degenerate_unequal", &["mss", "models/degenerate.crn", "--kappa", "k1=3,k2=2"]),
    ("mss_js_chain_left", &["mss", "models/js_chain_left.crn"]),
    ("mss_decoupled_join", &["mss", "models/decoupled_join.crn", "--target-count", "4"]),
    ("mss_inflow_chain_mono", &["mss", "models/inflow_chain.crn", "--mono"]),
];

fn crate_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_crnalg"))
        .args(args)
        .current_dir(crate_dir())
        .output()
        .unwrap();
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap(),
    )
}

fn json_args<'a>(args: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["--json"];
    v.extend_from_slice(args);
    v
}

fn golden_path(name: &str) -> PathBuf {
    crate_dir().join("tests/golden").join(format!("{name}.json"))
}

#[test]
fn golden_reports() {
    let update = std::env::var_os("CRNALG_UPDATE_GOLDEN").is_some();
    let mut mismatches = Vec::new();
    for (name, args) in GOLDEN {
        let (out, err, code) = run(&json_args(args));
        assert!(code == 0 || code == 2, "{name}: exit {code}\n{err}");
        let path = golden_path(name);
        if update {
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            std::fs::write(&path, &out).unwrap();
            continue;
        }
        let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
        if out != want {
            mismatches.push(*name);
        }
    }
    assert!(mismatches.is_empty(), "reports differ from golden files: {mismatches:?}");
}

#[test]
fn reports_are_deterministic() {
    for (name, args) in GOLDEN.iter().filter(|(n, _)| n.starts_with("mss") || n.starts_with("identifiability")) {
        assert_eq!(run(&json_args(args)).0, run(&json_args(args)).0, "{name}");
    }
}

/// Runs of ASCII digits, sorted.
fn digit_runs(s: &str) -> Vec<String> {
    let mut runs: Vec<String> = s
        .split(|c: char| !c.is_ascii_digit())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect();
    runs.sort();
    runs
}

#[test]
fn text_and_json_carry_the_same_numbers() {
    for (name, args) in GOLDEN {
        let (text, _, _) = run(args);
        let (json, _, _) = run(&json_args(args));
        // compare raw text: reparsing floats need not round-trip
        let body = &json[json.find("\n  \"result\":").unwrap()..];
        let text_body: String = text.lines().skip(1).collect::<Vec<_>>().join("\n");
        assert_eq!(digit_runs(&text_body), digit_runs(body), "{name}");
    }
}

#[test]
fn io_equation_text() {
    let (out, _, code) = run(&["io-eq", "models/restriction.crn", "--output", "X1"]);
    assert_eq!(code, 0);
    assert!(out.contains("z1'' + (a12 + a21 + a32)*z1' + a21*a32*z1 = u1' + (a12 + a32)*u1"), "{out}");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["identifiability", "models/two_compartment.crn"]).2, 0);
    // bimolecular reactant: the monomolecular criterion does not apply
    let (_, err, code) = run(&["mss", "models/quadratic.crn", "--mono"]);
    assert_eq!(code, 2, "{err}");
    // more than one species with fixed rates
    assert_eq!(run(&["mss", "models/decoupled_join.crn", "--kappa", "k1=1"]).2, 1);
    let (_, err, code) = run(&["parse", "models/missing.crn"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error: "), "{err}");
    // scenario 1 needs an outflow at X1: a malformed join, not a theorem hypothesis
    assert_eq!(
        run(&["join", "models/two_compartment.crn", "models/one_compartment.crn", "--scenario", "1", "--map", "X1:X3"]).2,
        1
    );
    // unreachable target count
    assert_eq!(run(&["mss", "models/quadratic.crn", "--target-count", "3", "--budget", "20"]).2, 1);
    // missing required flag is a usage error
    assert_ne!(run(&["invariants", "models/glue_complex_1.crn", "models/glue_complex_2.crn"]).2, 0);
}

#[test]
fn witness_round_trip() {
    let dir = std::env::temp_dir().join(format!("crnalg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("w.json");
    let f = file.to_str().unwrap();
    let (_, err, code) = run(&["mss", "models/quadratic.crn", "--out", f]);
    assert_eq!(code, 0, "{err}");
    let (out, _, code) = run(&["--json", "mss", "--verify", f]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["result"]["verify"]["ok"], Value::Bool(true));
    assert!(v["result"]["verify"]["max_residual"].as_f64().unwrap() <= 1e-10);

    let mut w: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    w["states"][0]["x"][0] = Value::String("1/7".into());
    std::fs::write(&file, w.to_string()).unwrap();
    assert_eq!(run(&["mss", "--verify", f]).2, 1);
    std::fs::remove_dir_all(&dir).ok();
}
