//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the lines are printed whether or not everything passes; the process
//! exits non-zero if any criterion fails.

#[path = "../../core/tests/common/mono_oracle.rs"]
mod mono_oracle;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use crnalg::invariants::{compare_projections, elimination_ideal};
use crnalg::lincomp::{
    identifiability, observability_equations, observability_matrix, spanning_zero_tree, tree_walk_matrix,
    zero_outside, VerdictKind, ZeroTree,
};
use crnalg::massaction::steady_state_ideal;
use crnalg::mss::{count_positive_roots_univariate, Kappa};
use crnalg::net::{join_one_way_flow, parse_model, parse_network, Network, OneWayFlowSpec, Scenario};
use crnalg::poly::{det, parse_poly, Budget, Ideal, Var};
use crnalg::random::{compartmental_model, rng, ModelShape};
use crnalg::suites;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::Value;

const RESIDUAL_TOL: f64 = 1e-10;
const MONO_DRAWS: u64 = 10_000;

/// Criteria that cannot pass: the 4A -> 5A join has one species and at most
/// four sign changes in dx/dt for any rates, so at most four positive steady
/// states. Listed here the run still prints FAIL; it fails the run if it
/// ever passes.
const EXPECTED_FAIL: &[&str] = &["8b"];

type Outcome = Result<String, String>;

struct Harness {
    failed: Vec<String>,
}

impl Harness {
    fn check(&mut self, id: &str, title: &str, limit: Duration, f: impl FnOnce() -> Outcome) {
        let t = Instant::now();
        let res = f();
        let el = t.elapsed();
        let timing = format!("{:.2} s, limit {} s", el.as_secs_f64(), limit.as_secs());
        let (ok, detail) = match res {
            Ok(d) if el <= limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(d) => (false, d),
        };
        println!("criterion {id} {}: {title} [{detail}] ({timing})", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed.push(id.to_string());
        }
    }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn cli_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn crnalg(args: &[&str]) -> Result<(Value, i32), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_crnalg"))
        .arg("--json")
        .args(args)
        .current_dir(cli_dir())
        .output()
        .map_err(e2s)?;
    let v: Value = serde_json::from_slice(&out.stdout).map_err(|e| format!("bad report: {e}"))?;
    Ok((v, out.status.code().unwrap_or(-1)))
}

fn model_network(file: &str) -> Network {
    parse_network(&std::fs::read_to_string(cli_dir().join("models").join(file)).unwrap()).unwrap()
}

fn model(file: &str) -> crnalg::net::Model {
    parse_model(&std::fs::read_to_string(cli_dir().join("models").join(file)).unwrap()).unwrap()
}

// 1

fn io_equation_regression() -> Outcome {
    let (v, code) = crnalg(&["io-eq", "models/restriction.crn", "--output", "X1"])?;
    ensure(code == 0, format!("exit {code}"))?;
    let eq = v["result"]["equations"][0]["equation"].as_str().unwrap_or_default();
    let want = "z1'' + (a12 + a21 + a32)*z1' + a21*a32*z1 = u1' + (a12 + a32)*u1";
    ensure(eq == want, format!("got {eq}"))?;
    Ok(eq.to_string())
}

// 2

fn ideal_check(got: &Ideal, gens: &[&str], what: &str) -> Result<(), String> {
    let polys = gens.iter().map(|g| parse_poly(g).unwrap()).collect();
    let want = Ideal::new(polys, got.ring().to_vec()).map_err(e2s)?;
    let eq = got.equals(&want, Budget::default()).map_err(e2s)?;
    ensure(eq, format!("{what}: got {:?}", got.render()))
}

fn elim(n: &Network, s: &str) -> Result<Ideal, String> {
    elimination_ideal(n, &[s.to_string()], Budget::default()).map_err(e2s)
}

fn net(s: &str) -> Network {
    parse_network(s).unwrap()
}

fn elimination_regression() -> Outcome {
    let (c1, c2, c) = (net("X1 -> X2 [k1]"), net("X2 -> X1 [k2]"), net("X1 <-> X2 [k1, k2]"));
    let ss = |n: &Network| steady_state_ideal(n).map_err(e2s);
    ideal_check(&ss(&c)?, &["-k1*x1 + k2*x2"], "complex glue I_N")?;
    ideal_check(&ss(&c1)?, &["k1*x1"], "complex glue I_N1")?;
    ideal_check(&ss(&c2)?, &["k2*x2"], "complex glue I_N2")?;
    ideal_check(&elim(&c, "X1")?, &[], "complex glue I_N elim x1")?;
    ideal_check(&elim(&c1, "X1")?, &[], "complex glue I_N1 elim x1")?;
    ideal_check(&elim(&c2, "X1")?, &["k2*x2"], "complex glue I_N2 elim x1")?;

    let r1 = net("X3 -> X1 + X3 [k1]; X4 -> X2 [k2]");
    let r2 = net("X4 -> X2 [k2]; X2 -> X1 + X2 [k3]");
    let r = net("X3 -> X1 + X3 [k1]; X4 -> X2 [k2]; X2 -> X1 + X2 [k3]");
    ideal_check(&ss(&r)?, &["k1*x3 + k3*x2", "k2*x4"], "reaction glue I_N")?;
    ideal_check(&ss(&r1)?, &["k2*x4", "k1*x3"], "reaction glue I_N1")?;
    ideal_check(&ss(&r2)?, &["k2*x4", "k3*x2"], "reaction glue I_N2")?;
    ideal_check(&elim(&r, "X3")?, &["k2*x4"], "reaction glue I_N elim x3")?;
    ideal_check(&elim(&r1, "X3")?, &["k2*x4"], "reaction glue I_N1 elim x3")?;
    ideal_check(&elim(&r2, "X3")?, &["k2*x4", "k3*x2"], "reaction glue I_N2 elim x3")?;
    ideal_check(&elim(&r, "X4")?, &["k1*x3 + k3*x2"], "reaction glue I_N elim x4")?;
    ideal_check(&elim(&r1, "X4")?, &["k1*x3"], "reaction glue I_N1 elim x4")?;
    ideal_check(&elim(&r2, "X4")?, &["k3*x2"], "reaction glue I_N2 elim x4")?;
    Ok("15 ideals equal".into())
}

// 3

fn suite_line(r: &suites::SuiteReport) -> String {
    format!("{}: {}/{} ok, {} rejected", r.name, r.passed, r.instances, r.rejected)
}

fn suite(name: &str, count: usize) -> Result<String, String> {
    let r = suites::by_name(name, 0, count, Budget::default()).map_err(e2s)?;
    let line = suite_line(&r);
    ensure(r.ok() && r.instances >= count, format!("{line}; first failure: {:?}", r.failures.first()))?;
    Ok(line)
}

// 4

fn strict_counterexamples() -> Result<(), String> {
    let b = Budget::default();
    let c = compare_projections(&net("X1 -> X2 [k1]"), &net("X2 -> X1 [k2]"), &["X1".into()], b).map_err(e2s)?;
    let r = &c.reports[1];
    ensure(r.containment_holds && !r.equality_holds, "complex glue not strict")?;
    let c = compare_projections(
        &net("X3 -> X1 + X3 [k1]; X4 -> X2 [k2]"),
        &net("X4 -> X2 [k2]; X2 -> X1 + X2 [k3]"),
        &["X3".into()],
        b,
    )
    .map_err(e2s)?;
    let r = &c.reports[1];
    ensure(r.containment_holds && !r.equality_holds, "reaction glue not strict")
}

fn equality_theorems() -> Outcome {
    let lines = [suite("single-species", 100)?, suite("reaction", 100)?, suite("glue-sum", 100)?];
    strict_counterexamples()?;
    Ok(format!("{}; both counterexamples strict", lines.join("; ")))
}

// 5

fn identifiability_verdicts() -> Outcome {
    let b = Budget::default();
    let v = identifiability(&model("two_compartment.crn"), 0, b).map_err(e2s)?;
    ensure(v.kind == VerdictKind::GloballyIdentifiable, format!("two-compartment: {:?}", v.kind))?;
    let u = identifiability(&model("leaky_pair.crn"), 0, b).map_err(e2s)?;
    ensure(u.kind == VerdictKind::Unidentifiable, format!("leaky pair: {:?}", u.kind))?;
    let p = u.params.len();
    ensure(
        u.ranks.len() >= 5 && u.ranks.iter().all(|&r| r < p),
        format!("leaky pair ranks {:?} of {p}", u.ranks),
    )?;
    let spec = OneWayFlowSpec::new(Scenario::S1, &[("X2", "X3")]);
    let joined = join_one_way_flow(&model("two_compartment.crn"), &model("one_compartment.crn"), &spec).map_err(e2s)?;
    let j = identifiability(&joined, 0, b).map_err(e2s)?;
    ensure(j.kind.is_identifiable(), format!("scenario 1 join: {:?}", j.kind))?;
    Ok(format!(
        "two-compartment {:?}; leaky pair {:?} with ranks {:?} of {p}; scenario 1 join {:?}",
        v.kind, u.kind, u.ranks, j.kind
    ))
}

// 6

fn join_suites() -> Outcome {
    Ok([suite("sub-super-io", 50)?, suite("super-io", 50)?, suite("add-leak", 50)?].join("; "))
}

// 7

fn appendix_machinery() -> Outcome {
    let mut r = rng(7);
    for case in 0..100 {
        let n = r.random_range(2..=7);
        let mut order: Vec<usize> = (1..n).collect();
        order.shuffle(&mut r);
        let mut edges = Vec::new();
        for (k, &v) in order.iter().enumerate() {
            let pick = r.random_range(0..=k);
            let to = if pick == 0 { 0 } else { order[pick - 1] };
            edges.push((v, to, Var::rate(&format!("a{to}_{v}"))));
        }
        let tree = ZeroTree::new(n, edges).map_err(e2s)?;
        ensure(!det(&tree_walk_matrix(&tree)).is_zero(), format!("tree {case}: zero determinant"))?;
    }
    let mut substituted = 0;
    for seed in 0..40 {
        let mut r = rng(seed);
        let size = r.random_range(2..=5);
        let m = compartmental_model(
            &mut r,
            &ModelShape {
                first: 1,
                size,
                strongly_connected: true,
                leak_prob: 0.4,
                inflow_prob: 0.5,
                outputs: 1,
            },
        );
        let out = m.outputs()[0].clone();
        let (_, b) = observability_matrix(&m, &out).map_err(e2s)?;
        let tree = spanning_zero_tree(&m, &out).map_err(e2s)?;
        let keep: BTreeSet<Var> = tree.edges.iter().map(|(_, _, l)| l.clone()).collect();
        let restricted = zero_outside(&b, &keep);
        ensure(det(&restricted) == det(&tree_walk_matrix(&tree)), format!("substitution identity fails:\n{}", m.to_dsl()))?;
        substituted += 1;
    }
    let eqs = observability_equations(&model("two_compartment.crn"), "X1").map_err(e2s)?;
    let text = eqs.first().map(|e| e.render()).unwrap_or_default();
    ensure(text == "x2 = (x1' + a21*x1 - u1)/a12", format!("observability: {text}"))?;
    Ok(format!("100 trees nonsingular; identity on {substituted} models; {text}"))
}

// 8

/// Most sign changes the coefficient sequence of dx/dt can have over all
/// positive rates, for a one-species network. Bounds the positive steady
/// states by Descartes' rule.
fn descartes_bound(n: &Network) -> usize {
    let s = &n.species()[0];
    // per degree of x: can the coefficient be positive / negative?
    let mut signs = std::collections::BTreeMap::<u32, (bool, bool)>::new();
    for r in n.reactions() {
        let (a, b) = (r.reactant.coeff(s), r.product.coeff(s));
        if a != b {
            let e = signs.entry(a).or_default();
            if b > a { e.0 = true } else { e.1 = true }
        }
    }
    // best[k]: most changes so far ending with sign k (0 = +, 1 = -)
    let mut best: [Option<usize>; 2] = [None, None];
    for (pos, neg) in signs.values() {
        let prev = best;
        for (k, ok) in [(0, *pos), (1, *neg)] {
            if ok {
                let stay = prev[k];
                let flip = prev[1 - k].map(|v| v + 1);
                best[k] = Some(stay.max(flip).unwrap_or(0));
            } else {
                best[k] = None;
            }
        }
    }
    best.iter().flatten().copied().max().unwrap_or(0)
}

fn witness_count(file: &str, target: usize, expect: usize) -> Outcome {
    let dir = std::env::temp_dir().join(format!("crnalg-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(e2s)?;
    let wfile = dir.join(format!("{file}.witness.json"));
    let w = wfile.to_str().unwrap();
    let t = target.to_string();
    let (v, _) = crnalg(&["mss", &format!("models/{file}"), "--target-count", &t, "--out", w])?;
    let found = v["result"]["states_found"].as_u64().unwrap_or(0) as usize;
    let samples = v["result"]["samples_used"].as_u64().unwrap_or(0);
    if found == 0 {
        return Err(format!("{file}: no witness ({})", v["result"]["kind"]));
    }
    let (check, code) = crnalg(&["mss", "--verify", w])?;
    let c = &check["result"]["verify"];
    let residual = c["max_residual"].as_f64().unwrap_or(f64::INFINITY);
    let replayed = c["states"].as_u64().unwrap_or(0) as usize;
    let evidence = v["result"]["witness"]["evidence"].as_str().unwrap_or("?").to_string();
    let line = format!(
        "{file}: {found} states after {samples} samples ({evidence}), replay {} with residual {residual:.1e}",
        if code == 0 { "ok" } else { "failed" }
    );
    ensure(code == 0 && residual <= RESIDUAL_TOL && replayed == found, line.clone())?;
    let n = &model_network(file);
    let bound = if n.species().len() == 1 { format!(", sign-change bound {}", descartes_bound(n)) } else { String::new() };
    ensure(found == expect, format!("{line}; expected {expect}{bound}"))?;
    Ok(line)
}

fn mono_property() -> Outcome {
    let mut bad = 0;
    let mut disagree = 0;
    let mut first = None;
    for seed in 0..MONO_DRAWS {
        let d = mono_oracle::check_draw(seed, 4);
        if d.nondegenerate_positive >= 2 || !d.library_agrees {
            bad += (d.nondegenerate_positive >= 2) as usize;
            disagree += (!d.library_agrees) as usize;
            first.get_or_insert_with(|| format!("; first at seed {seed}: {}", d.network.to_dsl().replace('\n', "; ")));
        }
    }
    let line = format!(
        "{MONO_DRAWS} draws: {bad} nondegenerate multistationary, {disagree} solver disagreements{}",
        first.unwrap_or_default()
    );
    ensure(bad == 0 && disagree == 0, line.clone())?;
    Ok(line)
}

// 9

fn kappa(k1: i64, k2: i64) -> Kappa {
    [("k1", k1), ("k2", k2)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), BigRational::from_integer(v.into())))
        .collect()
}

fn degenerate_example() -> Outcome {
    let n = net("A -> 0 [k1]; A -> 2A [k2]");
    let mut pairs = 0;
    for a in 1..=6 {
        for b in 1..=6 {
            let r = count_positive_roots_univariate(&n, &kappa(a, b)).map_err(e2s)?;
            if a == b {
                ensure(r.continuum, format!("k1 = k2 = {a}: no continuum flag"))?;
            } else {
                ensure(!r.continuum && r.distinct == 0, format!("k1 = {a}, k2 = {b}: {} roots", r.distinct))?;
            }
            pairs += 1;
        }
    }
    Ok(format!("{pairs} rate pairs: equal gives a continuum, unequal gives no positive root"))
}

fn main() {
    let mut h = Harness { failed: Vec::new() };
    let s = Duration::from_secs;
    h.check("1", "I/O equation of the restriction model", s(1), io_equation_regression);
    h.check("2", "elimination ideals of the two glue counterexamples", s(5), elimination_regression);
    h.check("3", "containment on 500 random glue instances", s(300), || suite("containment", 500));
    h.check("4", "monomolecular equality theorems, 100 instances each", s(60), equality_theorems);
    h.check("5", "identifiability verdicts", s(10), identifiability_verdicts);
    h.check("6", "join and leak suites, 50 instances each", s(300), join_suites);
    h.check("7", "0-tree walk matrices and observability", s(60), appendix_machinery);
    h.check("8a", "2 states for {0 <- A, 2A -> 3A <- 4A}", s(60), || witness_count("js_chain_left.crn", 2, 2));
    h.check("8b", "5 states for the 4A -> 5A join", s(300), || witness_count("js_chain.crn", 5, 5));
    h.check("8c", "4 states for the decoupled A -> B join", s(60), || witness_count("decoupled_join.crn", 4, 4));
    h.check("8d", "no nondegenerate multistationarity for monomolecular networks", s(300), mono_property);
    h.check("8+", "(extra) 5 states for the glue over 3A", s(120), || witness_count("js_glue.crn", 5, 5));
    h.check("9", "degenerate one-species example", s(10), degenerate_example);
    let unexpected: Vec<&String> = h.failed.iter().filter(|id| !EXPECTED_FAIL.contains(&id.as_str())).collect();
    let stale: Vec<&&str> = EXPECTED_FAIL.iter().filter(|id| !h.failed.iter().any(|f| f == *id)).collect();
    println!(
        "acceptance: {} failing ({} expected: {}), {} unexpectedly passing",
        h.failed.len(),
        h.failed.len() - unexpected.len(),
        EXPECTED_FAIL.join(", "),
        stale.len()
    );
    if !unexpected.is_empty() || !stale.is_empty() {
        std::process::exit(1);
    }
}
