//! Command-line front end: argument grammar, report assembly, exit codes.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use crnalg::invariants::{
    check_glue_sum_decomposition, check_shared_reaction_equality, check_single_species_equality, compare_projections,
    elimination_ideal, is_unidirectional,
};
use crnalg::lincomp::{
    coefficient_map, compartmental_matrix, identifiability, io_equation, io_equations, observability_equations,
};
use crnalg::massaction::{steady_state_ideal, stoichiometric_matrix, system_polynomials};
use crnalg::mss::{
    classify_state, count_positive_roots_univariate, monomolecular_mono_check, search_multistationarity,
    verify_witness, MssBudget, MssVerdict, SteadyStateWitness,
};
use crnalg::net::{
    classify_glue, join_by_new_reaction, join_one_way_flow, join_one_way_flow_networks, parse_document,
    parse_network, union, Document, Model, Network, OneWayFlowSpec, Scenario,
};
use crnalg::poly::{rat_string, Budget};
use crnalg::{Error, Result};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Parser, Debug)]
#[command(name = "crnalg", version, about = "Reaction networks, identifiability and steady-state algebra")]
pub struct Cli {
    /// Print the JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Include wall-clock timings in the diagnostics (breaks byte-for-byte
    /// reproducibility).
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a network or model file.
    Parse { file: String },
    /// Mass-action ODEs, stoichiometric data and (for monomolecular networks)
    /// the compartmental matrix.
    Ode { file: String },
    /// Glue two networks (union) and classify the glue.
    Glue { first: String, second: String },
    /// Join two networks by a new reaction or by a one-way flow.
    Join(JoinArgs),
    /// Input-output equations of a linear compartmental model.
    IoEq {
        file: String,
        /// Only this output (default: every output).
        #[arg(long)]
        output: Option<String>,
    },
    /// Identifiability verdict of a linear compartmental model.
    Identifiability { file: String },
    /// Observability equations expressing each state through one output.
    Observe {
        file: String,
        #[arg(long)]
        output: String,
    },
    /// Compare elimination ideals of a glued network with those of its parts.
    Invariants(InvariantArgs),
    /// Steady-state ideal and its elimination ideal.
    Elim {
        file: String,
        /// Comma-separated species to eliminate.
        #[arg(long, value_delimiter = ',')]
        eliminate: Vec<String>,
    },
    /// Positive steady states and multistationarity.
    Mss(MssArgs),
}

#[derive(Args, Debug)]
pub struct JoinArgs {
    pub first: String,
    pub second: String,
    /// New reaction `y -> y' [label]` with y from the first network and y'
    /// from the second.
    #[arg(long, conflicts_with = "scenario")]
    pub reaction: Option<String>,
    /// One-way-flow scenario 1..4.
    #[arg(long, requires = "map")]
    pub scenario: Option<u8>,
    /// Pairs `Xi:Xj` from first-network to second-network species.
    #[arg(long, value_delimiter = ',')]
    pub map: Vec<String>,
}

#[derive(Args, Debug)]
pub struct InvariantArgs {
    pub first: String,
    pub second: String,
    /// Comma-separated species to eliminate.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eliminate: Vec<String>,
    /// Check the single-species glue theorems at this species.
    #[arg(long, conflicts_with = "shared_reaction")]
    pub glue_at: Option<String>,
    /// Check the shared-reaction theorem for this reaction (`X1 -> X2`).
    #[arg(long)]
    pub shared_reaction: Option<String>,
}

#[derive(Args, Debug)]
pub struct MssArgs {
    /// Network file (omit with --verify).
    #[arg(required_unless_present = "verify")]
    pub file: Option<String>,
    /// Replay a witness file.
    #[arg(long, conflicts_with_all = ["file", "kappa", "mono"])]
    pub verify: Option<String>,
    /// Rate-constant samples.
    #[arg(long, default_value_t = MssBudget::default().samples)]
    pub budget: usize,
    /// Newton starts per sample.
    #[arg(long, default_value_t = MssBudget::default().starts)]
    pub starts: usize,
    /// Number of positive steady states sought.
    #[arg(long, default_value_t = MssBudget::default().target_count)]
    pub target_count: usize,
    /// Fixed rate constants `k1=2,k2=3/2,...`: count positive steady states
    /// exactly (one species only).
    #[arg(long, value_delimiter = ',')]
    pub kappa: Vec<String>,
    /// Apply the monomolecular-reactant criterion instead of searching.
    #[arg(long)]
    pub mono: bool,
    /// Write the witness here when one is found.
    #[arg(long)]
    pub out: Option<String>,
}

/// Report envelope shared by every subcommand.
#[derive(Serialize, Debug)]
pub struct Report {
    pub schema_version: &'static str,
    pub request: Value,
    pub result: Value,
    pub diagnostics: Value,
}

/// Outcome of one invocation.
pub struct Outcome {
    pub report: Report,
    pub text: String,
    pub exit_code: i32,
}

fn read(path: &str) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {path}: {e}")))
}

fn document(path: &str) -> Result<Document> {
    parse_document(&read(path)?)
}

fn model(path: &str) -> Result<Model> {
    document(path)?.model()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn network_value(n: &Network) -> Value {
    json!({
        "species": n.species(),
        "complexes": n.complexes().iter().map(|c| c.render()).collect::<Vec<_>>(),
        "reactions": n.reactions().iter().map(|r| r.render()).collect::<Vec<_>>(),
        "dsl": n.to_dsl(),
    })
}

fn model_value(m: &Model) -> Value {
    let mut v = network_value(m.network());
    v["outputs"] = json!(m.outputs());
    v["inputs"] = json!(m.inputs());
    v["dsl"] = json!(m.to_dsl());
    v
}

fn species_pair(s: &str) -> Result<(String, String)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Invalid(format!("expected Xi:Xj, got `{s}`")))?;
    Ok((a.trim().to_string(), b.trim().to_string()))
}

fn single_reaction(text: &str) -> Result<crnalg::net::Reaction> {
    let n = parse_network(text)?;
    match n.reactions() {
        [r] => Ok(r.clone()),
        _ => Err(Error::Invalid(format!("expected one reaction, got `{text}`"))),
    }
}

fn parse_kappa(pairs: &[String]) -> Result<HashMap<String, BigRational>> {
    pairs
        .iter()
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("expected label=value, got `{p}`")))?;
            let v = BigRational::from_str(v.trim()).map_err(|_| Error::Invalid(format!("not a rational number: {v}")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

struct Ctx {
    seed: u64,
    budget: Budget,
    extra: BTreeMap<String, Value>,
    exit_code: i32,
}

fn cmd_parse(file: &str) -> Result<Value> {
    let doc = document(file)?;
    let n = doc.network();
    let mut v = network_value(n);
    v["monomolecular"] = json!(n.is_monomolecular());
    if !doc.outputs.is_empty() {
        let m = doc.model()?;
        v = model_value(&m);
        v["monomolecular"] = json!(n.is_monomolecular());
        v["output_connectable"] = json!(m.is_output_connectable()?);
    }
    v["strongly_connected"] = json!(n.is_strongly_connected()?);
    Ok(v)
}

fn cmd_ode(file: &str) -> Result<Value> {
    let n = document(file)?.network;
    let sys = system_polynomials(&n)?;
    let st = stoichiometric_matrix(&n);
    let equations: Vec<String> = sys
        .concentrations
        .iter()
        .zip(&sys.polys)
        .map(|(x, p)| format!("d{}/dt = {}", x.name(), p.render()))
        .collect();
    let mut v = json!({
        "equations": equations,
        "stoichiometric_matrix": { "species": st.species, "labels": st.labels, "entries": st.entries },
        "rank": st.rank(),
        "conservation_laws": st.conservation_laws().iter().map(|r| r.iter().map(rat_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
    });
    if n.is_monomolecular() {
        v["compartmental_matrix"] = json!(compartmental_matrix(&n)?.render());
    }
    Ok(v)
}

fn cmd_glue(first: &str, second: &str) -> Result<Value> {
    let (n1, n2) = (document(first)?.network, document(second)?.network);
    let kind = classify_glue(&n1, &n2);
    let u = union(&n1, &n2)?;
    let dec = crnalg::massaction::glue_ode_decomposition(&n1, &n2)?;
    Ok(json!({
        "kind": format!("{kind:?}"),
        "network": network_value(&u),
        "ode_decomposition": to_value(&dec),
    }))
}

fn cmd_join(a: &JoinArgs) -> Result<Value> {
    let (d1, d2) = (document(&a.first)?, document(&a.second)?);
    if let Some(text) = &a.reaction {
        let r = single_reaction(text)?;
        // An explicit label in the argument is kept; bare reactions get a
        // fresh label.
        let label = text.contains('[').then_some(r.label.as_str());
        let n = join_by_new_reaction(&d1.network, &d2.network, &r.reactant, &r.product, label)?;
        return Ok(json!({ "operation": "new-reaction", "network": network_value(&n) }));
    }
    let scenario = Scenario::from_number(
        a.scenario
            .ok_or_else(|| Error::Invalid("give --reaction or --scenario with --map".into()))?,
    )?;
    let pairs: Vec<(String, String)> = a.map.iter().map(|s| species_pair(s)).collect::<Result<_>>()?;
    let refs: Vec<(&str, &str)> = pairs.iter().map(|(x, y)| (x.as_str(), y.as_str())).collect();
    let spec = OneWayFlowSpec::new(scenario, &refs);
    let joined = if !d1.outputs.is_empty() && !d2.outputs.is_empty() {
        model_value(&join_one_way_flow(&d1.model()?, &d2.model()?, &spec)?)
    } else {
        network_value(&join_one_way_flow_networks(&d1.network, &d2.network, &spec)?)
    };
    Ok(json!({ "operation": format!("one-way-flow scenario {}", scenario.number()), "network": joined }))
}

fn cmd_io_eq(file: &str, output: Option<&str>) -> Result<Value> {
    let m = model(file)?;
    let eqs = match output {
        Some(o) => vec![io_equation(&m, o)?],
        None => io_equations(&m)?,
    };
    let list: Vec<Value> = eqs
        .iter()
        .map(|e| {
            json!({
                "output": e.output,
                "subgraph": e.subgraph,
                "equation": e.render(),
                "coefficients": e.coefficients().iter().map(|p| p.render()).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(json!({ "equations": list, "coefficient_map": coefficient_map(&m)?.render() }))
}

fn cmd_identifiability(file: &str, ctx: &Ctx) -> Result<Value> {
    let m = model(file)?;
    Ok(to_value(&identifiability(&m, ctx.seed, ctx.budget)?))
}

fn cmd_observe(file: &str, output: &str) -> Result<Value> {
    let m = model(file)?;
    let eqs = observability_equations(&m, output)?;
    Ok(json!({
        "output": output,
        "equations": eqs.iter().map(|e| e.render()).collect::<Vec<_>>(),
        "observable": eqs.len() + 1 == m.network().species().len(),
    }))
}

fn cmd_invariants(a: &InvariantArgs, ctx: &mut Ctx) -> Result<Value> {
    let (n1, n2) = (document(&a.first)?.network, document(&a.second)?.network);
    let budget = ctx.budget;
    let mut v = json!({ "comparison": to_value(&compare_projections(&n1, &n2, &a.eliminate, budget)?) });
    let single = || -> Result<&String> {
        match a.eliminate.as_slice() {
            [s] => Ok(s),
            _ => Err(Error::Invalid("the theorem checks eliminate exactly one species".into())),
        }
    };
    if let Some(g) = &a.glue_at {
        let e = single()?;
        let mut checks = vec![to_value(&check_single_species_equality(&n1, &n2, g, e, budget)?)];
        if is_unidirectional(&n1, &n2, g) {
            checks.push(to_value(&check_glue_sum_decomposition(&n1, &n2, g, e, budget)?));
        }
        v["theorems"] = json!(checks);
    }
    if let Some(r) = &a.shared_reaction {
        let r = single_reaction(r)?;
        v["theorems"] = json!([to_value(&check_shared_reaction_equality(&n1, &n2, &r, single()?, budget)?)]);
    }
    Ok(v)
}

fn cmd_elim(file: &str, eliminate: &[String], ctx: &Ctx) -> Result<Value> {
    let n = document(file)?.network;
    Ok(json!({
        "steady_state_ideal": steady_state_ideal(&n)?.render(),
        "eliminated": eliminate,
        "elimination_ideal": elimination_ideal(&n, eliminate, ctx.budget)?.render(),
    }))
}

fn cmd_mss(a: &MssArgs, ctx: &mut Ctx) -> Result<Value> {
    if let Some(path) = &a.verify {
        let w: SteadyStateWitness = serde_json::from_str(&read(path)?)
            .map_err(|e| Error::Invalid(format!("bad witness file {path}: {e}")))?;
        let check = verify_witness(&w)?;
        if !check.ok {
            ctx.exit_code = 1;
        }
        return Ok(json!({ "verify": to_value(&check) }));
    }
    let file = a.file.as_deref().expect("clap enforces a file");
    let n = document(file)?.network;
    if a.mono {
        return Ok(to_value(&monomolecular_mono_check(&n, ctx.seed)?));
    }
    if !a.kappa.is_empty() {
        let kappa = parse_kappa(&a.kappa)?;
        let roots = count_positive_roots_univariate(&n, &kappa)?;
        let states: Vec<Value> = roots
            .roots
            .iter()
            .map(|r| {
                let x = if r.lo == r.hi { r.lo.clone() } else { (&r.lo + &r.hi) / BigRational::from_integer(2.into()) };
                let class = if r.multiplicity == 1 {
                    classify_state(&n, &kappa, &[x]).ok().map(|c| to_value(&c))
                } else {
                    None
                };
                json!({ "root": to_value(r), "class": class })
            })
            .collect();
        return Ok(json!({ "count": to_value(&roots), "states": states }));
    }
    let budget = MssBudget {
        samples: a.budget,
        starts: a.starts,
        target_count: a.target_count,
    };
    ctx.extra.insert("mss_budget".into(), to_value(&budget));
    let verdict = search_multistationarity(&n, &budget, ctx.seed)?;
    match &verdict {
        MssVerdict::MultistationaryWitness { witness, .. } => {
            if let Some(out) = &a.out {
                let text = serde_json::to_string_pretty(witness).expect("witness serializes");
                fs::write(out, text + "\n").map_err(|e| Error::Invalid(format!("cannot write {out}: {e}")))?;
            }
            if witness.count() < a.target_count {
                ctx.exit_code = 1;
            }
        }
        _ => ctx.exit_code = 1,
    }
    let mut v = to_value(&verdict);
    if let MssVerdict::MultistationaryWitness { witness, .. } = &verdict {
        v["states_found"] = json!(witness.count());
        v["target_reached"] = json!(witness.count() >= a.target_count);
    }
    Ok(v)
}

fn request_echo(cli: &Cli) -> Value {
    let (name, inputs, options): (&str, Vec<&String>, Value) = match &cli.command {
        Command::Parse { file } => ("parse", vec![file], json!({})),
        Command::Ode { file } => ("ode", vec![file], json!({})),
        Command::Glue { first, second } => ("glue", vec![first, second], json!({})),
        Command::Join(a) => (
            "join",
            vec![&a.first, &a.second],
            json!({ "reaction": a.reaction, "scenario": a.scenario, "map": a.map }),
        ),
        Command::IoEq { file, output } => ("io-eq", vec![file], json!({ "output": output })),
        Command::Identifiability { file } => ("identifiability", vec![file], json!({})),
        Command::Observe { file, output } => ("observe", vec![file], json!({ "output": output })),
        Command::Invariants(a) => (
            "invariants",
            vec![&a.first, &a.second],
            json!({ "eliminate": a.eliminate, "glue_at": a.glue_at, "shared_reaction": a.shared_reaction }),
        ),
        Command::Elim { file, eliminate } => ("elim", vec![file], json!({ "eliminate": eliminate })),
        Command::Mss(a) => (
            "mss",
            a.file.iter().chain(&a.verify).collect(),
            json!({
                "verify": a.verify.is_some(),
                "budget": a.budget,
                "starts": a.starts,
                "target_count": a.target_count,
                "kappa": a.kappa,
                "mono": a.mono,
                "out": a.out,
            }),
        ),
    };
    json!({ "subcommand": name, "inputs": inputs, "options": options, "seed": cli.seed })
}

/// Run one parsed invocation.
pub fn run(cli: &Cli) -> Outcome {
    let started = Instant::now();
    let mut ctx = Ctx {
        seed: cli.seed,
        budget: Budget::from_env(),
        extra: BTreeMap::new(),
        exit_code: 0,
    };
    let res = match &cli.command {
        Command::Parse { file } => cmd_parse(file),
        Command::Ode { file } => cmd_ode(file),
        Command::Glue { first, second } => cmd_glue(first, second),
        Command::Join(a) => cmd_join(a),
        Command::IoEq { file, output } => cmd_io_eq(file, output.as_deref()),
        Command::Identifiability { file } => cmd_identifiability(file, &ctx),
        Command::Observe { file, output } => cmd_observe(file, output),
        Command::Invariants(a) => cmd_invariants(a, &mut ctx),
        Command::Elim { file, eliminate } => cmd_elim(file, eliminate, &ctx),
        Command::Mss(a) => cmd_mss(a, &mut ctx),
    };
    let (result, exit_code) = match res {
        Ok(v) => (v, ctx.exit_code),
        Err(e) => {
            let code = if matches!(e, Error::HypothesisNotMet(_) | Error::NotMonomolecular(_)) { 2 } else { 1 };
            (json!({ "error": { "code": e.code(), "message": e.to_string() } }), code)
        }
    };
    let mut diagnostics = json!({
        "seed": ctx.seed,
        "groebner_budget": { "max_steps": ctx.budget.max_steps, "max_degree": ctx.budget.max_degree },
    });
    for (k, v) in ctx.extra {
        diagnostics[k] = v;
    }
    if cli.timings {
        diagnostics["elapsed_ms"] = json!(started.elapsed().as_millis() as u64);
    }
    let report = Report {
        schema_version: SCHEMA_VERSION,
        request: request_echo(cli),
        result,
        diagnostics,
    };
    let text = render_text(&report);
    Outcome { report, text, exit_code }
}

impl Outcome {
    /// What the binary prints.
    pub fn output(&self, json: bool) -> String {
        if json {
            serde_json::to_string_pretty(&self.report).expect("reports serialize") + "\n"
        } else {
            self.text.clone()
        }
    }
}

/// Human-readable report: the result payload as an indented outline, with
/// strings (equations, polynomials) printed verbatim.
pub fn render_text(r: &Report) -> String {
    let mut out = String::new();
    let sub = r.request["subcommand"].as_str().unwrap_or("?");
    out.push_str(&format!("crnalg {sub} (schema {})\n", r.schema_version));
    outline(&r.result, 0, &mut out);
    out.push_str("diagnostics:\n");
    outline(&r.diagnostics, 1, &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.is_empty() => Some("[]".into()),
        Value::Array(a) if a.iter().all(|x| matches!(x, Value::Number(_) | Value::Bool(_))) => Some(format!(
            "[{}]",
            a.iter().map(|x| scalar(x).unwrap()).collect::<Vec<_>>().join(", ")
        )),
        Value::Object(o) if o.is_empty() => Some("{}".into()),
        _ => None,
    }
}

fn outline(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(o) => {
            for (k, x) in o {
                match scalar(x) {
                    Some(s) if !s.contains('\n') => out.push_str(&format!("{pad}{k}: {s}\n")),
                    Some(s) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        for line in s.lines() {
                            out.push_str(&format!("{pad}  | {line}\n"));
                        }
                    }
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        outline(x, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                match scalar(x) {
                    Some(s) if !s.contains('\n') => out.push_str(&format!("{pad}- {s}\n")),
                    Some(s) => {
                        for (i, line) in s.lines().enumerate() {
                            let mark = if i == 0 { "- " } else { "  " };
                            out.push_str(&format!("{pad}{mark}{line}\n"));
                        }
                    }
                    None => {
                        out.push_str(&format!("{pad}-\n"));
                        outline(x, depth + 1, out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}
