//! Seeded instance suites for the glue and join theorems. Each suite draws
//! hypothesis-satisfying instances, checks the theorem's conclusion on every
//! one, and records reproducible descriptions of any failure.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariants::{
    check_glue_sum_decomposition, check_shared_reaction_equality, check_single_species_equality, compare_projections,
};
use crate::lincomp::{add_leak, identifiability, VerdictKind};
use crate::net::{join_one_way_flow, non_flow_subnetwork, union, Model, OneWayFlowSpec, Scenario};
use crate::poly::Budget;
use crate::random::{
    compartmental_model, glue_instance, mono_glue_reaction, mono_glue_species, rng, GlueInstance, ModelShape,
};

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub seed: u64,
    pub instances: usize,
    pub passed: usize,
    /// Draws discarded because they did not meet the hypotheses.
    pub rejected: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str, seed: u64) -> SuiteReport {
        SuiteReport {
            name: name.to_string(),
            seed,
            instances: 0,
            passed: 0,
            rejected: 0,
            failures: Vec::new(),
        }
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.passed == self.instances
    }

    fn record(&mut self, ok: Result<bool>, describe: impl FnOnce() -> String) {
        self.instances += 1;
        match ok {
            Ok(true) => self.passed += 1,
            Ok(false) => self.failures.push(describe()),
            Err(e) => self.failures.push(format!("{} ({e})", describe())),
        }
    }
}

fn random_species(rng: &mut ChaCha8Rng, inst: &GlueInstance) -> Result<String> {
    let u = union(&inst.n1, &inst.n2)?;
    Ok(u.species()[rng.random_range(0..u.species().len())].clone())
}

/// Projected elimination ideals of random glued networks are contained in
/// the operands' elimination ideals.
pub fn containment(seed: u64, count: usize, max_species: usize, budget: Budget) -> SuiteReport {
    let mut rep = SuiteReport::new("containment", seed);
    let mut rng = rng(seed);
    while rep.instances < count {
        let inst = glue_instance(&mut rng, max_species);
        let Ok(e) = random_species(&mut rng, &inst) else {
            rep.rejected += 1;
            continue;
        };
        let ok = compare_projections(&inst.n1, &inst.n2, std::slice::from_ref(&e), budget)
            .map(|c| c.reports.iter().all(|r| r.containment_holds));
        rep.record(ok, || format!("eliminate {e}\n{}", inst.to_dsl()));
    }
    rep
}

/// Monomolecular networks glued at one species: projection equality.
pub fn single_species(seed: u64, count: usize, max_species: usize, budget: Budget) -> SuiteReport {
    let mut rep = SuiteReport::new("single-species glue", seed);
    let mut rng = rng(seed);
    while rep.instances < count {
        let uni = rng.random_bool(0.5);
        let inst = mono_glue_species(&mut rng, max_species, uni);
        let e = random_species(&mut rng, &inst).expect("generated operands are valid");
        let ok = check_single_species_equality(&inst.n1, &inst.n2, &inst.glue[0], &e, budget).map(|c| c.holds);
        rep.record(ok, || format!("glue at {}, eliminate {e}\n{}", inst.glue[0], inst.to_dsl()));
    }
    rep
}

/// Monomolecular networks glued over one reaction (or a reversible pair):
/// projection equality.
pub fn shared_reaction(seed: u64, count: usize, max_species: usize, budget: Budget) -> SuiteReport {
    let mut rep = SuiteReport::new("reaction glue", seed);
    let mut rng = rng(seed);
    while rep.instances < count {
        let rev = rng.random_bool(0.5);
        let inst = mono_glue_reaction(&mut rng, max_species, rev);
        let e = random_species(&mut rng, &inst).expect("generated operands are valid");
        let ok = check_shared_reaction_equality(&inst.n1, &inst.n2, &inst.shared[0], &e, budget).map(|c| c.holds);
        rep.record(ok, || format!("shared {}, eliminate {e}\n{}", inst.shared[0].render(), inst.to_dsl()));
    }
    rep
}

/// One-way flow through a glue species: the glued elimination ideal is the
/// sum of the operands'.
pub fn glue_sum(seed: u64, count: usize, max_species: usize, budget: Budget) -> SuiteReport {
    let mut rep = SuiteReport::new("species glue sum", seed);
    let mut rng = rng(seed);
    while rep.instances < count {
        let inst = mono_glue_species(&mut rng, max_species, true);
        let e = random_species(&mut rng, &inst).expect("generated operands are valid");
        let ok = check_glue_sum_decomposition(&inst.n1, &inst.n2, &inst.glue[0], &e, budget).map(|c| c.holds);
        rep.record(ok, || format!("glue at {}, eliminate {e}\n{}", inst.glue[0], inst.to_dsl()));
    }
    rep
}

/// Strongly connected compartmental model with one or two outputs.
fn strong_model(rng: &mut ChaCha8Rng, first: usize, size: usize, leak_prob: f64, inflow_prob: f64) -> Model {
    let outputs = rng.random_range(1..=2);
    compartmental_model(
        rng,
        &ModelShape {
            first,
            size,
            strongly_connected: true,
            leak_prob,
            inflow_prob,
            outputs,
        },
    )
}

fn verdict(m: &Model, seed: u64, budget: Budget) -> Result<VerdictKind> {
    Ok(identifiability(m, seed, budget)?.kind)
}

fn identifiable(m: &Model, seed: u64, budget: Budget) -> Result<bool> {
    Ok(verdict(m, seed, budget)?.is_identifiable())
}

fn models_dsl(ms: &[&Model]) -> String {
    ms.iter()
        .enumerate()
        .map(|(i, m)| format!("# model {}\n{}", i + 1, m.to_dsl()))
        .collect()
}

const MAX_DRAWS: usize = 200_000;

fn exhausted(rep: &mut SuiteReport, draws: usize) -> bool {
    if draws >= MAX_DRAWS {
        rep.failures.push(format!("gave up after {draws} draws: hypotheses too rare"));
        return true;
    }
    false
}

/// Identifiable, output-connectable operands with a leak in the first one,
/// joined by Scenario 1 or 2 over that leak: the join is never
/// unidentifiable.
pub fn sub_super_io(seed: u64, count: usize, budget: Budget) -> SuiteReport {
    let mut rep = SuiteReport::new("scenario 1/2 join", seed);
    let mut rng = rng(seed);
    let mut draws = 0;
    while rep.instances < count && !exhausted(&mut rep, draws) {
        draws += 1;
        let s1 = rng.random_range(1..=3);
        let s2 = rng.random_range(1..=3);
        let m1 = strong_model(&mut rng, 1, s1, 0.5, 0.3);
        let scenario = if rng.random_bool(0.5) { Scenario::S1 } else { Scenario::S2 };
        let m2 = strong_model(&mut rng, s1 + 1, s2, 0.3, 0.4);
        let leaks = m1.network().outflow_species();
        if leaks.is_empty() {
            rep.rejected += 1;
            continue;
        }
        let xi = leaks[rng.random_range(0..leaks.len())].clone();
        let targets: Vec<String> = match scenario {
            Scenario::S1 => m2.network().inflow_species(),
            _ => m2.network().species().to_vec(),
        };
        if targets.is_empty() {
            rep.rejected += 1;
            continue;
        }
        let xj = targets[rng.random_range(0..targets.len())].clone();
        let pre = (|| -> Result<bool> {
            Ok(m1.is_output_connectable()?
                && m2.is_output_connectable()?
                && identifiable(&m1, seed, budget)?
                && identifiable(&m2, seed, budget)?)
        })();
        if !matches!(pre, Ok(true)) {
            rep.rejected += 1;
            continue;
        }
        let spec = OneWayFlowSpec::new(scenario, &[(xi.as_str(), xj.as_str())]);
        let joined = join_one_way_flow(&m1, &m2, &spec);
        let ok = joined
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|j| verdict(j, seed, budget))
            .map(|v| v != VerdictKind::Unidentifiable);
        rep.record(ok, || {
            format!("scenario {} {xi}->{xj}\n{}", scenario.number(), models_dsl(&[&m1, &m2]))
        });
    }
    rep
}

/// A first model without outflows, with an inflow and a strongly connected
/// non-flow subnetwork, joined to an identifiable model by Scenario 3 or 4
/// over a single reaction: the join is never unidentifiable.
pub fn super_io(seed: u64, count: usize, budget: Budget) -> SuiteReport {
    let mut rep = SuiteReport::new("scenario 3/4 join", seed);
    let mut rng = rng(seed);
    let mut draws = 0;
    while rep.instances < count && !exhausted(&mut rep, draws) {
        draws += 1;
        let s1 = rng.random_range(1..=3);
        let s2 = rng.random_range(1..=3);
        let scenario = if rng.random_bool(0.5) { Scenario::S3 } else { Scenario::S4 };
        let m1 = strong_model(&mut rng, 1, s1, 0.0, 0.3);
        let m2 = strong_model(&mut rng, s1 + 1, s2, 0.4, 0.4);
        let xi = m1.network().species()[rng.random_range(0..s1)].clone();
        let targets: Vec<String> = match scenario {
            Scenario::S4 => m2.network().inflow_species(),
            _ => m2.network().species().to_vec(),
        };
        let xj = targets[rng.random_range(0..targets.len())].clone();
        let pre = (|| -> Result<bool> {
            Ok(m1.network().outflow_species().is_empty()
                && non_flow_subnetwork(m1.network()).is_strongly_connected()?
                && identifiable(&m1, seed, budget)?
                && identifiable(&m2, seed, budget)?)
        })();
        if !matches!(pre, Ok(true)) {
            rep.rejected += 1;
            continue;
        }
        let spec = OneWayFlowSpec::new(scenario, &[(xi.as_str(), xj.as_str())]);
        let ok = join_one_way_flow(&m1, &m2, &spec)
            .and_then(|j| verdict(&j, seed, budget))
            .map(|v| v != VerdictKind::Unidentifiable);
        rep.record(ok, || {
            format!("scenario {} {xi}->{xj}\n{}", scenario.number(), models_dsl(&[&m1, &m2]))
        });
    }
    rep
}

/// Strongly connected, leak-free, identifiable models with an input stay
/// identifiable after one leak is added.
pub fn add_one_leak(seed: u64, count: usize, budget: Budget) -> SuiteReport {
    let mut rep = SuiteReport::new("add one leak", seed);
    let mut rng = rng(seed);
    let mut draws = 0;
    while rep.instances < count && !exhausted(&mut rep, draws) {
        draws += 1;
        let size = rng.random_range(1..=4);
        let m = strong_model(&mut rng, 1, size, 0.0, 0.3);
        if !matches!(identifiable(&m, seed, budget), Ok(true)) {
            rep.rejected += 1;
            continue;
        }
        let at = m.network().species()[rng.random_range(0..size)].clone();
        let ok = add_leak(&m, &at).and_then(|l| identifiable(&l, seed, budget));
        rep.record(ok, || format!("leak at {at}\n{}", models_dsl(&[&m])));
    }
    rep
}

/// Run a suite by name; used by the acceptance harness.
pub fn by_name(name: &str, seed: u64, count: usize, budget: Budget) -> Result<SuiteReport> {
    Ok(match name {
        "containment" => containment(seed, count, 6, budget),
        "single-species" => single_species(seed, count, 6, budget),
        "reaction" => shared_reaction(seed, count, 6, budget),
        "glue-sum" => glue_sum(seed, count, 6, budget),
        "sub-super-io" => sub_super_io(seed, count, budget),
        "super-io" => super_io(seed, count, budget),
        "add-leak" => add_one_leak(seed, count, budget),
        _ => return Err(Error::Invalid(format!("unknown suite {name}"))),
    })
}
