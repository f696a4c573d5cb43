use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use super::{Complex, Model, Network, Reaction};
use crate::error::{Error, Result};

/// How two networks overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GlueKind {
    SpeciesDisjoint,
    ComplexDisjoint,
    OverComplexes,
    OverReactions,
}

/// Union of two networks. Species are identified by name, complexes
/// structurally, and a reaction present in both must carry the same label.
pub fn union(n1: &Network, n2: &Network) -> Result<Network> {
    let labels1: HashSet<&str> = n1.reactions().iter().map(|r| r.label.as_str()).collect();
    let mut reactions = n1.reactions().to_vec();
    for r in n2.reactions() {
        match n1.reactions().iter().find(|q| q.same_edge(r)) {
            Some(q) if q.label != r.label => {
                return Err(Error::LabelClash(format!(
                    "shared reaction {} -> {} is labelled `{}` and `{}`",
                    r.reactant, r.product, q.label, r.label
                )))
            }
            Some(_) => {}
            None => {
                if labels1.contains(r.label.as_str()) {
                    return Err(Error::LabelClash(format!(
                        "label `{}` names different reactions in the two networks",
                        r.label
                    )));
                }
                reactions.push(r.clone());
            }
        }
    }
    Network::with_species_order(&species_order(n1, n2), reactions)
}

fn species_order(n1: &Network, n2: &Network) -> Vec<String> {
    let mut order = n1.species().to_vec();
    for s in n2.species() {
        if !order.contains(s) {
            order.push(s.clone());
        }
    }
    order
}

/// Classify the overlap of two networks.
pub fn classify_glue(n1: &Network, n2: &Network) -> GlueKind {
    let s1: HashSet<&String> = n1.species().iter().collect();
    if !n2.species().iter().any(|s| s1.contains(s)) {
        return GlueKind::SpeciesDisjoint;
    }
    if n1
        .reactions()
        .iter()
        .any(|r| n2.reactions().iter().any(|q| q.same_edge(r)))
    {
        return GlueKind::OverReactions;
    }
    if n1
        .complexes()
        .iter()
        .any(|c| !c.is_zero() && n2.has_complex(c))
    {
        return GlueKind::OverComplexes;
    }
    GlueKind::ComplexDisjoint
}

/// A label not used by `taken`, derived from `stem`.
fn fresh_label(stem: &str, taken: &HashSet<String>) -> String {
    if !taken.contains(stem) {
        return stem.to_string();
    }
    (2..)
        .map(|k| format!("{stem}_{k}"))
        .find(|c| !taken.contains(c))
        .unwrap()
}

/// Default label for a new reaction `y -> y'`: `a<j><i>` for `Xi -> Xj`
/// (flow from i to j), otherwise `k_new`.
fn default_label(y: &Complex, yp: &Complex) -> String {
    let idx = |c: &Complex| {
        c.single_species()
            .and_then(|s| s.strip_prefix('X'))
            .filter(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()))
            .map(|d| d.to_string())
    };
    match (idx(y), idx(yp)) {
        (Some(i), Some(j)) => format!("a{j}{i}"),
        _ => "k_new".to_string(),
    }
}

/// `N1 ∪ N2 ∪ {y -> y'}` with `y ∈ C1`, `y' ∈ C2`.
pub fn join_by_new_reaction(n1: &Network, n2: &Network, y: &Complex, yp: &Complex, label: Option<&str>) -> Result<Network> {
    if !n1.has_complex(y) {
        return Err(Error::Precondition(format!("{y} is not a complex of the first network")));
    }
    if !n2.has_complex(yp) {
        return Err(Error::Precondition(format!("{yp} is not a complex of the second network")));
    }
    if n1.find_reaction(y, yp).is_some() || n2.find_reaction(y, yp).is_some() {
        return Err(Error::Precondition(format!("{y} -> {yp} already belongs to an operand")));
    }
    if y == yp {
        return Err(Error::ReactantEqualsProduct(format!("{y} -> {yp}")));
    }
    let u = union(n1, n2)?;
    let taken: HashSet<String> = u.labels().into_iter().collect();
    let label = match label {
        Some(l) => l.to_string(),
        None => fresh_label(&default_label(y, yp), &taken),
    };
    let mut reactions = u.reactions().to_vec();
    reactions.push(Reaction::new(y.clone(), yp.clone(), &label));
    Network::with_species_order(u.species(), reactions)
}

/// Remove `removed` from both operands, take the union, and add `added`.
/// Complexes and species left without reactions disappear.
pub fn join_replacing(n1: &Network, n2: &Network, removed: &[Reaction], added: &[Reaction]) -> Result<Network> {
    for r in removed {
        if n1.find_reaction(&r.reactant, &r.product).is_none() && n2.find_reaction(&r.reactant, &r.product).is_none() {
            return Err(Error::Precondition(format!(
                "removed reaction {} -> {} is in neither operand",
                r.reactant, r.product
            )));
        }
    }
    for r in added {
        if n1.find_reaction(&r.reactant, &r.product).is_some() || n2.find_reaction(&r.reactant, &r.product).is_some() {
            return Err(Error::Precondition(format!(
                "added reaction {} -> {} already belongs to an operand",
                r.reactant, r.product
            )));
        }
        if !n1.has_complex(&r.reactant) {
            return Err(Error::Precondition(format!(
                "added reaction reactant {} is not a complex of the first network",
                r.reactant
            )));
        }
        if !n2.has_complex(&r.product) {
            return Err(Error::Precondition(format!(
                "added reaction product {} is not a complex of the second network",
                r.product
            )));
        }
    }
    let keep = |n: &Network| -> Vec<Reaction> {
        n.reactions()
            .iter()
            .filter(|r| !removed.iter().any(|q| q.same_edge(r)))
            .cloned()
            .collect()
    };
    let order = species_order(n1, n2);
    let m1 = Network::with_species_order(&order, keep(n1))?;
    let m2 = Network::with_species_order(&order, keep(n2))?;
    let u = union(&m1, &m2)?;
    let mut reactions = u.reactions().to_vec();
    reactions.extend(added.iter().cloned());
    Network::with_species_order(&order, reactions)
}

/// Scenario of a one-way-flow join.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scenario {
    /// Replace leaks `Xi -> 0` and inflows `0 -> Xφ(i)` by `Xi -> Xφ(i)`.
    S1,
    /// Replace leaks `Xi -> 0` by `Xi -> Xφ(i)`.
    S2,
    /// Add `Xi -> Xφ(i)`.
    S3,
    /// Replace inflows `0 -> Xφ(i)` by `Xi -> Xφ(i)`.
    S4,
}

impl Scenario {
    pub fn from_number(n: u8) -> Result<Scenario> {
        match n {
            1 => Ok(Scenario::S1),
            2 => Ok(Scenario::S2),
            3 => Ok(Scenario::S3),
            4 => Ok(Scenario::S4),
            _ => Err(Error::Invalid(format!("scenario must be 1..4, got {n}"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Scenario::S1 => 1,
            Scenario::S2 => 2,
            Scenario::S3 => 3,
            Scenario::S4 => 4,
        }
    }
}

/// Joining data: the scenario and the map φ from first-network species to
/// second-network species (its keys form the index set).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OneWayFlowSpec {
    pub scenario: Scenario,
    pub phi: BTreeMap<String, String>,
}

impl OneWayFlowSpec {
    pub fn new(scenario: Scenario, pairs: &[(&str, &str)]) -> OneWayFlowSpec {
        OneWayFlowSpec {
            scenario,
            phi: pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        }
    }
}

/// Join two species-disjoint networks by a one-way flow. New reactions
/// replacing a leak keep the leak's rate label; otherwise a fresh `a<j><i>`
/// label is chosen.
pub fn join_one_way_flow_networks(n1: &Network, n2: &Network, spec: &OneWayFlowSpec) -> Result<Network> {
    if spec.phi.is_empty() {
        return Err(Error::Precondition("the joining index set must be nonempty".into()));
    }
    if classify_glue(n1, n2) != GlueKind::SpeciesDisjoint {
        return Err(Error::Precondition("one-way flow needs species-disjoint networks".into()));
    }
    let mut removed = Vec::new();
    let mut added = Vec::new();
    let mut taken: HashSet<String> = n1.labels().into_iter().chain(n2.labels()).collect();
    let mut inflows_done = HashSet::new();
    for (i, j) in &spec.phi {
        if !n1.has_species(i) {
            return Err(Error::Precondition(format!("{i} is not a species of the first network")));
        }
        if !n2.has_species(j) {
            return Err(Error::Precondition(format!("{j} is not a species of the second network")));
        }
        let xi = Complex::species(i);
        let xj = Complex::species(j);
        let leak = n1.find_reaction(&xi, &Complex::zero());
        let inflow = n2.find_reaction(&Complex::zero(), &xj);
        let needs_leak = matches!(spec.scenario, Scenario::S1 | Scenario::S2);
        let needs_inflow = matches!(spec.scenario, Scenario::S1 | Scenario::S4);
        if needs_leak && leak.is_none() {
            return Err(Error::Precondition(format!(
                "scenario {} needs the outflow {i} -> 0 in the first network",
                spec.scenario.number()
            )));
        }
        if needs_inflow && inflow.is_none() {
            return Err(Error::Precondition(format!(
                "scenario {} needs the inflow 0 -> {j} in the second network",
                spec.scenario.number()
            )));
        }
        if needs_leak {
            removed.push(leak.unwrap().clone());
        }
        if needs_inflow && inflows_done.insert(j.clone()) {
            removed.push(inflow.unwrap().clone());
        }
        let label = if needs_leak {
            leak.unwrap().label.clone()
        } else {
            let l = fresh_label(&default_label(&xi, &xj), &taken);
            taken.insert(l.clone());
            l
        };
        added.push(Reaction::new(xi, xj, &label));
    }
    // Replacement only needs y ∈ C1 and y' ∈ C2 in the original networks.
    join_replacing(n1, n2, &removed, &added)
}

/// Model obtained by joining two models by a one-way flow; the outputs are
/// the union of the operands' outputs and the inputs follow from the
/// remaining inflows.
pub fn join_one_way_flow(m1: &Model, m2: &Model, spec: &OneWayFlowSpec) -> Result<Model> {
    let n = join_one_way_flow_networks(m1.network(), m2.network(), spec)?;
    let mut outputs = m1.outputs().to_vec();
    outputs.extend(m2.outputs().iter().cloned());
    Model::new(n, outputs)
}

/// Drop the zero complex together with every inflow and outflow.
pub fn non_flow_subnetwork(n: &Network) -> Network {
    let reactions: Vec<Reaction> = n
        .reactions()
        .iter()
        .filter(|r| !r.reactant.is_zero() && !r.product.is_zero())
        .cloned()
        .collect();
    Network::with_species_order(n.species(), reactions).expect("subset of a valid network")
}
