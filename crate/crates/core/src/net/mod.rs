//! Reaction networks: species, complexes, reactions, and the operators that
//! combine networks (union, gluing, joining, one-way flows).

mod dsl;
mod ops;

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::natural_cmp;

pub use dsl::{parse_document, parse_model, parse_network, Document};
pub use ops::{
    classify_glue, join_by_new_reaction, join_one_way_flow, join_replacing, non_flow_subnetwork, union, GlueKind,
    join_one_way_flow_networks, OneWayFlowSpec, Scenario,
};

/// Nonnegative integer combination of species, keyed by species name.
/// The empty map is the zero complex.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Complex {
    terms: BTreeMap<String, u32>,
}

impl Complex {
    pub fn zero() -> Complex {
        Complex::default()
    }

    pub fn species(name: &str) -> Complex {
        Complex::from_terms([(name, 1)])
    }

    /// Build from (species, coefficient) pairs; coefficients add up and zero
    /// coefficients are dropped.
    pub fn from_terms<'a>(terms: impl IntoIterator<Item = (&'a str, u32)>) -> Complex {
        let mut m = BTreeMap::new();
        for (s, c) in terms {
            *m.entry(s.to_string()).or_insert(0) += c;
        }
        m.retain(|_, c| *c > 0);
        Complex { terms: m }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exactly one species with coefficient 1.
    pub fn is_monomolecular(&self) -> bool {
        self.terms.len() == 1 && self.terms.values().all(|c| *c == 1)
    }

    pub fn molecularity(&self) -> u32 {
        self.terms.values().sum()
    }

    pub fn coeff(&self, species: &str) -> u32 {
        self.terms.get(species).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, u32)> {
        self.terms.iter().map(|(s, c)| (s.as_str(), *c))
    }

    pub fn species_names(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().map(|s| s.as_str())
    }

    /// The single species of a monomolecular complex.
    pub fn single_species(&self) -> Option<&str> {
        if self.is_monomolecular() {
            self.terms.keys().next().map(|s| s.as_str())
        } else {
            None
        }
    }

    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut names: Vec<(&String, &u32)> = self.terms.iter().collect();
        names.sort_by(|a, b| natural_cmp(a.0, b.0));
        names
            .iter()
            .map(|(s, c)| if **c == 1 { s.to_string() } else { format!("{c}{s}") })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for Complex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.render())
    }
}

/// A directed reaction with its rate-constant label.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Reaction {
    pub reactant: Complex,
    pub product: Complex,
    pub label: String,
}

impl Reaction {
    pub fn new(reactant: Complex, product: Complex, label: &str) -> Reaction {
        Reaction {
            reactant,
            product,
            label: label.to_string(),
        }
    }

    /// Same reactant and product (labels ignored).
    pub fn same_edge(&self, other: &Reaction) -> bool {
        self.reactant == other.reactant && self.product == other.product
    }

    pub fn is_inflow(&self) -> bool {
        self.reactant.is_zero()
    }

    pub fn is_outflow(&self) -> bool {
        self.product.is_zero()
    }

    pub fn render(&self) -> String {
        format!("{} -> {} [{}]", self.reactant, self.product, self.label)
    }
}

impl fmt::Debug for Reaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// A reaction network. Species are indexed densely in first-appearance
/// order; complexes are listed in first-appearance order as well.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Network {
    species: Vec<String>,
    complexes: Vec<Complex>,
    reactions: Vec<Reaction>,
}

impl Network {
    /// Build a network, checking labels and reactions. Species order is the
    /// order of first appearance in the reaction list.
    pub fn new(reactions: Vec<Reaction>) -> Result<Network> {
        Network::with_species_order(&[], reactions)
    }

    /// Like [`Network::new`], but species listed in `order` come first (in
    /// that order) when they occur; species absent from every reaction are
    /// dropped.
    pub fn with_species_order(order: &[String], reactions: Vec<Reaction>) -> Result<Network> {
        let mut labels = HashSet::new();
        let mut edges = HashSet::new();
        for r in &reactions {
            if r.reactant == r.product {
                return Err(Error::ReactantEqualsProduct(r.render()));
            }
            if r.label.is_empty() {
                return Err(Error::Invalid(format!("reaction {} has an empty label", r.render())));
            }
            if !labels.insert(r.label.clone()) {
                return Err(Error::DuplicateLabel(r.label.clone()));
            }
            if !edges.insert((r.reactant.clone(), r.product.clone())) {
                return Err(Error::DuplicateReaction(format!("{} -> {}", r.reactant, r.product)));
            }
        }
        let mut present: Vec<String> = Vec::new();
        let mut seen = HashSet::new();
        let mut complexes = Vec::new();
        let mut seen_c = HashSet::new();
        for r in &reactions {
            for c in [&r.reactant, &r.product] {
                if seen_c.insert(c.clone()) {
                    complexes.push(c.clone());
                }
                for s in c.species_names() {
                    if seen.insert(s.to_string()) {
                        present.push(s.to_string());
                    }
                }
            }
        }
        let mut species: Vec<String> = order.iter().filter(|s| seen.contains(*s)).cloned().collect();
        let listed: HashSet<&String> = species.iter().collect::<HashSet<_>>();
        let rest: Vec<String> = present.iter().filter(|s| !listed.contains(s)).cloned().collect();
        species.extend(rest);
        Ok(Network {
            species,
            complexes,
            reactions,
        })
    }

    pub fn empty() -> Network {
        Network {
            species: Vec::new(),
            complexes: Vec::new(),
            reactions: Vec::new(),
        }
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s == name)
    }

    pub fn has_species(&self, name: &str) -> bool {
        self.species.iter().any(|s| s == name)
    }

    pub fn complexes(&self) -> &[Complex] {
        &self.complexes
    }

    pub fn has_complex(&self, c: &Complex) -> bool {
        self.complexes.contains(c)
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn find_reaction(&self, reactant: &Complex, product: &Complex) -> Option<&Reaction> {
        self.reactions
            .iter()
            .find(|r| &r.reactant == reactant && &r.product == product)
    }

    pub fn labels(&self) -> Vec<String> {
        self.reactions.iter().map(|r| r.label.clone()).collect()
    }

    pub fn has_zero_complex(&self) -> bool {
        self.complexes.iter().any(|c| c.is_zero())
    }

    /// Every complex is zero or a single species with coefficient 1.
    pub fn is_monomolecular(&self) -> bool {
        self.complexes
            .iter()
            .all(|c| c.is_zero() || c.is_monomolecular())
    }

    /// Species with an inflow reaction `0 -> X`, in species order.
    pub fn inflow_species(&self) -> Vec<String> {
        self.species
            .iter()
            .filter(|s| {
                self.reactions
                    .iter()
                    .any(|r| r.is_inflow() && r.product == Complex::species(s))
            })
            .cloned()
            .collect()
    }

    /// Species with an outflow reaction `X -> 0`, in species order.
    pub fn outflow_species(&self) -> Vec<String> {
        self.species
            .iter()
            .filter(|s| {
                self.reactions
                    .iter()
                    .any(|r| r.is_outflow() && r.reactant == Complex::species(s))
            })
            .cloned()
            .collect()
    }

    /// Species-to-species edges of a monomolecular network (flows excluded).
    pub fn species_edges(&self) -> Result<Vec<(usize, usize, String)>> {
        if !self.is_monomolecular() {
            return Err(Error::NotMonomolecular(
                "species digraph needs single-species complexes".into(),
            ));
        }
        Ok(self
            .reactions
            .iter()
            .filter_map(|r| {
                let a = r.reactant.single_species()?;
                let b = r.product.single_species()?;
                Some((self.species_index(a)?, self.species_index(b)?, r.label.clone()))
            })
            .collect())
    }

    /// Vertices reachable from `start` along species edges (including start).
    fn reach(&self, edges: &[(usize, usize, String)], start: usize, reverse: bool) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut q = VecDeque::new();
        seen.insert(start);
        q.push_back(start);
        while let Some(v) = q.pop_front() {
            for (a, b, _) in edges {
                let (from, to) = if reverse { (*b, *a) } else { (*a, *b) };
                if from == v && seen.insert(to) {
                    q.push_back(to);
                }
            }
        }
        seen
    }

    /// Species (indices) with a directed path to `target`, including itself.
    pub fn species_reaching(&self, target: usize) -> Result<BTreeSet<usize>> {
        let edges = self.species_edges()?;
        Ok(self.reach(&edges, target, true))
    }

    /// Strong connectivity of the species digraph, flows excluded. All
    /// species of the network are vertices, so a single species is strongly
    /// connected.
    pub fn is_strongly_connected(&self) -> Result<bool> {
        let edges = self.species_edges()?;
        if self.species.is_empty() {
            return Ok(true);
        }
        let n = self.species.len();
        Ok(self.reach(&edges, 0, false).len() == n && self.reach(&edges, 0, true).len() == n)
    }

    /// DSL text that parses back to this network.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        for r in &self.reactions {
            out.push_str(&r.render());
            out.push('\n');
        }
        out
    }
}

impl Serialize for Network {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Network", 3)?;
        st.serialize_field("species", &self.species)?;
        st.serialize_field("complexes", &self.complexes)?;
        st.serialize_field("reactions", &self.reactions)?;
        st.end()
    }
}

/// A network with measured outputs. Inputs are the inflow species.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Model {
    network: Network,
    outputs: Vec<String>,
}

impl Model {
    pub fn new(network: Network, outputs: Vec<String>) -> Result<Model> {
        if outputs.is_empty() {
            return Err(Error::Invalid("a model needs at least one output".into()));
        }
        let mut seen = HashSet::new();
        for o in &outputs {
            if !network.has_species(o) {
                return Err(Error::Invalid(format!("output {o} is not a species of the network")));
            }
            if !seen.insert(o.clone()) {
                return Err(Error::Invalid(format!("output {o} listed twice")));
            }
        }
        let mut outputs = outputs;
        outputs.sort_by_key(|o| network.species_index(o).unwrap());
        Ok(Model { network, outputs })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    /// Inflow species; derived, never set independently.
    pub fn inputs(&self) -> Vec<String> {
        self.network.inflow_species()
    }

    /// Every species has a directed path (flows excluded) to some output.
    pub fn is_output_connectable(&self) -> Result<bool> {
        let mut ok = BTreeSet::new();
        for o in &self.outputs {
            let idx = self.network.species_index(o).unwrap();
            ok.extend(self.network.species_reaching(idx)?);
        }
        Ok(ok.len() == self.network.species.len())
    }

    pub fn to_dsl(&self) -> String {
        format!("{}output {}\n", self.network.to_dsl(), self.outputs.join(", "))
    }
}

impl Serialize for Model {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Model", 3)?;
        st.serialize_field("network", &self.network)?;
        st.serialize_field("inputs", &self.inputs())?;
        st.serialize_field("outputs", &self.outputs)?;
        st.end()
    }
}
