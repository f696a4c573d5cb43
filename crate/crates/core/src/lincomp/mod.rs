//! Linear compartmental models: compartmental matrices, output-reachable
//! restriction, input-output equations, coefficient maps, identifiability
//! and observability.
//!
//! Parameters are the labels of non-inflow reactions; a label on the edge
//! `Xj -> Xi` plays the role of `a_ij`. Inflow labels name the input
//! signals.

mod ident;
mod observe;
pub mod signal;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::massaction::species_var;
use crate::net::{Complex, Model, Network, Reaction};
use crate::poly::{det, Poly, Var, VarKind};

pub use ident::{
    global_identifiability, identifiability, local_identifiability, IdentifiabilityVerdict, VerdictKind,
};
pub use observe::{
    identifiability_after_substitution, observability_equations, observability_matrix, spanning_zero_tree,
    substituted_io_equation, tree_walk_matrix, zero_outside, ObservabilityEquation, SubstitutedIOEquation, ZeroTree,
};
pub use signal::{LinearRelation, Signal, SignalRole};

/// The differential operator `d/dt`, written `s`.
pub fn diff_symbol() -> Var {
    Var::new(VarKind::DifferentialSymbol, "s")
}

/// Output signal name for a species: `X1` gives `z1`, `A` gives `z_A`.
pub fn output_signal_name(species: &str) -> String {
    let x = species_var(species);
    format!("z{}", &x.name()[1..])
}

/// State signal name for a species (its concentration variable).
pub fn state_signal_name(species: &str) -> String {
    species_var(species).name().to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompartmentalMatrix {
    pub species: Vec<String>,
    pub entries: Vec<Vec<Poly>>,
}

impl CompartmentalMatrix {
    pub fn size(&self) -> usize {
        self.species.len()
    }

    /// Principal submatrix on the given species (in the given order).
    pub fn principal(&self, keep: &[String]) -> CompartmentalMatrix {
        let idx: Vec<usize> = keep
            .iter()
            .map(|s| self.species.iter().position(|t| t == s).expect("species of the matrix"))
            .collect();
        CompartmentalMatrix {
            species: keep.to_vec(),
            entries: idx
                .iter()
                .map(|&i| idx.iter().map(|&j| self.entries[i][j].clone()).collect())
                .collect(),
        }
    }

    pub fn render(&self) -> Vec<Vec<String>> {
        self.entries.iter().map(|r| r.iter().map(Poly::render).collect()).collect()
    }
}

fn param(label: &str) -> Poly {
    Poly::var(&Var::rate(label))
}

/// `A` with `A[l][j] = a_lj` for an edge `j -> l` and
/// `A[l][l] = -(leak at l) - Σ (labels of edges out of l)`.
pub fn compartmental_matrix(n: &Network) -> Result<CompartmentalMatrix> {
    if !n.is_monomolecular() {
        return Err(Error::NotMonomolecular(
            "compartmental matrices need a monomolecular network".into(),
        ));
    }
    let size = n.species().len();
    let mut a = vec![vec![Poly::zero(); size]; size];
    for (from, to, label) in n.species_edges()? {
        let p = param(&label);
        a[to][from] = &a[to][from] + &p;
        a[from][from] = &a[from][from] - &p;
    }
    for r in n.reactions().iter().filter(|r| r.is_outflow()) {
        let k = n.species_index(r.reactant.single_species().unwrap()).unwrap();
        a[k][k] = &a[k][k] - &param(&r.label);
    }
    Ok(CompartmentalMatrix {
        species: n.species().to_vec(),
        entries: a,
    })
}

/// Parameters of a model: the labels of all non-inflow reactions.
pub fn parameters(n: &Network) -> Vec<Var> {
    let set: BTreeSet<Var> = n
        .reactions()
        .iter()
        .filter(|r| !r.is_inflow())
        .map(|r| Var::rate(&r.label))
        .collect();
    set.into_iter().collect()
}

/// Species with a directed path (flows excluded) to `output`, in network
/// order.
pub fn output_reachable_subgraph(m: &Model, output: &str) -> Result<Vec<String>> {
    if !m.outputs().iter().any(|o| o == output) {
        return Err(Error::Invalid(format!("{output} is not an output of the model")));
    }
    let n = m.network();
    let idx = n.species_index(output).unwrap();
    let reach = n.species_reaching(idx)?;
    Ok(reach.into_iter().map(|i| n.species()[i].clone()).collect())
}

/// A model restricted to an induced subgraph: edges leaving the subgraph
/// become (parts of) leaks.
#[derive(Clone, Debug, Serialize)]
pub struct RestrictedModel {
    pub species: Vec<String>,
    /// Edges inside the subgraph as `(from, to, label)`.
    pub edges: Vec<(String, String, String)>,
    /// Leak label per compartment that has one; composite labels are sums.
    pub leaks: Vec<(String, Poly)>,
    /// `(inflow label, species)` for inputs inside the subgraph.
    pub inputs: Vec<(String, String)>,
    pub outputs: Vec<String>,
    pub matrix: CompartmentalMatrix,
}

impl RestrictedModel {
    /// The restriction as an ordinary model, when every leak label is a
    /// single parameter.
    pub fn to_model(&self) -> Result<Model> {
        let mut reactions = Vec::new();
        for (l, s) in &self.inputs {
            reactions.push(Reaction::new(Complex::zero(), Complex::species(s), l));
        }
        for (a, b, l) in &self.edges {
            reactions.push(Reaction::new(Complex::species(a), Complex::species(b), l));
        }
        for (s, p) in &self.leaks {
            let vars = p.vars();
            if p.num_terms() != 1 || vars.len() != 1 || p != &Poly::var(vars.iter().next().unwrap()) {
                return Err(Error::Invalid(format!(
                    "leak at {s} has composite label {}",
                    p.render()
                )));
            }
            let label = vars.iter().next().unwrap().name().to_string();
            reactions.push(Reaction::new(Complex::species(s), Complex::zero(), &label));
        }
        Model::new(
            Network::with_species_order(&self.species, reactions)?,
            self.outputs.clone(),
        )
    }
}

/// Restrict a model to the induced subgraph on `keep`.
pub fn restrict_model(m: &Model, keep: &[String]) -> Result<RestrictedModel> {
    let n = m.network();
    let species: Vec<String> = n.species().iter().filter(|s| keep.contains(s)).cloned().collect();
    if species.len() != keep.len() {
        return Err(Error::Invalid("restriction vertices must be species of the model".into()));
    }
    let outputs: Vec<String> = m.outputs().iter().filter(|o| keep.contains(o)).cloned().collect();
    if outputs.is_empty() {
        return Err(Error::Precondition("the restriction must contain an output".into()));
    }
    let inside = |s: &String| keep.contains(s);
    let mut edges = Vec::new();
    let mut leak: BTreeMap<String, Poly> = BTreeMap::new();
    for (from, to, label) in n.species_edges()? {
        let (a, b) = (&n.species()[from], &n.species()[to]);
        match (inside(a), inside(b)) {
            (true, true) => edges.push((a.clone(), b.clone(), label)),
            (true, false) => {
                let e = leak.entry(a.clone()).or_insert_with(Poly::zero);
                *e = &*e + &param(&label);
            }
            _ => {}
        }
    }
    for r in n.reactions().iter().filter(|r| r.is_outflow()) {
        let s = r.reactant.single_species().unwrap().to_string();
        if inside(&s) {
            let e = leak.entry(s).or_insert_with(Poly::zero);
            *e = &*e + &param(&r.label);
        }
    }
    let inputs: Vec<(String, String)> = n
        .reactions()
        .iter()
        .filter(|r| r.is_inflow())
        .map(|r| (r.label.clone(), r.product.single_species().unwrap().to_string()))
        .filter(|(_, s)| inside(s))
        .collect();

    let size = species.len();
    let pos = |s: &String| species.iter().position(|t| t == s).unwrap();
    let mut a = vec![vec![Poly::zero(); size]; size];
    for (f, t, l) in &edges {
        let p = param(l);
        a[pos(t)][pos(f)] = &a[pos(t)][pos(f)] + &p;
        a[pos(f)][pos(f)] = &a[pos(f)][pos(f)] - &p;
    }
    for (s, p) in &leak {
        a[pos(s)][pos(s)] = &a[pos(s)][pos(s)] - p;
    }
    let leaks = species
        .iter()
        .filter_map(|s| leak.get(s).map(|p| (s.clone(), p.clone())))
        .collect();
    Ok(RestrictedModel {
        matrix: CompartmentalMatrix {
            species: species.clone(),
            entries: a,
        },
        species,
        edges,
        leaks,
        inputs,
        outputs,
    })
}

/// `det(sI - A_H) z_i = Σ_j (-1)^{i+j} det((sI - A_H) without row j,
/// column i) u_j`, with `i`, `j` positions inside `H`. Operators are stored
/// as coefficient lists in ascending powers of `s`.
#[derive(Clone, Debug, Serialize)]
pub struct IOEquation {
    pub output: String,
    pub subgraph: Vec<String>,
    pub lhs: Vec<Poly>,
    /// `(input label, input species, operator)`.
    pub rhs: Vec<(String, String, Vec<Poly>)>,
}

impl IOEquation {
    pub fn output_signal(&self) -> String {
        output_signal_name(&self.output)
    }

    /// `lhs - rhs` as a relation `= 0`.
    pub fn relation(&self) -> LinearRelation {
        let mut r = LinearRelation::new();
        let z = self.output_signal();
        for (k, c) in self.lhs.iter().enumerate() {
            r.add_poly(Signal::output(&z, k as u32), c);
        }
        for (u, _, op) in &self.rhs {
            for (k, c) in op.iter().enumerate() {
                r.add_poly(Signal::input(u, k as u32), &-c);
            }
        }
        r
    }

    pub fn render(&self) -> String {
        self.relation().render_equation(|s| s.role == SignalRole::Output)
    }

    /// Non-constant coefficients: lhs below the leading term, then each
    /// rhs operator, both from the highest power of `s` down.
    pub fn coefficients(&self) -> Vec<Poly> {
        let mut out = Vec::new();
        for c in self.lhs.iter().rev().skip(1) {
            out.push(c.clone());
        }
        for (_, _, op) in &self.rhs {
            for c in op.iter().rev() {
                out.push(c.clone());
            }
        }
        out.retain(|c| !c.is_constant());
        out
    }
}

fn s_minus(a: &[Vec<Poly>]) -> Vec<Vec<Poly>> {
    let s = Poly::var(&diff_symbol());
    a.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, v)| if i == j { &s - v } else { -v.clone() })
                .collect()
        })
        .collect()
}

fn minor(m: &[Vec<Poly>], row: usize, col: usize) -> Vec<Vec<Poly>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, v)| v.clone()).collect())
        .collect()
}

pub fn io_equation(m: &Model, output: &str) -> Result<IOEquation> {
    let h = output_reachable_subgraph(m, output)?;
    let r = restrict_model(m, &h)?;
    if r.inputs.is_empty() {
        return Err(Error::HypothesisNotMet(format!(
            "no input compartment reaches {output}, so the determinant formula gives no input-output equation"
        )));
    }
    let si = s_minus(&r.matrix.entries);
    let s = diff_symbol();
    let lhs = det(&si).coefficients_in(&s);
    let i = r.species.iter().position(|t| t == output).unwrap();
    let mut rhs = Vec::new();
    for (label, sp) in &r.inputs {
        let j = r.species.iter().position(|t| t == sp).unwrap();
        let mut d = det(&minor(&si, j, i));
        if (i + j) % 2 == 1 {
            d = -d;
        }
        rhs.push((label.clone(), sp.clone(), d.coefficients_in(&s)));
    }
    Ok(IOEquation {
        output: output.to_string(),
        subgraph: r.species,
        lhs,
        rhs,
    })
}

/// Coefficient map of a model: coordinates are rational functions of the
/// parameters, deduplicated syntactically.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientMap {
    pub params: Vec<Var>,
    pub coords: Vec<crate::poly::RatFunc>,
}

impl CoefficientMap {
    pub fn new(params: Vec<Var>, coords: impl IntoIterator<Item = crate::poly::RatFunc>) -> CoefficientMap {
        let mut seen: Vec<crate::poly::RatFunc> = Vec::new();
        for c in coords {
            if c.is_zero() || (c.is_poly() && c.as_poly().unwrap().is_constant()) {
                continue;
            }
            if !seen.iter().any(|d| d.numer() == c.numer() && d.denom() == c.denom()) {
                seen.push(c);
            }
        }
        CoefficientMap { params, coords: seen }
    }

    pub fn render(&self) -> Vec<String> {
        self.coords.iter().map(|c| c.render()).collect()
    }
}

/// One input-output equation per output, as above.
pub fn io_equations(m: &Model) -> Result<Vec<IOEquation>> {
    m.outputs().iter().map(|o| io_equation(m, o)).collect()
}

pub fn coefficient_map(m: &Model) -> Result<CoefficientMap> {
    let eqs = io_equations(m)?;
    Ok(CoefficientMap::new(
        parameters(m.network()),
        eqs.iter().flat_map(|e| e.coefficients()).map(crate::poly::RatFunc::from_poly),
    ))
}

/// Add a leak `X -> 0`; the label is `a0<k>` for `Xk`, else `k_<X>_out`.
pub fn add_leak(m: &Model, compartment: &str) -> Result<Model> {
    let n = m.network();
    if !n.has_species(compartment) {
        return Err(Error::Invalid(format!("{compartment} is not a species of the model")));
    }
    let x = Complex::species(compartment);
    if n.find_reaction(&x, &Complex::zero()).is_some() {
        return Err(Error::Precondition(format!("{compartment} already has a leak")));
    }
    let stem = match compartment.strip_prefix('X') {
        Some(d) if !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()) => format!("a0{d}"),
        _ => format!("k_{compartment}_out"),
    };
    let taken: BTreeSet<String> = n.labels().into_iter().collect();
    let label = if taken.contains(&stem) {
        (2..).map(|k| format!("{stem}_{k}")).find(|c| !taken.contains(c)).unwrap()
    } else {
        stem
    };
    let mut reactions = n.reactions().to_vec();
    reactions.push(Reaction::new(x, Complex::zero(), &label));
    Model::new(Network::with_species_order(n.species(), reactions)?, m.outputs().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::parse_model;
    use crate::poly::parse_poly;

    fn p(s: &str) -> Poly {
        parse_poly(s).unwrap()
    }

    fn restriction_example() -> Model {
        parse_model(
            "0 -> X1 [u1]; X1 <-> X2 [a21, a12]; X2 -> X3 [a32]; X3 <-> X4 [a43, a34]; 0 -> X4 [u4]; output X1",
        )
        .unwrap()
    }

    fn two_compartment() -> Model {
        parse_model("0 -> X1 [u1]; X1 <-> X2 [a21, a12]; X2 -> 0 [a02]; output X1").unwrap()
    }

    #[test]
    fn compartmental_matrices() {
        let a = compartmental_matrix(two_compartment().network()).unwrap();
        assert_eq!(
            a.entries,
            vec![vec![p("-a21"), p("a12")], vec![p("a21"), p("-a02 - a12")]]
        );
        let one = parse_model("0 -> X1 [u1]; X1 -> 0 [a01]; output X1").unwrap();
        assert_eq!(compartmental_matrix(one.network()).unwrap().entries, vec![vec![p("-a01")]]);
        for j in 0..2 {
            let col = (0..2).fold(Poly::zero(), |acc, i| &acc + &a.entries[i][j]);
            assert_eq!(col, if j == 0 { Poly::zero() } else { p("-a02") });
        }
    }

    #[test]
    fn restriction() {
        let m = restriction_example();
        let h = output_reachable_subgraph(&m, "X1").unwrap();
        assert_eq!(h, vec!["X1", "X2"]);
        let r = restrict_model(&m, &h).unwrap();
        assert_eq!(
            r.matrix.entries,
            vec![vec![p("-a21"), p("a12")], vec![p("a21"), p("-a12 - a32")]]
        );
        assert_eq!(r.leaks, vec![("X2".to_string(), p("a32"))]);
        assert_eq!(r.inputs, vec![("u1".to_string(), "X1".to_string())]);
        let full = compartmental_matrix(m.network()).unwrap();
        assert_eq!(full.principal(&h), r.matrix);
        let rm = r.to_model().unwrap();
        assert_eq!(rm.network().reactions().len(), 4);

        let whole = restrict_model(&two_compartment(), &["X1".into(), "X2".into()]).unwrap();
        assert_eq!(whole.matrix, compartmental_matrix(two_compartment().network()).unwrap());

        let m = parse_model("0 -> X1 [u1]; X1 -> X2 [a21]; X1 -> X3 [a31]; X1 -> 0 [a01]; output X1").unwrap();
        let r = restrict_model(&m, &["X1".into()]).unwrap();
        assert_eq!(r.leaks[0].1, p("a01 + a21 + a31"));
        assert!(restrict_model(&m, &["X2".into()]).is_err());
    }

    #[test]
    fn io_equations_of_small_models() {
        let e = io_equation(&restriction_example(), "X1").unwrap();
        assert_eq!(
            e.render(),
            "z1'' + (a12 + a21 + a32)*z1' + a21*a32*z1 = u1' + (a12 + a32)*u1"
        );
        let e = io_equation(&two_compartment(), "X1").unwrap();
        assert_eq!(
            e.render(),
            "z1'' + (a02 + a12 + a21)*z1' + a02*a21*z1 = u1' + (a02 + a12)*u1"
        );
        let c = coefficient_map(&two_compartment()).unwrap();
        assert_eq!(c.render(), vec!["a02 + a12 + a21", "a02*a21", "a02 + a12"]);
        let one = parse_model("0 -> X1 [u1]; X1 -> 0 [a01]; output X1").unwrap();
        assert_eq!(io_equation(&one, "X1").unwrap().render(), "z1' + a01*z1 = u1");
        assert_eq!(coefficient_map(&one).unwrap().render(), vec!["a01"]);
    }

    #[test]
    fn io_equation_needs_an_input() {
        let m = parse_model("X1 <-> X2 [a21, a12]; 0 -> X3 [u3]; X3 -> 0 [a03]; output X1").unwrap();
        assert!(matches!(io_equation(&m, "X1"), Err(Error::HypothesisNotMet(_))));
    }

    #[test]
    fn leaks() {
        let m = parse_model("0 -> X1 [u1]; X1 <-> X2 [a21, a12]; output X1").unwrap();
        let l = add_leak(&m, "X2").unwrap();
        assert!(l.network().find_reaction(&Complex::species("X2"), &Complex::zero()).is_some());
        assert_eq!(l.network().reactions().last().unwrap().label, "a02");
        assert!(matches!(add_leak(&l, "X2"), Err(Error::Precondition(_))));
    }
}
