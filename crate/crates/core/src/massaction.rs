//! Mass-action kinetics of a network: system polynomials, stoichiometry,
//! compatibility classes and steady-state ideals.

use std::collections::{BTreeSet, HashMap};

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::net::{Complex, Network};
use crate::poly::{Ideal, Monomial, Poly, Var};

/// Concentration variable of a species: `Xk` becomes `xk`, any other name
/// `N` becomes `x_N`.
pub fn species_var(name: &str) -> Var {
    match name.strip_prefix('X') {
        Some(d) if !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()) => Var::conc(&format!("x{d}")),
        _ => Var::conc(&format!("x_{name}")),
    }
}

pub fn rate_var(label: &str) -> Var {
    Var::rate(label)
}

fn complex_monomial(c: &Complex) -> Monomial {
    Monomial::from_pairs(c.terms().map(|(s, k)| (species_var(s), k)))
}

#[derive(Clone, Debug, Serialize)]
pub struct MassActionSystem {
    pub species: Vec<String>,
    pub concentrations: Vec<Var>,
    pub rate_constants: Vec<Var>,
    /// `polys[i]` is d x_i / dt.
    pub polys: Vec<Poly>,
}

impl MassActionSystem {
    /// All ring variables: rate constants, then concentrations.
    pub fn ring(&self) -> Vec<Var> {
        self.rate_constants.iter().chain(&self.concentrations).cloned().collect()
    }

    pub fn poly_of(&self, species: &str) -> Option<&Poly> {
        self.species.iter().position(|s| s == species).map(|i| &self.polys[i])
    }
}

/// The mass-action ODE right-hand sides, one per species.
pub fn system_polynomials(n: &Network) -> Result<MassActionSystem> {
    let concentrations: Vec<Var> = n.species().iter().map(|s| species_var(s)).collect();
    let rate_constants: Vec<Var> = n.reactions().iter().map(|r| rate_var(&r.label)).collect();
    let conc_names: BTreeSet<&str> = concentrations.iter().map(|v| v.name()).collect();
    if let Some(clash) = rate_constants.iter().find(|k| conc_names.contains(k.name())) {
        return Err(Error::LabelClash(format!(
            "rate label `{}` coincides with a concentration variable",
            clash.name()
        )));
    }
    let mut polys = vec![Poly::zero(); n.species().len()];
    for (r, k) in n.reactions().iter().zip(&rate_constants) {
        let m = complex_monomial(&r.reactant).mul(&Monomial::var(k.clone()));
        for (i, s) in n.species().iter().enumerate() {
            let d = r.product.coeff(s) as i64 - r.reactant.coeff(s) as i64;
            if d != 0 {
                polys[i].add_term(m.clone(), BigRational::from_integer(d.into()));
            }
        }
    }
    Ok(MassActionSystem {
        species: n.species().to_vec(),
        concentrations,
        rate_constants,
        polys,
    })
}

/// Stoichiometric matrix: rows are species, column k is the reaction
/// vector of reaction k.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StoichMatrix {
    pub species: Vec<String>,
    pub labels: Vec<String>,
    pub entries: Vec<Vec<i64>>,
}

impl StoichMatrix {
    pub fn column(&self, k: usize) -> Vec<i64> {
        self.entries.iter().map(|r| r[k]).collect()
    }

    /// Dimension of the stoichiometric subspace.
    pub fn rank(&self) -> usize {
        linalg::rank(&linalg::from_ints(&self.entries))
    }

    /// Basis of the orthogonal complement of the stoichiometric subspace
    /// (the conservation laws), as coprime integer vectors.
    pub fn conservation_laws(&self) -> Vec<Vec<BigRational>> {
        let gt = linalg::transpose(&linalg::from_ints(&self.entries));
        linalg::nullspace(&gt, self.species.len())
    }
}

pub fn stoichiometric_matrix(n: &Network) -> StoichMatrix {
    let entries = n
        .species()
        .iter()
        .map(|s| {
            n.reactions()
                .iter()
                .map(|r| r.product.coeff(s) as i64 - r.reactant.coeff(s) as i64)
                .collect()
        })
        .collect();
    StoichMatrix {
        species: n.species().to_vec(),
        labels: n.labels(),
        entries,
    }
}

/// A stoichiometric compatibility class `(x0 + S) ∩ R_{≥0}^n`, stored as
/// the point and the conservation laws.
#[derive(Clone, Debug, Serialize)]
pub struct CompatClass {
    #[serde(serialize_with = "crate::poly::serde_rat::vec")]
    pub x0: Vec<BigRational>,
    #[serde(serialize_with = "crate::poly::serde_rat::vec_vec")]
    pub orthogonal_basis: Vec<Vec<BigRational>>,
}

impl CompatClass {
    pub fn new(n: &Network, x0: Vec<BigRational>) -> Result<CompatClass> {
        if x0.len() != n.species().len() {
            return Err(Error::Invalid(format!(
                "point has {} coordinates, network has {} species",
                x0.len(),
                n.species().len()
            )));
        }
        if x0.iter().any(|v| v <= &BigRational::zero()) {
            return Err(Error::Invalid("compatibility class point must be positive".into()));
        }
        Ok(CompatClass {
            x0,
            orthogonal_basis: stoichiometric_matrix(n).conservation_laws(),
        })
    }

    /// Total amounts `v · x0`, one per conservation law.
    pub fn totals(&self) -> Vec<BigRational> {
        self.orthogonal_basis
            .iter()
            .map(|v| v.iter().zip(&self.x0).fold(BigRational::zero(), |a, (p, q)| a + p * q))
            .collect()
    }

    /// Polynomials `v · x − v · x0` cutting out the affine class.
    pub fn equations(&self, vars: &[Var]) -> Vec<Poly> {
        self.orthogonal_basis
            .iter()
            .zip(self.totals())
            .map(|(v, t)| {
                let mut p = Poly::constant(-t);
                for (c, x) in v.iter().zip(vars) {
                    if !c.is_zero() {
                        p.add_term(Monomial::var(x.clone()), c.clone());
                    }
                }
                p
            })
            .collect()
    }
}

/// The steady-state ideal in `Q[κ; x]`, generated by all system polynomials.
pub fn steady_state_ideal(n: &Network) -> Result<Ideal> {
    let sys = system_polynomials(n)?;
    Ideal::new(sys.polys.clone(), sys.ring())
}

/// Like [`steady_state_ideal`], but when the system polynomials sum to zero
/// (monomolecular networks without the zero complex) the last one is left out
/// since it is minus the sum of the others.
pub fn steady_state_ideal_reduced(n: &Network) -> Result<Ideal> {
    let sys = system_polynomials(n)?;
    let mut gens = sys.polys.clone();
    let total = gens.iter().fold(Poly::zero(), |a, p| &a + p);
    if total.is_zero() && !gens.is_empty() {
        gens.pop();
    }
    Ideal::new(gens, sys.ring())
}

/// For a monomolecular network without the zero complex, the matrix `M`
/// with `x' = M x` (entries linear in the rate constants).
pub fn linear_matrix(n: &Network) -> Result<Vec<Vec<Poly>>> {
    if !n.is_monomolecular() || n.has_zero_complex() {
        return Err(Error::NotMonomolecular(
            "linear matrix needs a monomolecular network without the zero complex".into(),
        ));
    }
    let sys = system_polynomials(n)?;
    let size = sys.species.len();
    let mut m = vec![vec![Poly::zero(); size]; size];
    for (i, p) in sys.polys.iter().enumerate() {
        for (mono, c) in p.terms() {
            let j = sys
                .concentrations
                .iter()
                .position(|x| mono.exponent(x) == 1)
                .ok_or_else(|| Error::Internal("non-linear term in monomolecular system".into()))?;
            let coef = mono.div(&Monomial::var(sys.concentrations[j].clone())).unwrap();
            m[i][j].add_term(coef, c.clone());
        }
    }
    Ok(m)
}

/// System polynomials of two networks and of their union, on the union's
/// species ordered as: only in N1, shared, only in N2.
#[derive(Clone, Debug, Serialize)]
pub struct GlueDecomposition {
    pub species: Vec<String>,
    /// 1 when the reaction sets are disjoint, 2 otherwise.
    pub case: u8,
    pub f: Vec<Poly>,
    /// `g` in case 1, `g̃` (from N2 without the shared reactions) in case 2.
    pub g: Vec<Poly>,
    pub h: Vec<Poly>,
    pub holds: bool,
}

pub fn glue_ode_decomposition(n1: &Network, n2: &Network) -> Result<GlueDecomposition> {
    let u = crate::net::union(n1, n2)?;
    let shared: Vec<_> = n2
        .reactions()
        .iter()
        .filter(|r| n1.reactions().iter().any(|q| q.same_edge(r)))
        .cloned()
        .collect();
    let case = if shared.is_empty() { 1 } else { 2 };
    let n2t = Network::new(
        n2.reactions()
            .iter()
            .filter(|r| !shared.iter().any(|q| q.same_edge(r)))
            .cloned()
            .collect(),
    )?;
    let mut species: Vec<String> = n1.species().iter().filter(|s| !n2.has_species(s)).cloned().collect();
    species.extend(n1.species().iter().filter(|s| n2.has_species(s)).cloned());
    species.extend(n2.species().iter().filter(|s| !n1.has_species(s)).cloned());

    let pad = |sys: &MassActionSystem| -> Vec<Poly> {
        species
            .iter()
            .map(|s| sys.poly_of(s).cloned().unwrap_or_else(Poly::zero))
            .collect()
    };
    let f = pad(&system_polynomials(n1)?);
    let g = pad(&system_polynomials(&n2t)?);
    let h = pad(&system_polynomials(&u)?);
    let holds = f.iter().zip(&g).zip(&h).all(|((a, b), c)| &(a + b) == c);
    Ok(GlueDecomposition {
        species,
        case,
        f,
        g,
        h,
        holds,
    })
}

/// Rate-constant variables of a network, as a set.
pub fn rate_vars(n: &Network) -> BTreeSet<Var> {
    n.reactions().iter().map(|r| rate_var(&r.label)).collect()
}

/// Concentration variables of a network, as a set.
pub fn conc_vars(n: &Network) -> BTreeSet<Var> {
    n.species().iter().map(|s| species_var(s)).collect()
}

/// Evaluate the system polynomials at rate constants `kappa` (by label).
pub fn specialise(sys: &MassActionSystem, kappa: &HashMap<String, BigRational>) -> Vec<Poly> {
    let vals: HashMap<Var, BigRational> = kappa.iter().map(|(k, v)| (rate_var(k), v.clone())).collect();
    sys.polys.iter().map(|p| p.eval_partial(&vals)).collect()
}
