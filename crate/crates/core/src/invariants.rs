//! Steady-state invariants of glued networks: projections onto an operand's
//! variables and comparisons of elimination ideals.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::massaction::{conc_vars, rate_vars, species_var, steady_state_ideal};
use crate::net::{union, Network, Reaction};
use crate::poly::{Budget, Ideal, Poly, Var};

/// The ring map sending the rate constants and concentrations of one
/// operand to themselves and every other variable to zero.
#[derive(Clone, Debug, Serialize)]
pub struct Projection {
    /// 1 or 2.
    pub target: u8,
    pub kept_rates: BTreeSet<Var>,
    pub kept_species: BTreeSet<Var>,
}

impl Projection {
    pub fn onto(n: &Network, target: u8) -> Projection {
        Projection {
            target,
            kept_rates: rate_vars(n),
            kept_species: conc_vars(n),
        }
    }

    pub fn kept(&self) -> BTreeSet<Var> {
        self.kept_rates.union(&self.kept_species).cloned().collect()
    }

    pub fn apply(&self, p: &Poly) -> Poly {
        p.project(&self.kept())
    }
}

/// Image ideal, generated by the images of the generators. Its ring is the
/// kept part of the input ring.
pub fn project_ideal(p: &Projection, ideal: &Ideal) -> Ideal {
    let keep = p.kept();
    let ring: Vec<Var> = ideal.ring().iter().filter(|v| keep.contains(v)).cloned().collect();
    let gens = ideal.generators().iter().map(|g| g.project(&keep)).collect();
    Ideal::new(gens, ring).expect("projected generators live in the kept ring")
}

/// `I_N ∩ Q[κ; x without the eliminated species]`. Species not in the
/// network are ignored.
pub fn elimination_ideal(n: &Network, eliminate: &[String], budget: Budget) -> Result<Ideal> {
    let drop: BTreeSet<Var> = eliminate
        .iter()
        .filter(|s| n.has_species(s))
        .map(|s| species_var(s))
        .collect();
    steady_state_ideal(n)?.eliminate(&drop, budget)
}

/// Projected elimination ideal of the glued network against the operand's
/// own elimination ideal.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub operand: u8,
    /// Generators of the projection of the glued network's elimination ideal.
    pub projected: Vec<String>,
    /// Generators of the operand's elimination ideal.
    pub operand_ideal: Vec<String>,
    pub containment_holds: bool,
    pub equality_holds: bool,
    /// An element of the operand ideal outside the projection, present
    /// exactly when the containment is strict.
    pub witness: Option<String>,
    #[serde(skip)]
    pub projected_ideal: Ideal,
    #[serde(skip)]
    pub operand_elim: Ideal,
    #[serde(skip)]
    pub witness_poly: Option<Poly>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GlueComparison {
    pub eliminated: Vec<String>,
    /// Generators of the glued network's elimination ideal.
    pub joined: Vec<String>,
    pub reports: Vec<ComparisonReport>,
}

fn check_species(n: &Network, eliminate: &[String]) -> Result<()> {
    for s in eliminate {
        if !n.has_species(s) {
            return Err(Error::Invalid(format!("{s} is not a species of the glued network")));
        }
    }
    Ok(())
}

fn compare_operand(operand: u8, ni: &Network, joined: &Ideal, eliminate: &[String], budget: Budget) -> Result<ComparisonReport> {
    let proj = project_ideal(&Projection::onto(ni, operand), joined);
    let own = elimination_ideal(ni, eliminate, budget)?;
    let containment_holds = proj.is_subset_of(&own, budget)?;
    let equality_holds = containment_holds && own.is_subset_of(&proj, budget)?;
    let mut witness_poly = None;
    if containment_holds && !equality_holds {
        let mut candidates: Vec<&Poly> = own.generators().iter().collect();
        candidates.sort_by_key(|p| (p.total_degree(), p.num_terms()));
        for c in candidates {
            if !proj.contains(c, budget)? {
                witness_poly = Some(c.clone());
                break;
            }
        }
        let w = witness_poly
            .as_ref()
            .ok_or_else(|| Error::Internal("strict containment without a witness generator".into()))?;
        if !own.contains(w, budget)? {
            return Err(Error::Internal("witness is not in the operand ideal".into()));
        }
    }
    Ok(ComparisonReport {
        operand,
        projected: proj.render(),
        operand_ideal: own.render(),
        containment_holds,
        equality_holds,
        witness: witness_poly.as_ref().map(|w| w.render()),
        projected_ideal: proj,
        operand_elim: own,
        witness_poly,
    })
}

/// For both operands, compare the projected elimination ideal of the glued
/// network with the operand's elimination ideal.
pub fn compare_projections(n1: &Network, n2: &Network, eliminate: &[String], budget: Budget) -> Result<GlueComparison> {
    let n = union(n1, n2)?;
    check_species(&n, eliminate)?;
    let joined = elimination_ideal(&n, eliminate, budget)?;
    let reports = vec![
        compare_operand(1, n1, &joined, eliminate, budget)?,
        compare_operand(2, n2, &joined, eliminate, budget)?,
    ];
    Ok(GlueComparison {
        eliminated: eliminate.to_vec(),
        joined: joined.render(),
        reports,
    })
}

/// Before elimination: whether projecting the glued steady-state ideal onto
/// each operand gives exactly that operand's steady-state ideal.
pub fn check_projection_lemma(n1: &Network, n2: &Network, budget: Budget) -> Result<[bool; 2]> {
    let joined = steady_state_ideal(&union(n1, n2)?)?;
    let mut out = [false; 2];
    for (k, ni) in [n1, n2].into_iter().enumerate() {
        let proj = project_ideal(&Projection::onto(ni, k as u8 + 1), &joined);
        out[k] = proj.equals(&steady_state_ideal(ni)?, budget)?;
    }
    Ok(out)
}

/// Outcome of checking a glue theorem on one instance.
#[derive(Clone, Debug, Serialize)]
pub struct TheoremCheck {
    pub theorem: String,
    pub eliminated: String,
    pub holds: bool,
    /// Per-operand comparisons (projection theorems).
    pub comparisons: Vec<ComparisonReport>,
    /// Glued elimination ideal and the sum of the operands' elimination
    /// ideals (sum decomposition).
    pub joined: Vec<String>,
    pub sum: Vec<String>,
}

fn require_mono(n: &Network, which: &str) -> Result<()> {
    if !n.is_monomolecular() {
        return Err(Error::NotMonomolecular(format!("{which} has a complex with two or more molecules")));
    }
    if n.has_zero_complex() {
        return Err(Error::NotMonomolecular(format!(
            "{which} involves the zero complex, which is excluded here"
        )));
    }
    Ok(())
}

fn shared_species(n1: &Network, n2: &Network) -> Vec<String> {
    n1.species().iter().filter(|s| n2.has_species(s)).cloned().collect()
}

fn single_glue_species(n1: &Network, n2: &Network, glue: &str) -> Result<()> {
    require_mono(n1, "N1")?;
    require_mono(n2, "N2")?;
    let shared = shared_species(n1, n2);
    if shared != [glue.to_string()] {
        return Err(Error::HypothesisNotMet(format!(
            "the operands must share exactly the species {glue}, they share {{{}}}",
            shared.join(", ")
        )));
    }
    Ok(())
}

fn projection_check(theorem: &str, n1: &Network, n2: &Network, eliminate: &str, budget: Budget) -> Result<TheoremCheck> {
    let cmp = compare_projections(n1, n2, &[eliminate.to_string()], budget)?;
    Ok(TheoremCheck {
        theorem: theorem.to_string(),
        eliminated: eliminate.to_string(),
        holds: cmp.reports.iter().all(|r| r.equality_holds),
        comparisons: cmp.reports,
        joined: cmp.joined,
        sum: Vec::new(),
    })
}

/// Monomolecular networks (no zero complex) glued at one species: the
/// projection of the glued elimination ideal equals each operand's.
pub fn check_single_species_equality(n1: &Network, n2: &Network, glue: &str, eliminate: &str, budget: Budget) -> Result<TheoremCheck> {
    single_glue_species(n1, n2, glue)?;
    projection_check("species glue: projection equality", n1, n2, eliminate, budget)
}

/// Whether all flow through `glue` is one-way between the operands: every
/// reaction into it belongs to one operand and every reaction out of it to
/// the other.
pub fn is_unidirectional(n1: &Network, n2: &Network, glue: &str) -> bool {
    let into = |n: &Network| n.reactions().iter().any(|r| r.product.single_species() == Some(glue));
    let out = |n: &Network| n.reactions().iter().any(|r| r.reactant.single_species() == Some(glue));
    (!into(n2) && !out(n1)) || (!into(n1) && !out(n2))
}

/// Monomolecular networks glued at one species with one-way flow through
/// it: the glued elimination ideal is the sum of the operands' elimination
/// ideals.
pub fn check_glue_sum_decomposition(n1: &Network, n2: &Network, glue: &str, eliminate: &str, budget: Budget) -> Result<TheoremCheck> {
    single_glue_species(n1, n2, glue)?;
    if !is_unidirectional(n1, n2, glue) {
        return Err(Error::HypothesisNotMet(format!(
            "flow through {glue} is not unidirectional between the operands"
        )));
    }
    let n = union(n1, n2)?;
    check_species(&n, &[eliminate.to_string()])?;
    let elim = [eliminate.to_string()];
    let joined = elimination_ideal(&n, &elim, budget)?;
    let sum = elimination_ideal(n1, &elim, budget)?.sum(&elimination_ideal(n2, &elim, budget)?);
    Ok(TheoremCheck {
        theorem: "species glue: sum decomposition".into(),
        eliminated: eliminate.to_string(),
        holds: joined.equals(&sum, budget)?,
        comparisons: Vec::new(),
        joined: joined.render(),
        sum: sum.render(),
    })
}

/// Monomolecular networks glued over `Xj1 -> Xj2` (optionally with its
/// reverse), where `Xj1` is in no other reaction of N2 and `Xj2` in no other
/// reaction of N1: projection equality for both operands.
pub fn check_shared_reaction_equality(n1: &Network, n2: &Network, shared: &Reaction, eliminate: &str, budget: Budget) -> Result<TheoremCheck> {
    require_mono(n1, "N1")?;
    require_mono(n2, "N2")?;
    let (j1, j2) = match (shared.reactant.single_species(), shared.product.single_species()) {
        (Some(a), Some(b)) => (a.to_string(), b.to_string()),
        _ => return Err(Error::HypothesisNotMet("the shared reaction must join two species".into())),
    };
    let in_both = |r: &Reaction| n1.reactions().contains(r) && n2.reactions().contains(r);
    if !in_both(shared) {
        return Err(Error::HypothesisNotMet(format!("{} is not a reaction of both operands", shared.render())));
    }
    let glued: Vec<&Reaction> = n1.reactions().iter().filter(|r| n2.reactions().iter().any(|q| q.same_edge(r))).collect();
    let is_pair_edge = |r: &Reaction| {
        let (a, b) = (r.reactant.single_species(), r.product.single_species());
        (a == Some(j1.as_str()) && b == Some(j2.as_str())) || (a == Some(j2.as_str()) && b == Some(j1.as_str()))
    };
    if glued.iter().any(|r| !is_pair_edge(r)) {
        return Err(Error::HypothesisNotMet(format!(
            "the operands share reactions other than those between {j1} and {j2}"
        )));
    }
    let mut endpoints = shared_species(n1, n2);
    endpoints.sort();
    let mut expect = vec![j1.clone(), j2.clone()];
    expect.sort();
    if endpoints != expect {
        return Err(Error::HypothesisNotMet(format!(
            "the operands must share exactly the species {j1} and {j2}"
        )));
    }
    let touches = |r: &Reaction, s: &str| r.reactant.single_species() == Some(s) || r.product.single_species() == Some(s);
    if n2.reactions().iter().any(|r| !is_pair_edge(r) && touches(r, &j1)) {
        return Err(Error::HypothesisNotMet(format!("{j1} is in another reaction of N2")));
    }
    if n1.reactions().iter().any(|r| !is_pair_edge(r) && touches(r, &j2)) {
        return Err(Error::HypothesisNotMet(format!("{j2} is in another reaction of N1")));
    }
    projection_check("reaction glue: projection equality", n1, n2, eliminate, budget)
}
