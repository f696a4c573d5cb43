use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{coefficient_map, CoefficientMap};
use crate::error::{Error, Result};
use crate::linalg;
use crate::net::Model;
use crate::poly::{Budget, Ideal, Poly, RatFunc, SolutionCount, Var, VarKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VerdictKind {
    GloballyIdentifiable,
    LocallyIdentifiable,
    Unidentifiable,
    Inconclusive,
}

impl VerdictKind {
    /// At least locally identifiable.
    pub fn is_identifiable(self) -> bool {
        matches!(self, VerdictKind::GloballyIdentifiable | VerdictKind::LocallyIdentifiable)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentifiabilityVerdict {
    pub kind: VerdictKind,
    pub params: Vec<String>,
    pub coefficients: Vec<String>,
    /// Jacobian rank at each sampled point.
    pub ranks: Vec<usize>,
    pub rank: usize,
    /// Complex solutions of the fiber system at a random point, when
    /// computed: a number or "infinite".
    pub fiber: Option<String>,
    pub seed: u64,
    pub note: Option<String>,
}

const RESAMPLES: usize = 5;

fn random_point(rng: &mut ChaCha8Rng, params: &[Var]) -> HashMap<Var, BigRational> {
    params
        .iter()
        .map(|v| (v.clone(), BigRational::from_integer(BigInt::from(rng.random_range(1..=10_000i64)))))
        .collect()
}

/// Exact Jacobian rank of the coefficient map at up to five random
/// integer points in `1..=10^4`, stopping at full rank.
pub fn local_identifiability(map: &CoefficientMap, seed: u64) -> IdentifiabilityVerdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    local_with_rng(map, seed, &mut rng)
}

fn local_with_rng(map: &CoefficientMap, seed: u64, rng: &mut ChaCha8Rng) -> IdentifiabilityVerdict {
    let r = map.params.len();
    let mut verdict = IdentifiabilityVerdict {
        kind: VerdictKind::GloballyIdentifiable,
        params: map.params.iter().map(|v| v.name().to_string()).collect(),
        coefficients: map.render(),
        ranks: Vec::new(),
        rank: 0,
        fiber: None,
        seed,
        note: None,
    };
    if r == 0 {
        verdict.note = Some("no parameters".into());
        return verdict;
    }
    let jac: Vec<Vec<RatFunc>> = map
        .coords
        .iter()
        .map(|c| map.params.iter().map(|v| c.derivative(v)).collect())
        .collect();
    for _ in 0..RESAMPLES {
        let pt = random_point(rng, &map.params);
        let vals: Option<linalg::Matrix> = jac
            .iter()
            .map(|row| row.iter().map(|d| d.eval(&pt)).collect::<Option<Vec<_>>>())
            .collect();
        let rank = match vals {
            Some(m) if !m.is_empty() => linalg::rank(&m),
            Some(_) => 0,
            None => continue,
        };
        verdict.ranks.push(rank);
        verdict.rank = verdict.rank.max(rank);
        if rank == r {
            break;
        }
    }
    verdict.kind = if verdict.rank == r {
        VerdictKind::LocallyIdentifiable
    } else {
        VerdictKind::Unidentifiable
    };
    verdict
}

/// Local test, then the number of complex solutions `a` of
/// `c(a) = c(a*)` at a random `a*`; a single solution means globally
/// identifiable.
pub fn global_identifiability(map: &CoefficientMap, seed: u64, budget: Budget) -> IdentifiabilityVerdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut verdict = local_with_rng(map, seed, &mut rng);
    if verdict.kind != VerdictKind::LocallyIdentifiable {
        return verdict;
    }
    let star = random_point(&mut rng, &map.params);
    match fiber_count(map, &star, budget) {
        Ok(SolutionCount::Finite(1)) => {
            verdict.fiber = Some("1".into());
            verdict.kind = VerdictKind::GloballyIdentifiable;
        }
        Ok(SolutionCount::Finite(k)) => {
            verdict.fiber = Some(k.to_string());
        }
        Ok(SolutionCount::Infinite) => {
            verdict.fiber = Some("infinite".into());
            verdict.kind = VerdictKind::Inconclusive;
            verdict.note = Some("positive-dimensional fiber despite full Jacobian rank".into());
        }
        Ok(SolutionCount::Empty) => {
            verdict.kind = VerdictKind::Inconclusive;
            verdict.note = Some("empty fiber; the sample point should lie on it".into());
        }
        Err(Error::BudgetExceeded(msg)) => {
            verdict.kind = VerdictKind::Inconclusive;
            verdict.note = Some(format!("fiber computation stopped: {msg}"));
        }
        Err(e) => {
            verdict.kind = VerdictKind::Inconclusive;
            verdict.note = Some(e.to_string());
        }
    }
    verdict
}

fn fiber_count(map: &CoefficientMap, star: &HashMap<Var, BigRational>, budget: Budget) -> Result<SolutionCount> {
    let mut gens = Vec::new();
    let mut dens = Poly::one();
    for c in &map.coords {
        let ns = c.numer().eval(star).ok_or_else(|| Error::Internal("incomplete sample point".into()))?;
        let ds = c.denom().eval(star).ok_or_else(|| Error::Internal("incomplete sample point".into()))?;
        let g = &c.numer().scale(&ds) - &c.denom().scale(&ns);
        gens.push(g);
        if !c.denom().is_constant() {
            dens = &dens * c.denom();
        }
    }
    let mut ring = map.params.clone();
    if !dens.is_constant() {
        let w = Var::new(VarKind::Auxiliary, "w_aux");
        gens.push(&(&Poly::var(&w) * &dens) - &Poly::one());
        ring.push(w);
    }
    Ideal::new(gens, ring)?.zero_dim_solution_count(budget)
}

/// Coefficient map of the model, then [`global_identifiability`].
pub fn identifiability(m: &Model, seed: u64, budget: Budget) -> Result<IdentifiabilityVerdict> {
    let map = coefficient_map(m)?;
    Ok(global_identifiability(&map, seed, budget))
}
