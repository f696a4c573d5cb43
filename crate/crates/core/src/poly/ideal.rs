use std::collections::BTreeSet;

use super::groebner::{Budget, GroebnerBasis, MonomialOrder};
use super::{Monomial, Poly, Var};
use crate::error::{Error, Result};

/// A finitely generated ideal in the polynomial ring on `ring`.
///
/// The empty generator list denotes the zero ideal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ideal {
    generators: Vec<Poly>,
    ring: Vec<Var>,
}

/// Number of solutions of a zero-dimensional system over the complex numbers.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub enum SolutionCount {
    Empty,
    Infinite,
    Finite(usize),
}

impl Ideal {
    /// Ideal with an explicit ring. Zero generators are dropped.
    pub fn new(generators: Vec<Poly>, ring: Vec<Var>) -> Result<Ideal> {
        let known: BTreeSet<&Var> = ring.iter().collect();
        if known.len() != ring.len() {
            return Err(Error::Invalid("ring lists a variable twice".into()));
        }
        for g in &generators {
            for v in g.vars() {
                if !known.contains(&v) {
                    return Err(Error::Invalid(format!("generator uses {v}, which is not in the ring")));
                }
            }
        }
        Ok(Ideal {
            generators: generators.into_iter().filter(|g| !g.is_zero()).collect(),
            ring,
        })
    }

    /// Ideal whose ring is the set of variables appearing in the generators,
    /// in natural order.
    pub fn from_generators(generators: Vec<Poly>) -> Ideal {
        let ring: BTreeSet<Var> = generators.iter().flat_map(|g| g.vars()).collect();
        Ideal::new(generators, ring.into_iter().collect()).expect("ring covers generators")
    }

    pub fn zero(ring: Vec<Var>) -> Ideal {
        Ideal {
            generators: Vec::new(),
            ring,
        }
    }

    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    pub fn ring(&self) -> &[Var] {
        &self.ring
    }

    pub fn is_zero_ideal(&self) -> bool {
        self.generators.is_empty()
    }

    /// Same generators in a larger ring; new variables go to the end.
    pub fn with_ring_extended(&self, extra: &[Var]) -> Ideal {
        let mut ring = self.ring.clone();
        for v in extra {
            if !ring.contains(v) {
                ring.push(v.clone());
            }
        }
        Ideal {
            generators: self.generators.clone(),
            ring,
        }
    }

    pub fn groebner(&self, order: &MonomialOrder, budget: Budget) -> Result<GroebnerBasis> {
        GroebnerBasis::compute(&self.generators, &self.ring, order, budget)
    }

    /// `I ∩ Q[ring \ drop]`, computed with a block elimination order.
    pub fn eliminate(&self, drop: &BTreeSet<Var>, budget: Budget) -> Result<Ideal> {
        let kept: Vec<Var> = self.ring.iter().filter(|v| !drop.contains(v)).cloned().collect();
        if self.generators.is_empty() {
            return Ok(Ideal::zero(kept));
        }
        let gb = self.groebner(&MonomialOrder::BlockElimination(drop.clone()), budget)?;
        let gens: Vec<Poly> = gb
            .polys()
            .iter()
            .filter(|p| p.vars().iter().all(|v| !drop.contains(v)))
            .map(|p| p.primitive())
            .collect();
        Ideal::new(gens, kept)
    }

    /// Ideal membership by normal form against a GrevLex basis.
    pub fn contains(&self, p: &Poly, budget: Budget) -> Result<bool> {
        if p.is_zero() {
            return Ok(true);
        }
        if self.generators.is_empty() {
            return Ok(false);
        }
        let gb = self.groebner(&MonomialOrder::GrevLex, budget)?;
        Ok(gb.contains(p))
    }

    /// `self ⊆ other`, by membership of every generator.
    pub fn is_subset_of(&self, other: &Ideal, budget: Budget) -> Result<bool> {
        if self.generators.is_empty() {
            return Ok(true);
        }
        if other.generators.is_empty() {
            return Ok(false);
        }
        let gb = other.groebner(&MonomialOrder::GrevLex, budget)?;
        Ok(self.generators.iter().all(|g| gb.contains(g)))
    }

    /// Equality by mutual containment of generators.
    pub fn equals(&self, other: &Ideal, budget: Budget) -> Result<bool> {
        Ok(self.is_subset_of(other, budget)? && other.is_subset_of(self, budget)?)
    }

    /// Sum of ideals in the union ring (generator concatenation).
    pub fn sum(&self, other: &Ideal) -> Ideal {
        let mut ring = self.ring.clone();
        for v in &other.ring {
            if !ring.contains(v) {
                ring.push(v.clone());
            }
        }
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        Ideal {
            generators: gens,
            ring,
        }
    }

    /// Count solutions of the system over an algebraically closed field.
    pub fn zero_dim_solution_count(&self, budget: Budget) -> Result<SolutionCount> {
        if self.generators.is_empty() {
            return Ok(if self.ring.is_empty() {
                SolutionCount::Finite(1)
            } else {
                SolutionCount::Infinite
            });
        }
        let gb = self.groebner(&MonomialOrder::GrevLex, budget)?;
        if gb.is_unit() {
            return Ok(SolutionCount::Empty);
        }
        let lms = gb.leading_monomials();
        let ring = gb.ring().to_vec();
        let mut bounds = Vec::with_capacity(ring.len());
        for v in &ring {
            let pure = lms
                .iter()
                .filter(|m| m.factors().len() == 1 && &m.factors()[0].0 == v)
                .map(|m| m.factors()[0].1)
                .min();
            match pure {
                Some(e) => bounds.push(e),
                None => return Ok(SolutionCount::Infinite),
            }
        }
        // Enumerate standard monomials inside the box given by pure powers.
        let mut count = 0usize;
        let mut exps = vec![0u32; ring.len()];
        loop {
            let m = Monomial::from_pairs(ring.iter().cloned().zip(exps.iter().cloned()));
            if !lms.iter().any(|l| m.div(l).is_some()) {
                count += 1;
            }
            let mut k = 0;
            loop {
                if k == ring.len() {
                    return Ok(SolutionCount::Finite(count));
                }
                exps[k] += 1;
                if exps[k] < bounds[k] {
                    break;
                }
                exps[k] = 0;
                k += 1;
            }
        }
    }

    /// Render generators in canonical text form (for JSON reports).
    pub fn render(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.render()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn p(s: &str) -> Poly {
        parse_poly(s).unwrap()
    }

    fn ideal(gens: &[&str]) -> Ideal {
        Ideal::from_generators(gens.iter().map(|s| p(s)).collect())
    }

    fn set(names: &[&str]) -> BTreeSet<Var> {
        names.iter().map(|n| Var::conc(n)).collect()
    }

    #[test]
    fn eliminations_from_glued_examples() {
        let b = Budget::default();
        let i = ideal(&["-k1*x1 + k2*x2"]);
        assert!(i.eliminate(&set(&["x1"]), b).unwrap().is_zero_ideal());

        let j = ideal(&["k1*x3 + k3*x2", "k2*x4"]);
        let e3 = j.eliminate(&set(&["x3"]), b).unwrap();
        assert!(e3.equals(&ideal(&["k2*x4"]), b).unwrap());
        let e4 = j.eliminate(&set(&["x4"]), b).unwrap();
        assert!(e4.equals(&ideal(&["k1*x3 + k3*x2"]), b).unwrap());
    }

    #[test]
    fn membership_and_equality() {
        let b = Budget::default();
        assert!(ideal(&["k2*x4", "k1*x3"]).contains(&p("k2*x4"), b).unwrap());
        assert!(!ideal(&["k2*x4"]).equals(&ideal(&["k2*x4", "k3*x2"]), b).unwrap());
        let f = ideal(&["x^2 - y"]);
        let z = Ideal::zero(vec![]);
        assert!(f.sum(&z).equals(&f, b).unwrap());
    }

    #[test]
    fn solution_counts() {
        let b = Budget::default();
        assert_eq!(ideal(&["a - 2", "b - 3"]).zero_dim_solution_count(b).unwrap(), SolutionCount::Finite(1));
        assert_eq!(ideal(&["a*b - 6"]).zero_dim_solution_count(b).unwrap(), SolutionCount::Infinite);
        assert_eq!(ideal(&["a^2 - 1", "b - a"]).zero_dim_solution_count(b).unwrap(), SolutionCount::Finite(2));
        assert_eq!(ideal(&["a", "a - 1"]).zero_dim_solution_count(b).unwrap(), SolutionCount::Empty);
        // Multiplicity counts: (a^2) has a double root.
        assert_eq!(ideal(&["a^2"]).zero_dim_solution_count(b).unwrap(), SolutionCount::Finite(2));
    }
}
