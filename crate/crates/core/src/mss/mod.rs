//! Positive steady states: exact root counting for one species, multi-start
//! Newton for up to three, nondegeneracy and stability flags, and replayable
//! multistationarity witnesses.

mod newton;
pub mod univariate;

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::massaction::{species_var, specialise, stoichiometric_matrix, system_polynomials};
use crate::net::{parse_network, Network};
use crate::poly::{rat_string, Poly, Var};
use newton::System;
use univariate::{count_roots_between, isolate_positive_roots, UPoly};

pub const RESIDUAL_GATE: f64 = 1e-10;
pub const DEDUP_DISTANCE: f64 = 1e-8;
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Rate constants by label.
pub type Kappa = HashMap<String, BigRational>;

fn root_width() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << 140)
}

/// A positive root of a univariate steady-state polynomial.
#[derive(Clone, Debug, Serialize)]
pub struct PositiveRoot {
    #[serde(serialize_with = "crate::poly::serde_rat::one")]
    pub lo: BigRational,
    #[serde(serialize_with = "crate::poly::serde_rat::one")]
    pub hi: BigRational,
    pub approx: f64,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct PositiveRoots {
    /// The polynomial vanishes identically: every positive value is a
    /// (degenerate) steady state.
    pub continuum: bool,
    pub distinct: usize,
    pub with_multiplicity: usize,
    pub roots: Vec<PositiveRoot>,
}

/// Positive roots of `f`, exactly: Sturm counting on each square-free
/// factor.
pub fn positive_roots(f: &UPoly) -> PositiveRoots {
    if f.is_zero() {
        return PositiveRoots {
            continuum: true,
            distinct: 0,
            with_multiplicity: 0,
            roots: Vec::new(),
        };
    }
    let (g, _) = f.strip_zero_roots();
    let mut roots = Vec::new();
    for (factor, mult) in g.squarefree_factors() {
        for mut iv in isolate_positive_roots(&factor, &root_width()) {
            let s = univariate::simplest_rational(&iv.lo, &iv.hi);
            if factor.eval(&s).is_zero() {
                iv.lo = s.clone();
                iv.hi = s;
            }
            roots.push(PositiveRoot {
                approx: iv.midpoint().to_f64().unwrap_or(f64::NAN),
                lo: iv.lo,
                hi: iv.hi,
                multiplicity: mult,
            });
        }
    }
    roots.sort_by(|a, b| a.lo.cmp(&b.lo));
    PositiveRoots {
        continuum: false,
        distinct: roots.len(),
        with_multiplicity: roots.iter().map(|r| r.multiplicity as usize).sum(),
        roots,
    }
}

fn single_species_poly(n: &Network, kappa: &Kappa) -> Result<UPoly> {
    if n.species().len() != 1 {
        return Err(Error::Precondition(format!(
            "exact counting needs a single species, the network has {}",
            n.species().len()
        )));
    }
    let sys = system_polynomials(n)?;
    check_kappa(&sys.rate_constants, kappa)?;
    let f = specialise(&sys, kappa).remove(0);
    UPoly::from_poly(&f, &sys.concentrations[0])
}

fn check_kappa(rates: &[Var], kappa: &Kappa) -> Result<()> {
    for k in rates {
        match kappa.get(k.name()) {
            Some(v) if v.is_positive() => {}
            Some(_) => return Err(Error::Invalid(format!("rate constant {k} must be positive"))),
            None => return Err(Error::Invalid(format!("no value for rate constant {k}"))),
        }
    }
    Ok(())
}

/// Positive steady states of a one-species network at the given rate
/// constants, counted exactly.
pub fn count_positive_roots_univariate(n: &Network, kappa: &Kappa) -> Result<PositiveRoots> {
    Ok(positive_roots(&single_species_poly(n, kappa)?))
}

/// Flags of one steady state.
#[derive(Clone, Debug, Serialize)]
pub struct StateClass {
    pub nondegenerate: bool,
    pub exp_stable: bool,
    /// Smallest singular value of the Jacobian restricted to the
    /// stoichiometric subspace.
    pub singular_gap: f64,
    /// Eigenvalues of the Jacobian as `[re, im]`, by increasing modulus.
    pub eigenvalues: Vec<[f64; 2]>,
}

fn eval_exact(polys: &[Poly], vars: &[Var], x: &[BigRational]) -> Vec<BigRational> {
    let vals: HashMap<Var, BigRational> = vars.iter().cloned().zip(x.iter().cloned()).collect();
    polys
        .iter()
        .map(|p| p.eval(&vals).expect("point covers every variable"))
        .collect()
}

fn max_abs(v: &[BigRational]) -> f64 {
    v.iter().map(|r| r.abs().to_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
}

/// Orthonormal basis of the stoichiometric subspace, as columns.
fn subspace_basis(n: &Network) -> DMatrix<f64> {
    let st = stoichiometric_matrix(n);
    let rows = st.species.len();
    let cols = st.labels.len();
    if cols == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let g = DMatrix::from_fn(rows, cols, |i, j| st.entries[i][j] as f64);
    let svd = g.svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > 1e-9 * smax.max(1.0))
        .collect();
    DMatrix::from_fn(rows, keep.len(), |i, k| u[(i, keep[k])])
}

/// Nondegeneracy and exponential stability of a steady state, from the
/// Jacobian restricted to the stoichiometric subspace (singular values) and
/// the spectrum of the full Jacobian.
pub fn classify_state(n: &Network, kappa: &Kappa, x: &[BigRational]) -> Result<StateClass> {
    let sys = system_polynomials(n)?;
    check_kappa(&sys.rate_constants, kappa)?;
    if x.len() != sys.concentrations.len() {
        return Err(Error::Invalid("point has the wrong number of coordinates".into()));
    }
    let f = specialise(&sys, kappa);
    let res = max_abs(&eval_exact(&f, &sys.concentrations, x));
    if res > RESIDUAL_GATE {
        return Err(Error::Precondition(format!("not a steady state: residual {res:e}")));
    }
    let xf: Vec<f64> = x.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
    let size = xf.len();
    let vals: HashMap<Var, f64> = sys.concentrations.iter().cloned().zip(xf.iter().cloned()).collect();
    let j = DMatrix::from_fn(size, size, |a, b| {
        f[a].derivative(&sys.concentrations[b]).eval_f64(&vals).unwrap_or(f64::NAN)
    });
    let scale = j.amax().max(1.0);
    let u = subspace_basis(n);
    let sigma = u.ncols();
    let restricted = u.transpose() * &j * &u;
    let singular_gap = if sigma == 0 {
        f64::INFINITY
    } else {
        restricted.singular_values().min()
    };
    // Im(J) lies in S, so J|_S is onto S iff rank(J Γ) = rank(Γ); exact at
    // rational points.
    let st = stoichiometric_matrix(n);
    let exact_vals: HashMap<Var, BigRational> = sys.concentrations.iter().cloned().zip(x.iter().cloned()).collect();
    let jq: linalg::Matrix = f
        .iter()
        .map(|p| {
            sys.concentrations
                .iter()
                .map(|v| p.derivative(v).eval(&exact_vals).expect("point covers every variable"))
                .collect()
        })
        .collect();
    let gamma = linalg::from_ints(&st.entries);
    let nondegenerate = sigma == 0 || linalg::rank(&linalg::mat_mul(&jq, &gamma)) == linalg::rank(&gamma);
    let mut eig: Vec<[f64; 2]> = j.complex_eigenvalues().iter().map(|c| [c.re, c.im]).collect();
    eig.sort_by(|a, b| a[0].hypot(a[1]).total_cmp(&b[0].hypot(b[1])));
    let zeros_ok = eig[..size - sigma].iter().all(|e| e[0].hypot(e[1]) <= RANK_THRESHOLD * scale);
    let rest_ok = eig[size - sigma..].iter().all(|e| e[0] < 0.0);
    Ok(StateClass {
        nondegenerate,
        exp_stable: nondegenerate && zeros_ok && rest_ok,
        singular_gap,
        eigenvalues: eig,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Evidence {
    /// Roots isolated exactly by Sturm sequences.
    Exact,
    /// Newton solutions polished over Q and checked against the residual
    /// gate.
    Numeric,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessState {
    /// Rational coordinates.
    pub x: Vec<String>,
    pub approx: Vec<f64>,
    /// Isolating interval (one species, exact evidence).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<u32>,
    pub residual: f64,
    pub nondegenerate: bool,
    pub exp_stable: bool,
}

/// Two or more positive steady states in one compatibility class, with
/// everything needed to replay the check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SteadyStateWitness {
    pub network: String,
    pub species: Vec<String>,
    pub kappa: BTreeMap<String, String>,
    pub class_anchor: Vec<String>,
    pub evidence: Evidence,
    pub states: Vec<WitnessState>,
}

impl SteadyStateWitness {
    pub fn count(&self) -> usize {
        self.states.len()
    }

    pub fn nondegenerate_count(&self) -> usize {
        self.states.iter().filter(|s| s.nondegenerate).count()
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind")]
pub enum MssVerdict {
    MultistationaryWitness {
        witness: SteadyStateWitness,
        /// Rate-constant samples drawn before this witness was found.
        samples_used: usize,
    },
    /// Not a proof of monostationarity.
    NoWitnessFound {
        samples: usize,
        starts: usize,
        /// Samples where the steady-state polynomial vanished identically.
        continuum_samples: usize,
    },
    ProvedMono {
        reason: String,
        linear_check: String,
    },
}

/// Search effort for [`search_multistationarity`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MssBudget {
    /// Rate-constant samples.
    pub samples: usize,
    /// Newton starts per sample (several species only).
    pub starts: usize,
    /// Stop at the first witness with at least this many states.
    pub target_count: usize,
}

impl Default for MssBudget {
    fn default() -> Self {
        MssBudget {
            samples: 5000,
            starts: 200,
            target_count: 2,
        }
    }
}

/// A positive rational, log-uniform over `[10^lo, 10^hi]` and rounded to
/// three significant digits.
pub fn sample_log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> BigRational {
    let u: f64 = rng.random_range(lo..hi);
    let e = u.floor() as i32;
    let mant = (10f64.powf(u - e as f64) * 100.0).round().clamp(100.0, 999.0) as i64;
    let p = e - 2;
    let ten = BigInt::from(10);
    if p >= 0 {
        BigRational::from_integer(BigInt::from(mant) * num_traits::pow(ten, p as usize))
    } else {
        BigRational::new(BigInt::from(mant), num_traits::pow(ten, (-p) as usize))
    }
}

/// Log-uniform rate constants in `[1e-3, 1e3]`, one per reaction.
pub fn sample_kappa(rng: &mut ChaCha8Rng, n: &Network) -> Kappa {
    n.reactions()
        .iter()
        .map(|r| (r.label.clone(), sample_log_uniform(rng, -3.0, 3.0)))
        .collect()
}

fn kappa_strings(kappa: &Kappa) -> BTreeMap<String, String> {
    kappa.iter().map(|(k, v)| (k.clone(), rat_string(v))).collect()
}

/// Number of distinct positive roots, or `None` for the zero polynomial.
fn distinct_positive_roots(f: &UPoly) -> Option<usize> {
    if f.is_zero() {
        return None;
    }
    let (g, _) = f.strip_zero_roots();
    if g.degree().unwrap_or(0) == 0 {
        return Some(0);
    }
    let sqfree = g.divrem(&g.gcd(&g.derivative())).0;
    Some(univariate::count_roots_above(&sqfree.sturm_sequence(), &BigRational::zero()))
}

/// Exact witness states for one species.
fn univariate_states(f: &UPoly) -> Option<Vec<WitnessState>> {
    let pr = positive_roots(f);
    if pr.continuum {
        return None;
    }
    let (g, _) = f.strip_zero_roots();
    let sqfree = g.divrem(&g.gcd(&g.derivative())).0;
    let seq = sqfree.sturm_sequence();
    let states = pr
        .roots
        .iter()
        .map(|r| {
            let x = if r.lo == r.hi { r.lo.clone() } else { (&r.lo + &r.hi) / BigRational::from_integer(2.into()) };
            let residual = f.eval(&x).abs().to_f64().unwrap_or(f64::INFINITY);
            let simple = r.multiplicity == 1;
            // A simple root alone in [lo, hi] has f' of the sign of f(hi).
            let stable = if !simple {
                false
            } else if r.lo == r.hi {
                f.derivative().eval(&r.lo).is_negative()
            } else {
                let lo_ok = !sqfree.eval(&r.lo).is_zero() && count_roots_between(&seq, &r.lo, &r.hi) == 1;
                if lo_ok {
                    f.eval(&r.hi).is_negative()
                } else {
                    f.derivative().eval(&x).is_negative()
                }
            };
            WitnessState {
                x: vec![rat_string(&x)],
                approx: vec![r.approx],
                interval: Some([rat_string(&r.lo), rat_string(&r.hi)]),
                multiplicity: Some(r.multiplicity),
                residual,
                nondegenerate: simple,
                exp_stable: stable,
            }
        })
        .collect();
    Some(states)
}

/// The steady-state system with one equation per conservation law swapped
/// in: each row of the reduced conservation matrix replaces the equation of
/// its pivot species.
fn class_system(n: &Network, f: &[Poly], vars: &[Var], x0: &[BigRational]) -> Vec<Poly> {
    let mut w = stoichiometric_matrix(n).conservation_laws();
    let pivots = linalg::rref(&mut w);
    let mut out = f.to_vec();
    for (row, &p) in w.iter().zip(&pivots) {
        let mut eq = Poly::zero();
        let mut total = BigRational::zero();
        for ((c, v), a) in row.iter().zip(vars).zip(x0) {
            if !c.is_zero() {
                eq = &eq + &Poly::var(v).scale(c);
                total += c * a;
            }
        }
        out[p] = &eq - &Poly::constant(total);
    }
    out
}

fn class_deviation(n: &Network, x: &[BigRational], x0: &[BigRational]) -> f64 {
    let w = stoichiometric_matrix(n).conservation_laws();
    w.iter()
        .map(|row| {
            let d = row
                .iter()
                .zip(x.iter().zip(x0))
                .fold(BigRational::zero(), |acc, (c, (a, b))| acc + c * (a - b));
            d.abs().to_f64().unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max)
}

/// Two approximate states count as one when closer than [`DEDUP_DISTANCE`],
/// relative to their size.
pub fn same_state(a: &[f64], b: &[f64]) -> bool {
    distance(a, b) <= DEDUP_DISTANCE * (1.0 + norm(a).max(norm(b)))
}

/// Keep the first of every group of states that [`same_state`] merges.
pub fn merge_close_states(states: Vec<WitnessState>) -> Vec<WitnessState> {
    let mut out: Vec<WitnessState> = Vec::new();
    for s in states {
        if !out.iter().any(|o| same_state(&o.approx, &s.approx)) {
            out.push(s);
        }
    }
    out
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|p| p * p).sum::<f64>().sqrt()
}

/// Positive steady states in the class of `x0`, from `starts` Newton runs.
fn numeric_states(n: &Network, kappa: &Kappa, x0: &[BigRational], starts: usize, rng: &mut ChaCha8Rng) -> Result<Vec<WitnessState>> {
    let sys = system_polynomials(n)?;
    let f = specialise(&sys, kappa);
    let vars = sys.concentrations.clone();
    let square = System::new(class_system(n, &f, &vars, x0), vars.clone());
    let mut found: Vec<(Vec<f64>, Vec<BigRational>)> = Vec::new();
    let mut seen: Vec<Vec<f64>> = Vec::new();
    for _ in 0..starts {
        let start: Vec<f64> = vars
            .iter()
            .map(|_| 10f64.powf(rng.random_range(-4.0..4.0)))
            .collect();
        let Some(root) = square.newton(&start, 200) else {
            continue;
        };
        if root.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            continue;
        }
        if seen.iter().any(|a| same_state(a, &root)) {
            continue;
        }
        seen.push(root.clone());
        let Some(exact) = square.polish(&root, 3) else {
            continue;
        };
        let approx: Vec<f64> = exact.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
        if approx.iter().any(|v| *v < 1e-12 * (1.0 + norm(&approx))) {
            continue;
        }
        if max_abs(&eval_exact(&f, &vars, &exact)) > RESIDUAL_GATE || class_deviation(n, &exact, x0) > RESIDUAL_GATE {
            continue;
        }
        if found.iter().any(|(a, _)| same_state(a, &approx)) {
            continue;
        }
        found.push((approx, exact));
    }
    found.sort_by(|a, b| a.0.iter().zip(&b.0).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    found
        .into_iter()
        .map(|(approx, exact)| {
            let cls = classify_state(n, kappa, &exact)?;
            Ok(WitnessState {
                x: exact.iter().map(rat_string).collect(),
                residual: max_abs(&eval_exact(&f, &vars, &exact)),
                approx,
                interval: None,
                multiplicity: None,
                nondegenerate: cls.nondegenerate,
                exp_stable: cls.exp_stable,
            })
        })
        .collect()
}

/// Sample rate constants and look for two or more positive steady states in
/// one compatibility class. One species is handled exactly; up to three by
/// multi-start Newton. The best witness (most states, first found) is
/// returned once it reaches `budget.target_count` or the samples run out.
pub fn search_multistationarity(n: &Network, budget: &MssBudget, seed: u64) -> Result<MssVerdict> {
    let size = n.species().len();
    if size == 0 || size > 3 {
        return Err(Error::Precondition(format!(
            "the search handles one to three species, the network has {size}"
        )));
    }
    let mut rng = crate::random::rng(seed);
    let laws = stoichiometric_matrix(n).conservation_laws();
    let mut best: Option<(SteadyStateWitness, usize)> = None;
    let mut continuum = 0;
    for sample in 0..budget.samples {
        let kappa = sample_kappa(&mut rng, n);
        let (states, evidence, anchor) = if size == 1 {
            let f = single_species_poly(n, &kappa)?;
            let Some(count) = distinct_positive_roots(&f) else {
                continuum += 1;
                continue;
            };
            if count < 2 || best.as_ref().is_some_and(|(w, _)| count <= w.count()) {
                continue;
            }
            match univariate_states(&f) {
                Some(s) => {
                    let anchor = s.first().map(|st| st.x.clone()).unwrap_or_else(|| vec!["1".into()]);
                    (s, Evidence::Exact, anchor)
                }
                None => {
                    continuum += 1;
                    continue;
                }
            }
        } else {
            let x0: Vec<BigRational> = (0..size).map(|_| sample_log_uniform(&mut rng, -2.0, 2.0)).collect();
            let x0 = if laws.is_empty() { vec![BigRational::one(); size] } else { x0 };
            let s = numeric_states(n, &kappa, &x0, budget.starts, &mut rng)?;
            (s, Evidence::Numeric, x0.iter().map(rat_string).collect())
        };
        if states.len() >= 2 && best.as_ref().is_none_or(|(w, _)| states.len() > w.count()) {
            let witness = SteadyStateWitness {
                network: n.to_dsl(),
                species: n.species().to_vec(),
                kappa: kappa_strings(&kappa),
                class_anchor: anchor,
                evidence,
                states,
            };
            let check = verify_witness(&witness)?;
            if !check.ok {
                return Err(Error::Internal(format!("witness failed its own check: {}", check.problems.join("; "))));
            }
            let done = witness.count() >= budget.target_count;
            best = Some((witness, sample + 1));
            if done {
                break;
            }
        }
    }
    Ok(match best {
        Some((witness, samples_used)) => MssVerdict::MultistationaryWitness { witness, samples_used },
        None => MssVerdict::NoWitnessFound {
            samples: budget.samples,
            starts: budget.starts,
            continuum_samples: continuum,
        },
    })
}

/// Result of replaying a witness.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessCheck {
    pub ok: bool,
    pub states: usize,
    pub max_residual: f64,
    pub max_class_deviation: f64,
    pub min_separation: f64,
    pub problems: Vec<String>,
}

fn parse_rat(s: &str) -> Result<BigRational> {
    BigRational::from_str(s.trim()).map_err(|_| Error::Invalid(format!("not a rational number: {s}")))
}

/// Recheck a witness from its own data: residuals, positivity, class
/// membership, distinctness and (exact evidence) the isolating intervals.
pub fn verify_witness(w: &SteadyStateWitness) -> Result<WitnessCheck> {
    let n = parse_network(&w.network)?;
    if n.species() != w.species.as_slice() {
        return Err(Error::Invalid("witness species do not match its network".into()));
    }
    let kappa: Kappa = w
        .kappa
        .iter()
        .map(|(k, v)| Ok((k.clone(), parse_rat(v)?)))
        .collect::<Result<_>>()?;
    let sys = system_polynomials(&n)?;
    check_kappa(&sys.rate_constants, &kappa)?;
    let f = specialise(&sys, &kappa);
    let x0: Vec<BigRational> = w.class_anchor.iter().map(|s| parse_rat(s)).collect::<Result<_>>()?;
    let mut problems = Vec::new();
    let mut max_residual: f64 = 0.0;
    let mut max_dev: f64 = 0.0;
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (k, st) in w.states.iter().enumerate() {
        let x: Vec<BigRational> = st.x.iter().map(|s| parse_rat(s)).collect::<Result<_>>()?;
        if x.len() != n.species().len() {
            problems.push(format!("state {k} has the wrong dimension"));
            continue;
        }
        if x.iter().any(|v| !v.is_positive()) {
            problems.push(format!("state {k} is not positive"));
        }
        let res = max_abs(&eval_exact(&f, &sys.concentrations, &x));
        max_residual = max_residual.max(res);
        if res > RESIDUAL_GATE {
            problems.push(format!("state {k} has residual {res:e}"));
        }
        if x0.len() == x.len() {
            let dev = class_deviation(&n, &x, &x0);
            max_dev = max_dev.max(dev);
            if dev > RESIDUAL_GATE {
                problems.push(format!("state {k} is off the compatibility class by {dev:e}"));
            }
        } else {
            problems.push("class anchor has the wrong dimension".into());
        }
        if let Some([lo, hi]) = &st.interval {
            let (lo, hi) = (parse_rat(lo)?, parse_rat(hi)?);
            let u = UPoly::from_poly(&f[0], &sys.concentrations[0])?;
            let brackets = if lo == hi {
                u.eval(&lo).is_zero()
            } else {
                let (a, b) = (u.eval(&lo), u.eval(&hi));
                let (g, _) = u.strip_zero_roots();
                let sq = g.divrem(&g.gcd(&g.derivative())).0;
                let (sa, sb) = (sq.eval(&lo), sq.eval(&hi));
                (a.is_positive() != b.is_positive() && !a.is_zero() && !b.is_zero())
                    || (!sa.is_zero() && !sb.is_zero() && sa.is_positive() != sb.is_positive())
            };
            if !brackets || x[0] < lo || x[0] > hi {
                problems.push(format!("state {k}: interval does not certify a root"));
            }
        }
        points.push(x.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect());
    }
    let mut min_sep = f64::INFINITY;
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let d = distance(&points[a], &points[b]);
            min_sep = min_sep.min(d);
            let exact_distinct = w.evidence == Evidence::Exact && w.states[a].x != w.states[b].x;
            if d <= DEDUP_DISTANCE * (1.0 + norm(&points[a]).max(norm(&points[b]))) && !exact_distinct {
                problems.push(format!("states {a} and {b} coincide"));
            }
        }
    }
    if w.states.len() < 2 {
        problems.push("fewer than two states".into());
    }
    Ok(WitnessCheck {
        ok: problems.is_empty(),
        states: w.states.len(),
        max_residual,
        max_class_deviation: max_dev,
        min_separation: min_sep,
        problems,
    })
}

/// Steady states in one compatibility class of a network whose reactants
/// are all monomolecular or zero: the solution set of an affine system.
#[derive(Clone, Debug, PartialEq)]
pub enum AffineClassStates {
    Empty,
    Unique(Vec<BigRational>),
    /// Solutions form an affine space of this dimension through `point`.
    Family { dimension: usize, point: Vec<BigRational> },
}

fn check_monomolecular(n: &Network) -> Result<()> {
    match n.reactions().iter().find(|r| r.reactant.molecularity() > 1) {
        Some(r) => Err(Error::HypothesisNotMet(format!(
            "reactant of {} is neither monomolecular nor zero",
            r.render()
        ))),
        None => Ok(()),
    }
}

/// Solve the class system of a monomolecular network exactly.
pub fn monomolecular_class_states(n: &Network, kappa: &Kappa, x0: &[BigRational]) -> Result<AffineClassStates> {
    check_monomolecular(n)?;
    let sys = system_polynomials(n)?;
    let f = specialise(&sys, kappa);
    let vars = &sys.concentrations;
    let size = vars.len();
    if x0.len() != size {
        return Err(Error::Invalid(format!("class anchor has {} coordinates, expected {size}", x0.len())));
    }
    let zero: HashMap<Var, BigRational> = vars.iter().map(|v| (v.clone(), BigRational::zero())).collect();
    let mut coeff: linalg::Matrix = Vec::new();
    let mut rhs = Vec::new();
    for p in class_system(n, &f, vars, x0) {
        coeff.push(
            vars.iter()
                .map(|v| p.derivative(v).constant_value().unwrap_or_else(BigRational::zero))
                .collect(),
        );
        rhs.push(-p.eval(&zero).unwrap_or_else(BigRational::zero));
    }
    let mut aug: linalg::Matrix = coeff.iter().zip(&rhs).map(|(r, b)| r.iter().cloned().chain([b.clone()]).collect()).collect();
    let ra = linalg::rank(&coeff);
    let pivots = linalg::rref(&mut aug);
    if pivots.contains(&size) {
        return Ok(AffineClassStates::Empty);
    }
    // Free variables at zero.
    let mut point = vec![BigRational::zero(); size];
    for (row, &p) in aug.iter().zip(&pivots) {
        point[p] = row[size].clone();
    }
    Ok(if ra == size {
        AffineClassStates::Unique(point)
    } else {
        AffineClassStates::Family { dimension: size - ra, point }
    })
}

/// For networks whose reactants are all monomolecular or zero: solve one
/// sampled class exactly and report the structure.
pub fn monomolecular_mono_check(n: &Network, seed: u64) -> Result<MssVerdict> {
    check_monomolecular(n)?;
    let mut rng = crate::random::rng(seed);
    let kappa = sample_kappa(&mut rng, n);
    let x0: Vec<BigRational> = n.species().iter().map(|_| sample_log_uniform(&mut rng, -2.0, 2.0)).collect();
    let outcome = match monomolecular_class_states(n, &kappa, &x0)? {
        AffineClassStates::Empty => "no steady state in the sampled class".to_string(),
        AffineClassStates::Unique(sol) => {
            let positive = sol.iter().all(|v| v.is_positive());
            format!("unique steady state in the sampled class ({})", if positive { "positive" } else { "not positive" })
        }
        AffineClassStates::Family { dimension, .. } => {
            format!("affine family of dimension {dimension} in the sampled class, all degenerate")
        }
    };
    Ok(MssVerdict::ProvedMono {
        reason: "every reactant complex is monomolecular or zero, so the steady states in a class solve an affine system: none, one, or a degenerate continuum".into(),
        linear_check: outcome,
    })
}

/// Concentration variable names of a network, in species order.
pub fn state_names(n: &Network) -> Vec<String> {
    n.species().iter().map(|s| species_var(s).name().to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kappa(pairs: &[(&str, i64)]) -> Kappa {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), BigRational::from_integer(BigInt::from(*v))))
            .collect()
    }

    #[test]
    fn quadratic_has_two_roots() {
        let n = parse_network("0 <-> A [k1, k2]; 2A -> 3A [k3]").unwrap();
        let r = count_positive_roots_univariate(&n, &kappa(&[("k1", 2), ("k2", 3), ("k3", 1)])).unwrap();
        assert_eq!(r.distinct, 2);
        assert_eq!(r.roots[0].lo, BigRational::one());
        assert_eq!(r.roots[0].hi, BigRational::one());
        assert_eq!(r.roots[1].lo, BigRational::from_integer(2.into()));
    }

    #[test]
    fn degenerate_continuum() {
        let n = parse_network("A -> 0 [k1]; A -> 2A [k2]").unwrap();
        let r = count_positive_roots_univariate(&n, &kappa(&[("k1", 3), ("k2", 3)])).unwrap();
        assert!(r.continuum);
        let r = count_positive_roots_univariate(&n, &kappa(&[("k1", 3), ("k2", 2)])).unwrap();
        assert!(!r.continuum);
        assert_eq!(r.distinct, 0);
    }

    #[test]
    fn classify_simple_root() {
        let n = parse_network("0 <-> A [k1, k2]; 2A -> 3A [k3]").unwrap();
        let k = kappa(&[("k1", 2), ("k2", 3), ("k3", 1)]);
        let c = classify_state(&n, &k, &[BigRational::one()]).unwrap();
        assert!(c.nondegenerate && c.exp_stable);
        let c = classify_state(&n, &k, &[BigRational::from_integer(2.into())]).unwrap();
        assert!(c.nondegenerate && !c.exp_stable);
        assert!(classify_state(&n, &k, &[BigRational::from_integer(3.into())]).is_err());
    }

    #[test]
    fn classify_degenerate() {
        let n = parse_network("A -> 0 [k1]; A -> 2A [k2]").unwrap();
        let c = classify_state(&n, &kappa(&[("k1", 1), ("k2", 1)]), &[BigRational::from_integer(5.into())]).unwrap();
        assert!(!c.nondegenerate && !c.exp_stable);
    }

    #[test]
    fn classify_reversible_pair() {
        let n = parse_network("X1 <-> X2 [k1, k2]").unwrap();
        let k = kappa(&[("k1", 2), ("k2", 3)]);
        let c = classify_state(&n, &k, &[BigRational::from_integer(3.into()), BigRational::from_integer(2.into())]).unwrap();
        assert!(c.nondegenerate && c.exp_stable);
        assert!((c.eigenvalues[1][0] + 5.0).abs() < 1e-9);
    }

    #[test]
    fn small_chain_witness() {
        let n = parse_network("A -> 0 [k1]; 2A -> 3A [k2]; 4A -> 3A [k3]").unwrap();
        let v = search_multistationarity(&n, &MssBudget::default(), 0).unwrap();
        match v {
            MssVerdict::MultistationaryWitness { witness, .. } => {
                assert_eq!(witness.count(), 2);
                assert!(verify_witness(&witness).unwrap().ok);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mono_check() {
        let n = parse_network("0 -> X1 [k1]; X1 <-> X2 [k2, k3]; X2 -> 0 [k4]").unwrap();
        assert!(matches!(monomolecular_mono_check(&n, 0).unwrap(), MssVerdict::ProvedMono { .. }));
        let n = parse_network("2A -> 3A [k1]").unwrap();
        assert!(matches!(monomolecular_mono_check(&n, 0), Err(Error::HypothesisNotMet(_))));
    }
}
