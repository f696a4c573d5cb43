//! Multistationarity properties: Sturm counts against a sign-change grid,
//! monomolecular networks, witness replay and state merging.

#[path = "common/mono_oracle.rs"]
mod mono_oracle;

use crnalg::mss::univariate::UPoly;
use crnalg::mss::{
    merge_close_states, positive_roots, search_multistationarity, verify_witness, MssBudget, MssVerdict,
    SteadyStateWitness, WitnessState, DEDUP_DISTANCE,
};
use crnalg::net::parse_network;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn horner(c: &[BigRational], x: &BigRational) -> BigRational {
    c.iter().rev().fold(BigRational::zero(), |acc, a| acc * x + a)
}

/// Sign changes of `c` over a uniform grid on (0, bound], zeros skipped.
fn grid_sign_changes(c: &[BigRational], bound: &BigRational, steps: i64) -> usize {
    let mut last = 0;
    let mut changes = 0;
    for k in 1..=steps {
        let x = bound * rat(k, steps);
        let s = horner(c, &x);
        let sign = if s.is_positive() { 1 } else if s.is_negative() { -1 } else { 0 };
        if sign != 0 {
            if last != 0 && sign != last {
                changes += 1;
            }
            last = sign;
        }
    }
    changes
}

/// Fujiwara's root bound, rounded up to an integer.
fn root_bound(c: &[BigRational]) -> BigRational {
    use num_traits::ToPrimitive;
    let d = c.len() - 1;
    let lead = c[d].abs();
    let b = (1..=d)
        .map(|k| (c[d - k].abs() / &lead).to_f64().unwrap().powf(1.0 / k as f64))
        .fold(0.0, f64::max);
    rat(2 * b.ceil() as i64 + 1, 1)
}

/// Refine the grid until two successive counts agree and cells are narrower
/// than `sep`.
fn grid_count(c: &[BigRational], sep: &BigRational) -> usize {
    let bound = root_bound(c);
    let mut steps = 16;
    let mut prev = grid_sign_changes(c, &bound, steps);
    loop {
        steps *= 2;
        let now = grid_sign_changes(c, &bound, steps);
        if now == prev && &bound / rat(steps, 1) < *sep {
            return now;
        }
        prev = now;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn sturm_matches_grid(
        roots in prop::collection::vec((-12i64..=12, 1i64..=3, 1u32..=3), 0..5),
        q in 1i64..20,
        scale in prop::sample::select(vec![-3i64, -1, 1, 2, 5]),
    ) {
        // Distinct roots p/d with d <= 3 are at least 1/9 apart.
        // f = scale * (x^2 + q) * prod (x - r)^m over distinct nonzero r
        let mut distinct: Vec<(BigRational, u32)> = Vec::new();
        for (p, d, m) in roots {
            let r = rat(p, d);
            if !r.is_zero() && !distinct.iter().any(|(s, _)| *s == r) {
                distinct.push((r, m));
            }
        }
        let mut f = vec![rat(q * scale, 1), BigRational::zero(), rat(scale, 1)];
        let mut radical = vec![rat(q, 1), BigRational::zero(), BigRational::one()];
        for (r, m) in &distinct {
            let lin = [-r.clone(), BigRational::one()];
            for _ in 0..*m {
                f = mul(&f, &lin);
            }
            radical = mul(&radical, &lin);
        }
        let pr = positive_roots(&UPoly::new(f.clone()));
        let positive: Vec<&(BigRational, u32)> = distinct.iter().filter(|(r, _)| r.is_positive()).collect();
        prop_assert_eq!(pr.distinct, grid_count(&radical, &rat(1, 12)));
        prop_assert_eq!(pr.distinct, positive.len());
        prop_assert_eq!(pr.with_multiplicity, positive.iter().map(|(_, m)| *m as usize).sum::<usize>());
        for root in &pr.roots {
            let inside: Vec<_> = positive.iter().filter(|(r, _)| *r >= root.lo && *r <= root.hi).collect();
            prop_assert_eq!(inside.len(), 1);
            prop_assert_eq!(inside[0].1, root.multiplicity);
        }
    }

    #[test]
    fn monomolecular_class_solutions(seed in any::<u64>()) {
        let d = mono_oracle::check_draw(seed, 4);
        prop_assert!(d.library_agrees, "{}", d.network.to_dsl());
        prop_assert!(d.nondegenerate_positive <= 1, "{}", d.network.to_dsl());
    }

    #[test]
    fn merging_never_increases_count(
        pts in prop::collection::vec(prop::collection::vec(0.01f64..10.0, 2), 1..8),
        jitter in prop::collection::vec(prop::sample::select(vec![0.0, 1e-12, 1e-10, 1e-3]), 8),
    ) {
        let mut states: Vec<WitnessState> = Vec::new();
        for (i, p) in pts.iter().enumerate() {
            let state = |v: Vec<f64>| WitnessState {
                x: v.iter().map(|a| a.to_string()).collect(),
                approx: v,
                interval: None,
                multiplicity: None,
                residual: 0.0,
                nondegenerate: true,
                exp_stable: false,
            };
            states.push(state(p.clone()));
            states.push(state(p.iter().map(|a| a + jitter[i]).collect()));
        }
        let merged = merge_close_states(states.clone());
        prop_assert!(merged.len() <= states.len());
        prop_assert_eq!(merge_close_states(merged.clone()).len(), merged.len());
        for s in &states {
            let near = merged.iter().any(|m| {
                let d: f64 = m.approx.iter().zip(&s.approx).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                d <= DEDUP_DISTANCE * 11.0 * 2.0
            });
            prop_assert!(near);
        }
    }
}

#[test]
fn search_on_monomolecular_networks() {
    for seed in 0..40 {
        let mut r = crnalg::random::rng(1000 + seed);
        let n = crnalg::random::monomolecular_network(&mut r, 3);
        let budget = MssBudget { samples: 4, starts: 20, target_count: 2 };
        match search_multistationarity(&n, &budget, seed).unwrap() {
            MssVerdict::MultistationaryWitness { witness, .. } => {
                assert!(witness.nondegenerate_count() <= 1, "{}", n.to_dsl());
            }
            MssVerdict::NoWitnessFound { .. } | MssVerdict::ProvedMono { .. } => {}
        }
    }
}

fn witness_for(text: &str, target: usize) -> SteadyStateWitness {
    let n = parse_network(text).unwrap();
    let budget = MssBudget { target_count: target, ..MssBudget::default() };
    match search_multistationarity(&n, &budget, 0).unwrap() {
        MssVerdict::MultistationaryWitness { witness, .. } => witness,
        v => panic!("no witness: {v:?}"),
    }
}

#[test]
fn witness_replays_after_serialisation() {
    for (text, target) in [("0 <-> A [k1, k2]; 2A -> 3A [k3]", 2), ("0 <-> A [k1, k2]; 2A -> 3A [k3]; B <-> 2B [k4, k5]; 3B -> 4B [k6]; A -> B [k7]", 2)] {
        let w = witness_for(text, target);
        let json = serde_json::to_string(&w).unwrap();
        let back: SteadyStateWitness = serde_json::from_str(&json).unwrap();
        let check = verify_witness(&back).unwrap();
        assert!(check.ok, "{:?}", check.problems);
        assert!(check.max_residual <= 1e-10);
        assert_eq!(check.states, w.count());
    }
}

#[test]
fn tampered_witness_fails_replay() {
    let mut w = witness_for("0 <-> A [k1, k2]; 2A -> 3A [k3]", 2);
    w.states[0].x[0] = "7/3".into();
    assert!(!verify_witness(&w).unwrap().ok);
    let mut w = witness_for("0 <-> A [k1, k2]; 2A -> 3A [k3]", 2);
    let k = w.kappa.keys().next().unwrap().clone();
    w.kappa.insert(k, "1000".into());
    assert!(!verify_witness(&w).unwrap().ok);
}
