//! Input-output equations against transfer functions: at random rational
//! parameter values and random s, det(sI - A_H) times the transfer function
//! from u_j to x_i must equal the right-hand operator for u_j. The
//! compartmental matrix and the linear solve here are built from the
//! reactions directly, without the library's matrix code.

use std::collections::HashMap;

use crnalg::lincomp::io_equation;
use crnalg::net::{parse_model, Model};
use crnalg::Error;
use crnalg::poly::{Poly, Var};
use crnalg::random::{compartmental_model, rng, ModelShape};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// (sI - A) at fixed parameter values, assembled reaction by reaction.
fn resolvent_matrix(m: &Model, vals: &HashMap<String, BigRational>, s: &BigRational) -> Vec<Vec<BigRational>> {
    let sp = m.network().species();
    let n = sp.len();
    let idx = |name: &str| sp.iter().position(|x| x == name).unwrap();
    let mut a = vec![vec![BigRational::zero(); n]; n];
    for r in m.network().reactions() {
        if r.reactant.is_zero() {
            continue;
        }
        let k = &vals[&r.label];
        let i = idx(r.reactant.single_species().unwrap());
        a[i][i] -= k;
        if let Some(t) = r.product.single_species() {
            a[idx(t)][i] += k;
        }
    }
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { s - &a[i][j] } else { -a[i][j].clone() }).collect())
        .collect()
}

/// Gauss-Jordan with full pivot search on a copy.
fn solve(mut m: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Vec<BigRational> {
    let n = m.len();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero()).expect("nonsingular");
        m.swap(c, p);
        b.swap(c, p);
        let inv = m[c][c].clone().recip();
        for k in 0..n {
            m[c][k] = &m[c][k] * &inv;
        }
        b[c] = &b[c] * &inv;
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for k in 0..n {
                    let t = &f * &m[c][k];
                    m[r][k] -= t;
                }
                let t = &f * &b[c];
                b[r] -= t;
            }
        }
    }
    b
}

fn eval_operator(op: &[Poly], vals: &HashMap<Var, BigRational>, s: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    let mut pow = BigRational::one();
    for c in op {
        acc += c.eval(vals).unwrap() * &pow;
        pow *= s;
    }
    acc
}

fn check_model(m: &Model, seed: u64) {
    let mut r = rng(seed);
    let labels: HashMap<String, BigRational> = m
        .network()
        .reactions()
        .iter()
        .map(|x| {
            let v = BigRational::new(BigInt::from(r.random_range(1..=50)), BigInt::from(r.random_range(1..=7)));
            (x.label.clone(), v)
        })
        .collect();
    let vars: HashMap<Var, BigRational> = labels.iter().map(|(k, v)| (Var::rate(k), v.clone())).collect();
    let s = BigRational::new(BigInt::from(r.random_range(1..=97)), BigInt::from(r.random_range(1..=13)));
    let sp = m.network().species();
    let res = resolvent_matrix(m, &labels, &s);
    for out in m.outputs() {
        let oi = sp.iter().position(|x| x == out).unwrap();
        let eq = match io_equation(m, out) {
            Ok(eq) => eq,
            Err(Error::HypothesisNotMet(_)) => {
                // No input reaches the output: every transfer function is 0.
                for r in m.network().reactions().iter().filter(|r| r.reactant.is_zero()) {
                    let j = sp.iter().position(|x| Some(x.as_str()) == r.product.single_species()).unwrap();
                    let mut e = vec![BigRational::zero(); sp.len()];
                    e[j] = BigRational::one();
                    assert!(solve(res.clone(), e)[oi].is_zero());
                }
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        let h = eq.subgraph.len();
        assert_eq!(eq.lhs.len(), h + 1, "lhs degree");
        assert_eq!(eq.lhs[h], Poly::one(), "lhs monic");
        let lhs = eval_operator(&eq.lhs, &vars, &s);
        for r in m.network().reactions().iter().filter(|r| r.reactant.is_zero()) {
            let j = sp.iter().position(|x| Some(x.as_str()) == r.product.single_species()).unwrap();
            let mut e = vec![BigRational::zero(); sp.len()];
            e[j] = BigRational::one();
            let transfer = solve(res.clone(), e)[oi].clone();
            let rhs = eq
                .rhs
                .iter()
                .find(|(u, _, _)| *u == r.label)
                .map(|(_, _, op)| {
                    assert!(op.len() <= h, "rhs degree below lhs degree");
                    eval_operator(op, &vars, &s)
                })
                .unwrap_or_else(BigRational::zero);
            assert_eq!(&lhs * &transfer, rhs, "output {out}, input {}\n{}", r.label, m.to_dsl());
        }
    }
}

#[test]
fn worked_examples() {
    for text in [
        "0 -> X1 [u1]; X1 <-> X2 [a21, a12]; X2 -> 0 [a02]; output X1",
        "0 -> X1 [u1]; X1 <-> X2 [a21, a12]; X2 -> X3 [a32]; X3 <-> X4 [a43, a34]; 0 -> X4 [u4]; output X1",
        "0 -> X1 [u1]; X1 -> 0 [a01]; output X1",
        "0 -> X4 [u4]; X4 -> 0 [a04]; X3 -> 0 [a03]; X3 <-> X4 [a43, a34]; output X4",
    ] {
        check_model(&parse_model(text).unwrap(), 7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_models_match_transfer_functions(seed in any::<u64>(), size in 1usize..=5, strong in any::<bool>()) {
        let mut r = rng(seed);
        let m = compartmental_model(&mut r, &ModelShape {
            first: 1,
            size,
            strongly_connected: strong,
            leak_prob: 0.4,
            inflow_prob: 0.4,
            outputs: 2,
        });
        check_model(&m, seed ^ 0x5eed);
    }
}

#[test]
fn scalar_helpers() {
    assert_eq!(solve(vec![vec![q(2), q(1)], vec![q(1), q(3)]], vec![q(3), q(4)]), vec![q(1), q(1)]);
}
