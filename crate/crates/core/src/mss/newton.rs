//! Damped Newton in floating point, followed by exact polishing over Q.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::linalg;
use crate::poly::{Poly, Var};

/// A polynomial compiled for fast evaluation on `f64` points.
#[derive(Clone, Debug)]
pub(crate) struct NumPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl NumPoly {
    pub(crate) fn new(p: &Poly, vars: &[Var]) -> NumPoly {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let exps = m
                    .factors()
                    .iter()
                    .map(|(v, e)| (vars.iter().position(|w| w == v).expect("variable in ring"), *e as i32))
                    .collect();
                (c.to_f64().unwrap_or(f64::NAN), exps)
            })
            .collect();
        NumPoly { terms }
    }

    pub(crate) fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, exps)| exps.iter().fold(*c, |acc, &(i, e)| acc * x[i].powi(e)))
            .sum()
    }
}

/// A square polynomial system with its Jacobian, in both exact and compiled
/// form.
pub(crate) struct System {
    pub vars: Vec<Var>,
    pub exact: Vec<Poly>,
    pub exact_jac: Vec<Vec<Poly>>,
    f: Vec<NumPoly>,
    jac: Vec<Vec<NumPoly>>,
}

impl System {
    pub(crate) fn new(polys: Vec<Poly>, vars: Vec<Var>) -> System {
        let exact_jac: Vec<Vec<Poly>> = polys.iter().map(|p| vars.iter().map(|v| p.derivative(v)).collect()).collect();
        let f = polys.iter().map(|p| NumPoly::new(p, &vars)).collect();
        let jac = exact_jac
            .iter()
            .map(|row| row.iter().map(|p| NumPoly::new(p, &vars)).collect())
            .collect();
        System {
            vars,
            exact: polys,
            exact_jac,
            f,
            jac,
        }
    }

    fn eval(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.f.len(), self.f.iter().map(|p| p.eval(x)))
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.vars.len();
        DMatrix::from_fn(self.f.len(), n, |i, j| self.jac[i][j].eval(x))
    }

    /// Damped Newton from a positive start, keeping iterates positive.
    pub(crate) fn newton(&self, start: &[f64], max_iter: usize) -> Option<Vec<f64>> {
        let mut x = DVector::from_column_slice(start);
        let mut fx = self.eval(x.as_slice());
        let mut nf = fx.norm();
        for _ in 0..max_iter {
            if nf == 0.0 {
                return Some(x.as_slice().to_vec());
            }
            let j = self.jacobian(x.as_slice());
            let delta = j.lu().solve(&(-&fx))?;
            if !delta.iter().all(|d| d.is_finite()) {
                return None;
            }
            if delta.norm() <= 1e-14 * (1.0 + x.norm()) {
                return Some((&x + &delta).as_slice().to_vec());
            }
            let mut t: f64 = 1.0;
            for (xi, di) in x.iter().zip(delta.iter()) {
                if *di < 0.0 {
                    t = t.min(0.9 * xi / -di);
                }
            }
            loop {
                let xn = &x + &delta * t;
                let fxn = self.eval(xn.as_slice());
                let nn = fxn.norm();
                if nn.is_finite() && nn < (1.0 - 1e-4 * t) * nf {
                    x = xn;
                    fx = fxn;
                    nf = nn;
                    break;
                }
                t *= 0.5;
                if t < 1e-12 {
                    // No decrease: either converged to rounding level or stuck.
                    let step = (&delta * (2.0 * t)).norm();
                    return (step <= 1e-9 * (1.0 + x.norm())).then(|| x.as_slice().to_vec());
                }
            }
        }
        None
    }

    /// A few exact Newton steps from a float point, rounding to a dyadic grid
    /// in between to bound the size of the rationals.
    pub(crate) fn polish(&self, x: &[f64], steps: usize) -> Option<Vec<BigRational>> {
        let mut xr: Vec<BigRational> = x.iter().map(|v| BigRational::from_float(*v)).collect::<Option<_>>()?;
        let scale = BigRational::from_integer(BigInt::one() << 160);
        for _ in 0..steps {
            let vals: HashMap<Var, BigRational> = self.vars.iter().cloned().zip(xr.iter().cloned()).collect();
            let f: Vec<BigRational> = self.exact.iter().map(|p| p.eval(&vals)).collect::<Option<_>>()?;
            if f.iter().all(|v| v == &BigRational::from_integer(0.into())) {
                break;
            }
            let j: linalg::Matrix = self
                .exact_jac
                .iter()
                .map(|row| row.iter().map(|p| p.eval(&vals)).collect::<Option<Vec<_>>>())
                .collect::<Option<_>>()?;
            let Some(delta) = linalg::solve(&j, &f) else {
                break;
            };
            xr = xr
                .iter()
                .zip(&delta)
                .map(|(a, d)| ((a - d) * &scale).round() / &scale)
                .collect();
        }
        xr.iter().all(|v| v.is_positive()).then_some(xr)
    }
}
