//! Dense univariate polynomials over Q with Sturm sequences and positive
//! root isolation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::{Poly, Var};

/// Coefficients from the constant term up; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UPoly(Vec<BigRational>);

impl UPoly {
    pub fn new(mut c: Vec<BigRational>) -> UPoly {
        while c.last().is_some_and(|v| v.is_zero()) {
            c.pop();
        }
        UPoly(c)
    }

    pub fn from_ints(c: &[i64]) -> UPoly {
        UPoly::new(c.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
    }

    /// Convert a polynomial whose only variable is `v`.
    pub fn from_poly(p: &Poly, v: &Var) -> Result<UPoly> {
        if let Some(w) = p.vars().into_iter().find(|w| w != v) {
            return Err(Error::Invalid(format!("polynomial also depends on {w}")));
        }
        let mut c = vec![BigRational::zero(); p.degree_in(v) as usize + 1];
        for (m, k) in p.terms() {
            c[m.exponent(v) as usize] += k;
        }
        Ok(UPoly::new(c))
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&BigRational> {
        self.0.last()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.0
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    pub fn monic(&self) -> UPoly {
        match self.lead() {
            Some(l) => UPoly(self.0.iter().map(|c| c / l).collect()),
            None => self.clone(),
        }
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn divrem(&self, d: &UPoly) -> (UPoly, UPoly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.lead().unwrap().clone();
        let mut r = self.0.clone();
        if r.len() <= dd {
            return (UPoly(Vec::new()), self.clone());
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] / &lead;
            if !c.is_zero() {
                for (j, dc) in d.0.iter().enumerate() {
                    r[k + j] -= &c * dc;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (UPoly::new(q), UPoly::new(r))
    }

    pub fn gcd(&self, other: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Divide out the largest power of the variable.
    pub fn strip_zero_roots(&self) -> (UPoly, usize) {
        let k = self.0.iter().take_while(|c| c.is_zero()).count();
        (UPoly(self.0[k..].to_vec()), k)
    }

    /// Square-free decomposition `self = c · Π a_i^i` (Yun), as `(a_i, i)`
    /// with nonconstant `a_i`.
    pub fn squarefree_factors(&self) -> Vec<(UPoly, u32)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let fp = self.derivative();
        let a0 = self.gcd(&fp);
        let mut b = self.divrem(&a0).0;
        let mut c = fp.divrem(&a0).0;
        let mut d = &c - &b.derivative();
        let mut i = 1;
        loop {
            let a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), i));
            }
            b = b.divrem(&a).0;
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            c = d.divrem(&a).0;
            d = &c - &b.derivative();
            i += 1;
        }
        out
    }

    /// Sturm sequence `p, p', -rem(p, p'), ...`.
    pub fn sturm_sequence(&self) -> Vec<UPoly> {
        let mut seq = vec![self.clone()];
        let d = self.derivative();
        if d.is_zero() {
            return seq;
        }
        seq.push(d);
        loop {
            let n = seq.len();
            let r = seq[n - 2].divrem(&seq[n - 1]).1;
            if r.is_zero() {
                return seq;
            }
            seq.push(-&r);
        }
    }

    /// `1 + max |a_i / a_n|`, a bound on the absolute value of every root.
    pub fn root_bound(&self) -> BigRational {
        let lead = self.lead().expect("nonzero polynomial").abs();
        let m = self.0[..self.0.len() - 1]
            .iter()
            .map(|c| c.abs() / &lead)
            .max()
            .unwrap_or_else(BigRational::zero);
        m + BigRational::one()
    }
}

impl std::ops::Sub for &UPoly {
    type Output = UPoly;
    fn sub(self, o: &UPoly) -> UPoly {
        let n = self.0.len().max(o.0.len());
        UPoly::new(
            (0..n)
                .map(|k| {
                    let a = self.0.get(k).cloned().unwrap_or_else(BigRational::zero);
                    let b = o.0.get(k).cloned().unwrap_or_else(BigRational::zero);
                    a - b
                })
                .collect(),
        )
    }
}

impl std::ops::Neg for &UPoly {
    type Output = UPoly;
    fn neg(self) -> UPoly {
        UPoly(self.0.iter().map(|c| -c).collect())
    }
}

fn sign(v: &BigRational) -> i8 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

fn variations(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0;
    let mut count = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

fn variations_at(seq: &[UPoly], x: &BigRational) -> usize {
    variations(seq.iter().map(|p| sign(&p.eval(x))))
}

fn variations_at_infinity(seq: &[UPoly]) -> usize {
    variations(seq.iter().map(|p| p.lead().map_or(0, sign)))
}

/// Distinct real roots in `(a, b]`, for `a` not a root.
pub fn count_roots_between(seq: &[UPoly], a: &BigRational, b: &BigRational) -> usize {
    variations_at(seq, a).saturating_sub(variations_at(seq, b))
}

/// Distinct real roots in `(a, ∞)`, for `a` not a root.
pub fn count_roots_above(seq: &[UPoly], a: &BigRational) -> usize {
    variations_at(seq, a).saturating_sub(variations_at_infinity(seq))
}

/// A real root in `[lo, hi]`: either `lo == hi` is the root, or the
/// polynomial takes opposite nonzero signs at the endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RootInterval {
    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }
}

/// The rational with the smallest denominator in `[lo, hi]`, for
/// `0 <= lo <= hi`.
pub fn simplest_rational(lo: &BigRational, hi: &BigRational) -> BigRational {
    let fl = lo.floor();
    if &fl == lo {
        return fl;
    }
    let next = &fl + BigRational::one();
    if &next <= hi {
        return next;
    }
    let inner = simplest_rational(&(hi - &fl).recip(), &(lo - &fl).recip());
    fl + inner.recip()
}

/// Isolating intervals of the positive roots of a square-free polynomial
/// with nonzero constant term, in increasing order, each of width at most
/// `width`.
pub fn isolate_positive_roots(p: &UPoly, width: &BigRational) -> Vec<RootInterval> {
    let zero = BigRational::zero();
    if p.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    assert!(!p.eval(&zero).is_zero(), "zero is a root");
    let seq = p.sturm_sequence();
    let two = BigRational::from_integer(BigInt::from(2));
    let mut stack = vec![(zero, p.root_bound())];
    let mut out = Vec::new();
    while let Some((lo, hi)) = stack.pop() {
        let n = count_roots_between(&seq, &lo, &hi);
        if n == 0 {
            continue;
        }
        let ph = p.eval(&hi);
        if n == 1 && ph.is_zero() {
            out.push(RootInterval { lo: hi.clone(), hi });
            continue;
        }
        if n == 1 && !p.eval(&lo).is_zero() {
            out.push(refine(p, RootInterval { lo, hi }, width));
            continue;
        }
        let mid = (&lo + &hi) / &two;
        if p.eval(&mid).is_zero() {
            out.push(RootInterval {
                lo: mid.clone(),
                hi: mid.clone(),
            });
            // Roots strictly on either side of an exact rational root.
            let eps = (&hi - &lo) / BigRational::from_integer(BigInt::from(1024));
            let mut left_hi = &mid - &eps;
            while count_roots_between(&seq, &left_hi, &mid) > 1 || p.eval(&left_hi).is_zero() {
                left_hi = (&left_hi + &mid) / &two;
            }
            let mut right_lo = &mid + &eps;
            while count_roots_between(&seq, &mid, &right_lo) > 1 || p.eval(&right_lo).is_zero() {
                right_lo = (&right_lo + &mid) / &two;
            }
            stack.push((right_lo, hi));
            stack.push((lo, left_hi));
        } else {
            stack.push((mid.clone(), hi));
            stack.push((lo, mid));
        }
    }
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    out
}

/// Bisect a sign-changing interval down to `width`.
pub fn refine(p: &UPoly, mut iv: RootInterval, width: &BigRational) -> RootInterval {
    let mut slo = sign(&p.eval(&iv.lo));
    while iv.width() > *width {
        let mid = iv.midpoint();
        let sm = sign(&p.eval(&mid));
        if sm == 0 {
            return RootInterval { lo: mid.clone(), hi: mid };
        }
        if sm == slo {
            iv.lo = mid;
            slo = sm;
        } else {
            iv.hi = mid;
        }
    }
    iv
}
