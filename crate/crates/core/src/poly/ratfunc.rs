use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Monomial, Poly, Var};

/// Quotient of polynomials, kept in a light normal form: the denominator's
/// leading coefficient is 1, common monomial factors are cancelled, and the
/// fraction collapses when the denominator divides the numerator exactly.
/// No multivariate gcd is taken, so equality compares by cross-multiplication.
#[derive(Clone)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> RatFunc {
        assert!(!den.is_zero(), "zero denominator");
        let mut r = RatFunc { num, den };
        r.normalize();
        r
    }

    pub fn from_poly(p: Poly) -> RatFunc {
        RatFunc { num: p, den: Poly::one() }
    }

    pub fn zero() -> RatFunc {
        RatFunc::from_poly(Poly::zero())
    }

    pub fn one() -> RatFunc {
        RatFunc::from_poly(Poly::one())
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_constant()
    }

    pub fn as_poly(&self) -> Option<Poly> {
        let c = self.den.constant_value()?;
        Some(self.num.scale(&c.recip()))
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = Poly::one();
            return;
        }
        let g = self.num.monomial_content().gcd(&self.den.monomial_content());
        if !g.is_one() {
            self.num = self.num.div_exact(&Poly::term(BigRational::one(), g.clone())).unwrap();
            self.den = self.den.div_exact(&Poly::term(BigRational::one(), g)).unwrap();
        }
        if !self.den.is_constant() {
            if let Some(q) = self.num.div_exact(&self.den) {
                self.num = q;
                self.den = Poly::one();
            }
        }
        let lc = self.den.leading().unwrap().1.clone();
        if !lc.is_one() {
            let inv = lc.recip();
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
    }

    pub fn recip(&self) -> RatFunc {
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn derivative(&self, v: &Var) -> RatFunc {
        let n = &(&self.num.derivative(v) * &self.den) - &(&self.num * &self.den.derivative(v));
        RatFunc::new(n, &self.den * &self.den)
    }

    pub fn eval(&self, vals: &HashMap<Var, BigRational>) -> Option<BigRational> {
        let d = self.den.eval(vals)?;
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(vals)? / d)
    }

    pub fn eval_partial(&self, vals: &HashMap<Var, BigRational>) -> RatFunc {
        RatFunc::new(self.num.eval_partial(vals), self.den.eval_partial(vals))
    }

    pub fn render(&self) -> String {
        if self.den.is_one_poly() {
            return self.num.render();
        }
        let wrap = |p: &Poly| {
            if p.num_terms() > 1 {
                format!("({})", p.render())
            } else {
                p.render()
            }
        };
        format!("{}/{}", wrap(&self.num), wrap(&self.den))
    }
}

impl Poly {
    fn is_one_poly(&self) -> bool {
        self.num_terms() == 1 && self.coefficient(&Monomial::one()).is_one()
    }
}

impl PartialEq for RatFunc {
    fn eq(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

impl Eq for RatFunc {}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc({})", self.render())
    }
}

impl<'a> Add<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn add(self, o: &RatFunc) -> RatFunc {
        if self.den == o.den {
            return RatFunc::new(&self.num + &o.num, self.den.clone());
        }
        RatFunc::new(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den)
    }
}

impl<'a> Sub<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn sub(self, o: &RatFunc) -> RatFunc {
        self + &(-o)
    }
}

impl<'a> Mul<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn mul(self, o: &RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &o.num, &self.den * &o.den)
    }
}

impl<'a> Div<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn div(self, o: &RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &o.den, &self.den * &o.num)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl From<Poly> for RatFunc {
    fn from(p: Poly) -> RatFunc {
        RatFunc::from_poly(p)
    }
}

impl serde::Serialize for RatFunc {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.render())
    }
}

impl Zero for RatFunc {
    fn zero() -> Self {
        RatFunc::zero()
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl Add for RatFunc {
    type Output = RatFunc;
    fn add(self, o: RatFunc) -> RatFunc {
        &self + &o
    }
}
