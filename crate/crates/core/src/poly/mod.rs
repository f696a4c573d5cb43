//! Exact multivariate polynomials over the rationals and Gröbner-basis tools.
//!
//! Polynomials are sparse maps from monomials to nonzero `BigRational`
//! coefficients. Variables compare by name using natural ordering, so `x2`
//! sorts before `x10`.

mod groebner;
mod ideal;
mod ratfunc;
mod text;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use groebner::{Budget, GroebnerBasis, MonomialOrder};
pub use ideal::{Ideal, SolutionCount};
pub use ratfunc::RatFunc;
pub use text::{parse_poly, parse_poly_with, rat_string};

/// Role of an indeterminate. Informational only: identity is by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    RateConstant,
    Concentration,
    DifferentialSymbol,
    Auxiliary,
}

/// A named indeterminate.
#[derive(Clone)]
pub struct Var {
    name: Arc<str>,
    kind: VarKind,
}

impl Var {
    pub fn new(kind: VarKind, name: &str) -> Var {
        Var {
            name: Arc::from(name),
            kind,
        }
    }

    pub fn rate(name: &str) -> Var {
        Var::new(VarKind::RateConstant, name)
    }

    pub fn conc(name: &str) -> Var {
        Var::new(VarKind::Concentration, name)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> VarKind {
        self.kind
    }
}

impl serde::Serialize for Var {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name)
    }
}

/// Serde helpers writing rationals in their text form (`-3/2`).
pub mod serde_rat {
    use num_rational::BigRational;
    use serde::ser::{SerializeSeq, Serializer};

    pub fn one<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::text::rat_string(r))
    }

    pub fn vec<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&super::text::rat_string(r))?;
        }
        seq.end()
    }

    pub fn vec_vec<S: Serializer>(v: &[Vec<BigRational>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = v.iter().map(|r| r.iter().map(super::text::rat_string).collect()).collect();
        serde::Serialize::serialize(&rows, s)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for Var {}

impl Hash for Var {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name.hash(state)
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> Ordering {
        natural_cmp(&self.name, &other.name)
    }
}

/// Natural string order: digit runs compare numerically (`x2 < x10`).
/// Falls back to plain byte order so that the result is a total order
/// consistent with string equality.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let ca = chunks(a);
    let cb = chunks(b);
    for (x, y) in ca.iter().zip(cb.iter()) {
        let o = match (x, y) {
            (Chunk::Num(p), Chunk::Num(q)) => {
                let p = p.trim_start_matches('0');
                let q = q.trim_start_matches('0');
                p.len().cmp(&q.len()).then_with(|| p.cmp(q))
            }
            (Chunk::Text(p), Chunk::Text(q)) => p.cmp(q),
            (Chunk::Num(_), Chunk::Text(_)) => Ordering::Less,
            (Chunk::Text(_), Chunk::Num(_)) => Ordering::Greater,
        };
        if o != Ordering::Equal {
            return o;
        }
    }
    ca.len().cmp(&cb.len()).then_with(|| a.cmp(b))
}

enum Chunk<'a> {
    Num(&'a str),
    Text(&'a str),
}

fn chunks(s: &str) -> Vec<Chunk<'_>> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut prev_digit: Option<bool> = None;
    for (i, c) in s.char_indices() {
        let d = c.is_ascii_digit();
        if let Some(p) = prev_digit {
            if p != d {
                let piece = &s[start..i];
                out.push(if p { Chunk::Num(piece) } else { Chunk::Text(piece) });
                start = i;
            }
        }
        prev_digit = Some(d);
    }
    if let Some(p) = prev_digit {
        let piece = &s[start..];
        out.push(if p { Chunk::Num(piece) } else { Chunk::Text(piece) });
    }
    out
}

/// A monomial: sorted list of (variable, positive exponent).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Monomial {
        Monomial(vec![(v, 1)])
    }

    /// Build from arbitrary (var, exp) pairs; merges duplicates, drops zeros.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, u32)>) -> Monomial {
        let mut m: BTreeMap<Var, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *m.entry(v).or_insert(0) += e;
        }
        Monomial(m.into_iter().filter(|(_, e)| *e > 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| *e).sum()
    }

    pub fn exponent(&self, v: &Var) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.0.iter().map(|(v, _)| v)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (v, e) in &self.0 {
            if j < other.0.len() && &other.0[j].0 == v {
                let f = other.0[j].1;
                if f > *e {
                    return None;
                }
                if e - f > 0 {
                    out.push((v.clone(), e - f));
                }
                j += 1;
            } else if j < other.0.len() && other.0[j].0 < *v {
                return None;
            } else {
                out.push((v.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .filter_map(|(v, e)| {
                    let f = other.exponent(v);
                    if f > 0 {
                        Some((v.clone(), (*e).min(f)))
                    } else {
                        None
                    }
                })
                .collect(),
        )
    }

    /// Drop the given variable entirely.
    fn without(&self, v: &Var) -> Monomial {
        Monomial(self.0.iter().filter(|(w, _)| w != v).cloned().collect())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded lexicographic order, variables earlier in natural order are larger.
/// This is only the canonical display/storage order; Gröbner computations
/// use an explicit [`MonomialOrder`].
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.degree().cmp(&other.degree());
        if d != Ordering::Equal {
            return d;
        }
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            match a.0.cmp(&b.0) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => {
                    if a.1 != b.1 {
                        return a.1.cmp(&b.1);
                    }
                }
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, e)| {
                if *e == 1 {
                    v.to_string()
                } else {
                    format!("{v}^{e}")
                }
            })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

/// Rational number helpers.
pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Sparse multivariate polynomial with rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn int(n: i64) -> Poly {
        Poly::constant(rat(n))
    }

    pub fn var(v: &Var) -> Poly {
        Poly::term(BigRational::one(), Monomial::var(v.clone()))
    }

    pub fn term(c: BigRational, m: Monomial) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(e) => {
                *e += c;
                if e.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        if self.is_zero() {
            Some(BigRational::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in descending canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter().rev()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: &Var) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms
            .keys()
            .flat_map(|m| m.vars().cloned())
            .collect()
    }

    /// Leading term in the canonical graded order.
    pub fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), a * c))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Scale so that the leading coefficient (canonical order) is 1.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// Scale to integer coefficients with content 1 and positive leading
    /// coefficient.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut den = BigInt::one();
        for c in self.terms.values() {
            den = num_integer::lcm(den, c.denom().clone());
        }
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            let n = c.numer() * (&den / c.denom());
            g = num_integer::gcd(g, n);
        }
        let mut s = BigRational::new(den, g);
        if self.leading().unwrap().1.is_negative() {
            s = -s;
        }
        self.scale(&s)
    }

    /// Partial derivative.
    pub fn derivative(&self, v: &Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e == 0 {
                continue;
            }
            let nm = m.div(&Monomial::var(v.clone())).unwrap();
            out.add_term(nm, c * rat(e as i64));
        }
        out
    }

    /// Substitute polynomials for variables (simultaneously).
    pub fn substitute(&self, map: &HashMap<Var, Poly>) -> Poly {
        let mut out = Poly::zero();
        let mut cache: HashMap<(Var, u32), Poly> = HashMap::new();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(c.clone());
            let mut rest = Vec::new();
            for (v, e) in m.factors() {
                match map.get(v) {
                    Some(p) => {
                        let pe = cache
                            .entry((v.clone(), *e))
                            .or_insert_with(|| p.pow(*e))
                            .clone();
                        t = &t * &pe;
                    }
                    None => rest.push((v.clone(), *e)),
                }
            }
            let t = t.mul_monomial(&Monomial(rest));
            out = &out + &t;
        }
        out
    }

    /// Substitute rational values for some variables.
    pub fn eval_partial(&self, vals: &HashMap<Var, BigRational>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            let mut rest = Vec::new();
            for (v, e) in m.factors() {
                match vals.get(v) {
                    Some(x) => coef *= num_traits::pow(x.clone(), *e as usize),
                    None => rest.push((v.clone(), *e)),
                }
            }
            out.add_term(Monomial(rest), coef);
        }
        out
    }

    /// Evaluate at a rational point; every variable must be assigned.
    pub fn eval(&self, vals: &HashMap<Var, BigRational>) -> Option<BigRational> {
        let p = self.eval_partial(vals);
        p.constant_value()
    }

    /// Evaluate in floating point; missing variables are an error (`None`).
    pub fn eval_f64(&self, vals: &HashMap<Var, f64>) -> Option<f64> {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64()?;
            for (v, e) in m.factors() {
                t *= vals.get(v)?.powi(*e as i32);
            }
            acc += t;
        }
        Some(acc)
    }

    /// Coefficients as a polynomial in `v`: entry `k` is the coefficient of
    /// `v^k`.
    pub fn coefficients_in(&self, v: &Var) -> Vec<Poly> {
        let d = self.degree_in(v) as usize;
        let mut out = vec![Poly::zero(); if self.is_zero() { 0 } else { d + 1 }];
        for (m, c) in &self.terms {
            let e = m.exponent(v) as usize;
            out[e].add_term(m.without(v), c.clone());
        }
        out
    }

    /// Ring homomorphism sending every variable outside `keep` to zero.
    pub fn project(&self, keep: &BTreeSet<Var>) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.vars().all(|v| keep.contains(v)))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Exact division in the canonical order; `None` if `d` does not divide.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (dm, dc) = d.leading()?;
        let mut r = self.clone();
        let mut q = Poly::zero();
        while let Some((m, c)) = r.leading() {
            let qm = m.div(dm)?;
            let qc = c / dc;
            let t = Poly::term(qc.clone(), qm.clone());
            r = &r - &(d * &t);
            q.add_term(qm, qc);
        }
        Some(q)
    }

    /// Greatest common divisor of all monomials.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        it.fold(first.clone(), |g, m| g.gcd(m))
    }

    pub fn render(&self) -> String {
        text::render(self)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({})", self.render())
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (n, d) in &rhs.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl serde::Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.render())
    }
}

impl<'de> serde::Deserialize<'de> for Poly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Poly, D::Error> {
        let s = String::deserialize(d)?;
        parse_poly(&s).map_err(serde::de::Error::custom)
    }
}

/// Determinant of a square matrix of polynomials by cofactor expansion with
/// memoization over column subsets.
pub fn det(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    if n == 0 {
        return Poly::one();
    }
    assert!(n <= 20, "determinant too large for subset expansion");
    let mut memo: HashMap<u32, Poly> = HashMap::new();
    det_rec(m, 0, (1u32 << n) - 1, &mut memo)
}

fn det_rec(m: &[Vec<Poly>], row: usize, cols: u32, memo: &mut HashMap<u32, Poly>) -> Poly {
    if cols == 0 {
        return Poly::one();
    }
    if let Some(p) = memo.get(&cols) {
        return p.clone();
    }
    let mut acc = Poly::zero();
    let mut sign_pos = true;
    for j in 0..m.len() {
        if cols & (1 << j) == 0 {
            continue;
        }
        let e = &m[row][j];
        if !e.is_zero() {
            let minor = det_rec(m, row + 1, cols & !(1 << j), memo);
            let t = e * &minor;
            acc = if sign_pos { &acc + &t } else { &acc - &t };
        }
        sign_pos = !sign_pos;
    }
    memo.insert(cols, acc.clone());
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly {
        parse_poly(s).unwrap()
    }

    #[test]
    fn natural_order_of_names() {
        assert_eq!(natural_cmp("x2", "x10"), Ordering::Less);
        assert_eq!(natural_cmp("k12", "k2"), Ordering::Greater);
        assert_eq!(natural_cmp("a", "a"), Ordering::Equal);
        assert_ne!(natural_cmp("x01", "x1"), Ordering::Equal);
    }

    #[test]
    fn arithmetic_basics() {
        let a = p("x1 + 2*x2");
        let b = p("x1 - x2");
        assert_eq!(&a * &b, p("x1^2 + x1*x2 - 2*x2^2"));
        assert_eq!(&(&a + &b) - &b, a);
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn exact_division() {
        let a = p("x^2 - y^2");
        assert_eq!(a.div_exact(&p("x - y")), Some(p("x + y")));
        assert_eq!(a.div_exact(&p("x + 2*y")), None);
    }

    #[test]
    fn derivative_and_substitution() {
        let f = p("3*x^2*y + y");
        assert_eq!(f.derivative(&Var::conc("x")), p("6*x*y"));
        let mut m = HashMap::new();
        m.insert(Var::conc("y"), p("x + 1"));
        assert_eq!(f.substitute(&m), p("3*x^3 + 3*x^2 + x + 1"));
    }

    #[test]
    fn projection_kills_other_variables() {
        let f = p("k1*x1 + k2*x2 + k3");
        let keep: BTreeSet<Var> = [Var::rate("k1"), Var::conc("x1"), Var::rate("k3")]
            .into_iter()
            .collect();
        assert_eq!(f.project(&keep), p("k1*x1 + k3"));
    }

    #[test]
    fn small_determinants() {
        let m = vec![
            vec![p("a"), p("b")],
            vec![p("c"), p("d")],
        ];
        assert_eq!(det(&m), p("a*d - b*c"));
        let id3: Vec<Vec<Poly>> = (0..3)
            .map(|i| (0..3).map(|j| Poly::int(if i == j { 1 } else { 0 })).collect())
            .collect();
        assert_eq!(det(&id3), Poly::one());
    }

    #[test]
    fn primitive_normalizes_content_and_sign() {
        assert_eq!(p("-2/3*x + 4/3").primitive(), p("x - 2"));
    }
}
