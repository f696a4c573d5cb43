//! Linear differential relations between signals (outputs, states, inputs)
//! with coefficients that are rational functions of the parameters.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::poly::{natural_cmp, Poly, RatFunc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SignalRole {
    Output,
    State,
    Input,
}

/// The `order`-th derivative of a named signal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signal {
    pub role: SignalRole,
    pub name: String,
    pub order: u32,
}

impl Signal {
    pub fn new(role: SignalRole, name: &str, order: u32) -> Signal {
        Signal {
            role,
            name: name.to_string(),
            order,
        }
    }

    pub fn output(name: &str, order: u32) -> Signal {
        Signal::new(SignalRole::Output, name, order)
    }

    pub fn state(name: &str, order: u32) -> Signal {
        Signal::new(SignalRole::State, name, order)
    }

    pub fn input(name: &str, order: u32) -> Signal {
        Signal::new(SignalRole::Input, name, order)
    }

    pub fn shifted(&self, by: u32) -> Signal {
        Signal {
            order: self.order + by,
            ..self.clone()
        }
    }

    /// `z1''`, `u1'`, `x2`; orders above 3 as `z1^(4)`.
    pub fn render(&self) -> String {
        match self.order {
            0..=3 => format!("{}{}", self.name, "'".repeat(self.order as usize)),
            k => format!("{}^({k})", self.name),
        }
    }
}

impl Ord for Signal {
    fn cmp(&self, other: &Signal) -> Ordering {
        self.role
            .cmp(&other.role)
            .then_with(|| natural_cmp(&self.name, &other.name))
            .then_with(|| other.order.cmp(&self.order))
    }
}

impl PartialOrd for Signal {
    fn partial_cmp(&self, other: &Signal) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// `Σ coeff · signal`, understood as `= 0` when used as a relation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearRelation {
    pub terms: BTreeMap<Signal, RatFunc>,
}

impl LinearRelation {
    pub fn new() -> LinearRelation {
        LinearRelation::default()
    }

    pub fn add(&mut self, sig: Signal, c: RatFunc) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(sig.clone()).or_insert_with(RatFunc::zero);
        *e = &*e + &c;
        if e.is_zero() {
            self.terms.remove(&sig);
        }
    }

    pub fn add_poly(&mut self, sig: Signal, c: &Poly) {
        self.add(sig, RatFunc::from_poly(c.clone()));
    }

    pub fn coefficient(&self, sig: &Signal) -> RatFunc {
        self.terms.get(sig).cloned().unwrap_or_else(RatFunc::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &RatFunc) -> LinearRelation {
        let mut out = LinearRelation::new();
        for (s, v) in &self.terms {
            out.add(s.clone(), v * c);
        }
        out
    }

    pub fn plus(&self, other: &LinearRelation) -> LinearRelation {
        let mut out = self.clone();
        for (s, v) in &other.terms {
            out.add(s.clone(), v.clone());
        }
        out
    }

    /// Apply `d^k/dt^k`; coefficients are constant in time.
    pub fn shifted(&self, k: u32) -> LinearRelation {
        LinearRelation {
            terms: self.terms.iter().map(|(s, v)| (s.shifted(k), v.clone())).collect(),
        }
    }

    /// Apply the operator `Σ_k p[k] d^k/dt^k`.
    pub fn apply_operator(&self, p: &[Poly]) -> LinearRelation {
        let mut out = LinearRelation::new();
        for (k, c) in p.iter().enumerate() {
            if !c.is_zero() {
                out = out.plus(&self.shifted(k as u32).scale(&RatFunc::from_poly(c.clone())));
            }
        }
        out
    }

    /// Highest derivative order of the named signal, if present.
    pub fn top_order(&self, role: SignalRole, name: &str) -> Option<u32> {
        self.terms
            .keys()
            .filter(|s| s.role == role && s.name == name)
            .map(|s| s.order)
            .max()
    }

    /// Rename a signal (all its derivatives).
    pub fn rename(&self, from: (SignalRole, &str), to: (SignalRole, &str)) -> LinearRelation {
        let mut out = LinearRelation::new();
        for (s, v) in &self.terms {
            let s2 = if s.role == from.0 && s.name == from.1 {
                Signal::new(to.0, to.1, s.order)
            } else {
                s.clone()
            };
            out.add(s2, v.clone());
        }
        out
    }

    /// `lhs = rhs` where terms matching `on_left` stay left and the rest
    /// move right with flipped sign.
    pub fn render_equation(&self, on_left: impl Fn(&Signal) -> bool) -> String {
        let left: Vec<(&Signal, RatFunc)> = self
            .terms
            .iter()
            .filter(|(s, _)| on_left(s))
            .map(|(s, v)| (s, v.clone()))
            .collect();
        let right: Vec<(&Signal, RatFunc)> = self
            .terms
            .iter()
            .filter(|(s, _)| !on_left(s))
            .map(|(s, v)| (s, -v))
            .collect();
        format!("{} = {}", render_sum(&left), render_sum(&right))
    }
}

/// `c1*s1 + c2*s2 - ...`, with unit coefficients omitted and sums
/// parenthesised.
pub fn render_sum(terms: &[(&Signal, RatFunc)]) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (s, c)) in terms.iter().enumerate() {
        let (neg, body) = render_coefficient(c);
        let piece = if body.is_empty() {
            s.render()
        } else {
            format!("{body}*{}", s.render())
        };
        match (k, neg) {
            (0, false) => out.push_str(&piece),
            (0, true) => {
                out.push('-');
                out.push_str(&piece);
            }
            (_, false) => {
                out.push_str(" + ");
                out.push_str(&piece);
            }
            (_, true) => {
                out.push_str(" - ");
                out.push_str(&piece);
            }
        }
    }
    out
}

/// Sign and body of a coefficient; the body is empty for ±1.
pub fn render_coefficient(c: &RatFunc) -> (bool, String) {
    if let Some(p) = c.as_poly() {
        return render_poly_coefficient(&p);
    }
    let (neg, num) = render_poly_coefficient(c.numer());
    let num = if num.is_empty() { "1".to_string() } else { num };
    let den = c.denom().render();
    let den = if c.denom().num_terms() > 1 || den.contains('*') {
        format!("({den})")
    } else {
        den
    };
    (neg, format!("{num}/{den}"))
}

fn render_poly_coefficient(p: &Poly) -> (bool, String) {
    if p.num_terms() == 1 {
        let neg = p.leading().map(|(_, c)| c < &num_rational::BigRational::from_integer(0.into())).unwrap();
        let abs = if neg { -p.clone() } else { p.clone() };
        if abs == Poly::one() {
            return (neg, String::new());
        }
        return (neg, abs.render());
    }
    (false, format!("({})", p.render()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    #[test]
    fn ordering_and_rendering() {
        let mut r = LinearRelation::new();
        r.add_poly(Signal::output("z1", 0), &parse_poly("a21*a32").unwrap());
        r.add_poly(Signal::output("z1", 2), &Poly::one());
        r.add_poly(Signal::output("z1", 1), &parse_poly("a12 + a21 + a32").unwrap());
        r.add_poly(Signal::input("u1", 1), &Poly::int(-1));
        r.add_poly(Signal::input("u1", 0), &parse_poly("-a12 - a32").unwrap());
        assert_eq!(
            r.render_equation(|s| s.role == SignalRole::Output),
            "z1'' + (a12 + a21 + a32)*z1' + a21*a32*z1 = u1' + (a12 + a32)*u1"
        );
        assert_eq!(Signal::output("z1", 5).render(), "z1^(5)");
    }

    #[test]
    fn operators() {
        let mut r = LinearRelation::new();
        r.add_poly(Signal::state("x1", 0), &Poly::one());
        let op = vec![parse_poly("k").unwrap(), Poly::one()];
        let out = r.apply_operator(&op);
        assert_eq!(out.terms.len(), 2);
        assert_eq!(out.coefficient(&Signal::state("x1", 1)), RatFunc::one());
    }
}
