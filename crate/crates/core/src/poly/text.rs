//! Canonical text form: `3/2*k12*x1^2 - x2`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Monomial, Poly, Var, VarKind};
use crate::error::{Error, Result};

pub(crate) fn render(p: &Poly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().enumerate() {
        let neg = c.is_negative();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let a = c.abs();
        let mono = format!("{m:?}");
        if m.is_one() {
            out.push_str(&rat_string(&a));
        } else if a.is_one() {
            out.push_str(&mono);
        } else {
            out.push_str(&rat_string(&a));
            out.push('*');
            out.push_str(&mono);
        }
    }
    out
}

pub fn rat_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Default role assignment for parsed names.
pub fn default_kind(name: &str) -> VarKind {
    let mut cs = name.chars();
    match (cs.next(), cs.next()) {
        (Some('s'), None) => VarKind::DifferentialSymbol,
        (Some('x'), Some(c)) if c.is_ascii_digit() || c == '_' => VarKind::Concentration,
        _ => VarKind::RateConstant,
    }
}

/// Parse a polynomial using [`default_kind`] for variable roles.
pub fn parse_poly(s: &str) -> Result<Poly> {
    parse_poly_with(s, &default_kind)
}

/// Parse a polynomial with a caller-supplied role assignment.
pub fn parse_poly_with(s: &str, kind: &dyn Fn(&str) -> VarKind) -> Result<Poly> {
    let toks = tokenize(s)?;
    let mut p = Parser {
        toks,
        pos: 0,
        kind,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].1.is_ascii_digit() {
                j += 1;
            }
            let text: String = chars[i..j].iter().map(|(_, c)| *c).collect();
            out.push((Tok::Num(text.parse().unwrap()), pos));
            i = j;
        } else if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].1.is_alphanumeric() || chars[j].1 == '_') {
                j += 1;
            }
            let text: String = chars[i..j].iter().map(|(_, c)| *c).collect();
            out.push((Tok::Ident(text), pos));
            i = j;
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), pos));
            i += 1;
        } else {
            return Err(Error::Parse {
                line: 1,
                column: pos + 1,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    kind: &'a dyn Fn(&str) -> VarKind,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        let column = self
            .toks
            .get(self.pos)
            .map(|t| t.1 + 1)
            .unwrap_or_else(|| self.toks.last().map(|t| t.1 + 2).unwrap_or(1));
        Error::Parse {
            line: 1,
            column,
            message: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn eat_op(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = if self.eat_op('-') {
            -self.term()?
        } else {
            self.eat_op('+');
            self.term()?
        };
        loop {
            if self.eat_op('+') {
                acc = &acc + &self.term()?;
            } else if self.eat_op('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.power()?;
        loop {
            if self.eat_op('*') {
                acc = &acc * &self.power()?;
            } else if self.eat_op('/') {
                let d = self.power()?;
                match d.constant_value() {
                    Some(c) if !c.is_zero() => acc = acc.scale(&c.recip()),
                    _ => return Err(self.err("division only by nonzero constants")),
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.eat_op('^') {
            match self.peek().cloned() {
                Some(Tok::Num(n)) => {
                    self.pos += 1;
                    let e: u32 = n
                        .try_into()
                        .map_err(|_| self.err("exponent too large"))?;
                    Ok(base.pow(e))
                }
                _ => Err(self.err("expected integer exponent")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Poly> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Poly::constant(BigRational::from_integer(n)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let v = Var::new((self.kind)(&name), &name);
                Ok(Poly::term(BigRational::one(), Monomial::var(v)))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat_op(')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(-self.power()?)
            }
            _ => Err(self.err("expected number, name, or `(`")),
        }
    }
}
