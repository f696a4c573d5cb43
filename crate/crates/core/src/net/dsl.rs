//! Text format for networks and models.
//!
//! ```text
//! # comment
//! 0 -> X1 [u1]; X1 <-> X2 [a21, a12]
//! 2A + B -> 3A          # label omitted: a fresh `k<n>` is generated
//! output X1, X2
//! ```

use std::collections::HashSet;

use super::{Complex, Model, Network, Reaction};
use crate::error::{Error, Result};

/// A parsed file: reactions plus an optional output directive.
#[derive(Clone, Debug)]
pub struct Document {
    pub network: Network,
    pub outputs: Vec<String>,
}

impl Document {
    pub fn network(&self) -> &Network {
        &self.network
    }

    /// The model described by the file; errors when no outputs are declared.
    pub fn model(&self) -> Result<Model> {
        Model::new(self.network.clone(), self.outputs.clone())
    }
}

pub fn parse_network(text: &str) -> Result<Network> {
    Ok(parse_document(text)?.network)
}

pub fn parse_model(text: &str) -> Result<Model> {
    parse_document(text)?.model()
}

pub fn parse_document(text: &str) -> Result<Document> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut pending: Vec<(Complex, Complex, Option<String>, (usize, usize))> = Vec::new();
    let mut outputs = Vec::new();
    loop {
        p.skip_inline_space();
        match p.peek() {
            None => break,
            Some(';') | Some('\n') => {
                p.bump();
                continue;
            }
            Some('#') => {
                p.skip_comment();
                continue;
            }
            _ => {}
        }
        let at = (p.line, p.col);
        if p.at_keyword("output") {
            for _ in 0.."output".len() {
                p.bump();
            }
            loop {
                p.skip_inline_space();
                let name = p.ident()?;
                outputs.push(name);
                p.skip_inline_space();
                if p.peek() == Some(',') {
                    p.bump();
                } else {
                    break;
                }
            }
        } else {
            let lhs = p.complex()?;
            p.skip_inline_space();
            let reversible = if p.eat("<->") {
                true
            } else if p.eat("->") {
                false
            } else {
                return Err(p.err("expected `->` or `<->`"));
            };
            p.skip_inline_space();
            let rhs = p.complex()?;
            p.skip_inline_space();
            let labels = if p.peek() == Some('[') {
                p.bump();
                let mut ls = Vec::new();
                loop {
                    p.skip_inline_space();
                    ls.push(p.ident()?);
                    p.skip_inline_space();
                    match p.peek() {
                        Some(',') => {
                            p.bump();
                        }
                        Some(']') => {
                            p.bump();
                            break;
                        }
                        _ => return Err(p.err("expected `,` or `]`")),
                    }
                }
                ls
            } else {
                Vec::new()
            };
            let want = if reversible { 2 } else { 1 };
            if !labels.is_empty() && labels.len() != want {
                return Err(Error::Parse {
                    line: at.0,
                    column: at.1,
                    message: format!("expected {want} rate label(s), found {}", labels.len()),
                });
            }
            if lhs == rhs {
                return Err(Error::Parse {
                    line: at.0,
                    column: at.1,
                    message: format!("reactant equals product ({lhs})"),
                });
            }
            let mut it = labels.into_iter();
            pending.push((lhs.clone(), rhs.clone(), it.next(), at));
            if reversible {
                pending.push((rhs, lhs, it.next(), at));
            }
        }
        p.skip_inline_space();
        match p.peek() {
            None => break,
            Some(';') | Some('\n') => {
                p.bump();
            }
            Some('#') => p.skip_comment(),
            _ => return Err(p.err("expected `;` or end of line")),
        }
    }

    let mut used: HashSet<String> = HashSet::new();
    for (_, _, l, at) in &pending {
        if let Some(l) = l {
            if !used.insert(l.clone()) {
                return Err(Error::Parse {
                    line: at.0,
                    column: at.1,
                    message: format!("duplicate rate label `{l}`"),
                });
            }
        }
    }
    let mut fresh = 0usize;
    let mut reactions = Vec::with_capacity(pending.len());
    for (a, b, l, _) in pending {
        let label = match l {
            Some(l) => l,
            None => loop {
                fresh += 1;
                let cand = format!("k{fresh}");
                if used.insert(cand.clone()) {
                    break cand;
                }
            },
        };
        reactions.push(Reaction::new(a, b, &label));
    }
    let network = Network::new(reactions)?;
    Ok(Document { network, outputs })
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) {
        if let Some(c) = self.peek() {
            self.pos += 1;
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
    }

    fn err(&self, msg: &str) -> Error {
        let found = match self.peek() {
            Some(c) => format!("found `{c}`"),
            None => "found end of input".to_string(),
        };
        Error::Parse {
            line: self.line,
            column: self.col,
            message: format!("{msg}, {found}"),
        }
    }

    fn skip_inline_space(&mut self) {
        while let Some(c) = self.peek() {
            if c == ' ' || c == '\t' || c == '\r' {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn skip_comment(&mut self) {
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            self.bump();
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        let n = s.chars().count();
        if self.chars[self.pos..].iter().take(n).copied().eq(s.chars()) {
            for _ in 0..n {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        let n = kw.chars().count();
        self.chars[self.pos..].iter().take(n).copied().eq(kw.chars())
            && self
                .chars
                .get(self.pos + n)
                .is_some_and(|c| *c == ' ' || *c == '\t')
    }

    fn ident(&mut self) -> Result<String> {
        let mut s = String::new();
        match self.peek() {
            Some(c) if c.is_alphabetic() || c == '_' => {}
            _ => return Err(self.err("expected a name")),
        }
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        Ok(s)
    }

    fn number(&mut self) -> Option<u32> {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if s.is_empty() {
            None
        } else {
            s.parse().ok()
        }
    }

    fn complex(&mut self) -> Result<Complex> {
        let start = (self.line, self.col);
        let mut terms: Vec<(String, u32)> = Vec::new();
        loop {
            self.skip_inline_space();
            let coef = self.number();
            self.skip_inline_space();
            let name_follows = matches!(self.peek(), Some(c) if c.is_alphabetic() || c == '_');
            match (coef, name_follows) {
                (Some(0), false) if terms.is_empty() => return Ok(Complex::zero()),
                (Some(0), true) => {
                    return Err(Error::Parse {
                        line: start.0,
                        column: start.1,
                        message: "stoichiometric coefficients must be at least 1".into(),
                    })
                }
                (_, true) => {
                    let name = self.ident()?;
                    terms.push((name, coef.unwrap_or(1)));
                }
                _ => return Err(self.err("expected a complex")),
            }
            self.skip_inline_space();
            if self.peek() == Some('+') {
                self.bump();
            } else {
                break;
            }
        }
        Ok(Complex::from_terms(terms.iter().map(|(s, c)| (s.as_str(), *c))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flow_chain() {
        let n = parse_network("0 -> X1 [u1]; X1 <-> X2 [k12,k21]; X2 -> 0 [k20]").unwrap();
        assert_eq!(n.species(), &["X1".to_string(), "X2".to_string()]);
        assert_eq!(n.reactions().len(), 4);
        assert_eq!(n.complexes().len(), 3);
        assert_eq!(n.reactions()[2].label, "k21");
        assert_eq!(n.reactions()[2].reactant, Complex::species("X2"));
    }

    #[test]
    fn stoichiometric_coefficients() {
        let n = parse_network("A + B -> 3A + C [k]").unwrap();
        assert_eq!(n.reactions().len(), 1);
        let r = &n.reactions()[0];
        assert_eq!(r.reactant, Complex::from_terms([("A", 1), ("B", 1)]));
        assert_eq!(r.product, Complex::from_terms([("A", 3), ("C", 1)]));
        assert_eq!(n.species(), &["A", "B", "C"].map(String::from));
    }

    #[test]
    fn reactant_equal_to_product_is_rejected() {
        assert!(matches!(parse_network("X1 -> X1 [k]"), Err(Error::Parse { .. })));
    }

    #[test]
    fn comments_newlines_outputs() {
        let d = parse_document("# model\n0 -> X1 [u1] # in\nX1 -> 0 [a01]\n\noutput X1\n").unwrap();
        assert_eq!(d.outputs, vec!["X1".to_string()]);
        assert_eq!(d.network.reactions().len(), 2);
    }

    #[test]
    fn generated_labels_skip_used_names() {
        let n = parse_network("A -> 2A; 2A -> 3A [k1]; 4A -> 0").unwrap();
        let labels = n.labels();
        assert_eq!(labels, vec!["k2", "k1", "k3"]);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_network("A -> B [k]\nA => C [j]") {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!((line, column), (2, 3));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_network("A -> B [k]; C -> D [k]"), Err(Error::Parse { .. })));
        assert!(parse_network("A <-> B [k]").is_err());
    }
}
