//! Buchberger's algorithm over the rationals.
//!
//! Internally polynomials are kept primitive over the integers with dense
//! exponent vectors indexed by the ring order; results are converted back to
//! monic rational [`Poly`] values.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Monomial, Poly, Var};
use crate::error::{Error, Result};

/// Monomial order used for Gröbner computations. Ties between variables are
/// broken by the ring's variable list (earlier = larger).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonomialOrder {
    Lex,
    GrevLex,
    /// Variables in the block are strictly greater than the rest; both the
    /// block and its complement are ordered by GrevLex.
    BlockElimination(BTreeSet<Var>),
}

/// Resource caps for Buchberger's algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Budget {
    pub max_steps: u64,
    pub max_degree: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_steps: 1_000_000,
            max_degree: 60,
        }
    }
}

impl Budget {
    /// Defaults overridden by `CRNALG_GB_MAX_STEPS` / `CRNALG_GB_MAX_DEGREE`.
    pub fn from_env() -> Budget {
        let mut b = Budget::default();
        if let Some(v) = std::env::var("CRNALG_GB_MAX_STEPS")
            .ok()
            .and_then(|s| s.parse().ok())
        {
            b.max_steps = v;
        }
        if let Some(v) = std::env::var("CRNALG_GB_MAX_DEGREE")
            .ok()
            .and_then(|s| s.parse().ok())
        {
            b.max_degree = v;
        }
        b
    }
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    Lex,
    GrevLex,
    Block(usize),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct Mono {
    e: Box<[u16]>,
    deg: u32,
}

impl Mono {
    fn new(e: Box<[u16]>) -> Mono {
        let deg = e.iter().map(|&x| x as u32).sum();
        Mono { e, deg }
    }

    fn mul(&self, o: &Mono) -> Mono {
        Mono {
            e: self.e.iter().zip(o.e.iter()).map(|(a, b)| a + b).collect(),
            deg: self.deg + o.deg,
        }
    }

    fn divides(&self, o: &Mono) -> bool {
        self.deg <= o.deg && self.e.iter().zip(o.e.iter()).all(|(a, b)| a <= b)
    }

    fn div(&self, o: &Mono) -> Mono {
        Mono {
            e: self.e.iter().zip(o.e.iter()).map(|(a, b)| a - b).collect(),
            deg: self.deg - o.deg,
        }
    }

    fn lcm(&self, o: &Mono) -> Mono {
        Mono::new(self.e.iter().zip(o.e.iter()).map(|(a, b)| *a.max(b)).collect())
    }

    fn coprime(&self, o: &Mono) -> bool {
        self.e.iter().zip(o.e.iter()).all(|(a, b)| *a == 0 || *b == 0)
    }
}

fn grevlex(a: &[u16], b: &[u16], da: u32, db: u32) -> Ordering {
    da.cmp(&db).then_with(|| {
        for i in (0..a.len()).rev() {
            if a[i] != b[i] {
                return b[i].cmp(&a[i]);
            }
        }
        Ordering::Equal
    })
}

#[derive(Clone)]
struct Ctx {
    kind: Kind,
    ring: Vec<Var>,
    index: HashMap<Var, usize>,
}

impl Ctx {
    fn new(ring: &[Var], order: &MonomialOrder) -> Ctx {
        let (ring, kind) = match order {
            MonomialOrder::Lex => (ring.to_vec(), Kind::Lex),
            MonomialOrder::GrevLex => (ring.to_vec(), Kind::GrevLex),
            MonomialOrder::BlockElimination(block) => {
                let mut r: Vec<Var> = ring.iter().filter(|v| block.contains(v)).cloned().collect();
                let k = r.len();
                r.extend(ring.iter().filter(|v| !block.contains(v)).cloned());
                (r, Kind::Block(k))
            }
        };
        let index = ring.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        Ctx { kind, ring, index }
    }

    /// Same order with extra variables appended at the small end.
    fn extended(&self, extra: &[Var]) -> Ctx {
        let mut c = self.clone();
        for v in extra {
            if !c.index.contains_key(v) {
                c.index.insert(v.clone(), c.ring.len());
                c.ring.push(v.clone());
            }
        }
        c
    }

    fn cmp(&self, a: &Mono, b: &Mono) -> Ordering {
        match self.kind {
            Kind::Lex => a.e.cmp(&b.e),
            Kind::GrevLex => grevlex(&a.e, &b.e, a.deg, b.deg),
            Kind::Block(k) => {
                let da: u32 = a.e[..k].iter().map(|&x| x as u32).sum();
                let db: u32 = b.e[..k].iter().map(|&x| x as u32).sum();
                grevlex(&a.e[..k], &b.e[..k], da, db)
                    .then_with(|| grevlex(&a.e[k..], &b.e[k..], a.deg - da, b.deg - db))
            }
        }
    }

    fn to_mono(&self, m: &Monomial) -> Mono {
        let mut e = vec![0u16; self.ring.len()];
        for (v, x) in m.factors() {
            e[self.index[v]] = *x as u16;
        }
        Mono::new(e.into_boxed_slice())
    }

    fn from_mono(&self, m: &Mono) -> Monomial {
        Monomial::from_pairs(
            m.e.iter()
                .enumerate()
                .filter(|(_, &x)| x > 0)
                .map(|(i, &x)| (self.ring[i].clone(), x as u32)),
        )
    }

    fn to_ipoly(&self, p: &Poly) -> IPoly {
        let q = p.primitive();
        let mut t: Vec<(Mono, BigInt)> = q
            .terms()
            .map(|(m, c)| (self.to_mono(m), c.numer().clone()))
            .collect();
        t.sort_by(|a, b| self.cmp(&b.0, &a.0));
        let mut ip = IPoly { t };
        ip.normalize_sign();
        ip
    }

    fn to_poly(&self, p: &IPoly) -> Poly {
        let lc = BigRational::from_integer(p.t[0].1.clone());
        Poly::from_terms(
            p.t.iter()
                .map(|(m, c)| (self.from_mono(m), BigRational::from_integer(c.clone()) / &lc)),
        )
    }
}

#[derive(Clone, Debug)]
struct IPoly {
    t: Vec<(Mono, BigInt)>,
}

impl IPoly {
    fn is_zero(&self) -> bool {
        self.t.is_empty()
    }

    fn lm(&self) -> &Mono {
        &self.t[0].0
    }

    fn lc(&self) -> &BigInt {
        &self.t[0].1
    }

    fn max_degree(&self) -> u32 {
        self.t.iter().map(|(m, _)| m.deg).max().unwrap_or(0)
    }

    fn normalize_sign(&mut self) {
        if !self.t.is_empty() && self.t[0].1.is_negative() {
            for (_, c) in self.t.iter_mut() {
                *c = -&*c;
            }
        }
    }

    fn make_primitive(&mut self) {
        let mut g = BigInt::zero();
        for (_, c) in &self.t {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        if !g.is_zero() && !g.is_one() {
            for (_, c) in self.t.iter_mut() {
                *c = &*c / &g;
            }
        }
        self.normalize_sign();
    }
}

/// `a*p - b*m*g`, merging sorted term lists.
fn lincomb(ctx: &Ctx, a: &BigInt, p: &[(Mono, BigInt)], b: &BigInt, m: &Mono, g: &IPoly) -> Vec<(Mono, BigInt)> {
    let mut out = Vec::with_capacity(p.len() + g.t.len());
    let mut i = 0;
    let mut j = 0;
    let gs: Vec<(Mono, BigInt)> = g.t.iter().map(|(n, c)| (n.mul(m), c * b)).collect();
    while i < p.len() && j < gs.len() {
        match ctx.cmp(&p[i].0, &gs[j].0) {
            Ordering::Greater => {
                out.push((p[i].0.clone(), &p[i].1 * a));
                i += 1;
            }
            Ordering::Less => {
                out.push((gs[j].0.clone(), -&gs[j].1));
                j += 1;
            }
            Ordering::Equal => {
                let c = &p[i].1 * a - &gs[j].1;
                if !c.is_zero() {
                    out.push((p[i].0.clone(), c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    for t in &p[i..] {
        out.push((t.0.clone(), &t.1 * a));
    }
    for t in &gs[j..] {
        out.push((t.0.clone(), -&t.1));
    }
    out
}

struct Counter {
    steps: u64,
    budget: Budget,
}

impl Counter {
    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.budget.max_steps {
            return Err(Error::BudgetExceeded(format!(
                "more than {} reduction steps",
                self.budget.max_steps
            )));
        }
        Ok(())
    }
}

/// Full reduction of `p` by `basis`; returns a primitive remainder.
fn reduce(ctx: &Ctx, p: IPoly, basis: &[&IPoly], counter: &mut Counter) -> Result<IPoly> {
    let mut rest = p.t;
    let mut done: Vec<(Mono, BigInt)> = Vec::new();
    let mut since_content = 0u32;
    while !rest.is_empty() {
        let (lm, lc) = (&rest[0].0, &rest[0].1);
        let reducer = basis.iter().find(|g| g.lm().divides(lm));
        match reducer {
            Some(g) => {
                counter.tick()?;
                let q = lm.div(g.lm());
                let gg = lc.gcd(g.lc());
                let a = g.lc() / &gg;
                let b = lc / &gg;
                if !a.is_one() {
                    for (_, c) in done.iter_mut() {
                        *c = &*c * &a;
                    }
                }
                rest = lincomb(ctx, &a, &rest, &b, &q, g);
                since_content += 1;
                if since_content >= 16 {
                    since_content = 0;
                    let mut all = IPoly {
                        t: done.iter().chain(rest.iter()).cloned().collect(),
                    };
                    all.make_primitive();
                    let split = done.len();
                    let mut t = all.t;
                    rest = t.split_off(split);
                    done = t;
                }
            }
            None => {
                let t = rest.remove(0);
                done.push(t);
            }
        }
    }
    let mut r = IPoly { t: done };
    r.make_primitive();
    Ok(r)
}

fn spoly(ctx: &Ctx, f: &IPoly, g: &IPoly) -> IPoly {
    let l = f.lm().lcm(g.lm());
    let mf = l.div(f.lm());
    let mg = l.div(g.lm());
    let gg = f.lc().gcd(g.lc());
    let a = g.lc() / &gg;
    let b = f.lc() / &gg;
    let fs: Vec<(Mono, BigInt)> = f.t.iter().map(|(m, c)| (m.mul(&mf), c.clone())).collect();
    IPoly {
        t: lincomb(ctx, &a, &fs, &b, &mg, g),
    }
}

#[derive(Clone)]
struct Pair {
    i: usize,
    j: usize,
    lcm: Mono,
}

/// A reduced Gröbner basis together with the order it was computed for.
#[derive(Clone)]
pub struct GroebnerBasis {
    ctx: Ctx,
    order: MonomialOrder,
    ipolys: Vec<IPoly>,
    polys: Vec<Poly>,
    steps: u64,
}

impl std::fmt::Debug for GroebnerBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroebnerBasis")
            .field("order", &self.order)
            .field("polys", &self.polys)
            .finish()
    }
}

impl GroebnerBasis {
    /// Compute the reduced Gröbner basis of `gens` in the polynomial ring on
    /// `ring` (earlier variables are larger).
    pub fn compute(gens: &[Poly], ring: &[Var], order: &MonomialOrder, budget: Budget) -> Result<GroebnerBasis> {
        let ctx = Ctx::new(ring, order);
        for g in gens {
            for v in g.vars() {
                if !ctx.index.contains_key(&v) {
                    return Err(Error::Invalid(format!("variable {v} is not in the ring")));
                }
            }
            if g.total_degree() > budget.max_degree {
                return Err(Error::BudgetExceeded(format!(
                    "input degree exceeds {}",
                    budget.max_degree
                )));
            }
        }
        let mut counter = Counter { steps: 0, budget };
        let mut basis: Vec<IPoly> = Vec::new();
        let mut active: Vec<bool> = Vec::new();
        let mut pairs: Vec<Pair> = Vec::new();

        let mut input: Vec<IPoly> = gens
            .iter()
            .filter(|g| !g.is_zero())
            .map(|g| ctx.to_ipoly(g))
            .collect();
        input.sort_by(|a, b| ctx.cmp(a.lm(), b.lm()));
        for f in input {
            let refs: Vec<&IPoly> = basis
                .iter()
                .zip(active.iter())
                .filter(|(_, a)| **a)
                .map(|(g, _)| g)
                .collect();
            let h = reduce(&ctx, f, &refs, &mut counter)?;
            if h.is_zero() {
                continue;
            }
            if h.lm().deg == 0 {
                return Ok(GroebnerBasis::unit(ctx, order.clone(), counter.steps));
            }
            update(&mut basis, &mut active, &mut pairs, h);
        }

        while !pairs.is_empty() {
            let mut best = 0;
            for k in 1..pairs.len() {
                let (a, b) = (&pairs[k], &pairs[best]);
                let o = a
                    .lcm
                    .deg
                    .cmp(&b.lcm.deg)
                    .then_with(|| ctx.cmp(&a.lcm, &b.lcm))
                    .then_with(|| (a.j, a.i).cmp(&(b.j, b.i)));
                if o == Ordering::Less {
                    best = k;
                }
            }
            let pr = pairs.swap_remove(best);
            let s = spoly(&ctx, &basis[pr.i], &basis[pr.j]);
            counter.tick()?;
            let refs: Vec<&IPoly> = basis
                .iter()
                .zip(active.iter())
                .filter(|(_, a)| **a)
                .map(|(g, _)| g)
                .collect();
            let h = reduce(&ctx, s, &refs, &mut counter)?;
            if h.is_zero() {
                continue;
            }
            if h.lm().deg == 0 {
                return Ok(GroebnerBasis::unit(ctx, order.clone(), counter.steps));
            }
            if h.max_degree() > budget.max_degree {
                return Err(Error::BudgetExceeded(format!(
                    "intermediate degree exceeds {}",
                    budget.max_degree
                )));
            }
            update(&mut basis, &mut active, &mut pairs, h);
        }

        // Minimal basis, then inter-reduce.
        let mut minimal: Vec<IPoly> = Vec::new();
        let cands: Vec<&IPoly> = basis
            .iter()
            .zip(active.iter())
            .filter(|(_, a)| **a)
            .map(|(g, _)| g)
            .collect();
        for (k, g) in cands.iter().enumerate() {
            let redundant = cands.iter().enumerate().any(|(l, h)| {
                l != k
                    && h.lm().divides(g.lm())
                    && (h.lm() != g.lm() || l < k)
            });
            if !redundant {
                minimal.push((*g).clone());
            }
        }
        let mut reduced = Vec::with_capacity(minimal.len());
        for k in 0..minimal.len() {
            let head = minimal[k].t[0].clone();
            let others: Vec<&IPoly> = minimal
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != k)
                .map(|(_, g)| g)
                .collect();
            let tail = IPoly {
                t: minimal[k].t[1..].to_vec(),
            };
            // Reduce the tail while keeping the head: reduce head+tail where
            // the head is irreducible by the others (minimality).
            let mut whole = IPoly {
                t: std::iter::once(head).chain(tail.t).collect(),
            };
            whole = reduce(&ctx, whole, &others, &mut counter)?;
            reduced.push(whole);
        }
        reduced.sort_by(|a, b| ctx.cmp(a.lm(), b.lm()));
        let polys = reduced.iter().map(|p| ctx.to_poly(p)).collect();
        Ok(GroebnerBasis {
            ctx,
            order: order.clone(),
            ipolys: reduced,
            polys,
            steps: counter.steps,
        })
    }

    fn unit(ctx: Ctx, order: MonomialOrder, steps: u64) -> GroebnerBasis {
        let e = vec![0u16; ctx.ring.len()].into_boxed_slice();
        let one = IPoly {
            t: vec![(Mono::new(e), BigInt::one())],
        };
        GroebnerBasis {
            ctx,
            order,
            ipolys: vec![one],
            polys: vec![Poly::one()],
            steps,
        }
    }

    /// Basis elements, monic, sorted by increasing leading monomial.
    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    /// Ring variables in the internal order (largest first).
    pub fn ring(&self) -> &[Var] {
        &self.ctx.ring
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn is_unit(&self) -> bool {
        self.polys.len() == 1 && self.polys[0].is_constant()
    }

    /// Leading monomials in the basis order.
    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.ipolys.iter().map(|p| self.ctx.from_mono(p.lm())).collect()
    }

    /// Leading term of `p` under this basis' order.
    pub fn leading_monomial_of(&self, p: &Poly) -> Option<Monomial> {
        if p.is_zero() {
            return None;
        }
        let extra: Vec<Var> = p.vars().into_iter().collect();
        let ctx = self.ctx.extended(&extra);
        Some(ctx.from_mono(ctx.to_ipoly(p).lm()))
    }

    /// Normal form of `p` (up to a nonzero rational factor it is the unique
    /// remainder; returned monic).
    pub fn normal_form(&self, p: &Poly) -> Poly {
        if p.is_zero() {
            return Poly::zero();
        }
        let extra: Vec<Var> = p.vars().into_iter().collect();
        let ctx = self.ctx.extended(&extra);
        let basis: Vec<IPoly> = self
            .ipolys
            .iter()
            .map(|g| {
                let mut t = g.t.clone();
                for (m, _) in t.iter_mut() {
                    let mut e = m.e.to_vec();
                    e.resize(ctx.ring.len(), 0);
                    *m = Mono::new(e.into_boxed_slice());
                }
                IPoly { t }
            })
            .collect();
        let refs: Vec<&IPoly> = basis.iter().collect();
        let mut counter = Counter {
            steps: 0,
            budget: Budget {
                max_steps: u64::MAX,
                max_degree: u32::MAX,
            },
        };
        let r = reduce(&ctx, ctx.to_ipoly(p), &refs, &mut counter).expect("unbounded budget");
        if r.is_zero() {
            Poly::zero()
        } else {
            ctx.to_poly(&r)
        }
    }

    pub fn contains(&self, p: &Poly) -> bool {
        self.normal_form(p).is_zero()
    }
}

/// Gebauer–Möller update: add `h` to the basis and refresh the pair set.
fn update(basis: &mut Vec<IPoly>, active: &mut Vec<bool>, pairs: &mut Vec<Pair>, h: IPoly) {
    let hidx = basis.len();
    let hlm = h.lm().clone();
    let cand: Vec<Pair> = (0..basis.len())
        .filter(|&k| active[k])
        .map(|k| Pair {
            i: k,
            j: hidx,
            lcm: basis[k].lm().lcm(&hlm),
        })
        .collect();

    // Chain criterion among the new pairs.
    let mut kept: Vec<Pair> = Vec::new();
    for (a, p) in cand.iter().enumerate() {
        let coprime = basis[p.i].lm().coprime(&hlm);
        let dominated = !coprime
            && cand.iter().enumerate().any(|(b, q)| {
                b != a
                    && q.lcm.divides(&p.lcm)
                    && (q.lcm != p.lcm || b < a)
            });
        if !dominated {
            kept.push(p.clone());
        }
    }
    // Among kept pairs with equal lcm keep one; drop coprime ones.
    let mut fresh: Vec<Pair> = Vec::new();
    for p in kept {
        let coprime = basis[p.i].lm().coprime(&hlm);
        if coprime {
            continue;
        }
        if fresh.iter().any(|q| q.lcm == p.lcm) {
            continue;
        }
        fresh.push(p);
    }

    // Old pairs made redundant by h.
    pairs.retain(|p| {
        !(hlm.divides(&p.lcm)
            && basis[p.i].lm().lcm(&hlm) != p.lcm
            && basis[p.j].lm().lcm(&hlm) != p.lcm)
    });
    pairs.extend(fresh);

    for k in 0..basis.len() {
        if active[k] && hlm.divides(basis[k].lm()) {
            active[k] = false;
        }
    }
    basis.push(h);
    active.push(true);
}
