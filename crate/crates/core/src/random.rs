//! Seeded generators for random networks, glue instances and compartmental
//! models. Every generator draws from a caller-supplied ChaCha8 stream, so
//! an instance is reproducible from its seed alone.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::net::{Complex, Model, Network, Reaction};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn x(i: usize) -> String {
    format!("X{i}")
}

/// Label of the edge `Xi -> Xj` (`j = 0` for an outflow).
fn edge_label(i: usize, j: usize) -> String {
    format!("a{j}{i}")
}

/// Two networks to be glued, plus the data the generator was asked to
/// respect.
#[derive(Clone, Debug)]
pub struct GlueInstance {
    pub n1: Network,
    pub n2: Network,
    /// Species shared by construction (glue species or shared-reaction
    /// endpoints); empty for general instances.
    pub glue: Vec<String>,
    /// Shared reactions by construction.
    pub shared: Vec<Reaction>,
}

impl GlueInstance {
    /// Both operands in the text format, for reproducing failures.
    pub fn to_dsl(&self) -> String {
        format!("# N1\n{}# N2\n{}", self.n1.to_dsl(), self.n2.to_dsl())
    }
}

fn random_complex(rng: &mut ChaCha8Rng, species: usize) -> Complex {
    let a = rng.random_range(1..=species);
    match rng.random_range(0..10) {
        0 => Complex::zero(),
        1..=5 => Complex::species(&x(a)),
        6 | 7 => Complex::from_terms([(x(a).as_str(), 2)]),
        _ => {
            let b = rng.random_range(1..=species);
            if a == b {
                Complex::from_terms([(x(a).as_str(), 2)])
            } else {
                Complex::from_terms([(x(a).as_str(), 1), (x(b).as_str(), 1)])
            }
        }
    }
}

/// At most bimolecular networks on at most `max_species` species sharing
/// some complexes and reactions. Each reaction of a common pool goes to N1,
/// N2 or both, so shared reactions carry the same label.
pub fn glue_instance(rng: &mut ChaCha8Rng, max_species: usize) -> GlueInstance {
    let species = rng.random_range(2..=max_species.max(2));
    let target = rng.random_range(3..=6);
    let mut pool: Vec<Reaction> = Vec::new();
    let mut attempts = 0;
    while pool.len() < target && attempts < 200 {
        attempts += 1;
        let y = random_complex(rng, species);
        let yp = random_complex(rng, species);
        if y == yp || pool.iter().any(|r| r.reactant == y && r.product == yp) {
            continue;
        }
        let label = format!("k{}", pool.len() + 1);
        pool.push(Reaction::new(y, yp, &label));
    }
    loop {
        let mut r1 = Vec::new();
        let mut r2 = Vec::new();
        let mut shared = Vec::new();
        for r in &pool {
            match rng.random_range(0..5) {
                0 | 1 => r1.push(r.clone()),
                2 | 3 => r2.push(r.clone()),
                _ => {
                    r1.push(r.clone());
                    r2.push(r.clone());
                    shared.push(r.clone());
                }
            }
        }
        if r1.is_empty() || r2.is_empty() {
            continue;
        }
        return GlueInstance {
            n1: Network::new(r1).expect("pool reactions are valid"),
            n2: Network::new(r2).expect("pool reactions are valid"),
            glue: Vec::new(),
            shared,
        };
    }
}

/// Random edges on `nodes` so that every node lies on some edge. `allowed`
/// filters directed edges; `extra` more edges are tried afterwards.
fn connected_edges(
    rng: &mut ChaCha8Rng,
    nodes: &[usize],
    extra: usize,
    allowed: &dyn Fn(usize, usize) -> bool,
) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut order = nodes.to_vec();
    order.shuffle(rng);
    for k in 1..order.len() {
        let v = order[k];
        let mut tries = 0;
        loop {
            tries += 1;
            let u = order[rng.random_range(0..k)];
            let (a, b) = if rng.random_bool(0.5) { (u, v) } else { (v, u) };
            let (a, b) = if allowed(a, b) { (a, b) } else { (b, a) };
            if allowed(a, b) && !edges.contains(&(a, b)) {
                edges.push((a, b));
                break;
            }
            if tries > 50 {
                break;
            }
        }
    }
    for _ in 0..extra {
        let a = nodes[rng.random_range(0..nodes.len())];
        let b = nodes[rng.random_range(0..nodes.len())];
        if a != b && allowed(a, b) && !edges.contains(&(a, b)) {
            edges.push((a, b));
        }
    }
    edges
}

fn mono_network(edges: &[(usize, usize)]) -> Network {
    Network::new(
        edges
            .iter()
            .map(|&(a, b)| Reaction::new(Complex::species(&x(a)), Complex::species(&x(b)), &edge_label(a, b)))
            .collect(),
    )
    .expect("distinct edges with distinct labels")
}

/// Monomolecular networks without the zero complex on `X1..Xk` and
/// `Xk..Xn` (`n <= max_species`), glued at `Xk`. With `unidirectional`,
/// every reaction into `Xk` comes from one operand and every reaction out of
/// it goes to the other.
pub fn mono_glue_species(rng: &mut ChaCha8Rng, max_species: usize, unidirectional: bool) -> GlueInstance {
    let n = rng.random_range(3..=max_species.max(3));
    let k = rng.random_range(2..n);
    let left: Vec<usize> = (1..=k).collect();
    let right: Vec<usize> = (k..=n).collect();
    let upstream_first = rng.random_bool(0.5);
    let extra1 = rng.random_range(0..=left.len());
    let extra2 = rng.random_range(0..=right.len());
    let e1 = connected_edges(rng, &left, extra1, &|a, b| {
        !unidirectional || if upstream_first { a != k } else { b != k }
    });
    let e2 = connected_edges(rng, &right, extra2, &|a, b| {
        !unidirectional || if upstream_first { b != k } else { a != k }
    });
    GlueInstance {
        n1: mono_network(&e1),
        n2: mono_network(&e2),
        glue: vec![x(k)],
        shared: Vec::new(),
    }
}

/// Monomolecular networks without the zero complex glued over `Xj1 -> Xj2`
/// (and its reverse when `reversible`), where `Xj1` touches no other
/// reaction of N2 and `Xj2` no other reaction of N1.
pub fn mono_glue_reaction(rng: &mut ChaCha8Rng, max_species: usize, reversible: bool) -> GlueInstance {
    let n = rng.random_range(2..=max_species.max(2));
    let a = rng.random_range(0..=n - 2);
    let (j1, j2) = (a + 1, a + 2);
    let mut shared = vec![(j1, j2)];
    if reversible {
        shared.push((j2, j1));
    }
    let left: Vec<usize> = (1..=j1).collect();
    let right: Vec<usize> = (j2..=n).collect();
    let extra1 = rng.random_range(0..=left.len());
    let extra2 = rng.random_range(0..=right.len());
    let mut e1 = connected_edges(rng, &left, extra1, &|_, _| true);
    let mut e2 = connected_edges(rng, &right, extra2, &|_, _| true);
    e1.extend(shared.iter().cloned());
    e2.extend(shared.iter().cloned());
    let n1 = mono_network(&e1);
    let shared_r: Vec<Reaction> = n1
        .reactions()
        .iter()
        .filter(|r| shared.iter().any(|&(p, q)| r.label == edge_label(p, q)))
        .cloned()
        .collect();
    GlueInstance {
        n1,
        n2: mono_network(&e2),
        glue: vec![x(j1), x(j2)],
        shared: shared_r,
    }
}

/// Shape of a random linear compartmental model.
#[derive(Clone, Debug)]
pub struct ModelShape {
    /// Compartments are `X<first> .. X<first+size-1>`.
    pub first: usize,
    pub size: usize,
    /// The non-flow subnetwork is strongly connected (a random Hamiltonian
    /// cycle plus extra edges); otherwise only every compartment is on some
    /// edge.
    pub strongly_connected: bool,
    /// Probability of a leak at each compartment.
    pub leak_prob: f64,
    /// Probability of an inflow at each compartment; at least one is added.
    pub inflow_prob: f64,
    pub outputs: usize,
}

/// A random linear compartmental model. Edge labels are `a<j><i>` for
/// `Xi -> Xj`, leaks `a0<i>` and inflows `u<i>`.
pub fn compartmental_model(rng: &mut ChaCha8Rng, shape: &ModelShape) -> Model {
    let nodes: Vec<usize> = (shape.first..shape.first + shape.size).collect();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    if nodes.len() > 1 {
        if shape.strongly_connected {
            let mut cyc = nodes.clone();
            cyc.shuffle(rng);
            for k in 0..cyc.len() {
                let e = (cyc[k], cyc[(k + 1) % cyc.len()]);
                if !edges.contains(&e) {
                    edges.push(e);
                }
            }
            for _ in 0..rng.random_range(0..=nodes.len()) {
                let a = nodes[rng.random_range(0..nodes.len())];
                let b = nodes[rng.random_range(0..nodes.len())];
                if a != b && !edges.contains(&(a, b)) {
                    edges.push((a, b));
                }
            }
        } else {
            let extra = rng.random_range(0..=nodes.len());
            edges = connected_edges(rng, &nodes, extra, &|_, _| true);
        }
    }
    let mut reactions: Vec<Reaction> = edges
        .iter()
        .map(|&(a, b)| Reaction::new(Complex::species(&x(a)), Complex::species(&x(b)), &edge_label(a, b)))
        .collect();
    let mut inflows: Vec<usize> = nodes.iter().cloned().filter(|_| rng.random_bool(shape.inflow_prob)).collect();
    if inflows.is_empty() {
        inflows.push(nodes[rng.random_range(0..nodes.len())]);
    }
    for &i in &inflows {
        reactions.push(Reaction::new(Complex::zero(), Complex::species(&x(i)), &format!("u{i}")));
    }
    for &i in &nodes {
        if rng.random_bool(shape.leak_prob) {
            reactions.push(Reaction::new(Complex::species(&x(i)), Complex::zero(), &edge_label(i, 0)));
        }
    }
    let order: Vec<String> = nodes.iter().map(|&i| x(i)).collect();
    let net = Network::with_species_order(&order, reactions).expect("generated reactions are valid");
    let mut outs = order.clone();
    outs.shuffle(rng);
    outs.truncate(shape.outputs.clamp(1, order.len()));
    Model::new(net, outs).expect("outputs are species")
}

/// Random monomolecular network (zero complex allowed) on `X1..Xn`, for
/// multistationarity property tests.
pub fn monomolecular_network(rng: &mut ChaCha8Rng, max_species: usize) -> Network {
    let n = rng.random_range(1..=max_species.max(1));
    let mut reactions = Vec::new();
    let target = rng.random_range(1..=2 * n + 1);
    let mut attempts = 0;
    while reactions.len() < target && attempts < 100 {
        attempts += 1;
        let pick = |rng: &mut ChaCha8Rng| {
            let i = rng.random_range(0..=n);
            if i == 0 {
                Complex::zero()
            } else {
                Complex::species(&x(i))
            }
        };
        let y = pick(rng);
        let yp = pick(rng);
        if y == yp || reactions.iter().any(|r: &Reaction| r.reactant == y && r.product == yp) {
            continue;
        }
        let label = format!("k{}", reactions.len() + 1);
        reactions.push(Reaction::new(y, yp, &label));
    }
    if reactions.is_empty() {
        reactions.push(Reaction::new(Complex::zero(), Complex::species(&x(1)), "k1"));
    }
    Network::new(reactions).expect("generated reactions are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible() {
        let a = glue_instance(&mut rng(7), 6);
        let b = glue_instance(&mut rng(7), 6);
        assert_eq!(a.n1, b.n1);
        assert_eq!(a.n2, b.n2);
    }

    #[test]
    fn species_glue_shares_one_species() {
        for seed in 0..50 {
            let g = mono_glue_species(&mut rng(seed), 8, true);
            let common: Vec<_> = g.n1.species().iter().filter(|s| g.n2.has_species(s)).collect();
            assert_eq!(common, vec![&g.glue[0]], "seed {seed}");
            assert!(g.n1.is_monomolecular() && !g.n1.has_zero_complex());
        }
    }

    #[test]
    fn reaction_glue_respects_hypotheses() {
        for seed in 0..50 {
            let g = mono_glue_reaction(&mut rng(seed), 8, seed % 2 == 0);
            let (j1, j2) = (&g.glue[0], &g.glue[1]);
            for r in g.n2.reactions() {
                if !g.shared.iter().any(|s| s.same_edge(r)) {
                    assert_ne!(r.reactant.single_species(), Some(j1.as_str()));
                    assert_ne!(r.product.single_species(), Some(j1.as_str()));
                }
            }
            for r in g.n1.reactions() {
                if !g.shared.iter().any(|s| s.same_edge(r)) {
                    assert_ne!(r.reactant.single_species(), Some(j2.as_str()));
                    assert_ne!(r.product.single_species(), Some(j2.as_str()));
                }
            }
        }
    }

    #[test]
    fn strongly_connected_models() {
        let shape = ModelShape {
            first: 1,
            size: 4,
            strongly_connected: true,
            leak_prob: 0.0,
            inflow_prob: 0.3,
            outputs: 1,
        };
        for seed in 0..20 {
            let m = compartmental_model(&mut rng(seed), &shape);
            assert!(crate::net::non_flow_subnetwork(m.network()).is_strongly_connected().unwrap());
            assert!(!m.inputs().is_empty());
        }
    }
}
