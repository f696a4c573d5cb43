// Exact check of one (monomolecular network, κ, class) draw. The affine
// system A x + b = 0, W x = W x0 is assembled here from the reactions and
// solved with a local row reduction; the library's solution and its state
// classifier are then compared against it.

use crnalg::mss::{classify_state, monomolecular_class_states, sample_kappa, sample_log_uniform, AffineClassStates};
use crnalg::net::Network;
use crnalg::random::{monomolecular_network, rng};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

type Mat = Vec<Vec<BigRational>>;

/// Reduced row echelon form in place; returns pivot columns.
fn rref(m: &mut Mat) -> Vec<usize> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..cols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][c].clone().recip();
        for v in m[row].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for k in 0..cols {
                    let t = &f * &m[row][k];
                    m[r][k] -= t;
                }
            }
        }
        pivots.push(c);
        row += 1;
    }
    pivots
}

/// Basis of {v : S^T v = 0}, S with one column per reaction.
fn left_kernel(s_cols: &[Vec<BigRational>], n: usize) -> Mat {
    let mut st: Mat = s_cols.to_vec();
    let pivots = rref(&mut st);
    (0..n)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![BigRational::zero(); n];
            v[free] = BigRational::from_integer(1.into());
            for (row, &p) in st.iter().zip(&pivots) {
                v[p] = -row[free].clone();
            }
            v
        })
        .collect()
}

pub struct Draw {
    pub network: Network,
    /// Nondegenerate positive steady states found in the sampled class;
    /// an affine family wrongly classified as nondegenerate counts as 2.
    pub nondegenerate_positive: usize,
    pub library_agrees: bool,
}

pub fn check_draw(seed: u64, max_species: usize) -> Draw {
    let mut r = rng(seed);
    let network = monomolecular_network(&mut r, max_species);
    let kappa = sample_kappa(&mut r, &network);
    let sp = network.species().to_vec();
    let n = sp.len();
    let x0: Vec<BigRational> = sp.iter().map(|_| sample_log_uniform(&mut r, -2.0, 2.0)).collect();
    let idx = |s: &str| sp.iter().position(|x| x == s).unwrap();

    let mut a = vec![vec![BigRational::zero(); n]; n];
    let mut b = vec![BigRational::zero(); n];
    let mut s_cols = Vec::new();
    for rx in network.reactions() {
        let k = &kappa[&rx.label];
        let mut col = vec![BigRational::zero(); n];
        let to = rx.product.single_species().map(idx);
        if let Some(j) = to {
            col[j] += BigRational::from_integer(1.into());
        }
        match rx.reactant.single_species().map(idx) {
            Some(i) => {
                col[i] -= BigRational::from_integer(1.into());
                a[i][i] -= k;
                if let Some(j) = to {
                    a[j][i] += k;
                }
            }
            None => b[to.unwrap()] += k,
        }
        s_cols.push(col);
    }
    let w = left_kernel(&s_cols, n);

    let mut aug: Mat = a.iter().zip(&b).map(|(row, bi)| row.iter().cloned().chain([-bi.clone()]).collect()).collect();
    for row in &w {
        let t = row.iter().zip(&x0).fold(BigRational::zero(), |acc, (c, v)| acc + c * v);
        aug.push(row.iter().cloned().chain([t]).collect());
    }
    let pivots = rref(&mut aug);
    let consistent = !pivots.contains(&n);
    let dim = n - pivots.len().min(n);
    let satisfies = |x: &[BigRational]| {
        aug.iter().all(|row| {
            let lhs = row[..n].iter().zip(x).fold(BigRational::zero(), |acc, (c, v)| acc + c * v);
            lhs == row[n]
        })
    };

    let lib = monomolecular_class_states(&network, &kappa, &x0).expect("monomolecular");
    let positive = |x: &[BigRational]| x.iter().all(|v| v.is_positive());
    let (library_agrees, nondegenerate_positive) = match &lib {
        AffineClassStates::Empty => (!consistent, 0),
        AffineClassStates::Unique(x) => {
            let agrees = consistent && dim == 0 && satisfies(x);
            let nd = positive(x) && classify_state(&network, &kappa, x).map(|c| c.nondegenerate).unwrap_or(false);
            (agrees, nd as usize)
        }
        AffineClassStates::Family { dimension, point } => {
            let agrees = consistent && *dimension == dim && satisfies(point);
            let wrong = positive(point)
                && classify_state(&network, &kappa, point).map(|c| c.nondegenerate).unwrap_or(false);
            (agrees, if wrong { 2 } else { 0 })
        }
    };
    Draw {
        network,
        nondegenerate_positive,
        library_agrees,
    }
}
