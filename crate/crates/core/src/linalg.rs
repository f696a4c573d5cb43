//! Exact linear algebra over Q.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Matrix = Vec<Vec<BigRational>>;

pub fn from_ints(rows: &[Vec<i64>]) -> Matrix {
    rows.iter()
        .map(|r| r.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
        .collect()
}

pub fn transpose(m: &Matrix) -> Matrix {
    let cols = m.first().map_or(0, |r| r.len());
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    let mut a = m.clone();
    rref(&mut a).len()
}

/// Basis of `{v : m v = 0}`, one vector per free column, scaled to
/// integer entries with positive leading entry.
pub fn nullspace(m: &Matrix, cols: usize) -> Vec<Vec<BigRational>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![BigRational::zero(); cols];
        v[free] = BigRational::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -a[row][free].clone();
        }
        out.push(integral(v));
    }
    out
}

/// Scale a rational vector to coprime integers (as rationals).
pub fn integral(v: Vec<BigRational>) -> Vec<BigRational> {
    use num_integer::Integer;
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v;
    }
    ints.into_iter().map(|x| BigRational::from_integer(x / &g)).collect()
}

pub fn det(m: &Matrix) -> BigRational {
    let n = m.len();
    let mut a = m.clone();
    let mut d = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        let inv = a[c][c].recip();
        for i in c + 1..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] * &inv;
                for j in c..n {
                    let t = &f * &a[c][j];
                    a[i][j] -= t;
                }
            }
        }
    }
    d
}

/// Solve `m x = b` for square invertible `m`.
pub fn solve(m: &Matrix, b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = m.len();
    let mut a: Matrix = m
        .iter()
        .zip(b)
        .map(|(r, bi)| r.iter().cloned().chain(std::iter::once(bi.clone())).collect())
        .collect();
    let piv = rref(&mut a);
    if piv.len() != n || piv.last() == Some(&n) {
        return None;
    }
    Some(a.iter().map(|r| r[n].clone()).collect())
}

/// Inverse of a square matrix, if it exists.
pub fn inverse(m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut a: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            row
        })
        .collect();
    let piv = rref(&mut a);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return None;
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let k = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..k).fold(BigRational::zero(), |acc, t| acc + &row[t] * &b[t][j]))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn rank_and_nullspace() {
        let m = from_ints(&[vec![1, -1, 0], vec![-1, 1, 0]]);
        assert_eq!(rank(&m), 1);
        let ns = nullspace(&m, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for row in &m {
                let s = row.iter().zip(v).fold(q(0), |a, (x, y)| a + x * y);
                assert!(s.is_zero());
            }
        }
    }

    #[test]
    fn determinant_and_inverse() {
        let m = from_ints(&[vec![2, 1], vec![7, 4]]);
        assert_eq!(det(&m), q(1));
        let inv = inverse(&m).unwrap();
        assert_eq!(inv, from_ints(&[vec![4, -1], vec![-7, 2]]));
        assert_eq!(solve(&m, &[q(3), q(11)]).unwrap(), vec![q(1), q(1)]);
        assert!(inverse(&from_ints(&[vec![1, 2], vec![2, 4]])).is_none());
    }
}
