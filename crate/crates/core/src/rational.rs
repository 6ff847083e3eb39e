//! Exact rational linear algebra for recession data.
//!
//! Every finite `f64` is a dyadic rational, so converting input data with
//! `BigRational::from_float` is lossless and the nullspace below is exact
//! with respect to the data as stored.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(x: f64) -> Q {
    BigRational::from_float(x).unwrap_or_else(Q::zero)
}

pub fn qi(x: i64) -> Q {
    Q::from_integer(BigInt::from(x))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn qvec(v: &[f64]) -> Vec<Q> {
    v.iter().map(|x| q(*x)).collect()
}

pub fn qdot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut [Vec<Q>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..cols {
        if row >= m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = Q::one() / m[row][c].clone();
        for x in m[row].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for j in 0..cols {
                    let t = &m[row][j] * &f;
                    m[r][j] = &m[r][j] - t;
                }
            }
        }
        pivots.push(c);
        row += 1;
    }
    pivots
}

/// Basis of `{v : M v = 0}`.
pub fn nullspace(rows: &[Vec<Q>], cols: usize) -> Vec<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let pivots = rref(&mut m, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

pub fn rank(rows: &[Vec<Q>], cols: usize) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, cols).len()
}

/// Projection matrix onto the orthogonal complement of `span(vs)`.
pub fn complement_projector(vs: &[Vec<Q>], d: usize) -> Vec<Vec<Q>> {
    let basis: Vec<Vec<Q>> = {
        let mut m = vs.to_vec();
        let piv = rref(&mut m, d);
        m.truncate(piv.len());
        m
    };
    let k = basis.len();
    let mut p: Vec<Vec<Q>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect();
    if k == 0 {
        return p;
    }
    // P = I - V (V^T V)^{-1} V^T with V columns = basis
    let mut gram: Vec<Vec<Q>> = (0..k)
        .map(|i| (0..k).map(|j| qdot(&basis[i], &basis[j])).collect())
        .collect();
    for (i, row) in gram.iter_mut().enumerate() {
        row.extend((0..k).map(|j| if i == j { Q::one() } else { Q::zero() }));
    }
    rref(&mut gram, k);
    let ginv: Vec<Vec<Q>> = gram.iter().map(|r| r[k..].to_vec()).collect();
    for i in 0..d {
        for j in 0..d {
            let mut s = Q::zero();
            for a in 0..k {
                for b in 0..k {
                    s += &basis[a][i] * &ginv[a][b] * &basis[b][j];
                }
            }
            p[i][j] = &p[i][j] - s;
        }
    }
    p
}

pub fn is_nonpositive(x: &Q) -> bool {
    !x.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_plane() {
        let rows = vec![qvec(&[1.0, 1.0, 0.0])];
        let ns = nullspace(&rows, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(qdot(&rows[0], v).is_zero());
        }
    }

    #[test]
    fn projector_is_idempotent() {
        let p = complement_projector(&[qvec(&[1.0, 2.0, 0.0])], 3);
        for i in 0..3 {
            for j in 0..3 {
                let pp: Q = (0..3).map(|k| &p[i][k] * &p[k][j]).fold(Q::zero(), |a, b| a + b);
                assert_eq!(pp, p[i][j]);
            }
        }
    }
}
