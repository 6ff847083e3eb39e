//! Small dense helpers on `&[f64]` vectors.

use nalgebra::{DMatrix, DVector};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b))
}

pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    (n > 1e-300).then(|| scale(a, 1.0 / n))
}

pub fn unit(d: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[i] = 1.0;
    e
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Vectors whose
/// residual falls below `tol` (relative to their input norm) are dropped.
pub fn orthonormalize(vs: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let n0 = norm(v);
        if n0 <= 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = dot(&w, q);
                w = axpy(&w, -c, q);
            }
        }
        let n = norm(&w);
        if n > tol * n0.max(1.0) {
            out.push(scale(&w, 1.0 / n));
        }
    }
    out
}

/// Orthonormal basis of the orthogonal complement of `span(vs)` in `R^d`.
pub fn complement(vs: &[Vec<f64>], d: usize) -> Vec<Vec<f64>> {
    let basis = orthonormalize(vs, 1e-10);
    let mut all = basis.clone();
    all.extend((0..d).map(|i| unit(d, i)));
    orthonormalize(&all, 1e-10).split_off(basis.len())
}

/// Orthogonal projection onto the span of an orthonormal family.
pub fn project_onto(x: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut p = vec![0.0; x.len()];
    for q in basis {
        p = axpy(&p, dot(x, q), q);
    }
    p
}

pub fn coords(x: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    basis.iter().map(|q| dot(x, q)).collect()
}

pub fn combine(basis: &[Vec<f64>], w: &[f64], d: usize) -> Vec<f64> {
    let mut p = vec![0.0; d];
    for (q, c) in basis.iter().zip(w) {
        p = axpy(&p, *c, q);
    }
    p
}

pub fn to_matrix(rows: &[Vec<f64>], cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

pub fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(x)).iter().copied().collect()
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Least-norm solution of `A x = b` via SVD.
pub fn least_norm(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&DVector::from_column_slice(b), 1e-12).ok()?;
    Some(x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_dimensions() {
        let c = complement(&[vec![1.0, 1.0, 0.0]], 3);
        assert_eq!(c.len(), 2);
        for q in &c {
            assert!(dot(q, &[1.0, 1.0, 0.0]).abs() < 1e-12);
        }
    }

    #[test]
    fn orthonormalize_drops_dependent() {
        let b = orthonormalize(&[vec![1.0, 0.0], vec![2.0, 0.0], vec![1.0, 1.0]], 1e-12);
        assert_eq!(b.len(), 2);
    }
}
