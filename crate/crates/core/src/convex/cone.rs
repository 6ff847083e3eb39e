//! Recession cones as `{v : M v <= 0, N v = 0}`.

use nalgebra::DMatrix;

use super::Body;
use crate::linalg;
use crate::lp::{Cmp, Lp, LpOutcome, Scalar};
use crate::rational::{self, Q};

#[derive(Debug, Clone)]
pub struct RecessionCone {
    pub dim: usize,
    pub ineq: Vec<Vec<f64>>,
    pub eq: Vec<Vec<f64>>,
    ineq_q: Vec<Vec<Q>>,
    eq_q: Vec<Vec<Q>>,
}

fn compose(rows: &[Vec<Q>], p: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let d = p.len();
    rows.iter()
        .map(|r| (0..d).map(|j| (0..d).fold(Q::from_integer(0.into()), |acc, k| acc + &r[k] * &p[k][j])).collect())
        .collect()
}

fn exact_rows(body: &Body, d: usize) -> (Vec<Vec<Q>>, Vec<Vec<Q>>) {
    match body {
        Body::Poly { a, .. } => (a.iter().map(|r| rational::qvec(r)).collect(), vec![]),
        Body::Ball { .. } => {
            let eq = (0..d).map(|i| rational::qvec(&linalg::unit(d, i))).collect();
            (vec![], eq)
        }
        Body::Quad(qe) => {
            let mut eq = Vec::new();
            for row in &qe.q_raw {
                let mut r = vec![rational::qi(0); d];
                for (k, &i) in qe.sel.iter().enumerate() {
                    r[i] = rational::q(row[k]);
                }
                eq.push(r);
            }
            let mut r = vec![rational::qi(0); d];
            for (k, &i) in qe.sel.iter().enumerate() {
                r[i] = rational::q(qe.l[k]);
            }
            r[qe.im] = rational::qi(-1);
            (vec![r], eq)
        }
        Body::Tube { base, fiber_raw, .. } => {
            let (m, n) = exact_rows(base, d);
            let vs: Vec<Vec<Q>> = fiber_raw.iter().map(|v| rational::qvec(v)).collect();
            let p = rational::complement_projector(&vs, d);
            (compose(&m, &p), compose(&n, &p))
        }
        Body::Dilation { base, .. } => exact_rows(base, d),
    }
}

impl RecessionCone {
    pub(crate) fn of(body: &Body, dim: usize) -> Self {
        let (ineq_q, eq_q) = exact_rows(body, dim);
        let conv = |rows: &[Vec<Q>]| -> Vec<Vec<f64>> {
            rows.iter().map(|r| r.iter().map(rational::to_f64).collect()).collect()
        };
        RecessionCone { dim, ineq: conv(&ineq_q), eq: conv(&eq_q), ineq_q, eq_q }
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        let scale = linalg::norm(v).max(1.0);
        self.ineq.iter().all(|r| linalg::dot(r, v) <= tol * scale * linalg::norm(r).max(1.0))
            && self.eq.iter().all(|r| linalg::dot(r, v).abs() <= tol * scale * linalg::norm(r).max(1.0))
    }

    /// Exact lineality space, orthonormalized.
    pub fn lineality(&self) -> Vec<Vec<f64>> {
        let mut rows = self.ineq_q.clone();
        rows.extend(self.eq_q.iter().cloned());
        let ns = rational::nullspace(&rows, self.dim);
        let fl: Vec<Vec<f64>> = ns.iter().map(|v| v.iter().map(rational::to_f64).collect()).collect();
        linalg::orthonormalize(&fl, 1e-12)
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality().is_empty()
    }

    /// Unit vector of the cone inside `span(dirs)`, or `None` when the cone
    /// meets the span only at 0.
    pub fn direction_in(&self, dirs: &[Vec<f64>]) -> Option<Vec<f64>> {
        if dirs.is_empty() {
            return None;
        }
        let d = self.dim;
        let k = dirs.len();
        let dmat = DMatrix::from_fn(d, k, |i, j| dirs[j][i]);
        // eliminate the equalities: w = Z y
        let z: Vec<Vec<f64>> = if self.eq.is_empty() {
            (0..k).map(|i| linalg::unit(k, i)).collect()
        } else {
            let nd = linalg::to_matrix(&self.eq, d) * &dmat;
            kernel(&nd, k)
        };
        if z.is_empty() {
            return None;
        }
        let basis: Vec<Vec<f64>> = z
            .iter()
            .map(|zc| linalg::mat_vec(&dmat, zc))
            .collect();
        let r = basis.len();
        let ineq: Vec<Vec<f64>> = self
            .ineq
            .iter()
            .map(|row| basis.iter().map(|b| linalg::dot(row, b)).collect())
            .collect();
        let found = lp_direction_in::<f64>(&ineq, r)?;
        let v = linalg::combine(&basis, &found, d);
        let v = linalg::normalized(&v)?;
        self.contains(&v, 1e-8).then_some(v)
    }

    /// Exact rational version of [`Self::direction_in`] for rational
    /// direction data (every `f64` is rational).
    pub fn direction_in_exact(&self, dirs: &[Vec<f64>]) -> Option<Vec<f64>> {
        if dirs.is_empty() {
            return None;
        }
        let d = self.dim;
        let dq: Vec<Vec<Q>> = dirs.iter().map(|v| rational::qvec(v)).collect();
        let k = dq.len();
        let apply = |row: &[Q]| -> Vec<Q> { dq.iter().map(|v| rational::qdot(row, v)).collect() };
        let neq: Vec<Vec<Q>> = self.eq_q.iter().map(|r| apply(r)).collect();
        let z = rational::nullspace(&neq, k);
        if z.is_empty() {
            return None;
        }
        let basis: Vec<Vec<Q>> = z
            .iter()
            .map(|zc| (0..d).map(|i| (0..k).fold(rational::qi(0), |acc, j| acc + &zc[j] * &dq[j][i])).collect())
            .collect();
        let ineq: Vec<Vec<Q>> = self
            .ineq_q
            .iter()
            .map(|row| basis.iter().map(|b| rational::qdot(row, b)).collect())
            .collect();
        let y = lp_direction_in::<Q>(&ineq, basis.len())?;
        let v: Vec<f64> = (0..d)
            .map(|i| rational::to_f64(&basis.iter().zip(&y).fold(rational::qi(0), |acc, (b, c)| acc + &b[i] * c)))
            .collect();
        linalg::normalized(&v)
    }
}

/// Numerical kernel basis of an `m x k` matrix.
fn kernel(m: &DMatrix<f64>, k: usize) -> Vec<Vec<f64>> {
    if m.nrows() == 0 {
        return (0..k).map(|i| linalg::unit(k, i)).collect();
    }
    let gram = m.transpose() * m;
    let eig = gram.symmetric_eigen();
    let scale = eig.eigenvalues.iter().copied().fold(1.0, f64::max);
    (0..k)
        .filter(|&i| eig.eigenvalues[i] <= 1e-20 * scale)
        .map(|i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect()
}

/// Nonzero `y` with `G y <= 0`, found by maximizing `±y_i` over the box.
fn lp_direction_in<T: Scalar>(g: &[Vec<T>], r: usize) -> Option<Vec<T>> {
    if g.is_empty() {
        let mut y = vec![T::zero(); r];
        y[0] = T::one();
        return Some(y);
    }
    let half = T::from_f64(0.5);
    for i in 0..r {
        for sign in [1.0, -1.0] {
            let mut lp = Lp::<T>::new(r);
            for row in g {
                lp.row(row.clone(), Cmp::Le, T::zero());
            }
            for j in 0..r {
                let mut e = vec![T::zero(); r];
                e[j] = T::one();
                lp.row(e.clone(), Cmp::Le, T::one());
                lp.row(e.into_iter().map(|x| -x).collect(), Cmp::Le, T::one());
            }
            let mut c = vec![T::zero(); r];
            c[i] = T::from_f64(sign);
            lp.maximize(c);
            if let LpOutcome::Optimal { x, value } = lp.solve() {
                if value > half {
                    return Some(x);
                }
            }
        }
    }
    None
}
