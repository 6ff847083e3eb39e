//! Euclidean projection onto each variant.
//!
//! Balls are radial, quadratic epigraphs solve the KKT system by bisection
//! on the multiplier, polyhedra run Dykstra's method followed by an
//! active-set polish.

use nalgebra::DVector;

use super::body::kill;
use super::{Body, ConvexError, QuadEpi};
use crate::linalg;

impl QuadEpi {
    fn project(&self, q: &[f64]) -> Result<Vec<f64>, ConvexError> {
        let u0 = self.restrict(q);
        if self.phi(&u0) <= q[self.im] {
            return Ok(q.to_vec());
        }
        let v = &self.eig.eigenvectors;
        let ev = &self.eig.eigenvalues;
        let qc = v.transpose() * &u0;
        let lc = v.transpose() * &self.l;
        let u_of = |mu: f64| -> DVector<f64> {
            let mut y = DVector::zeros(ev.len());
            for k in 0..ev.len() {
                y[k] = (qc[k] - mu * lc[k]) / (1.0 + 2.0 * mu * ev[k]);
            }
            v * y
        };
        let f = |mu: f64| self.phi(&u_of(mu)) - q[self.im] - mu;
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut grow = 0;
        while f(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
            grow += 1;
            if grow > 200 {
                return Err(ConvexError::ProjectionDidNotConverge);
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-16 * (1.0 + hi) {
                break;
            }
        }
        let u = u_of(hi);
        let mut x = q.to_vec();
        for (k, &i) in self.sel.iter().enumerate() {
            x[i] = u[k];
        }
        x[self.im] = self.phi(&u);
        Ok(x)
    }
}

/// Projection onto `{x : A x <= b, V^T x = 0}`.
pub(crate) fn project_poly(a: &[Vec<f64>], b: &[f64], eqs: &[Vec<f64>], q: &[f64]) -> Result<Vec<f64>, ConvexError> {
    let feasible = |x: &[f64], tol: f64| {
        a.iter().zip(b).all(|(r, bi)| linalg::dot(r, x) - bi <= tol * linalg::norm(r).max(1.0))
            && eqs.iter().all(|v| linalg::dot(v, x).abs() <= tol)
    };
    if feasible(q, 0.0) {
        return Ok(q.to_vec());
    }
    let norms: Vec<f64> = a.iter().map(|r| linalg::dot(r, r)).collect();
    let m = a.len();
    let mut x = if eqs.is_empty() { q.to_vec() } else { kill(q, eqs) };
    let mut incr = vec![vec![0.0; q.len()]; m];
    let mut converged = false;
    for _ in 0..20000 {
        let prev = x.clone();
        for i in 0..m {
            if norms[i] == 0.0 {
                continue;
            }
            let y = linalg::add(&x, &incr[i]);
            let viol = linalg::dot(&a[i], &y) - b[i];
            let p = if viol > 0.0 { linalg::axpy(&y, -viol / norms[i], &a[i]) } else { y.clone() };
            incr[i] = linalg::sub(&y, &p);
            x = p;
        }
        if !eqs.is_empty() {
            x = kill(&x, eqs);
        }
        if linalg::dist(&x, &prev) < 1e-15 * (1.0 + linalg::norm(&x)) {
            converged = true;
            break;
        }
    }
    // polish: least-norm step onto the active facets
    let active: Vec<usize> = (0..m)
        .filter(|&i| linalg::dot(&a[i], &x) - b[i] >= -1e-7 * linalg::norm(&a[i]).max(1.0))
        .collect();
    let mut rows: Vec<Vec<f64>> = active.iter().map(|&i| a[i].clone()).collect();
    let mut rhs: Vec<f64> = active.iter().map(|&i| b[i]).collect();
    for v in eqs {
        rows.push(v.clone());
        rhs.push(0.0);
    }
    if !rows.is_empty() {
        let am = linalg::to_matrix(&rows, q.len());
        let r: Vec<f64> = rows.iter().zip(&rhs).map(|(row, bi)| bi - linalg::dot(row, q)).collect();
        if let Some(step) = linalg::least_norm(&am, &r) {
            let polished = linalg::add(q, &step);
            if feasible(&polished, 1e-11)
                && linalg::dist(&polished, &x) < 1e-5
                && linalg::dist(&polished, q) <= linalg::dist(&x, q) + 1e-12
            {
                return Ok(polished);
            }
        }
    }
    if converged || feasible(&x, 1e-8) {
        Ok(x)
    } else {
        Err(ConvexError::ProjectionDidNotConverge)
    }
}

impl Body {
    pub(crate) fn project(&self, q: &[f64], d: usize) -> Result<Vec<f64>, ConvexError> {
        match self {
            Body::Poly { a, b } => project_poly(a, b, &[], q),
            Body::Quad(qe) => qe.project(q),
            Body::Ball { center, radius } => {
                let r = linalg::dist(q, center);
                if r <= *radius {
                    Ok(q.to_vec())
                } else {
                    Ok(linalg::axpy(center, radius / r, &linalg::sub(q, center)))
                }
            }
            Body::Tube { base, fiber, .. } => {
                let pq = kill(q, fiber);
                let along = linalg::sub(q, &pq);
                let inner = match base.as_ref() {
                    Body::Ball { center, radius } => {
                        let pc = kill(center, fiber);
                        let r = (radius * radius - linalg::dist(&pc, center).powi(2)).max(0.0).sqrt();
                        let dd = linalg::dist(&pq, &pc);
                        if dd <= r {
                            pq
                        } else {
                            linalg::axpy(&pc, r / dd, &linalg::sub(&pq, &pc))
                        }
                    }
                    Body::Poly { a, b } => project_poly(a, b, fiber, &pq)?,
                    _ => return Err(ConvexError::UnsupportedVariant("tube base".into())),
                };
                Ok(linalg::add(&inner, &along))
            }
            Body::Dilation { base, factor, center } => {
                let y = linalg::axpy(center, 1.0 / factor, &linalg::sub(q, center));
                let p = base.project(&y, d)?;
                Ok(linalg::axpy(center, *factor, &linalg::sub(&p, center)))
            }
        }
    }
}
