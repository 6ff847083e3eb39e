//! Regularized maxima, exponential separators, nested strongly convex
//! outer approximations and the smoothing of norm combinations.

mod outer;
mod weights;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convex::{ConvexError, ConvexFunctionSpec, ConvexSetSpec, NormTerm};
use crate::geometry::AffineSubspaceR;
use crate::linalg;
use crate::sampling;

pub use outer::{outer_sequence, NestingReport, OuterOptions, SmoothingState};
pub use weights::{gauss_legendre, rmax, rmax_quadrature, rmax_with, Mollifier, SmoothMax, WeightSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmoothingError {
    #[error("weight spec needs delta > 0 and quadrature order >= 2")]
    InvalidWeight,
    #[error("profile is not strongly convex on the window")]
    NotStronglyConvex,
    #[error("the set contains an affine line")]
    LinealityNonEmpty,
    #[error("no separator found for an exterior anchor")]
    SeparatorNotFound,
    #[error("norm combination is not an irreducible family: {0}")]
    NotIrreducibleFamily(String),
    #[error(transparent)]
    Convex(#[from] ConvexError),
}

/// Value, gradient and Hessian at a point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
}

impl Jet {
    /// Smooth maximum of two jets: `u1 + g(u2 - u1)`.
    pub fn combine(&self, other: &Jet, sm: &SmoothMax) -> Jet {
        let (g, g1, g2) = sm.eval(other.value - self.value);
        let d: Vec<f64> = linalg::sub(&other.grad, &self.grad);
        let dv = nalgebra::DVector::from_column_slice(&d);
        Jet {
            value: self.value + g,
            grad: self.grad.iter().zip(&other.grad).map(|(a, b)| (1.0 - g1) * a + g1 * b).collect(),
            hess: &self.hess * (1.0 - g1) + &other.hess * g1 + &dv * dv.transpose() * g2,
        }
    }
}

/// Strongly convex profile `f` on `R^{m-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Profile {
    /// `y^T Q y + l . y + c`
    Quadratic { q: Vec<Vec<f64>>, l: Vec<f64>, c: f64 },
    /// `c (sqrt(1 + |y|^2) - 1)`, linear growth at infinity.
    Hyperbolic { c: f64 },
}

impl Profile {
    pub fn from_spec(f: &ConvexFunctionSpec) -> Result<Self, SmoothingError> {
        match f {
            ConvexFunctionSpec::Quadratic { q, l, c } => Ok(Profile::Quadratic { q: q.clone(), l: l.clone(), c: *c }),
            _ => Err(SmoothingError::NotStronglyConvex),
        }
    }

    /// `(f, grad f, hess f)` at `y`.
    pub fn jet(&self, y: &[f64]) -> (f64, Vec<f64>, DMatrix<f64>) {
        let k = y.len();
        match self {
            Profile::Quadratic { q, l, c } => {
                let qm = linalg::to_matrix(q, k);
                let qy = linalg::mat_vec(&qm, y);
                let v = linalg::dot(y, &qy) + linalg::dot(l, y) + c;
                let qs = &qm + qm.transpose();
                let g = linalg::add(&linalg::mat_vec(&qs, y), l);
                (v, g, qs)
            }
            Profile::Hyperbolic { c } => {
                let r = (1.0 + linalg::dot(y, y)).sqrt();
                let g = linalg::scale(y, c / r);
                let yv = nalgebra::DVector::from_column_slice(y);
                let h = (DMatrix::identity(k, k) / r - &yv * yv.transpose() / (r * r * r)) * *c;
                (c * (r - 1.0), g, h)
            }
        }
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        match self {
            Profile::Hyperbolic { c } => c * linalg::dot(y, y) / ((1.0 + linalg::dot(y, y)).sqrt() + 1.0),
            _ => self.jet(y).0,
        }
    }
}

/// `rho(x) = scale (exp(f(y') - y_m) - 1)` with `y` the coordinates of `x`
/// in the frame `(origin; perp, axis)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpSeparator {
    pub origin: Vec<f64>,
    pub axis: Vec<f64>,
    pub perp: Vec<Vec<f64>>,
    pub profile: Profile,
    pub scale: f64,
}

impl ExpSeparator {
    fn coords(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let r = linalg::sub(x, &self.origin);
        (self.perp.iter().map(|b| linalg::dot(b, &r)).collect(), linalg::dot(&self.axis, &r))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let (y, ym) = self.coords(x);
        self.scale * (self.profile.value(&y) - ym).exp_m1()
    }

    pub fn jet(&self, x: &[f64]) -> Jet {
        let d = x.len();
        let (y, ym) = self.coords(x);
        let (f, gf, hf) = self.profile.jet(&y);
        let e = self.scale * (f - ym).exp();
        // in frame coordinates: grad = e (gf, -1), hess = e ((gf,-1)(gf,-1)^T + diag(hf, 0))
        let mut b = DMatrix::zeros(d, d);
        for (i, row) in self.perp.iter().enumerate() {
            for j in 0..d {
                b[(i, j)] = row[j];
            }
        }
        for j in 0..d {
            b[(d - 1, j)] = self.axis[j];
        }
        let mut gy = gf.clone();
        gy.push(-1.0);
        let gyv = nalgebra::DVector::from_column_slice(&gy);
        let mut hy = &gyv * gyv.transpose();
        for i in 0..d - 1 {
            for j in 0..d - 1 {
                hy[(i, j)] += hf[(i, j)];
            }
        }
        let bt = b.transpose();
        let grad = (&bt * &gyv * e).iter().copied().collect();
        let hess = &bt * hy * &b * e;
        Jet { value: self.scale * (f - ym).exp_m1(), grad, hess }
    }
}

/// Exponential separator for the profile `f` in the frame whose base is
/// the origin and whose single direction is the `x_m` axis. `eps` is the
/// margin for which `rho <= e^{-eps} - 1` on `{x_m >= f(x') + eps}`.
pub fn exp_separator(f: &Profile, frame: &AffineSubspaceR, eps: f64) -> Result<ExpSeparator, SmoothingError> {
    if !(eps > 0.0) || frame.directions.len() != 1 {
        return Err(SmoothingError::NotStronglyConvex);
    }
    let d = frame.base.len();
    let axis = frame.directions[0].clone();
    let perp = linalg::complement(&frame.directions, d);
    if let Profile::Quadratic { q, l, .. } = f {
        if q.len() != d - 1 || l.len() != d - 1 {
            return Err(SmoothingError::NotStronglyConvex);
        }
    }
    let mut rng = sampling::rng(0x5e9a, 1);
    for _ in 0..1000 {
        let y = sampling::ball(&mut rng, d - 1, 10.0);
        if linalg::min_eigenvalue(&f.jet(&y).2) <= 0.0 {
            return Err(SmoothingError::NotStronglyConvex);
        }
    }
    Ok(ExpSeparator { origin: frame.base.clone(), axis, perp, profile: f.clone(), scale: 1.0 })
}

/// Central finite-difference Hessian, symmetrized.
pub fn hessian_fd(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> DMatrix<f64> {
    let d = x.len();
    let at = |di: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, s) in di {
            y[i] += s;
        }
        f(&y)
    };
    let f0 = f(x);
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = (at(&[(i, h)]) - 2.0 * f0 + at(&[(i, -h)])) / (h * h);
        for j in 0..i {
            let v = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)]) + at(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Smallest eigenvalue of the finite-difference Hessian. When the
/// estimate is badly conditioned, one Richardson step on `h, h/2`
/// refines it.
pub fn hessian_min_eig(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> f64 {
    let m = hessian_fd(f, x, h);
    let eig = m.clone().symmetric_eigen();
    let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    if hi > 0.0 && lo.abs() < 1e-3 * hi {
        let r = (hessian_fd(f, x, h / 2.0) * 4.0 - m) / 3.0;
        return linalg::min_eigenvalue(&r);
    }
    lo
}

/// `psi(x) = sum coef_i (sqrt(<u_i, x>^2 + eta^2) - eta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothNormCombo {
    pub terms: Vec<NormTerm>,
    pub eta: f64,
}

impl SmoothNormCombo {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let s = linalg::dot(&t.u, x);
                // sqrt(s^2 + eta^2) - eta without cancellation
                t.coef * s * s / ((s * s + self.eta * self.eta).sqrt() + self.eta)
            })
            .sum()
    }

    pub fn phi(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.coef * linalg::dot(&t.u, x).abs()).sum()
    }

    pub fn coef_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.coef).sum()
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let d = x.len();
        let mut h = DMatrix::zeros(d, d);
        for t in &self.terms {
            let s = linalg::dot(&t.u, x);
            let w = t.coef * self.eta * self.eta / (s * s + self.eta * self.eta).powf(1.5);
            let u = nalgebra::DVector::from_column_slice(&t.u);
            h += &u * u.transpose() * w;
        }
        h
    }
}

pub fn smooth_normcombo(terms: &[NormTerm], eta: f64) -> Result<SmoothNormCombo, SmoothingError> {
    if !(eta > 0.0) {
        return Err(SmoothingError::NotIrreducibleFamily("eta must be positive".into()));
    }
    let d = terms.first().map(|t| t.u.len()).ok_or_else(|| SmoothingError::NotIrreducibleFamily("no terms".into()))?;
    if terms.iter().any(|t| !(t.coef > 0.0) || t.u.len() != d) {
        return Err(SmoothingError::NotIrreducibleFamily("coefficients must be positive".into()));
    }
    let us: Vec<Vec<f64>> = terms.iter().map(|t| t.u.clone()).collect();
    if linalg::orthonormalize(&us, 1e-10).len() < d {
        return Err(SmoothingError::NotIrreducibleFamily("functionals do not span the domain".into()));
    }
    Ok(SmoothNormCombo { terms: terms.to_vec(), eta })
}

/// The norm combination `phi` behind a set spec, over its own domain:
/// `R^{2n-1}` when the `Re z_n` term is present, `R^{2n-2}` otherwise.
pub fn normcombo_terms(spec: &ConvexSetSpec) -> Option<Vec<NormTerm>> {
    match spec {
        ConvexSetSpec::Normcombo { n, c, a, b } => {
            let k = if *c > 0.0 { 2 * n - 1 } else { 2 * n - 2 };
            let mut terms = Vec::new();
            for j in 0..n - 1 {
                terms.push(NormTerm { coef: a[j], u: linalg::unit(k, 2 * j) });
                terms.push(NormTerm { coef: b[j], u: linalg::unit(k, 2 * j + 1) });
            }
            if *c > 0.0 {
                terms.push(NormTerm { coef: *c, u: linalg::unit(k, 2 * n - 2) });
            }
            Some(terms)
        }
        ConvexSetSpec::Epigraph { phi: ConvexFunctionSpec::Normcombo { terms }, .. } => Some(terms.clone()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separator_example_values() {
        let f = Profile::Quadratic { q: vec![vec![1.0]], l: vec![0.0], c: 0.0 };
        let frame = AffineSubspaceR::new(vec![0.0, 0.0], &[vec![0.0, 1.0]]);
        let rho = exp_separator(&f, &frame, 1.0).unwrap();
        assert!((rho.value(&[0.0, 2.0]) - ((-2f64).exp() - 1.0)).abs() < 1e-15);
        assert_eq!(rho.value(&[0.0, 0.0]), 0.0);
        let h = rho.jet(&[0.0, 0.0]).hess;
        // symbolic: hess of e^{x^2 - y} at 0 is [[2, 0], [0, 1]]
        assert!((h[(0, 0)] - 2.0).abs() < 1e-12 && (h[(1, 1)] - 1.0).abs() < 1e-12 && h[(0, 1)].abs() < 1e-12);
        let fd = hessian_fd(&|x| rho.value(x), &[0.0, 0.0], 1e-4);
        assert!((fd - h).amax() < 1e-4);
    }

    #[test]
    fn fd_hessian_examples() {
        let sq = |x: &[f64]| linalg::dot(x, x);
        assert!((hessian_min_eig(&sq, &[0.3, -1.2], 1e-4) - 2.0).abs() < 1e-6);
        let aff = |x: &[f64]| 3.0 * x[0] - x[1] + 1.0;
        assert!(hessian_min_eig(&aff, &[0.3, -1.2], 1e-4).abs() < 1e-6);
    }

    #[test]
    fn smooth_normcombo_rejects_degenerate_families() {
        let t = vec![NormTerm { coef: 1.0, u: vec![1.0, 0.0] }];
        assert!(smooth_normcombo(&t, 0.1).is_err());
        let one = smooth_normcombo(&[NormTerm { coef: 1.0, u: vec![1.0] }], 0.1).unwrap();
        assert_eq!(one.value(&[0.0]), 0.0);
    }

    #[test]
    fn jets_combine_consistently() {
        let sm = SmoothMax::new(&WeightSpec::new(0.1)).unwrap();
        let a = Jet { value: 0.0, grad: vec![1.0, 0.0], hess: DMatrix::identity(2, 2) };
        let b = Jet { value: 0.01, grad: vec![0.0, 1.0], hess: DMatrix::identity(2, 2) };
        let c = a.combine(&b, &sm);
        assert!(c.value >= 0.01);
        assert!(linalg::min_eigenvalue(&c.hess) > 0.0);
    }
}
