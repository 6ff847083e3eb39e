//! Complex-affine linear algebra on `C^n`, realified as interleaved
//! `(x_1, y_1, ..., x_n, y_n)` with `z_j = x_j + i y_j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CHART_TOL: f64 = 1e-14;
pub const ORTHO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point lies on the degenerate locus of the chart")]
    DegenerateChart,
    #[error("gradient vanishes")]
    ZeroGradient,
    #[error("point is not on the subspace (residual {0:.3e})")]
    PointNotOnSubspace(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type C = Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint(pub Vec<C>);

impl ComplexPoint {
    pub fn zeros(n: usize) -> Self {
        ComplexPoint(vec![C::new(0.0, 0.0); n])
    }
    pub fn dim(&self) -> usize {
        self.0.len()
    }
    pub fn realify(&self) -> Vec<f64> {
        realify(&self.0)
    }
    pub fn from_real(x: &[f64]) -> Self {
        ComplexPoint(complexify(x))
    }
}

pub fn realify(z: &[C]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub fn complexify(x: &[f64]) -> Vec<C> {
    x.chunks(2).map(|p| C::new(p[0], p.get(1).copied().unwrap_or(0.0))).collect()
}

/// Multiplication by `i` in real coordinates.
pub fn j_op(x: &[f64]) -> Vec<f64> {
    x.chunks(2).flat_map(|p| [-p[1], p[0]]).collect()
}

/// Hermitian product, linear in the first slot: `sum z_j conj(w_j)`.
pub fn herm(z: &[C], w: &[C]) -> C {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

pub fn cnorm(z: &[C]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn caxpy(a: &[C], s: C, b: &[C]) -> Vec<C> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// Complex modified Gram-Schmidt with re-orthogonalization.
pub fn orthonormalize_c(vs: &[Vec<C>], tol: f64) -> Vec<Vec<C>> {
    let mut out: Vec<Vec<C>> = Vec::new();
    for v in vs {
        let n0 = cnorm(v);
        if n0 <= 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = herm(&w, q);
                w = caxpy(&w, -c, q);
            }
        }
        let n = cnorm(&w);
        if n > tol * n0.max(1.0) {
            out.push(w.iter().map(|x| x / n).collect());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineSubspaceC {
    pub base: ComplexPoint,
    pub directions: Vec<Vec<C>>,
}

impl AffineSubspaceC {
    /// Orthonormalizes `spanning` before storing it.
    pub fn new(base: ComplexPoint, spanning: &[Vec<C>]) -> Self {
        let directions = orthonormalize_c(spanning, ORTHO_TOL);
        AffineSubspaceC { base, directions }
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    pub fn ambient(&self) -> usize {
        self.base.dim()
    }

    /// The complex hyperplane `{z : <z, a> = beta}`.
    pub fn hyperplane(a: &[C], beta: C) -> Self {
        let n = a.len();
        let na = cnorm(a);
        let base = ComplexPoint(a.iter().map(|x| x * beta / (na * na)).collect());
        let mut span: Vec<Vec<C>> = vec![a.iter().map(|x| x / na).collect()];
        for i in 0..n {
            let mut e = vec![C::new(0.0, 0.0); n];
            e[i] = C::new(1.0, 0.0);
            span.push(e);
        }
        let mut dirs = orthonormalize_c(&span, 1e-10);
        dirs.remove(0);
        AffineSubspaceC { base, directions: dirs }
    }

    /// Residual of `z` from the subspace.
    pub fn residual(&self, z: &[C]) -> f64 {
        let mut w: Vec<C> = z.iter().zip(&self.base.0).map(|(a, b)| a - b).collect();
        for d in &self.directions {
            let c = herm(&w, d);
            w = caxpy(&w, -c, d);
        }
        cnorm(&w)
    }

    pub fn point(&self, coeffs: &[C]) -> ComplexPoint {
        let mut z = self.base.0.clone();
        for (d, c) in self.directions.iter().zip(coeffs) {
            z = caxpy(&z, *c, d);
        }
        ComplexPoint(z)
    }

    pub fn realify(&self) -> AffineSubspaceR {
        let mut dirs = Vec::with_capacity(2 * self.dim());
        for d in &self.directions {
            let r = realify(d);
            let jr = j_op(&r);
            dirs.push(r);
            dirs.push(jr);
        }
        AffineSubspaceR { base: self.base.realify(), directions: dirs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineSubspaceR {
    pub base: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

impl AffineSubspaceR {
    pub fn new(base: Vec<f64>, spanning: &[Vec<f64>]) -> Self {
        let directions = crate::linalg::orthonormalize(spanning, ORTHO_TOL);
        AffineSubspaceR { base, directions }
    }
    pub fn dim(&self) -> usize {
        self.directions.len()
    }
    pub fn point(&self, w: &[f64]) -> Vec<f64> {
        let mut x = self.base.clone();
        for (d, c) in self.directions.iter().zip(w) {
            x = crate::linalg::axpy(&x, *c, d);
        }
        x
    }
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let rel = crate::linalg::sub(x, &self.base);
        crate::linalg::add(&self.base, &crate::linalg::project_onto(&rel, &self.directions))
    }
}

pub fn cayley_forward(w: &ComplexPoint) -> Result<ComplexPoint, GeometryError> {
    let n = w.dim();
    let wn = w.0[n - 1];
    let den = C::new(1.0, 0.0) - wn;
    if den.norm() <= CHART_TOL {
        return Err(GeometryError::DegenerateChart);
    }
    let i = C::new(0.0, 1.0);
    let mut z: Vec<C> = w.0[..n - 1].iter().map(|x| i * x / den).collect();
    z.push(i * (C::new(1.0, 0.0) + wn) / den);
    Ok(ComplexPoint(z))
}

pub fn cayley_inverse(z: &ComplexPoint) -> Result<ComplexPoint, GeometryError> {
    let n = z.dim();
    let i = C::new(0.0, 1.0);
    let zn = z.0[n - 1];
    let den = zn + i;
    if den.norm() <= CHART_TOL {
        return Err(GeometryError::DegenerateChart);
    }
    let mut w: Vec<C> = z.0[..n - 1].iter().map(|x| 2.0 * x / den).collect();
    w.push((zn - i) / den);
    Ok(ComplexPoint(w))
}

/// `|(Im z_n - |z'|^2) - (1 - |w|^2) / |1 - w_n|^2|` for `z` the image of `w`.
pub fn cayley_identity_residual(w: &ComplexPoint) -> Result<f64, GeometryError> {
    let z = cayley_forward(w)?;
    let n = w.dim();
    let lhs = z.0[n - 1].im - z.0[..n - 1].iter().map(|x| x.norm_sqr()).sum::<f64>();
    let rhs = (1.0 - w.0.iter().map(|x| x.norm_sqr()).sum::<f64>()) / (C::new(1.0, 0.0) - w.0[n - 1]).norm_sqr();
    Ok((lhs - rhs).abs())
}

/// Complex tangent hyperplane `{v : sum grad_j v_j = 0}` through `p`.
/// `grad` holds the holomorphic partials `d rho / d z_j`.
pub fn complex_tangent(grad: &[C], p: &ComplexPoint) -> Result<AffineSubspaceC, GeometryError> {
    if grad.len() != p.dim() {
        return Err(GeometryError::DimensionMismatch { expected: p.dim(), got: grad.len() });
    }
    if cnorm(grad) <= ORTHO_TOL {
        return Err(GeometryError::ZeroGradient);
    }
    // sum grad_j v_j = <v, conj(grad)>
    let a: Vec<C> = grad.iter().map(|g| g.conj()).collect();
    let h = AffineSubspaceC::hyperplane(&a, C::new(0.0, 0.0));
    Ok(AffineSubspaceC { base: p.clone(), directions: h.directions })
}

/// Holomorphic partials from the real gradient of `rho` in realified
/// coordinates: `d/dz_j = (d/dx_j - i d/dy_j) / 2`.
pub fn holomorphic_gradient(real_grad: &[f64]) -> Vec<C> {
    real_grad.chunks(2).map(|p| C::new(p[0], -p[1]) * 0.5).collect()
}

/// Conormal `a` with `T^C = {v : <v, a> = 0}` for a real unit normal.
pub fn conormal(real_normal: &[f64]) -> Vec<C> {
    complexify(real_normal)
}

/// Unitary frame `z -> U (z - p)` sending `p` to 0 and the subspace onto
/// the first `k` coordinates, so the remaining coordinates `z''` vanish on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub k: usize,
    /// Rows of `U`, each the conjugate-transposed basis vector.
    pub rows: Vec<Vec<C>>,
    pub origin: ComplexPoint,
}

impl Frame {
    pub fn apply(&self, z: &[C]) -> Vec<C> {
        let rel: Vec<C> = z.iter().zip(&self.origin.0).map(|(a, b)| a - b).collect();
        self.rows.iter().map(|r| herm(&rel, r)).collect()
    }

    /// Split of a direction vector (no translation) into `(|v'|, |v''|)`.
    pub fn split_norms(&self, v: &[C]) -> (f64, f64) {
        let w: Vec<C> = self.rows.iter().map(|r| herm(v, r)).collect();
        (cnorm(&w[..self.k]), cnorm(&w[self.k..]))
    }

    pub fn inverse(&self, w: &[C]) -> Vec<C> {
        let n = self.origin.dim();
        let mut z = self.origin.0.clone();
        for (r, c) in self.rows.iter().zip(w) {
            z = caxpy(&z, *c, r);
        }
        debug_assert_eq!(z.len(), n);
        z
    }
}

pub fn adapt_frame(lambda: &AffineSubspaceC, p: &ComplexPoint) -> Result<Frame, GeometryError> {
    let n = lambda.ambient();
    if p.dim() != n {
        return Err(GeometryError::DimensionMismatch { expected: n, got: p.dim() });
    }
    let r = lambda.residual(&p.0);
    if r > 1e-10 {
        return Err(GeometryError::PointNotOnSubspace(r));
    }
    let mut span = lambda.directions.clone();
    for i in 0..n {
        let mut e = vec![C::new(0.0, 0.0); n];
        e[i] = C::new(1.0, 0.0);
        span.push(e);
    }
    let rows = orthonormalize_c(&span, 1e-10);
    Ok(Frame { k: lambda.dim(), rows, origin: p.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn cayley_fixed_values() {
        let z = cayley_forward(&ComplexPoint::zeros(2)).unwrap();
        assert!((z.0[1] - c(0.0, 1.0)).norm() < 1e-15);
        let z = cayley_forward(&ComplexPoint(vec![c(0.0, 0.0), c(-1.0, 0.0)])).unwrap();
        assert!(z.0[1].norm() < 1e-15);
        let w = cayley_inverse(&ComplexPoint::zeros(2)).unwrap();
        assert!((w.0[1] - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cayley_degenerate() {
        let w = ComplexPoint(vec![c(0.3, 0.0), c(1.0, 0.0)]);
        assert_eq!(cayley_forward(&w), Err(GeometryError::DegenerateChart));
        let z = ComplexPoint(vec![c(0.3, 0.0), c(0.0, -1.0)]);
        assert_eq!(cayley_inverse(&z), Err(GeometryError::DegenerateChart));
    }

    #[test]
    fn realify_interleaves() {
        assert_eq!(realify(&[c(1.0, 2.0), c(3.0, 4.0)]), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(j_op(&[1.0, 2.0]), vec![-2.0, 1.0]);
    }

    #[test]
    fn siegel_tangent_at_origin() {
        // rho = |z'|^2 - Im z_2, holomorphic gradient (0, i/2) at 0
        let g = vec![c(0.0, 0.0), c(0.0, 0.5)];
        let t = complex_tangent(&g, &ComplexPoint::zeros(2)).unwrap();
        assert_eq!(t.dim(), 1);
        assert!(t.directions[0][1].norm() < 1e-14);
        assert_eq!(holomorphic_gradient(&[0.0, 0.0, 0.0, -1.0]), g);
    }

    #[test]
    fn frame_for_shifted_line() {
        let l = AffineSubspaceC::new(
            ComplexPoint(vec![c(0.0, 0.0), c(1.0, 0.0)]),
            &[vec![c(1.0, 0.0), c(0.0, 0.0)]],
        );
        let f = adapt_frame(&l, &ComplexPoint(vec![c(0.0, 0.0), c(1.0, 0.0)])).unwrap();
        let img = f.apply(&[c(3.0, 1.0), c(1.0, 0.0)]);
        assert!(img[1].norm() < 1e-14);
        assert!((img[0] - c(3.0, 1.0)).norm() < 1e-14);
        assert!(matches!(
            adapt_frame(&l, &ComplexPoint::zeros(2)),
            Err(GeometryError::PointNotOnSubspace(_))
        ));
    }
}
