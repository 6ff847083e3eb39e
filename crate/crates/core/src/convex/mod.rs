//! Closed convex sets in `R^d` (usually `d = 2n`, a realified `C^n`).
//!
//! A [`ConvexSetSpec`] is the serializable description. [`ConvexSet`]
//! validates it once and lowers it to an internal body on which all
//! geometric queries run.

mod body;
mod cone;
mod project;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::AffineSubspaceR;
use crate::linalg;
use crate::lp::{Cmp, Lp, LpOutcome};
use crate::sampling;

pub use cone::RecessionCone;
pub(crate) use project::project_poly;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvexError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("direction is not a unit vector")]
    UnnormalizedDirection,
    #[error("set is empty")]
    EmptySet,
    #[error("function fails the convexity spot-check")]
    NotConvex,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported variant: {0}")]
    UnsupportedVariant(String),
    #[error("linear program failed numerically")]
    LpNumericalFailure,
    #[error("point lies inside the set")]
    PointInsideSet,
    #[error("projection did not converge")]
    ProjectionDidNotConverge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EpigraphMode {
    /// `Im z_n >= phi(z', Re z_n)`
    #[default]
    Full,
    /// `Im z_n >= phi(z')`
    Base,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormTerm {
    pub coef: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub a: Vec<f64>,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConvexFunctionSpec {
    Quadratic {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
        l: Vec<f64>,
        #[serde(default)]
        c: f64,
    },
    /// `sum coef_i |<u_i, x>|`
    Normcombo { terms: Vec<NormTerm> },
    /// `max_i (a_i . x + b_i)`
    Maxaffine { pieces: Vec<AffinePiece> },
}

impl ConvexFunctionSpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ConvexFunctionSpec::Quadratic { q, l, c } => {
                let mut s = *c + linalg::dot(l, x);
                for (i, row) in q.iter().enumerate() {
                    s += x[i] * linalg::dot(row, x);
                }
                s
            }
            ConvexFunctionSpec::Normcombo { terms } => {
                terms.iter().map(|t| t.coef * linalg::dot(&t.u, x).abs()).sum()
            }
            ConvexFunctionSpec::Maxaffine { pieces } => pieces
                .iter()
                .map(|p| linalg::dot(&p.a, x) + p.b)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn arity(&self) -> Option<usize> {
        match self {
            ConvexFunctionSpec::Quadratic { l, .. } => Some(l.len()),
            ConvexFunctionSpec::Normcombo { terms } => terms.first().map(|t| t.u.len()),
            ConvexFunctionSpec::Maxaffine { pieces } => pieces.first().map(|p| p.a.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ConvexSetSpec {
    /// `{x : A x <= b}`
    Polyhedron {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Epigraph {
        phi: ConvexFunctionSpec,
        #[serde(default)]
        mode: EpigraphMode,
        n: usize,
    },
    /// Closed Siegel domain `Im z_n >= |z'|^2`.
    Siegel { n: usize },
    Ball { center: Vec<f64>, radius: f64 },
    /// `Im z_n >= c |Re z_n| + sum_j (a_j |Re z_j| + b_j |Im z_j|)`
    Normcombo {
        n: usize,
        #[serde(default)]
        c: f64,
        a: Vec<f64>,
        b: Vec<f64>,
    },
    /// `{x : pi(x) in base}` with `pi` the orthogonal projection killing
    /// `span(fiber)`.
    Tube {
        base: Box<ConvexSetSpec>,
        fiber: Vec<Vec<f64>>,
    },
    /// `center + factor (base - center)`
    Dilation {
        base: Box<ConvexSetSpec>,
        factor: f64,
        center: Vec<f64>,
    },
}

impl ConvexSetSpec {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct QuadEpi {
    pub d: usize,
    pub sel: Vec<usize>,
    pub free: Vec<usize>,
    pub im: usize,
    pub q: DMatrix<f64>,
    pub q_raw: Vec<Vec<f64>>,
    pub l: DVector<f64>,
    pub c: f64,
    pub eig: SymmetricEigen<f64, nalgebra::Dyn>,
}

impl QuadEpi {
    pub fn phi(&self, u: &DVector<f64>) -> f64 {
        (u.transpose() * &self.q * u)[(0, 0)] + self.l.dot(u) + self.c
    }

    pub fn restrict(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.sel.len(), self.sel.iter().map(|&i| x[i]))
    }

    /// Gradient of `phi(Sx) - x_im`.
    pub fn rho_gradient(&self, x: &[f64]) -> Vec<f64> {
        let u = self.restrict(x);
        let g = 2.0 * &self.q * &u + &self.l;
        let mut out = vec![0.0; self.d];
        for (k, &i) in self.sel.iter().enumerate() {
            out[i] = g[k];
        }
        out[self.im] = -1.0;
        out
    }

    fn null_eigs(&self) -> Vec<bool> {
        let lmax = self.eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        self.eig.eigenvalues.iter().map(|&l| l <= 1e-12 * lmax.max(1.0)).collect()
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Body {
    Poly {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Quad(QuadEpi),
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// Base is a ball or polyhedron in the same ambient space.
    Tube {
        base: Box<Body>,
        fiber_raw: Vec<Vec<f64>>,
        fiber: Vec<Vec<f64>>,
    },
    Dilation {
        base: Box<Body>,
        factor: f64,
        center: Vec<f64>,
    },
}

/// Validated convex set.
#[derive(Debug, Clone)]
pub struct ConvexSet {
    spec: ConvexSetSpec,
    body: Body,
    dim: usize,
    cone: RecessionCone,
    lineality: Vec<Vec<f64>>,
}

/// Value of a support function together with a maximizer when attained.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub value: f64,
    pub argmax: Option<Vec<f64>>,
}

impl Support {
    pub fn infinite() -> Self {
        Support { value: f64::INFINITY, argmax: None }
    }
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

fn check_len(v: &[f64], d: usize) -> Result<(), ConvexError> {
    if v.len() != d {
        return Err(ConvexError::DimensionMismatch { expected: d, got: v.len() });
    }
    Ok(())
}

fn finite(vs: &[f64]) -> Result<(), ConvexError> {
    if vs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(ConvexError::InvalidParameter("non-finite entry".into()))
    }
}

/// Rows `sum_i s_i coef_i u_i . Sx - x_im <= 0` over all sign patterns.
fn normcombo_rows(terms: &[(f64, Vec<f64>)], sel: &[usize], im: usize, d: usize) -> Vec<Vec<f64>> {
    let active: Vec<&(f64, Vec<f64>)> = terms.iter().filter(|t| t.0 > 0.0).collect();
    let m = active.len();
    let mut rows = Vec::with_capacity(1 << m);
    for mask in 0u64..(1u64 << m) {
        let mut r = vec![0.0; d];
        for (j, (coef, u)) in active.iter().enumerate() {
            let s = if mask >> j & 1 == 1 { -1.0 } else { 1.0 };
            for (k, &i) in sel.iter().enumerate() {
                r[i] += s * coef * u[k];
            }
        }
        r[im] -= 1.0;
        rows.push(r);
    }
    rows
}

fn epigraph_layout(n: usize, mode: EpigraphMode) -> Result<(Vec<usize>, Vec<usize>), ConvexError> {
    if n == 0 || (mode == EpigraphMode::Base && n < 2) {
        return Err(ConvexError::InvalidParameter("epigraph needs n >= 1 (n >= 2 in base mode)".into()));
    }
    Ok(match mode {
        EpigraphMode::Full => ((0..2 * n - 1).collect(), vec![]),
        EpigraphMode::Base => ((0..2 * n - 2).collect(), vec![2 * n - 2]),
    })
}

fn quad_body(q_raw: &[Vec<f64>], l: &[f64], c: f64, sel: Vec<usize>, free: Vec<usize>, d: usize) -> Result<Body, ConvexError> {
    let k = sel.len();
    check_len(l, k)?;
    if q_raw.len() != k {
        return Err(ConvexError::DimensionMismatch { expected: k, got: q_raw.len() });
    }
    for r in q_raw {
        check_len(r, k)?;
        finite(r)?;
    }
    finite(l)?;
    let q = linalg::to_matrix(q_raw, k);
    if (&q - q.transpose()).amax() > 1e-12 {
        return Err(ConvexError::InvalidParameter("Q is not symmetric".into()));
    }
    let eig = q.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l < -1e-10) {
        return Err(ConvexError::NotConvex);
    }
    Ok(Body::Quad(QuadEpi {
        d,
        sel,
        free,
        im: d - 1,
        q,
        q_raw: q_raw.to_vec(),
        l: DVector::from_column_slice(l),
        c,
        eig,
    }))
}

/// Midpoint convexity spot-check on random segments.
fn spot_check_convex(phi: &ConvexFunctionSpec, k: usize) -> Result<(), ConvexError> {
    let mut rng = sampling::rng(0x5eed, 7);
    for _ in 0..1000 {
        let x = sampling::ball(&mut rng, k, 10.0);
        let y = sampling::ball(&mut rng, k, 10.0);
        let m: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        let (fx, fy, fm) = (phi.eval(&x), phi.eval(&y), phi.eval(&m));
        if fm > 0.5 * (fx + fy) + 1e-9 * (1.0 + fx.abs() + fy.abs()) {
            return Err(ConvexError::NotConvex);
        }
    }
    Ok(())
}

fn lower(spec: &ConvexSetSpec) -> Result<(Body, usize), ConvexError> {
    match spec {
        ConvexSetSpec::Polyhedron { a, b } => {
            if a.len() != b.len() {
                return Err(ConvexError::DimensionMismatch { expected: a.len(), got: b.len() });
            }
            let d = a.first().map(|r| r.len()).ok_or_else(|| {
                ConvexError::InvalidParameter("polyhedron needs at least one row".into())
            })?;
            for r in a {
                check_len(r, d)?;
                finite(r)?;
            }
            finite(b)?;
            Ok((Body::Poly { a: a.clone(), b: b.clone() }, d))
        }
        ConvexSetSpec::Siegel { n } => {
            let (sel, free) = epigraph_layout(*n, EpigraphMode::Base)?;
            let k = sel.len();
            let q: Vec<Vec<f64>> = (0..k).map(|i| linalg::unit(k, i)).collect();
            Ok((quad_body(&q, &vec![0.0; k], 0.0, sel, free, 2 * n)?, 2 * n))
        }
        ConvexSetSpec::Epigraph { phi, mode, n } => {
            let (sel, free) = epigraph_layout(*n, *mode)?;
            let d = 2 * n;
            let k = sel.len();
            if let Some(ar) = phi.arity() {
                if ar != k {
                    return Err(ConvexError::DimensionMismatch { expected: k, got: ar });
                }
            }
            match phi {
                ConvexFunctionSpec::Quadratic { q, l, c } => Ok((quad_body(q, l, *c, sel, free, d)?, d)),
                ConvexFunctionSpec::Normcombo { terms } => {
                    if terms.is_empty() {
                        return Err(ConvexError::InvalidParameter("empty norm combination".into()));
                    }
                    for t in terms {
                        check_len(&t.u, k)?;
                        if !(t.coef >= 0.0) {
                            return Err(ConvexError::InvalidParameter("negative coefficient".into()));
                        }
                    }
                    spot_check_convex(phi, k)?;
                    let ts: Vec<(f64, Vec<f64>)> = terms.iter().map(|t| (t.coef, t.u.clone())).collect();
                    let a = normcombo_rows(&ts, &sel, d - 1, d);
                    let b = vec![0.0; a.len()];
                    Ok((Body::Poly { a, b }, d))
                }
                ConvexFunctionSpec::Maxaffine { pieces } => {
                    if pieces.is_empty() {
                        return Err(ConvexError::InvalidParameter("no affine pieces".into()));
                    }
                    let mut a = Vec::new();
                    let mut b = Vec::new();
                    for p in pieces {
                        check_len(&p.a, k)?;
                        let mut r = vec![0.0; d];
                        for (j, &i) in sel.iter().enumerate() {
                            r[i] = p.a[j];
                        }
                        r[d - 1] = -1.0;
                        a.push(r);
                        b.push(-p.b);
                    }
                    Ok((Body::Poly { a, b }, d))
                }
            }
        }
        ConvexSetSpec::Normcombo { n, c, a, b } => {
            if *n < 1 || a.len() + 1 != *n || b.len() + 1 != *n {
                return Err(ConvexError::InvalidParameter("normcombo needs n-1 coefficients in a and b".into()));
            }
            if a.iter().chain(b).chain(std::iter::once(c)).any(|x| !(*x >= 0.0)) {
                return Err(ConvexError::InvalidParameter("normcombo coefficients must be >= 0".into()));
            }
            let d = 2 * n;
            let mut terms = Vec::new();
            for j in 0..n - 1 {
                terms.push((a[j], linalg::unit(d, 2 * j)));
                terms.push((b[j], linalg::unit(d, 2 * j + 1)));
            }
            terms.push((*c, linalg::unit(d, 2 * n - 2)));
            let sel: Vec<usize> = (0..d).collect();
            let rows = normcombo_rows(&terms, &sel, d - 1, d);
            let bb = vec![0.0; rows.len()];
            Ok((Body::Poly { a: rows, b: bb }, d))
        }
        ConvexSetSpec::Ball { center, radius } => {
            finite(center)?;
            if center.is_empty() || !(*radius > 0.0) || !radius.is_finite() {
                return Err(ConvexError::InvalidParameter("ball needs a center and a positive radius".into()));
            }
            Ok((Body::Ball { center: center.clone(), radius: *radius }, center.len()))
        }
        ConvexSetSpec::Tube { base, fiber } => {
            let (b, d) = lower(base)?;
            if !matches!(b, Body::Ball { .. } | Body::Poly { .. }) {
                return Err(ConvexError::UnsupportedVariant("tube base must be a ball or polyhedron".into()));
            }
            for v in fiber {
                check_len(v, d)?;
                finite(v)?;
            }
            let orth = linalg::orthonormalize(fiber, 1e-12);
            Ok((Body::Tube { base: Box::new(b), fiber_raw: fiber.clone(), fiber: orth }, d))
        }
        ConvexSetSpec::Dilation { base, factor, center } => {
            let (b, d) = lower(base)?;
            check_len(center, d)?;
            finite(center)?;
            if !(*factor >= 1.0) || !factor.is_finite() {
                return Err(ConvexError::InvalidParameter("dilation factor must be >= 1".into()));
            }
            Ok((Body::Dilation { base: Box::new(b), factor: *factor, center: center.clone() }, d))
        }
    }
}

impl ConvexSet {
    pub fn new(spec: ConvexSetSpec) -> Result<Self, ConvexError> {
        let (body, dim) = lower(&spec)?;
        if body.interior_point(dim).is_none() {
            return Err(ConvexError::EmptySet);
        }
        let cone = RecessionCone::of(&body, dim);
        let lineality = cone.lineality();
        Ok(ConvexSet { spec, body, dim, cone, lineality })
    }

    pub fn from_json(s: &str) -> Result<Self, ConvexError> {
        let spec = ConvexSetSpec::from_json(s).map_err(|e| ConvexError::InvalidParameter(e.to_string()))?;
        Self::new(spec)
    }

    pub fn spec(&self) -> &ConvexSetSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn recession_cone(&self) -> &RecessionCone {
        &self.cone
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool, ConvexError> {
        check_len(x, self.dim)?;
        Ok(self.body.contains(x, tol))
    }

    pub fn recession_member(&self, v: &[f64]) -> Result<bool, ConvexError> {
        check_len(v, self.dim)?;
        if (linalg::norm(v) - 1.0).abs() > 1e-10 {
            return Err(ConvexError::UnnormalizedDirection);
        }
        Ok(self.cone.contains(v, 1e-10))
    }

    /// Orthonormal basis of the lineality space.
    pub fn lineality(&self) -> &[Vec<f64>] {
        &self.lineality
    }

    /// Some point of the set.
    pub fn point(&self) -> Vec<f64> {
        self.body.interior_point(self.dim).expect("validated nonempty")
    }

    pub fn support(&self, c: &[f64]) -> Result<Support, ConvexError> {
        check_len(c, self.dim)?;
        self.body.support(c, self.dim)
    }

    pub fn support_sup(&self, c: &[f64]) -> Result<f64, ConvexError> {
        Ok(self.support(c)?.value)
    }

    /// Euclidean projection onto the set (identity on the set).
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>, ConvexError> {
        check_len(x, self.dim)?;
        self.body.project(x, self.dim)
    }

    pub fn nearest_boundary(&self, q: &[f64]) -> Result<Vec<f64>, ConvexError> {
        check_len(q, self.dim)?;
        if self.body.contains(q, 0.0) {
            return Err(ConvexError::PointInsideSet);
        }
        self.body.project(q, self.dim)
    }

    /// Membership of `p + t v` for `t` in `1, 10, ..., 1e6`.
    pub fn ray_probe(&self, p: &[f64], v: &[f64]) -> bool {
        (0..=6).all(|e| {
            let t = 10f64.powi(e);
            let x = linalg::axpy(p, t, v);
            self.body.contains(&x, 1e-9 * (1.0 + t))
        })
    }

    /// A point of `E ∩ S`, if the slice is nonempty.
    pub fn slice_point(&self, s: &AffineSubspaceR) -> Option<Vec<f64>> {
        if let Body::Poly { a, b } = &self.body {
            let k = s.dim();
            let mut lp = Lp::<f64>::new(k);
            for (row, bi) in a.iter().zip(b) {
                let coeffs: Vec<f64> = s.directions.iter().map(|d| linalg::dot(row, d)).collect();
                lp.row(coeffs, Cmp::Le, bi - linalg::dot(row, &s.base));
            }
            return match lp.solve() {
                LpOutcome::Optimal { x, .. } | LpOutcome::Unbounded { x, .. } => Some(s.point(&x)),
                _ => None,
            };
        }
        if self.body.contains(&s.base, 1e-12) {
            return Some(s.base.clone());
        }
        let mut x = s.base.clone();
        for _ in 0..5000 {
            let pe = self.body.project(&x, self.dim).ok()?;
            let xs = s.project(&pe);
            let gap = linalg::dist(&pe, &xs);
            let step = linalg::dist(&xs, &x);
            x = xs;
            if gap < 1e-10 {
                return Some(pe);
            }
            if step < 1e-15 {
                break;
            }
        }
        None
    }

    /// Unit recession direction of `E ∩ S` lying in the direction space of
    /// `S`, or `None` when the slice is empty or bounded.
    pub fn halfline_direction_in(&self, s: &AffineSubspaceR) -> Result<Option<Vec<f64>>, ConvexError> {
        check_len(&s.base, self.dim)?;
        if self.slice_point(s).is_none() {
            return Ok(None);
        }
        Ok(self.cone.direction_in(&s.directions))
    }

    /// Halfline `(point, direction)` in `E ∩ S`. Polyhedra use an LP over
    /// the slice itself, independent of the recession cone; other
    /// variants combine a slice point with the cone.
    pub fn halfline_in_slice(&self, s: &AffineSubspaceR) -> Result<Option<(Vec<f64>, Vec<f64>)>, ConvexError> {
        check_len(&s.base, self.dim)?;
        if let Body::Poly { a, b } = &self.body {
            let k = s.dim();
            let rows: Vec<(Vec<f64>, f64)> = a
                .iter()
                .zip(b)
                .map(|(row, bi)| {
                    (s.directions.iter().map(|d| linalg::dot(row, d)).collect(), bi - linalg::dot(row, &s.base))
                })
                .collect();
            for i in 0..k {
                for sign in [1.0, -1.0] {
                    let mut lp = Lp::<f64>::new(k);
                    for (r, bi) in &rows {
                        lp.row(r.clone(), Cmp::Le, *bi);
                    }
                    let mut c = vec![0.0; k];
                    c[i] = sign;
                    lp.maximize(c);
                    match lp.solve() {
                        LpOutcome::Infeasible => return Ok(None),
                        LpOutcome::IterationLimit => return Err(ConvexError::LpNumericalFailure),
                        LpOutcome::Unbounded { x, ray } => {
                            let dir = linalg::combine(&s.directions, &ray, self.dim);
                            if let Some(v) = linalg::normalized(&dir) {
                                return Ok(Some((s.point(&x), v)));
                            }
                        }
                        LpOutcome::Optimal { .. } => {}
                    }
                }
            }
            return Ok(None);
        }
        let Some(p) = self.slice_point(s) else {
            return Ok(None);
        };
        Ok(self.cone.direction_in(&s.directions).map(|v| (p, v)))
    }

    /// Whether the boundary is known to be `C^1` for this variant.
    pub fn is_c1(&self) -> bool {
        self.body.is_c1(self.dim)
    }

    /// Random boundary point with its outward unit normal, for `C^1`
    /// variants; points are spread over the ball of radius `window`.
    pub fn sample_boundary(&self, rng: &mut sampling::SeededRng, window: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        self.body.sample_boundary(rng, window, self.dim)
    }
}

pub fn contains(set: &ConvexSet, x: &[f64], tol: f64) -> Result<bool, ConvexError> {
    set.contains(x, tol)
}

pub fn recession_member(set: &ConvexSet, v: &[f64]) -> Result<bool, ConvexError> {
    set.recession_member(v)
}

pub fn lineality(set: &ConvexSet) -> Vec<Vec<f64>> {
    set.lineality().to_vec()
}

pub fn halfline_direction_in(set: &ConvexSet, s: &AffineSubspaceR) -> Result<Option<Vec<f64>>, ConvexError> {
    set.halfline_direction_in(s)
}

pub fn support_sup(set: &ConvexSet, c: &[f64]) -> Result<f64, ConvexError> {
    set.support_sup(c)
}

pub fn nearest_boundary(set: &ConvexSet, q: &[f64]) -> Result<Vec<f64>, ConvexError> {
    set.nearest_boundary(q)
}
