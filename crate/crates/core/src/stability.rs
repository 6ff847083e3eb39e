//! E-stability of affine complex subspaces.
//!
//! A subspace `Λ` is E-stable when some closed cone `|z''| <= c |z'|` with
//! axis `Λ` meets `E` in a compact set. For closed convex `E` this holds
//! exactly when the recession cone of `E` meets the direction space of `Λ`
//! only at the origin, which is what [`is_stable`] decides.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convex::{ConvexError, ConvexSet, RecessionCone};
use crate::geometry::{adapt_frame, complexify, AffineSubspaceC, AffineSubspaceR, ComplexPoint, GeometryError};
use crate::linalg;
use crate::sampling;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error("the slice E ∩ Λ is unbounded")]
    SliceUnbounded,
    #[error("no supporting translate or tube fiber was found")]
    NoSupportingTranslate,
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum StabilityVerdict {
    Stable { c: f64 },
    Unstable { v: Vec<f64> },
    Inconclusive { reason: String },
}

impl StabilityVerdict {
    pub fn is_stable(&self) -> bool {
        matches!(self, StabilityVerdict::Stable { .. })
    }
    pub fn tag(&self) -> &'static str {
        match self {
            StabilityVerdict::Stable { .. } => "Stable",
            StabilityVerdict::Unstable { .. } => "Unstable",
            StabilityVerdict::Inconclusive { .. } => "Inconclusive",
        }
    }
}

/// `|x''| <= c |x'|` in the frame adapted to `(Λ, p)`.
pub fn cone_membership(lambda: &AffineSubspaceC, p: &ComplexPoint, c: f64, x: &ComplexPoint) -> Result<bool, GeometryError> {
    let f = adapt_frame(lambda, p)?;
    let w = f.apply(&x.0);
    let (a, b) = (crate::geometry::cnorm(&w[..f.k]), crate::geometry::cnorm(&w[f.k..]));
    Ok(b <= c * a)
}

/// Unit recession directions: the lineality basis with both signs, then
/// projections of Gaussian samples onto the cone. Deterministic.
pub fn recession_samples(cone: &RecessionCone, count: usize) -> Vec<Vec<f64>> {
    let d = cone.dim;
    let mut out: Vec<Vec<f64>> = Vec::new();
    for w in cone.lineality() {
        out.push(linalg::scale(&w, -1.0));
        out.push(w);
    }
    let mut rng = sampling::rng(0xc0de, 3);
    let b = vec![0.0; cone.ineq.len()];
    for _ in 0..count {
        let g = sampling::gaussian(&mut rng, d);
        let Ok(p) = crate::convex::project_poly(&cone.ineq, &b, &cone.eq, &g) else {
            continue;
        };
        if linalg::norm(&p) < 1e-9 {
            continue;
        }
        if let Some(v) = linalg::normalized(&p) {
            out.push(v);
        }
    }
    out
}

/// Ratios `|v''| / |v'|` of sampled unit recession directions relative to
/// the real span `dirs`.
fn sampled_ratios(cone: &RecessionCone, dirs: &[Vec<f64>], count: usize) -> Vec<(f64, Vec<f64>)> {
    recession_samples(cone, count)
        .into_iter()
        .map(|v| {
            let along = linalg::project_onto(&v, dirs);
            let perp = linalg::norm(&linalg::sub(&v, &along));
            let par = linalg::norm(&along);
            (if par > 0.0 { perp / par } else { f64::INFINITY }, v)
        })
        .collect()
}

/// Stability for a real direction family (realified complex directions).
pub fn is_stable_dirs(set: &ConvexSet, dirs: &[Vec<f64>]) -> StabilityVerdict {
    let cone = set.recession_cone();
    if let Some(v) = cone.direction_in(dirs) {
        return StabilityVerdict::Unstable { v };
    }
    let ratios = sampled_ratios(cone, dirs, 128);
    let min = ratios.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let c = if min.is_finite() { 0.5 * min } else { 1.0 };
    if c > 0.0 {
        StabilityVerdict::Stable { c }
    } else {
        StabilityVerdict::Inconclusive { reason: "sampled aperture collapsed to zero".into() }
    }
}

pub fn is_stable(set: &ConvexSet, lambda: &AffineSubspaceC) -> StabilityVerdict {
    if lambda.ambient() * 2 != set.dim() {
        return StabilityVerdict::Inconclusive { reason: "dimension mismatch".into() };
    }
    is_stable_dirs(set, &lambda.realify().directions)
}

/// Halfline `(point, direction)` contained in `E ∩ Λ`.
pub fn halfline_in_intersection(set: &ConvexSet, lambda: &AffineSubspaceC) -> Result<Option<(Vec<f64>, Vec<f64>)>, StabilityError> {
    Ok(set.halfline_in_slice(&lambda.realify())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum TubeOrSupport {
    /// `E = (E ∩ S) + span(fiber)`.
    TubeFound { fiber: Vec<Vec<f64>> },
    /// `contact + span(S)` supports `E` at `contact`; `functional` attains
    /// its maximum over `E` there and vanishes on the directions of `S`.
    SupportingTranslate { contact: Vec<f64>, functional: Vec<f64>, value: f64 },
}

pub fn verify_tube(set: &ConvexSet, s: &AffineSubspaceR, fiber: &[Vec<f64>], samples: usize, seed: u64) -> bool {
    let d = set.dim();
    let mut cols = s.directions.clone();
    cols.extend(fiber.iter().cloned());
    let m = nalgebra::DMatrix::from_fn(d, cols.len(), |i, j| cols[j][i]);
    let mut rng = sampling::rng(seed, 11);
    let scale = 1.0 + linalg::norm(&s.base);
    for _ in 0..samples {
        let x = linalg::add(&s.base, &sampling::ball(&mut rng, d, 4.0 * scale));
        let Some(w) = linalg::least_norm(&m, &linalg::sub(&x, &s.base)) else {
            return false;
        };
        let k = s.dim();
        let on_s = s.point(&w[..k]);
        let a = set.contains(&x, 0.0).unwrap_or(false);
        let b = set.contains(&on_s, 0.0).unwrap_or(false);
        if a != b {
            let a_loose = set.contains(&x, 1e-7 * scale).unwrap_or(false);
            let b_loose = set.contains(&on_s, 1e-7 * scale).unwrap_or(false);
            if (a && !b_loose) || (b && !a_loose) {
                return false;
            }
        }
    }
    true
}

/// Probe functionals orthogonal to `S` and to the lineality of `E`; each
/// finite support value yields a supporting translate of `S`. At most
/// `max` translates are returned, in probe order.
pub fn supporting_translates(set: &ConvexSet, s: &AffineSubspaceR, seed: u64, max: usize) -> Result<Vec<TubeOrSupport>, StabilityError> {
    let d = set.dim();
    let mut spanning = s.directions.clone();
    spanning.extend(set.lineality().iter().cloned());
    let probe_space = linalg::complement(&spanning, d);
    let mut probes: Vec<Vec<f64>> = Vec::new();
    for b in &probe_space {
        probes.push(b.clone());
        probes.push(linalg::scale(b, -1.0));
    }
    if !probe_space.is_empty() {
        let mut rng = sampling::rng(seed, 5);
        for _ in 0..64 {
            let w = sampling::unit_sphere(&mut rng, probe_space.len());
            probes.push(linalg::combine(&probe_space, &w, d));
        }
    }
    let mut out = Vec::new();
    for c in probes {
        let sup = set.support(&c)?;
        if let (true, Some(q)) = (sup.is_finite(), sup.argmax) {
            out.push(TubeOrSupport::SupportingTranslate { contact: q, functional: c, value: sup.value });
            if out.len() >= max {
                break;
            }
        }
    }
    Ok(out)
}

/// Either a complementary fiber with `E = (E ∩ S) + V`, or a parallel
/// translate of `S` supporting `E`. Translates are found by probing
/// support functionals orthogonal to `S` and to the lineality of `E`.
pub fn tube_or_support(set: &ConvexSet, s: &AffineSubspaceR, seed: u64) -> Result<TubeOrSupport, StabilityError> {
    if set.halfline_direction_in(s)?.is_some() {
        return Err(StabilityError::SliceUnbounded);
    }
    if let Some(t) = supporting_translates(set, s, seed, 1)?.pop() {
        return Ok(t);
    }
    tube_fiber(set, s, seed).map(|fiber| TubeOrSupport::TubeFound { fiber }).ok_or(StabilityError::NoSupportingTranslate)
}

/// The lineality space as a tube fiber, when it is complementary to `S`
/// and `E = (E ∩ S) + V` holds on samples.
pub fn tube_fiber(set: &ConvexSet, s: &AffineSubspaceR, seed: u64) -> Option<Vec<Vec<f64>>> {
    let d = set.dim();
    let lin = set.lineality().to_vec();
    let mut spanning = s.directions.clone();
    spanning.extend(lin.iter().cloned());
    let complementary = lin.len() + s.dim() == d && linalg::orthonormalize(&spanning, 1e-10).len() == d;
    (complementary && verify_tube(set, s, &lin, 1000, seed)).then_some(lin)
}

/// Smallest sampled ratio `|v''| / |v'|` over unit recession directions,
/// with `v'` the component along `dirs`. Infinite when no sampled
/// direction has a component along `dirs` or the cone is trivial.
pub fn aperture_bound(set: &ConvexSet, dirs: &[Vec<f64>], count: usize) -> f64 {
    aperture_witness(set, dirs, count).map_or(f64::INFINITY, |w| w.0)
}

/// The sampled recession direction attaining [`aperture_bound`].
pub fn aperture_witness(set: &ConvexSet, dirs: &[Vec<f64>], count: usize) -> Option<(f64, Vec<f64>)> {
    sampled_ratios(set.recession_cone(), dirs, count).into_iter().min_by(|a, b| a.0.total_cmp(&b.0))
}

/// Complex tangent hyperplane at a boundary point with real outward
/// normal `n`, realified.
pub fn tangent_from_normal(p: &[f64], n: &[f64]) -> AffineSubspaceC {
    let a = complexify(n);
    let h = AffineSubspaceC::hyperplane(&a, num_complex::Complex64::new(0.0, 0.0));
    AffineSubspaceC { base: ComplexPoint::from_real(p), directions: h.directions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::ConvexSetSpec;
    use crate::geometry::C;

    fn line(base: Vec<C>, dir: Vec<C>) -> AffineSubspaceC {
        AffineSubspaceC::new(ComplexPoint(base), &[dir])
    }

    #[test]
    fn siegel_tangent_at_origin_is_stable() {
        let e = ConvexSet::new(ConvexSetSpec::Siegel { n: 2 }).unwrap();
        let l = line(vec![C::new(0.0, 0.0); 2], vec![C::new(1.0, 0.0), C::new(0.0, 0.0)]);
        assert!(is_stable(&e, &l).is_stable());
        assert!(halfline_in_intersection(&e, &l).unwrap().is_none());
    }

    #[test]
    fn halfspace_is_unstable() {
        let e = ConvexSet::new(ConvexSetSpec::Polyhedron { a: vec![vec![0.0, 0.0, 0.0, -1.0]], b: vec![0.0] }).unwrap();
        let l = line(vec![C::new(0.0, 0.0); 2], vec![C::new(1.0, 0.0), C::new(0.0, 0.0)]);
        match is_stable(&e, &l) {
            StabilityVerdict::Unstable { v } => assert!(v[2].abs() < 1e-12 && v[3].abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cone_membership_examples() {
        let l = line(vec![C::new(0.0, 0.0); 2], vec![C::new(1.0, 0.0), C::new(0.0, 0.0)]);
        let o = ComplexPoint::zeros(2);
        let x = ComplexPoint(vec![C::new(1.0, 0.0), C::new(0.5, 0.0)]);
        assert!(cone_membership(&l, &o, 1.0, &x).unwrap());
        let y = ComplexPoint(vec![C::new(0.1, 0.0), C::new(1.0, 0.0)]);
        assert!(!cone_membership(&l, &o, 1.0, &y).unwrap());
    }

    #[test]
    fn strip_is_a_tube_and_disc_supports() {
        let strip = ConvexSet::new(ConvexSetSpec::Polyhedron { a: vec![vec![1.0, 0.0], vec![-1.0, 0.0]], b: vec![1.0, 1.0] }).unwrap();
        let axis = AffineSubspaceR::new(vec![0.0, 0.0], &[vec![1.0, 0.0]]);
        match tube_or_support(&strip, &axis, 1).unwrap() {
            TubeOrSupport::TubeFound { fiber } => assert!(fiber[0][0].abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let disc = ConvexSet::new(ConvexSetSpec::Ball { center: vec![0.0, 0.0], radius: 1.0 }).unwrap();
        match tube_or_support(&disc, &axis, 1).unwrap() {
            TubeOrSupport::SupportingTranslate { contact, .. } => {
                assert!(contact[0].abs() < 1e-12 && (contact[1].abs() - 1.0).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
    }
}
