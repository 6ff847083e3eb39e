//! Hyperplane paths sweeping from a hyperplane through a given point out to
//! a fixed hyperplane `Λ_0`, avoiding a bounded convex set.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::hyperplane::Hyperplane;
use crate::convex::ConvexSet;
use crate::geometry::{complexify, herm, C};
use crate::linalg;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("the set is unbounded")]
    Unbounded,
    #[error("the initial hyperplane meets the set")]
    NotDisjoint,
    #[error("the point lies in the set or on the initial hyperplane")]
    BadPoint,
    #[error("path blocked at t = {0}")]
    PathBlocked(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStep {
    pub t: f64,
    pub hyperplane: Hyperplane,
    pub margin: f64,
    /// Offset of `Λ_t` in the chart where `Λ_0` is at infinity; it grows
    /// without bound as `t -> 0`.
    pub chart_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPath {
    /// Ordered from `t = 1` (through `p`) toward `t = 0`.
    pub steps: Vec<SweepStep>,
    pub monotone: bool,
}

/// Inverse sine of the Fubini-Study distance between `[a : beta]` and
/// `[a0 : beta0]` in the dual projective space.
fn chart_offset(a: &[C], beta: C, a0: &[C], beta0: C) -> f64 {
    let mut v: Vec<C> = a.to_vec();
    v.push(beta);
    let mut v0: Vec<C> = a0.to_vec();
    v0.push(beta0);
    let ip = herm(&v, &v0).norm();
    let (n, n0) = (crate::geometry::cnorm(&v), crate::geometry::cnorm(&v0));
    let c = (ip / (n * n0)).min(1.0);
    let s = (1.0 - c * c).max(0.0).sqrt();
    if s == 0.0 {
        f64::INFINITY
    } else {
        1.0 / s
    }
}

/// Linear homotopy in phase-aligned homogeneous coordinates from the
/// hyperplane through `p` parallel to the complex tangent at its nearest
/// point, to `Λ_0`. Each step is checked for disjointness from `K`; the
/// tail is refined geometrically until the chart offset exceeds `window`.
pub fn hull_sweep_witness(
    k: &ConvexSet,
    lambda0: &Hyperplane,
    p: &[f64],
    steps: usize,
    window: f64,
) -> Result<SweepPath, SweepError> {
    let axes: Vec<Vec<f64>> = (0..k.dim()).map(|i| linalg::unit(k.dim(), i)).collect();
    if k.recession_cone().direction_in(&axes).is_some() {
        return Err(SweepError::Unbounded);
    }
    let tol = 1e-9;
    let (m0, th0) = lambda0.separation(k, &[0.0], tol);
    if !(m0 > tol) {
        return Err(SweepError::NotDisjoint);
    }
    let zp = complexify(p);
    if k.contains(p, 0.0).unwrap_or(true) || lambda0.residual(&zp) <= 1e-12 {
        return Err(SweepError::BadPoint);
    }
    let q = k.nearest_boundary(p).map_err(|_| SweepError::BadPoint)?;
    let n = linalg::normalized(&linalg::sub(p, &q)).ok_or(SweepError::BadPoint)?;
    let a1 = complexify(&n);
    let b1 = herm(&zp, &a1);
    let r0 = C::from_polar(1.0, th0);
    let a0: Vec<C> = lambda0.a.iter().map(|x| x * r0).collect();
    let b0 = lambda0.beta * r0.conj();
    let at = |t: f64| -> Result<SweepStep, SweepError> {
        let a: Vec<C> = a0.iter().zip(&a1).map(|(x, y)| x * (1.0 - t) + y * t).collect();
        let beta = b0 * (1.0 - t) + b1 * t;
        let s = crate::geometry::cnorm(&a);
        if s <= 1e-12 {
            return Err(SweepError::PathBlocked(t));
        }
        let raw: Vec<C> = a.iter().map(|x| x / s).collect();
        let h = Hyperplane::new(&raw, beta / s).ok_or(SweepError::PathBlocked(t))?;
        // the aligned representative separates at angle 0 in the raw frame
        let j = (0..raw.len()).max_by(|&x, &y| raw[x].norm().total_cmp(&raw[y].norm())).unwrap_or(0);
        let theta = (raw[j] / h.a[j]).arg();
        let margin = h.margin_at(k, theta);
        if !(margin > tol) {
            return Err(SweepError::PathBlocked(t));
        }
        Ok(SweepStep { t, chart_offset: chart_offset(&a, beta, &a0, b0), hyperplane: h, margin })
    };
    let mut out = Vec::new();
    for i in (1..=steps).rev() {
        out.push(at(i as f64 / steps as f64)?);
    }
    let mut t = 1.0 / steps as f64;
    let mut guard = 0;
    while out.last().map_or(true, |s| s.chart_offset <= window) && guard < 200 {
        t *= 0.5;
        out.push(at(t)?);
        guard += 1;
    }
    let monotone = out.windows(2).all(|w| w[1].chart_offset >= w[0].chart_offset * (1.0 - 1e-12));
    Ok(SweepPath { steps: out, monotone })
}
