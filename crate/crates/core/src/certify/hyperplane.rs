//! Complex hyperplanes `{z : <z, a> = beta}` in canonical form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::convex::ConvexSet;
use crate::geometry::{cnorm, complexify, herm, realify, AffineSubspaceC, C};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    /// Unit conormal, first nonzero entry real positive.
    pub a: Vec<C>,
    pub beta: C,
}

impl Hyperplane {
    pub fn new(a: &[C], beta: C) -> Option<Self> {
        let n = cnorm(a);
        if n <= 1e-12 {
            return None;
        }
        let j = a.iter().position(|x| x.norm() > 1e-12 * n)?;
        // a u has unit norm and a real positive j-th entry; since
        // <z, a u> = conj(u) <z, a>, beta scales by conj(u)
        let u = C::new(a[j].norm(), 0.0) / (a[j] * n);
        Some(Hyperplane { a: a.iter().map(|x| x * u).collect(), beta: beta * u.conj() })
    }

    /// Hyperplane through `q` with conormal `a`.
    pub fn through(q: &[C], a: &[C]) -> Option<Self> {
        Self::new(a, herm(q, a))
    }

    pub fn subspace(&self) -> AffineSubspaceC {
        AffineSubspaceC::hyperplane(&self.a, self.beta)
    }

    pub fn real_directions(&self) -> Vec<Vec<f64>> {
        self.subspace().realify().directions
    }

    pub fn residual(&self, z: &[C]) -> f64 {
        (herm(z, &self.a) - self.beta).norm()
    }

    /// E-stability depends only on the conormal.
    pub fn is_stable(&self, set: &ConvexSet) -> bool {
        set.recession_cone().direction_in(&self.real_directions()).is_none()
    }

    /// Unstable direction inside the hyperplane's direction space.
    pub fn unstable_direction(&self, set: &ConvexSet) -> Option<Vec<f64>> {
        set.recession_cone().direction_in(&self.real_directions())
    }

    /// Separation margin in direction `theta`:
    /// `Re(e^{-i theta} beta) - h_E(realify(e^{i theta} a))`.
    pub fn margin_at(&self, set: &ConvexSet, theta: f64) -> f64 {
        let rot = C::from_polar(1.0, theta);
        let c = realify(&self.a.iter().map(|x| x * rot).collect::<Vec<_>>());
        let h = set.support_sup(&c).unwrap_or(f64::INFINITY);
        (rot.conj() * self.beta).re - h
    }

    /// Angles allowed by the lineality space: the rotated functional must
    /// vanish on it or the support is infinite.
    fn admissible_angles(&self, set: &ConvexSet) -> Option<Vec<f64>> {
        let c0 = realify(&self.a);
        let c1 = crate::geometry::j_op(&c0);
        let mut constraint: Option<(f64, f64)> = None;
        for w in set.lineality() {
            let (p, q) = (linalg::dot(&c0, w), linalg::dot(&c1, w));
            if p.hypot(q) <= 1e-12 {
                continue;
            }
            match constraint {
                None => constraint = Some((p, q)),
                Some((p0, q0)) => {
                    if (p0 * q - q0 * p).abs() > 1e-9 * p0.hypot(q0) * p.hypot(q) {
                        return Some(vec![]);
                    }
                }
            }
        }
        // realify(e^{i theta} a) . w = cos(theta) p + sin(theta) q
        constraint.map(|(p, q)| {
            let t = (-p).atan2(q);
            vec![t, t + PI]
        })
    }

    /// Best separating angle and its margin. `hint` angles are tried first
    /// and returned early when they already separate.
    pub fn separation(&self, set: &ConvexSet, hints: &[f64], tol: f64) -> (f64, f64) {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for &t in hints {
            let m = self.margin_at(set, t);
            if m > best.0 {
                best = (m, t);
            }
            if m > tol {
                return (m, t);
            }
        }
        match self.admissible_angles(set) {
            Some(angles) => {
                for t in angles {
                    let m = self.margin_at(set, t);
                    if m > best.0 {
                        best = (m, t);
                    }
                }
                best
            }
            None => {
                let grid = 72;
                for k in 0..grid {
                    let t = 2.0 * PI * k as f64 / grid as f64;
                    let m = self.margin_at(set, t);
                    if m > best.0 {
                        best = (m, t);
                    }
                }
                if best.0.is_finite() {
                    let (mut lo, mut hi) = (best.1 - PI / 36.0, best.1 + PI / 36.0);
                    let g = 0.5 * (5f64.sqrt() - 1.0);
                    for _ in 0..30 {
                        let a = hi - g * (hi - lo);
                        let b = lo + g * (hi - lo);
                        if self.margin_at(set, a) >= self.margin_at(set, b) {
                            hi = b;
                        } else {
                            lo = a;
                        }
                    }
                    let t = 0.5 * (lo + hi);
                    let m = self.margin_at(set, t);
                    if m > best.0 {
                        best = (m, t);
                    }
                }
                best
            }
        }
    }

    pub fn is_disjoint(&self, set: &ConvexSet, hints: &[f64], tol: f64) -> bool {
        self.separation(set, hints, tol).0 > tol
    }

    /// Point of `E ∩ H` by alternating projections, when they meet.
    pub fn common_point(&self, set: &ConvexSet) -> Option<Vec<f64>> {
        let mut x = set.point();
        for _ in 0..20000 {
            let z = complexify(&x);
            let r = herm(&z, &self.a) - self.beta;
            let zh: Vec<C> = z.iter().zip(&self.a).map(|(zi, ai)| zi - r * ai).collect();
            let xh = realify(&zh);
            let xe = set.project(&xh).ok()?;
            let gap = linalg::dist(&xe, &xh);
            let step = linalg::dist(&xe, &x);
            x = xe;
            if gap < 1e-10 {
                return Some(x);
            }
            if step < 1e-14 {
                return None;
            }
        }
        None
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "a": self.a.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
            "beta": [self.beta.re, self.beta.im],
        })
    }
}

/// Conormal for a real unit normal.
pub fn conormal(n: &[f64]) -> Vec<C> {
    complexify(n)
}

/// Linear interpolation of canonical parameters, renormalized.
pub fn lerp(h0: &Hyperplane, h1: &Hyperplane, t: f64) -> Option<Hyperplane> {
    let a: Vec<C> = h0.a.iter().zip(&h1.a).map(|(x, y)| x * (1.0 - t) + y * t).collect();
    let beta = h0.beta * (1.0 - t) + h1.beta * t;
    let n = cnorm(&a);
    if n <= 1e-9 {
        return None;
    }
    Hyperplane::new(&a.iter().map(|x| x / n).collect::<Vec<_>>(), beta / n)
}

/// Interpolation of the conormal together with the offset relative to a
/// reference point `z0`, the offset moving along the shorter polar arc.
pub fn polar_lerp(h0: &Hyperplane, h1: &Hyperplane, z0: &[C], t: f64) -> Option<Hyperplane> {
    let a: Vec<C> = h0.a.iter().zip(&h1.a).map(|(x, y)| x * (1.0 - t) + y * t).collect();
    let n = cnorm(&a);
    if n <= 1e-9 {
        return None;
    }
    let a: Vec<C> = a.iter().map(|x| x / n).collect();
    let w0 = h0.beta - herm(z0, &h0.a);
    let w1 = h1.beta - herm(z0, &h1.a);
    let (r0, p0) = w0.to_polar();
    let (r1, p1) = w1.to_polar();
    let mut dp = p1 - p0;
    while dp > PI {
        dp -= 2.0 * PI;
    }
    while dp < -PI {
        dp += 2.0 * PI;
    }
    let w = C::from_polar(r0 * (1.0 - t) + r1 * t, p0 + t * dp);
    Hyperplane::new(&a, herm(z0, &a) + w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::ConvexSetSpec;

    #[test]
    fn canonical_form_preserves_the_set() {
        let a = vec![C::new(0.0, 2.0), C::new(1.0, 1.0)];
        let z = vec![C::new(0.3, -0.2), C::new(1.5, 0.7)];
        let h = Hyperplane::through(&z, &a).unwrap();
        assert!(h.residual(&z) < 1e-12);
        assert!(h.a[0].im.abs() < 1e-15 && h.a[0].re > 0.0);
        assert!((cnorm(&h.a) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ball_separation() {
        let e = ConvexSet::new(ConvexSetSpec::Ball { center: vec![0.0; 4], radius: 1.0 }).unwrap();
        let h = Hyperplane::new(&[C::new(0.0, 0.0), C::new(1.0, 0.0)], C::new(2.0, 0.0)).unwrap();
        let (m, _) = h.separation(&e, &[], 1e-9);
        assert!((m - 1.0).abs() < 1e-9);
        let through = Hyperplane::new(&[C::new(0.0, 0.0), C::new(1.0, 0.0)], C::new(0.5, 0.0)).unwrap();
        assert!(!through.is_disjoint(&e, &[], 1e-9));
        assert!(through.common_point(&e).is_some());
    }
}
