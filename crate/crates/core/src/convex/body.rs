use nalgebra::DVector;

use super::{Body, ConvexError, QuadEpi, Support};
use crate::linalg;
use crate::lp::{Cmp, Lp, LpOutcome};
use crate::sampling::{self, SeededRng};

/// `x - sum <x, v> v` over an orthonormal family.
pub(crate) fn kill(x: &[f64], fiber: &[Vec<f64>]) -> Vec<f64> {
    linalg::sub(x, &linalg::project_onto(x, fiber))
}

fn poly_lp(a: &[Vec<f64>], b: &[f64], eqs: &[Vec<f64>], d: usize) -> Lp<f64> {
    let mut lp = Lp::<f64>::new(d);
    for (r, bi) in a.iter().zip(b) {
        lp.row(r.clone(), Cmp::Le, *bi);
    }
    for v in eqs {
        lp.row(v.clone(), Cmp::Eq, 0.0);
    }
    lp
}

fn poly_support(a: &[Vec<f64>], b: &[f64], eqs: &[Vec<f64>], c: &[f64], d: usize) -> Result<Support, ConvexError> {
    let mut lp = poly_lp(a, b, eqs, d);
    lp.maximize(c.to_vec());
    match lp.solve() {
        LpOutcome::Optimal { x, value } => Ok(Support { value, argmax: Some(x) }),
        LpOutcome::Unbounded { .. } => Ok(Support::infinite()),
        LpOutcome::Infeasible => Err(ConvexError::EmptySet),
        LpOutcome::IterationLimit => Err(ConvexError::LpNumericalFailure),
    }
}

impl QuadEpi {
    fn support(&self, c: &[f64]) -> Support {
        let tol = 1e-12 * (1.0 + linalg::norm(c));
        let c_im = c[self.im];
        if self.free.iter().any(|&i| c[i].abs() > tol) || c_im > tol {
            return Support::infinite();
        }
        let cs = self.restrict(c);
        if c_im.abs() <= tol {
            if cs.norm() <= tol {
                let mut x = vec![0.0; self.d];
                x[self.im] = self.phi(&DVector::zeros(self.sel.len()));
                return Support { value: 0.0, argmax: Some(x) };
            }
            return Support::infinite();
        }
        let mu = -c_im;
        let g = &cs - mu * &self.l;
        let v = &self.eig.eigenvectors;
        let coords = v.transpose() * &g;
        let null = self.null_eigs();
        let gtol = 1e-9 * (1.0 + g.norm());
        let mut u = DVector::zeros(self.sel.len());
        for (k, &is_null) in null.iter().enumerate() {
            if is_null {
                if coords[k].abs() > gtol {
                    return Support::infinite();
                }
            } else {
                u += v.column(k) * (coords[k] / (2.0 * mu * self.eig.eigenvalues[k]));
            }
        }
        let phi = self.phi(&u);
        let value = cs.dot(&u) - mu * phi;
        let mut x = vec![0.0; self.d];
        for (k, &i) in self.sel.iter().enumerate() {
            x[i] = u[k];
        }
        x[self.im] = phi;
        Support { value, argmax: Some(x) }
    }
}

impl Body {
    pub(crate) fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            Body::Poly { a, b } => a.iter().zip(b).all(|(r, bi)| linalg::dot(r, x) - bi <= tol),
            Body::Quad(q) => q.phi(&q.restrict(x)) - x[q.im] <= tol,
            Body::Ball { center, radius } => linalg::dist(x, center) - radius <= tol,
            Body::Tube { base, fiber, .. } => base.contains(&kill(x, fiber), tol),
            Body::Dilation { base, factor, center } => {
                let y = linalg::axpy(center, 1.0 / factor, &linalg::sub(x, center));
                base.contains(&y, tol / factor)
            }
        }
    }

    pub(crate) fn interior_point(&self, d: usize) -> Option<Vec<f64>> {
        match self {
            Body::Poly { a, b } => match poly_lp(a, b, &[], d).solve() {
                LpOutcome::Optimal { x, .. } | LpOutcome::Unbounded { x, .. } => Some(x),
                _ => None,
            },
            Body::Quad(q) => {
                let mut x = vec![0.0; d];
                x[q.im] = q.phi(&DVector::zeros(q.sel.len())) + 1.0;
                Some(x)
            }
            Body::Ball { center, .. } => Some(center.clone()),
            Body::Tube { base, fiber, .. } => match base.as_ref() {
                Body::Ball { center, radius } => {
                    let pc = kill(center, fiber);
                    (linalg::dist(&pc, center) <= *radius).then_some(pc)
                }
                Body::Poly { a, b } => match poly_lp(a, b, fiber, d).solve() {
                    LpOutcome::Optimal { x, .. } | LpOutcome::Unbounded { x, .. } => Some(x),
                    _ => None,
                },
                _ => None,
            },
            Body::Dilation { base, factor, center } => {
                let p = base.interior_point(d)?;
                Some(linalg::axpy(center, *factor, &linalg::sub(&p, center)))
            }
        }
    }

    pub(crate) fn support(&self, c: &[f64], d: usize) -> Result<Support, ConvexError> {
        match self {
            Body::Poly { a, b } => poly_support(a, b, &[], c, d),
            Body::Quad(q) => Ok(q.support(c)),
            Body::Ball { center, radius } => {
                let n = linalg::norm(c);
                let argmax = if n > 0.0 { linalg::axpy(center, radius / n, c) } else { center.clone() };
                Ok(Support { value: linalg::dot(c, center) + radius * n, argmax: Some(argmax) })
            }
            Body::Tube { base, fiber, .. } => {
                let along = linalg::project_onto(c, fiber);
                if linalg::norm(&along) > 1e-12 * (1.0 + linalg::norm(c)) {
                    return Ok(Support::infinite());
                }
                let c = linalg::sub(c, &along);
                match base.as_ref() {
                    Body::Ball { center, radius } => {
                        let pc = kill(center, fiber);
                        let r2 = radius * radius - linalg::dist(&pc, center).powi(2);
                        let r = r2.max(0.0).sqrt();
                        let n = linalg::norm(&c);
                        let argmax = if n > 0.0 { linalg::axpy(&pc, r / n, &c) } else { pc.clone() };
                        Ok(Support { value: linalg::dot(&c, &pc) + r * n, argmax: Some(argmax) })
                    }
                    Body::Poly { a, b } => poly_support(a, b, fiber, &c, d),
                    _ => Err(ConvexError::UnsupportedVariant("tube base".into())),
                }
            }
            Body::Dilation { base, factor, center } => {
                let s = base.support(c, d)?;
                let cc = linalg::dot(c, center);
                Ok(Support {
                    value: if s.value.is_finite() { cc + factor * (s.value - cc) } else { s.value },
                    argmax: s.argmax.map(|x| linalg::axpy(center, *factor, &linalg::sub(&x, center))),
                })
            }
        }
    }

    pub(crate) fn is_c1(&self, d: usize) -> bool {
        match self {
            Body::Poly { a, .. } => a.len() == 1,
            Body::Quad(_) | Body::Ball { .. } => true,
            Body::Tube { base, fiber, .. } => match base.as_ref() {
                Body::Ball { .. } => fiber.len() < d,
                Body::Poly { a, .. } => a.len() == 1 && linalg::norm(&kill(&a[0], fiber)) > 1e-12,
                _ => false,
            },
            Body::Dilation { base, .. } => base.is_c1(d),
        }
    }

    pub(crate) fn sample_boundary(&self, rng: &mut SeededRng, window: f64, d: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            Body::Quad(q) => {
                let u = sampling::ball(rng, q.sel.len(), window);
                let mut x = vec![0.0; d];
                for (k, &i) in q.sel.iter().enumerate() {
                    x[i] = u[k];
                }
                for &i in &q.free {
                    x[i] = sampling::uniform(rng, -window, window);
                }
                x[q.im] = q.phi(&DVector::from_column_slice(&u));
                let n = linalg::normalized(&q.rho_gradient(&x))?;
                Some((x, n))
            }
            Body::Ball { center, radius } => {
                let s = sampling::unit_sphere(rng, d);
                Some((linalg::axpy(center, *radius, &s), s))
            }
            Body::Poly { a, b } if a.len() == 1 => {
                let n = linalg::normalized(&a[0])?;
                let x = sampling::ball(rng, d, window);
                let off = (linalg::dot(&a[0], &x) - b[0]) / linalg::dot(&a[0], &a[0]);
                Some((linalg::axpy(&x, -off, &a[0]), n))
            }
            Body::Tube { base, fiber, .. } => {
                let s = loop {
                    let g = kill(&sampling::gaussian(rng, d), fiber);
                    if let Some(s) = linalg::normalized(&g) {
                        break s;
                    }
                };
                let along: Vec<f64> = fiber.iter().map(|_| sampling::uniform(rng, -window, window)).collect();
                let v = linalg::combine(fiber, &along, d);
                match base.as_ref() {
                    Body::Ball { center, radius } => {
                        let pc = kill(center, fiber);
                        let r = (radius * radius - linalg::dist(&pc, center).powi(2)).max(0.0).sqrt();
                        Some((linalg::add(&linalg::axpy(&pc, r, &s), &v), s))
                    }
                    Body::Poly { a, b } if a.len() == 1 => {
                        let pa = kill(&a[0], fiber);
                        let n = linalg::normalized(&pa)?;
                        let x = kill(&sampling::ball(rng, d, window), fiber);
                        let off = (linalg::dot(&pa, &x) - b[0]) / linalg::dot(&pa, &pa);
                        Some((linalg::add(&linalg::axpy(&x, -off, &pa), &v), n))
                    }
                    _ => None,
                }
            }
            Body::Dilation { base, factor, center } => {
                let (p, n) = base.sample_boundary(rng, window / factor, d)?;
                Some((linalg::axpy(center, *factor, &linalg::sub(&p, center)), n))
            }
            Body::Poly { .. } => None,
        }
    }
}
