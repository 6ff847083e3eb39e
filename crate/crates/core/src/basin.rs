//! Automorphisms of `C^2` fixing `{z2 = 0}` pointwise, design of a
//! contracting step at a core point `f` that is close to the identity near
//! a compact `K`, and the attracting basin of the iterated step.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::Verdict;
use crate::convex::{ConvexError, ConvexSet, ConvexSetSpec};
use crate::exec::{self, Execution};
use crate::geometry::C;
use crate::linalg;
use crate::sampling;

pub type Point = [C; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasinError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("lambda = {lambda} is outside (a, b)")]
    LambdaOutOfRange { lambda: f64 },
    #[error("overflow")]
    Overflow,
    #[error(transparent)]
    Convex(#[from] ConvexError),
}

/// Complex polynomial, constant term first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly(pub Vec<C>);

impl Poly {
    pub fn constant(c: C) -> Self {
        Poly(vec![c])
    }

    pub fn real(cs: &[f64]) -> Self {
        Poly(cs.iter().map(|&x| C::new(x, 0.0)).collect())
    }

    pub fn eval(&self, z: C) -> C {
        self.0.iter().rev().fold(C::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn neg(&self) -> Self {
        Poly(self.0.iter().map(|c| -c).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AutomorphismSpec {
    /// `(z1 + z2 p(z2), z2)`
    Shear { p: Poly },
    /// `(z1, z2 e^{g(z1)})`
    FiberScale { g: Poly },
    /// `(z1 e^{h(z2)} + z2 q(z2), z2)`, `h(0) = 0`
    BaseScale { h: Poly, q: Poly },
    /// Applied right to left: the first entry acts last.
    Composite { steps: Vec<AutomorphismSpec> },
}

const OVERFLOW: f64 = 1e150;

impl AutomorphismSpec {
    pub fn validate(&self) -> Result<(), BasinError> {
        match self {
            AutomorphismSpec::BaseScale { h, .. } if h.eval(C::new(0.0, 0.0)).norm() != 0.0 => {
                Err(BasinError::InvalidConfig("BaseScale needs h(0) = 0".into()))
            }
            AutomorphismSpec::Composite { steps } => steps.iter().try_for_each(|s| s.validate()),
            _ => Ok(()),
        }
    }

    fn apply_raw(&self, z: Point) -> Point {
        match self {
            AutomorphismSpec::Shear { p } => [z[0] + z[1] * p.eval(z[1]), z[1]],
            // z2 = 0 is fixed exactly, even where e^g overflows
            AutomorphismSpec::FiberScale { .. } if z[1] == C::new(0.0, 0.0) => z,
            AutomorphismSpec::FiberScale { g } => [z[0], z[1] * g.eval(z[0]).exp()],
            AutomorphismSpec::BaseScale { h, q } => [z[0] * h.eval(z[1]).exp() + z[1] * q.eval(z[1]), z[1]],
            AutomorphismSpec::Composite { steps } => steps.iter().rev().fold(z, |w, s| s.apply_raw(w)),
        }
    }

    pub fn apply(&self, z: Point) -> Result<Point, BasinError> {
        let w = self.apply_raw(z);
        let n = w[0].norm().max(w[1].norm());
        if n.is_finite() && n <= OVERFLOW {
            Ok(w)
        } else {
            Err(BasinError::Overflow)
        }
    }

    pub fn inverse(&self) -> AutomorphismSpec {
        match self {
            AutomorphismSpec::Shear { p } => AutomorphismSpec::Shear { p: p.neg() },
            AutomorphismSpec::FiberScale { g } => AutomorphismSpec::FiberScale { g: g.neg() },
            // undo the shear part first, then the scaling
            AutomorphismSpec::BaseScale { h, q } => AutomorphismSpec::Composite {
                steps: vec![
                    AutomorphismSpec::BaseScale { h: h.neg(), q: Poly(vec![]) },
                    AutomorphismSpec::Shear { p: q.neg() },
                ],
            },
            AutomorphismSpec::Composite { steps } => {
                AutomorphismSpec::Composite { steps: steps.iter().rev().map(|s| s.inverse()).collect() }
            }
        }
    }
}

fn dist(z: &Point, w: &Point) -> f64 {
    ((z[0] - w[0]).norm_sqr() + (z[1] - w[1]).norm_sqr()).sqrt()
}

fn pnorm(z: &Point) -> f64 {
    (z[0].norm_sqr() + z[1].norm_sqr()).sqrt()
}

pub fn to_real(z: &Point) -> Vec<f64> {
    vec![z[0].re, z[0].im, z[1].re, z[1].im]
}

fn from_real(x: &[f64]) -> Point {
    [C::new(x[0], x[1]), C::new(x[2], x[3])]
}

/// The coordinate held fixed on a slice; the other one varies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slice {
    Z1,
    Z2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub slice: Slice,
    /// Value of the fixed coordinate.
    pub fixed: C,
    /// Center of the varying coordinate's square.
    pub center: C,
    pub half_width: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn point(&self, i: usize, j: usize) -> Point {
        let step = 2.0 * self.half_width / (self.n.max(2) - 1) as f64;
        let w = self.center + C::new(-self.half_width + step * i as f64, -self.half_width + step * j as f64);
        match self.slice {
            Slice::Z1 => [self.fixed, w],
            Slice::Z2 => [w, self.fixed],
        }
    }
}

/// Missing fields take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BasinConfig {
    pub f: Point,
    #[serde(rename = "K")]
    pub k: ConvexSetSpec,
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    /// Radius of the ball about `f` on which the attracting estimate holds.
    pub r: f64,
    pub eps: f64,
    /// The near-identity bound is checked on points within this distance of `K`.
    pub k_radius: f64,
    pub grid: GridSpec,
    pub max_iter: usize,
    pub escape_radius: f64,
    pub threshold: f64,
    pub sphere_samples: usize,
    pub seed: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for BasinConfig {
    fn default() -> Self {
        BasinConfig {
            f: [C::new(0.0, 0.0), C::new(1.0, 0.0)],
            k: ConvexSetSpec::Ball { center: vec![2.0, 0.0, 0.0, 0.0], radius: 0.5 },
            a: 0.3,
            b: 0.52,
            lambda: 0.40,
            r: 0.1,
            eps: 0.05,
            k_radius: 0.05,
            grid: GridSpec { slice: Slice::Z1, fixed: C::new(0.0, 0.0), center: C::new(0.0, 0.0), half_width: 2.0, n: 200 },
            max_iter: 200,
            escape_radius: 1e6,
            threshold: 1e-8,
            sphere_samples: 4096,
            seed: 42,
            execution: Execution::default(),
        }
    }
}

impl BasinConfig {
    /// Checks the invariants and builds `K`.
    pub fn validate(&self) -> Result<ConvexSet, BasinError> {
        let bad = |m: &str| Err(BasinError::InvalidConfig(m.into()));
        let (a, b) = (self.a, self.b);
        if !(0.0 < a && a < 0.5 && 0.5 < b && b < 1.0) {
            return bad("need 0 < a < 1/2 < b < 1");
        }
        if !(b * b < a) {
            return bad("need b^2 < a");
        }
        if self.f[1].norm() == 0.0 {
            return bad("f must lie off the fixed hyperplane z2 = 0");
        }
        if !(self.r > 0.0 && self.eps > 0.0 && self.k_radius >= 0.0 && self.threshold > 0.0) {
            return bad("radii and tolerances must be positive");
        }
        if self.grid.n < 2 || self.max_iter == 0 || self.sphere_samples == 0 {
            return bad("grid resolution, iteration cap and sample counts must be positive");
        }
        let k = ConvexSet::new(self.k.clone())?;
        if k.dim() != 4 {
            return bad("K must live in C^2");
        }
        let axes: Vec<Vec<f64>> = (0..4).map(|i| linalg::unit(4, i)).collect();
        if k.recession_cone().direction_in(&axes).is_some() {
            return bad("K must be compact");
        }
        let fr = to_real(&self.f);
        if k.contains(&fr, 0.0)? {
            return bad("K contains f");
        }
        if linalg::dist(&k.project(&fr)?, &fr) <= self.r + self.k_radius {
            return bad("the estimate ball about f must stay away from the K-neighborhood");
        }
        Ok(k)
    }
}

/// Sampled ratios `|psi(z) - f| / |z - f|` on spheres about `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereRatios {
    pub radius: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub spheres: Vec<SphereRatios>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub pass: bool,
}

fn sphere_point(rng: &mut sampling::SeededRng, f: &Point, r: f64) -> Point {
    let v = sampling::unit_sphere(rng, 4);
    [f[0] + C::new(r * v[0], r * v[1]), f[1] + C::new(r * v[2], r * v[3])]
}

/// Checks `a |z - f| <= |psi(z) - f| <= b |z - f|` on `n` samples of each of
/// the spheres of radius `r/4`, `r/2` and `r`.
pub fn verify_attracting_estimate(spec: &AutomorphismSpec, f: &Point, r: f64, a: f64, b: f64, n: usize) -> EstimateReport {
    let mut rng = sampling::rng(0xbea5, 1);
    let mut spheres = Vec::new();
    for rad in [r / 4.0, r / 2.0, r] {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for _ in 0..n {
            let z = sphere_point(&mut rng, f, rad);
            let q = spec.apply(z).map_or(f64::INFINITY, |w| dist(&w, f) / dist(&z, f));
            lo = lo.min(q);
            hi = hi.max(q);
        }
        spheres.push(SphereRatios { radius: rad, min: lo, max: hi });
    }
    let min_ratio = spheres.iter().map(|s| s.min).fold(f64::INFINITY, f64::min);
    let max_ratio = spheres.iter().map(|s| s.max).fold(0.0, f64::max);
    EstimateReport { pass: a <= min_ratio && max_ratio <= b, spheres, min_ratio, max_ratio }
}

/// One candidate of the structured design family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    /// Order of vanishing of the middle fiber scaling at `K`.
    pub m: usize,
    /// Shear used to move `f` off the `z2` axis.
    pub sigma: f64,
    /// Strength of the fiber squeeze over `K`.
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub params: Option<DesignParams>,
    pub attempts: usize,
    pub estimate: Option<EstimateReport>,
    /// Largest `|psi(z) - z|` over the sampled `K`-neighborhood.
    pub k_deviation: f64,
    pub verdict: Verdict,
    pub note: String,
}

// Series coefficients of log(1 + lambda t/sigma) - log(1 + t/sigma).
fn log_ratio_series(lambda: f64, sigma: f64, n: usize) -> Vec<f64> {
    let mut co = vec![0.0; n + 1];
    for k in 1..=n {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        co[k] = sign * (lambda.powi(k as i32) - 1.0) / (k as f64 * sigma.powi(k as i32));
    }
    co
}

fn poly_mul(a: &[C], b: &[C]) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow(a: &[C], m: usize) -> Vec<C> {
    (0..m).fold(vec![C::new(1.0, 0.0)], |acc, _| poly_mul(&acc, a))
}

/// Coefficients of `p(w - s)` in powers of `w`.
fn poly_shift(p: &[C], s: C) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0)];
    let base = [-s, C::new(1.0, 0.0)];
    for (k, c) in p.iter().enumerate() {
        let t: Vec<C> = poly_pow(&base, k).into_iter().map(|x| x * c).collect();
        if t.len() > out.len() {
            out.resize(t.len(), C::new(0.0, 0.0));
        }
        for (o, x) in out.iter_mut().zip(t) {
            *o += x;
        }
    }
    out
}

/// `g(w) = (w - w0)^m R(w)` agreeing with the log ratio to third order at
/// `w = sigma`, so that `g` vanishes to order `m` over `K`.
fn middle_fiber(lambda: f64, sigma: f64, w0: C, m: usize) -> Vec<C> {
    const N: usize = 3;
    let target: Vec<C> = log_ratio_series(lambda, sigma, N + m).into_iter().map(|x| C::new(x, 0.0)).collect();
    let wt = poly_pow(&[C::new(sigma, 0.0) - w0, C::new(1.0, 0.0)], m);
    let mut rem = target;
    let mut r = vec![C::new(0.0, 0.0); N + 1];
    for k in 0..=N {
        r[k] = rem[k] / wt[0];
        for (j, w) in wt.iter().enumerate() {
            if k + j < rem.len() {
                let d = r[k] * w;
                rem[k + j] -= d;
            }
        }
    }
    poly_shift(&poly_mul(&wt, &r), C::new(sigma, 0.0))
}

/// `P(w) = w p(w)` with `P(0) = 0`, `P'(0) = sigma`, `P(1) = sigma`,
/// `P'(1) = sigma / lambda`, `P''(1) = P'''(1) = 0`; returns `p`.
fn return_shear(lambda: f64, sigma: f64) -> Option<Vec<f64>> {
    let row = |x: f64, d: usize| -> Vec<f64> {
        (0..6)
            .map(|k| if k < d { 0.0 } else { ((k - d + 1)..=k).map(|i| i as f64).product::<f64>() * x.powi((k - d) as i32) })
            .collect()
    };
    let conds = [(0.0, 0, 0.0), (0.0, 1, sigma), (1.0, 0, sigma), (1.0, 1, sigma / lambda), (1.0, 2, 0.0), (1.0, 3, 0.0)];
    let m = nalgebra::DMatrix::from_fn(6, 6, |i, j| row(conds[i].0, conds[i].1)[j]);
    let rhs = nalgebra::DVector::from_iterator(6, conds.iter().map(|c| c.2));
    let sol = m.lu().solve(&rhs)?;
    Some(sol.iter().skip(1).copied().collect())
}

/// The contraction in coordinates where `f = (0, 1)` and `K` sits over
/// `z1 = w0`. Each factor fixes `z2 = 0`; the squeeze `g1` makes the middle
/// factors act on tiny `z2` over `K`.
fn normalized_step(lambda: f64, w0: C, p: DesignParams) -> Option<AutomorphismSpec> {
    let l = (lambda * lambda).ln();
    let h = Poly::real(&[0.0, 0.0, 3.0 * l, -2.0 * l]);
    let mut g1 = vec![C::new(0.0, 0.0); 5];
    g1[4] = -C::new(p.c, 0.0) / w0.powi(4);
    let g1 = Poly(g1);
    let g = Poly(middle_fiber(lambda, p.sigma, w0, p.m));
    let back = Poly::real(&return_shear(lambda, p.sigma)?);
    use AutomorphismSpec::*;
    Some(Composite {
        steps: vec![
            FiberScale { g: g1.neg() },
            Shear { p: back.neg() },
            FiberScale { g },
            Shear { p: Poly::real(&[p.sigma]) },
            BaseScale { h, q: Poly(vec![]) },
            FiberScale { g: g1 },
        ],
    })
}

/// Moves `f` to `(0, 1)` while fixing `z2 = 0`.
fn normalizer(f: &Point) -> AutomorphismSpec {
    AutomorphismSpec::Composite {
        steps: vec![
            AutomorphismSpec::FiberScale { g: Poly::constant(-f[1].ln()) },
            AutomorphismSpec::Shear { p: Poly::constant(-f[0] / f[1]) },
        ],
    }
}

/// Candidates tried in order: vanishing order, shear, squeeze.
fn candidates() -> Vec<DesignParams> {
    let mut out = Vec::new();
    for m in [2, 1, 3] {
        for sigma in [8.0, 12.0, 20.0, 6.0, 16.0, 4.0] {
            for c in [20.0, 40.0, 10.0] {
                out.push(DesignParams { m, sigma, c });
            }
        }
    }
    out.truncate(50);
    out
}

/// Points within `k_radius` of `K`, by rejection from a bounding box.
fn k_neighborhood(k: &ConvexSet, k_radius: f64, n: usize, seed: u64) -> Result<Vec<[f64; 4]>, BasinError> {
    let mut lo = [0.0; 4];
    let mut hi = [0.0; 4];
    for i in 0..4 {
        hi[i] = k.support_sup(&linalg::unit(4, i))? + k_radius;
        lo[i] = -k.support_sup(&linalg::scale(&linalg::unit(4, i), -1.0))? - k_radius;
    }
    let mut rng = sampling::rng(seed, 77);
    let mut out = Vec::with_capacity(n);
    for _ in 0..200 * n {
        if out.len() == n {
            break;
        }
        let x: Vec<f64> = (0..4).map(|i| sampling::uniform(&mut rng, lo[i], hi[i])).collect();
        if linalg::dist(&k.project(&x)?, &x) <= k_radius {
            out.push([x[0], x[1], x[2], x[3]]);
        }
    }
    Ok(out)
}

/// Searches the structured family for a step with `psi(f) = f`, sphere
/// ratios in `[a, b]` and `|psi - id| <= eps` near `K`.
pub fn design_contraction_step(cfg: &BasinConfig, lambda: f64) -> Result<(AutomorphismSpec, DesignReport), BasinError> {
    let k = cfg.validate()?;
    if !(cfg.a < lambda && lambda < cfg.b) {
        return Err(BasinError::LambdaOutOfRange { lambda });
    }
    let t = normalizer(&cfg.f);
    let tinv = t.inverse();
    let near_k = k_neighborhood(&k, cfg.k_radius, cfg.sphere_samples, cfg.seed)?;
    let mapped: Vec<Point> = near_k.iter().filter_map(|x| t.apply(from_real(x)).ok()).collect();
    let w0 = mapped.iter().map(|z| z[0]).sum::<C>() / mapped.len().max(1) as f64;
    let mut report = DesignReport {
        params: None,
        attempts: 0,
        estimate: None,
        k_deviation: f64::INFINITY,
        verdict: Verdict::Inconclusive,
        note: String::new(),
    };
    if near_k.is_empty() || w0.norm() < 1e-6 {
        report.note = "K sits over the fiber of f; the squeeze has no room".into();
        return Ok((AutomorphismSpec::Composite { steps: vec![] }, report));
    }
    let mut best: Option<(AutomorphismSpec, EstimateReport, f64, DesignParams)> = None;
    for p in candidates() {
        report.attempts += 1;
        let Some(core) = normalized_step(lambda, w0, p) else { continue };
        let spec = AutomorphismSpec::Composite { steps: vec![tinv.clone(), core, t.clone()] };
        let est = verify_attracting_estimate(&spec, &cfg.f, cfg.r, cfg.a, cfg.b, cfg.sphere_samples);
        let dev = near_k
            .iter()
            .map(|x| {
                let z = from_real(x);
                spec.apply(z).map_or(f64::INFINITY, |w| dist(&w, &z))
            })
            .fold(0.0, f64::max);
        let ok = est.pass && dev <= cfg.eps;
        let better = best.as_ref().map_or(true, |b| !(b.1.pass && b.2 <= cfg.eps) && est.max_ratio < b.1.max_ratio);
        if ok || better {
            best = Some((spec, est, dev, p));
        }
        if ok {
            break;
        }
    }
    let (spec, est, dev, p) = best.expect("candidate list is nonempty");
    let ok = est.pass && dev <= cfg.eps;
    report.params = Some(p);
    report.k_deviation = dev;
    report.verdict = if ok { Verdict::VerifiedSampled } else { Verdict::Inconclusive };
    report.note = if ok {
        format!("ratios in [{:.4}, {:.4}], K deviation {:.2e}", est.min_ratio, est.max_ratio, dev)
    } else {
        format!("no candidate met the estimate and eps = {} after {} attempts", cfg.eps, report.attempts)
    };
    report.estimate = Some(est);
    Ok((spec, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Basin,
    Escape,
    Undecided,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Basin => "basin",
            Label::Escape => "escape",
            Label::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub label: Label,
    /// Step at which the label was decided (the cap for undecided points).
    pub k: usize,
    pub last: Point,
}

fn step_at(steps: &[AutomorphismSpec], k: usize) -> &AutomorphismSpec {
    &steps[k.min(steps.len() - 1)]
}

/// Iterates `theta_k = psi_k o ... o psi_1`, repeating the last step.
pub fn orbit(steps: &[AutomorphismSpec], z: Point, f: &Point, cfg: &BasinConfig) -> Orbit {
    let mut w = z;
    for k in 0..=cfg.max_iter {
        if dist(&w, f) < cfg.threshold {
            return Orbit { label: Label::Basin, k, last: w };
        }
        if pnorm(&w) > cfg.escape_radius {
            return Orbit { label: Label::Escape, k, last: w };
        }
        if k == cfg.max_iter {
            break;
        }
        match step_at(steps, k).apply(w) {
            Ok(x) => w = x,
            Err(_) => return Orbit { label: Label::Escape, k: k + 1, last: w },
        }
    }
    Orbit { label: Label::Undecided, k: cfg.max_iter, last: w }
}

/// Distances `|theta_k(z) - f|` while the orbit stays in the estimate ball.
pub fn tracked_distances(steps: &[AutomorphismSpec], z: Point, f: &Point, cfg: &BasinConfig) -> Vec<f64> {
    let mut out = vec![dist(&z, f)];
    let mut w = z;
    for k in 0..cfg.max_iter {
        let Ok(x) = step_at(steps, k).apply(w) else { break };
        w = x;
        let d = dist(&w, f);
        if d > cfg.r || d < cfg.threshold {
            break;
        }
        out.push(d);
    }
    out
}

/// Rate bracket violations `a^k d0 <= d_k <= b^k d0` beyond `slack`.
pub fn bracket_violations(ds: &[f64], a: f64, b: f64, slack: f64) -> usize {
    let d0 = ds[0];
    ds.iter()
        .enumerate()
        .filter(|(k, &d)| {
            let q = d / d0;
            q < a.powi(*k as i32) - slack || q > b.powi(*k as i32) + slack
        })
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub grid: GridSpec,
    /// Row-major by `(i, j)`.
    pub orbits: Vec<Orbit>,
}

impl GridResult {
    pub fn label(&self, i: usize, j: usize) -> Label {
        self.orbits[i * self.grid.n + j].label
    }

    pub fn count(&self, l: Label) -> usize {
        self.orbits.iter().filter(|o| o.label == l).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("re_z1,im_z1,re_z2,im_z2,label,k\n");
        let n = self.grid.n;
        for i in 0..n {
            for j in 0..n {
                let z = self.grid.point(i, j);
                let o = &self.orbits[i * n + j];
                s.push_str(&format!("{},{},{},{},{},{}\n", z[0].re, z[0].im, z[1].re, z[1].im, o.label.as_str(), o.k));
            }
        }
        s
    }

    /// Three-colour raster of the slice; the varying coordinate's real
    /// part runs left to right and its imaginary part bottom to top.
    pub fn to_svg(&self) -> String {
        let n = self.grid.n;
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{n}\" height=\"{n}\" viewBox=\"0 0 {n} {n}\" shape-rendering=\"crispEdges\">\n"
        );
        for j in 0..n {
            let y = n - 1 - j;
            let mut i = 0;
            while i < n {
                let l = self.label(i, j);
                let start = i;
                while i < n && self.label(i, j) == l {
                    i += 1;
                }
                let fill = match l {
                    Label::Basin => "#2b6cb0",
                    Label::Escape => "#f6e05e",
                    Label::Undecided => "#718096",
                };
                s.push_str(&format!("<rect x=\"{start}\" y=\"{y}\" width=\"{}\" height=\"1\" fill=\"{fill}\"/>\n", i - start));
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

pub fn classify_grid(steps: &[AutomorphismSpec], cfg: &BasinConfig) -> GridResult {
    assert!(!steps.is_empty(), "classify_grid needs at least one step");
    let n = cfg.grid.n;
    let orbits = exec::map_indexed(cfg.execution, n * n, |idx| orbit(steps, cfg.grid.point(idx / n, idx % n), &cfg.f, cfg));
    GridResult { grid: cfg.grid.clone(), orbits }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinReport {
    pub design: DesignReport,
    pub spec: AutomorphismSpec,
    pub basin: usize,
    pub escape: usize,
    pub undecided: usize,
    pub basin_in_k: usize,
    pub basin_on_hyperplane: usize,
    pub tracked: usize,
    pub bracket_violations: usize,
    pub escape_rechecked: usize,
    pub escape_reverted: usize,
    /// Basin points with a basin neighbor on the grid.
    pub basin_with_neighbor: usize,
    pub verdict: Verdict,
    #[serde(skip)]
    pub grid: Option<GridResult>,
}

/// Designs the step, classifies the grid, and checks that the basin avoids
/// `K` and the fixed hyperplane and that tracked orbits contract at rates
/// bracketed by `a^k` and `b^k`.
pub fn basin_report(cfg: &BasinConfig) -> Result<BasinReport, BasinError> {
    let k = cfg.validate()?;
    let (spec, design) = design_contraction_step(cfg, cfg.lambda)?;
    let mut rep = BasinReport {
        design,
        spec: spec.clone(),
        basin: 0,
        escape: 0,
        undecided: 0,
        basin_in_k: 0,
        basin_on_hyperplane: 0,
        tracked: 0,
        bracket_violations: 0,
        escape_rechecked: 0,
        escape_reverted: 0,
        basin_with_neighbor: 0,
        verdict: Verdict::Inconclusive,
        grid: None,
    };
    if rep.design.verdict != Verdict::VerifiedSampled {
        return Ok(rep);
    }
    let steps = [spec];
    let grid = classify_grid(&steps, cfg);
    let n = cfg.grid.n;
    rep.basin = grid.count(Label::Basin);
    rep.escape = grid.count(Label::Escape);
    rep.undecided = grid.count(Label::Undecided);
    for i in 0..n {
        for j in 0..n {
            if grid.label(i, j) != Label::Basin {
                continue;
            }
            let z = grid.grid.point(i, j);
            if k.contains(&to_real(&z), 0.0)? {
                rep.basin_in_k += 1;
            }
            if z[1].norm() < 1e-6 {
                rep.basin_on_hyperplane += 1;
            }
            let nb = [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)].iter().any(|(di, dj)| {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                (0..n as i64).contains(&a) && (0..n as i64).contains(&b) && grid.label(a as usize, b as usize) == Label::Basin
            });
            if nb {
                rep.basin_with_neighbor += 1;
            }
        }
    }
    // grid points in the estimate ball plus a sphere of radius r/2
    let mut starts: Vec<Point> = (0..n * n).map(|x| grid.grid.point(x / n, x % n)).filter(|z| dist(z, &cfg.f) <= cfg.r).collect();
    let mut rng = sampling::rng(cfg.seed, 91);
    starts.extend((0..64).map(|_| sphere_point(&mut rng, &cfg.f, cfg.r / 2.0)));
    starts.retain(|z| dist(z, &cfg.f) > 0.0);
    rep.tracked = starts.len();
    rep.bracket_violations = starts
        .iter()
        .map(|z| bracket_violations(&tracked_distances(&steps, *z, &cfg.f, cfg), cfg.a, cfg.b, 1e-9))
        .sum();
    let escapes: Vec<&Orbit> = grid.orbits.iter().filter(|o| o.label == Label::Escape).take(100).collect();
    rep.escape_rechecked = escapes.len();
    rep.escape_reverted = escapes
        .iter()
        .filter(|o| {
            let more = BasinConfig { max_iter: 50, ..cfg.clone() };
            orbit(&steps, o.last, &cfg.f, &more).label == Label::Basin
        })
        .count();
    let clean = rep.basin_in_k == 0 && rep.basin_on_hyperplane == 0 && rep.bracket_violations == 0 && rep.escape_reverted == 0;
    rep.verdict = if clean { Verdict::VerifiedSampled } else { Verdict::Refuted };
    rep.grid = Some(grid);
    Ok(rep)
}

/// Re-runs the design for each core point with the same seed; the parameter
/// dependence is only sampled on this finite set.
pub fn design_family(cfg: &BasinConfig, lambda: f64, fs: &[Point]) -> Vec<Result<(AutomorphismSpec, DesignReport), BasinError>> {
    fs.iter().map(|f| design_contraction_step(&BasinConfig { f: *f, ..cfg.clone() }, lambda)).collect()
}
