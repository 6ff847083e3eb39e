//! The individual hypothesis checks and the independent rechecks of their
//! refutation witnesses.

use serde_json::{json, Value};

use super::hyperplane::{polar_lerp, Hyperplane};
use super::{CheckResult, SamplingPlan, Verdict};
use crate::convex::ConvexSet;
use crate::exec;
use crate::geometry::{complexify, herm, j_op, realify, AffineSubspaceC, ComplexPoint, C};
use crate::linalg;
use crate::sampling::{self, SeededRng};
use crate::smoothing::{hessian_min_eig, normcombo_terms, smooth_normcombo};
use crate::stability::{self, TubeOrSupport};

const MAX_WITNESSES: usize = 5;

fn cjson(z: &[C]) -> Value {
    json!(z.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
}

fn cparse(v: &Value) -> Option<Vec<C>> {
    v.as_array()?
        .iter()
        .map(|p| Some(C::new(p.get(0)?.as_f64()?, p.get(1)?.as_f64()?)))
        .collect()
}

fn rparse(v: &Value) -> Option<Vec<f64>> {
    v.as_array()?.iter().map(|x| x.as_f64()).collect()
}

fn cnum(v: &Value) -> Option<C> {
    Some(C::new(v.get(0)?.as_f64()?, v.get(1)?.as_f64()?))
}

fn margin_tol(plan_tol: f64, beta: C) -> f64 {
    plan_tol * (1.0 + beta.norm())
}

/// Rotation angle `theta` with `e^{i theta} h.a` parallel to `raw`.
fn alignment(h: &Hyperplane, raw: &[C]) -> f64 {
    let j = (0..raw.len()).max_by(|&x, &y| raw[x].norm().total_cmp(&raw[y].norm())).unwrap_or(0);
    (raw[j] / h.a[j]).arg()
}

/// Stable hyperplane disjoint from `E`, with a separating angle.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub h: Hyperplane,
    pub theta: f64,
    pub margin: f64,
    pub q: Vec<f64>,
}

impl Node {
    /// Representative `(e^{i theta} a, e^{-i theta} beta)` separating at angle 0.
    fn aligned(&self) -> (Vec<C>, C) {
        let r = C::from_polar(1.0, self.theta);
        (self.h.a.iter().map(|x| x * r).collect(), self.h.beta * r.conj())
    }

    fn to_json(&self) -> Value {
        json!({ "a": cjson(&self.h.a), "beta": [self.h.beta.re, self.h.beta.im], "theta": self.theta, "margin": self.margin })
    }
}

fn try_node(set: &ConvexSet, q: &[f64], a: &[C], hints: &[f64], tol: f64) -> Option<Node> {
    let h = Hyperplane::through(&complexify(q), a)?;
    let mut hs = vec![alignment(&h, a)];
    hs.extend_from_slice(hints);
    let (m, theta) = h.separation(set, &hs, margin_tol(tol, h.beta));
    (m > margin_tol(tol, h.beta) && h.is_stable(set)).then(|| Node { h, theta, margin: m, q: q.to_vec() })
}

/// The hyperplane through `q` parallel to the complex tangent at the
/// nearest point, with perturbed and random conormals as fallback.
fn node_through(set: &ConvexSet, q: &[f64], tol: f64, rng: &mut SeededRng) -> Option<Node> {
    let n = set.dim() / 2;
    let p = set.nearest_boundary(q).ok()?;
    let raw = linalg::normalized(&linalg::sub(q, &p)).map(|v| complexify(&v));
    if let Some(a) = &raw {
        if let Some(node) = try_node(set, q, a, &[], tol) {
            return Some(node);
        }
    }
    // perturbations of growing size, then unrelated conormals
    for k in 0..64 {
        let g = complexify(&sampling::gaussian(rng, 2 * n));
        let a: Vec<C> = match (&raw, k < 48) {
            (Some(a0), true) => a0.iter().zip(&g).map(|(x, y)| x + y * [0.05, 0.15, 0.4][k / 16]).collect(),
            _ => g,
        };
        if let Some(node) = try_node(set, q, &a, &[], tol) {
            return Some(node);
        }
    }
    None
}

fn exterior_point(set: &ConvexSet, plan: &SamplingPlan, rng: &mut SeededRng) -> Option<Vec<f64>> {
    for _ in 0..1000 {
        let q = sampling::ball(rng, set.dim(), plan.window);
        if !set.contains(&q, 0.0).unwrap_or(true) {
            return Some(q);
        }
    }
    None
}

pub fn check_lineality(set: &ConvexSet, plan: &SamplingPlan) -> CheckResult {
    let r = CheckResult::new("lineality", "no-affine-real-line", plan);
    let lin = set.lineality();
    if lin.is_empty() {
        r.with(Verdict::CertifiedExact, "recession cone is pointed (exact rational nullspace)")
    } else {
        let mut r = r.with(Verdict::Inconclusive, format!("the set contains affine lines; lineality dimension {}", lin.len()));
        r.witnesses.push(json!({ "kind": "lineality-basis", "basis": lin }));
        r
    }
}

/// Halfline witness in `E ∩ T^C_p bE` for one boundary sample.
fn tangent_halfline(set: &ConvexSet, p: &[f64], n: &[f64]) -> Option<Value> {
    let t = stability::tangent_from_normal(p, n);
    let (x, v) = stability::halfline_in_intersection(set, &t).ok()??;
    Some(json!({ "kind": "halfline", "boundary_point": p, "normal": n, "point": x, "direction": v }))
}

pub fn check_complex_tangent_halfline(set: &ConvexSet, plan: &SamplingPlan) -> CheckResult {
    let mut r = CheckResult::new("complex_tangent_halfline", "no-halfline-in-complex-tangent", plan);
    if !set.is_c1() {
        return r.with(Verdict::Inconclusive, "boundary is not C^1 for this variant; check not applicable");
    }
    let d = set.dim();
    let mut rng = sampling::rng(plan.seed, 101);
    let mut samples: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for _ in 0..plan.boundary {
        if let Some(s) = set.sample_boundary(&mut rng, plan.window) {
            samples.push(s);
        }
    }
    // boundary points whose normal is orthogonal to the lineality and to
    // its J-image: there the complex tangent contains the lines of E
    let mut span: Vec<Vec<f64>> = set.lineality().to_vec();
    span.extend(set.lineality().iter().map(|w| j_op(w)));
    let free = linalg::complement(&span, d);
    if !free.is_empty() {
        for _ in 0..(plan.boundary / 10).max(1) {
            let w = sampling::unit_sphere(&mut rng, free.len());
            let n = linalg::combine(&free, &w, d);
            if let Ok(s) = set.support(&n) {
                if let (true, Some(p)) = (s.is_finite(), s.argmax) {
                    samples.push((p, n));
                }
            }
        }
    }
    if samples.is_empty() {
        return r.with(Verdict::Inconclusive, "no boundary samples");
    }
    r.samples = samples.len();
    let found: Vec<Option<Value>> = exec::map_slice(plan.execution, &samples, |(p, n)| tangent_halfline(set, p, n));
    for w in found.into_iter().flatten() {
        if r.witnesses.len() < MAX_WITNESSES && recheck_halfline(set, &w) {
            r.witnesses.push(w);
        }
    }
    if r.witnesses.is_empty() {
        r.with(Verdict::VerifiedSampled, "no complex tangent slice contains a halfline")
    } else {
        r.with(Verdict::Refuted, "a complex tangent slice contains a real halfline")
    }
}

/// For `dim Lin >= 2` every complex hyperplane is unstable or meets `E`:
/// the real map `Lin -> C, w -> <w, a>` either has a kernel or is onto.
fn lineality_obstruction(set: &ConvexSet, a: &[C], beta: C) -> Value {
    let lin = set.lineality();
    let g: Vec<C> = lin.iter().map(|w| herm(&complexify(w), a)).collect();
    let m = nalgebra::DMatrix::from_fn(2, lin.len(), |i, j| if i == 0 { g[j].re } else { g[j].im });
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = if sv.len() < 2 { 0.0 } else { sv.iter().copied().fold(f64::INFINITY, f64::min) };
    if smin <= 1e-10 * smax.max(1.0) {
        let eig = (m.transpose() * &m).symmetric_eigen();
        let k = (0..lin.len()).min_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y])).unwrap_or(0);
        let y: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let v = linalg::normalized(&linalg::combine(lin, &y, set.dim())).unwrap_or_else(|| lin[0].clone());
        json!({ "a": cjson(a), "beta": [beta.re, beta.im], "reason": "unstable", "v": v })
    } else {
        let p0 = set.point();
        let rhs = beta - herm(&complexify(&p0), a);
        let y = linalg::least_norm(&m, &[rhs.re, rhs.im]).unwrap_or_else(|| vec![0.0; lin.len()]);
        let x = linalg::add(&p0, &linalg::combine(lin, &y, set.dim()));
        json!({ "a": cjson(a), "beta": [beta.re, beta.im], "reason": "meets", "x": x })
    }
}

pub struct WeakProjective {
    pub result: CheckResult,
    pub nodes: Vec<Node>,
}

pub fn check_weak_projective(set: &ConvexSet, plan: &SamplingPlan) -> WeakProjective {
    let mut r = CheckResult::new("weak_projective", "stable-hyperplane-through-exterior-point", plan);
    let d = set.dim();
    let mut rng = sampling::rng(plan.seed, 202);
    let qs: Vec<Vec<f64>> = (0..plan.exterior).filter_map(|_| exterior_point(set, plan, &mut rng)).collect();
    if qs.is_empty() {
        return WeakProjective { result: r.with(Verdict::Inconclusive, "no exterior points in the window"), nodes: vec![] };
    }
    r.samples = qs.len();
    if set.lineality().len() >= 2 {
        for q in qs.iter().take(MAX_WITNESSES) {
            let mut hs = Vec::new();
            if let Ok(p) = set.nearest_boundary(q) {
                if let Some(n) = linalg::normalized(&linalg::sub(q, &p)) {
                    hs.push(complexify(&n));
                }
            }
            hs.push(complexify(&sampling::unit_sphere(&mut rng, d)));
            let tested: Vec<Value> = hs
                .iter()
                .filter_map(|a| Hyperplane::through(&complexify(q), a))
                .map(|h| lineality_obstruction(set, &h.a, h.beta))
                .collect();
            let w = json!({ "kind": "lineality-obstruction", "q": q, "lineality": set.lineality(), "hyperplanes": tested });
            if recheck_obstruction(set, &w) {
                r.witnesses.push(w);
            }
        }
        let result = if r.witnesses.is_empty() {
            r.with(Verdict::Inconclusive, "lineality obstruction could not be rechecked")
        } else {
            r.with(
                Verdict::Refuted,
                "lineality has dimension >= 2: every complex hyperplane through an exterior point is unstable or meets E",
            )
        };
        return WeakProjective { result, nodes: vec![] };
    }
    let nodes: Vec<Option<Node>> = exec::map_indexed(plan.execution, qs.len(), |i| {
        let mut local = sampling::rng(plan.seed, 1000 + i as u64);
        node_through(set, &qs[i], plan.tol, &mut local)
    });
    let missing: Vec<usize> = nodes.iter().enumerate().filter(|(_, n)| n.is_none()).map(|(i, _)| i).collect();
    let nodes: Vec<Node> = nodes.into_iter().flatten().collect();
    let result = if missing.is_empty() {
        r.with(Verdict::VerifiedSampled, format!("{} exterior points lie on stable hyperplanes disjoint from E", nodes.len()))
    } else {
        for &i in missing.iter().take(MAX_WITNESSES) {
            r.witnesses.push(json!({ "kind": "unresolved-exterior-point", "q": qs[i] }));
        }
        r.with(Verdict::Inconclusive, format!("{} exterior points without a stable disjoint hyperplane", missing.len()))
    };
    WeakProjective { result, nodes }
}

enum Lift {
    Lifted,
    Tube(Value),
    Unresolved,
}

fn lift_line(set: &ConvexSet, line: &AffineSubspaceC, plan: &SamplingPlan, seed: u64) -> Lift {
    let s = line.realify();
    let dir = &line.directions[0];
    if let Ok(cands) = stability::supporting_translates(set, &s, seed, 16) {
        for c in cands {
            let TubeOrSupport::SupportingTranslate { contact, functional, .. } = c else { continue };
            let a = complexify(&functional);
            if herm(dir, &a).norm() > 1e-9 * linalg::norm(&functional) {
                continue;
            }
            let Some(unit) = linalg::normalized(&functional) else { continue };
            let eps = 1e-3 * (1.0 + linalg::norm(&contact));
            let pushed = linalg::axpy(&contact, eps, &unit);
            if try_node(set, &pushed, &a, &[], plan.tol).is_some() {
                return Lift::Lifted;
            }
        }
    }
    match stability::tube_fiber(set, &s, seed) {
        Some(fiber) => Lift::Tube(json!({
            "kind": "tube",
            "base": s.base,
            "direction": cjson(dir),
            "fiber": fiber,
        })),
        None => Lift::Unresolved,
    }
}

pub fn check_line_lift(set: &ConvexSet, plan: &SamplingPlan) -> CheckResult {
    let mut r = CheckResult::new("line_lift", "stable-line-lifts-to-stable-hyperplane", plan);
    let n = set.dim() / 2;
    if n < 2 {
        return r.with(Verdict::Inconclusive, "needs n >= 2");
    }
    let mut rng = sampling::rng(plan.seed, 303);
    let mut lines = Vec::new();
    let mut attempts = 0;
    while lines.len() < plan.lines && attempts < 10 * plan.lines {
        attempts += 1;
        let dir = complexify(&sampling::unit_sphere(&mut rng, 2 * n));
        let base = ComplexPoint::from_real(&sampling::ball(&mut rng, 2 * n, plan.window));
        let line = AffineSubspaceC::new(base, &[dir]);
        if !stability::is_stable(set, &line).is_stable() {
            continue;
        }
        if set.halfline_direction_in(&line.realify()).map_or(true, |h| h.is_some()) {
            continue;
        }
        lines.push(line);
    }
    r.samples = lines.len();
    if lines.is_empty() {
        return r.with(Verdict::Inconclusive, format!("no stable complex lines among {attempts} sampled"));
    }
    let out: Vec<Lift> = exec::map_indexed(plan.execution, lines.len(), |i| lift_line(set, &lines[i], plan, plan.seed + i as u64));
    let mut unresolved = 0;
    for (i, l) in out.into_iter().enumerate() {
        match l {
            Lift::Lifted => {}
            Lift::Tube(w) => {
                if r.witnesses.len() < MAX_WITNESSES && recheck_tube(set, &w, plan.seed + 7919 + i as u64) {
                    r.witnesses.push(w);
                } else {
                    unresolved += 1;
                }
            }
            Lift::Unresolved => unresolved += 1,
        }
    }
    if !r.witnesses.is_empty() {
        r.with(Verdict::Refuted, "E is a tube over a stable line: every translate of the line meets E")
    } else if unresolved > 0 {
        r.with(Verdict::Inconclusive, format!("{unresolved} stable lines without a lift"))
    } else {
        let k = lines.len();
        r.with(Verdict::VerifiedSampled, format!("{k} stable lines lift into stable hyperplanes disjoint from E"))
    }
}

/// Van der Corput order of `1..steps`, so failing paths fail early.
fn probe_order(steps: usize) -> Vec<usize> {
    let mut idx: Vec<(f64, usize)> = (1..steps)
        .map(|i| {
            let (mut x, mut f, mut k) = (0.0, 0.5, i);
            while k > 0 {
                x += f * (k & 1) as f64;
                k >>= 1;
                f *= 0.5;
            }
            (x, i)
        })
        .collect();
    idx.sort_by(|a, b| a.0.total_cmp(&b.0));
    idx.into_iter().map(|p| p.1).collect()
}

/// Smallest `|<v, a>|` over the sampled unit recession directions: the
/// sine of the angle between the cone and the hyperplane's directions.
fn stability_margin(h: &Hyperplane, rec: &[Vec<C>]) -> (f64, usize) {
    rec.iter()
        .enumerate()
        .map(|(k, v)| (herm(v, &h.a).norm(), k))
        .fold((f64::INFINITY, 0), |m, x| if x.0 < m.0 { x } else { m })
}

/// Phase-invariant distance between unit conormals.
fn conormal_gap(h0: &Hyperplane, h1: &Hyperplane) -> f64 {
    let ip = herm(&h0.a, &h1.a);
    let u = if ip.norm() > 0.0 { ip / ip.norm() } else { C::new(1.0, 0.0) };
    // a direct difference; 2 - 2|ip| cancels to zero near coincidence
    h0.a.iter().zip(&h1.a).map(|(x, y)| (x - u * y).norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone)]
struct Probe {
    t: f64,
    h: Hyperplane,
    mu: (f64, usize),
}

/// First failure along a path of hyperplanes, or `None` if every probed
/// hyperplane is stable and disjoint and no interval between probes can
/// hide an unstable hyperplane. The interval test is `mu > 4 gap` at an
/// endpoint: the conormal projector moves by at most four times the
/// conormal distance, and along a normalized lerp the conormal stays on
/// the arc between the endpoints.
fn path_failure(
    set: &ConvexSet,
    rec: &[Vec<C>],
    steps: usize,
    tol: f64,
    at: impl Fn(f64) -> Option<(Hyperplane, f64)>,
) -> Option<Value> {
    let probe = |t: f64| -> Result<Probe, Value> {
        let Some((h, theta)) = at(t) else {
            return Err(json!({ "t": t, "reason": "degenerate" }));
        };
        if let Some(v) = h.unstable_direction(set) {
            return Err(json!({ "t": t, "reason": "unstable", "hyperplane": h.to_json(), "v": v }));
        }
        let (m, _) = h.separation(set, &[theta], margin_tol(tol, h.beta));
        if m <= margin_tol(tol, h.beta) {
            let x = h.common_point(set);
            return Err(json!({ "t": t, "reason": "meets", "hyperplane": h.to_json(), "x": x }));
        }
        let mu = stability_margin(&h, rec);
        Ok(Probe { t, h, mu })
    };
    let mut probes: Vec<Probe> = Vec::with_capacity(steps + 1);
    for i in std::iter::once(0).chain(std::iter::once(steps)).chain(probe_order(steps)) {
        match probe(i as f64 / steps as f64) {
            Ok(p) => probes.push(p),
            Err(f) => return Some(f),
        }
    }
    if rec.is_empty() {
        return None;
    }
    probes.sort_by(|a, b| a.t.total_cmp(&b.t));
    let mut stack: Vec<(Probe, Probe)> = Vec::new();
    let mut it = probes.into_iter();
    let mut prev = it.next()?;
    for p in it {
        stack.push((std::mem::replace(&mut prev, p.clone()), p));
    }
    let mut budget = 64 * steps;
    while let Some((l, r)) = stack.pop() {
        let gap = conormal_gap(&l.h, &r.h);
        if l.mu.0.max(r.mu.0) > 4.0 * gap {
            continue;
        }
        let mid = 0.5 * (l.t + r.t);
        if r.t - l.t < 1e-9 || budget == 0 {
            let worst = if l.mu.0 <= r.mu.0 { &l } else { &r };
            let v = realify(&rec[worst.mu.1]);
            return Some(json!({
                "t": worst.t,
                "reason": "near-unstable",
                "hyperplane": worst.h.to_json(),
                "v": v,
                "sine": worst.mu.0,
            }));
        }
        budget -= 1;
        let m = match probe(mid) {
            Ok(m) => m,
            Err(f) => return Some(f),
        };
        stack.push((m.clone(), r));
        stack.push((l, m));
    }
    None
}

fn aligned_path(n0: &Node, n1: &Node, t: f64) -> Option<(Hyperplane, f64)> {
    let (a0, b0) = n0.aligned();
    let (a1, b1) = n1.aligned();
    let a: Vec<C> = a0.iter().zip(&a1).map(|(x, y)| x * (1.0 - t) + y * t).collect();
    let s = crate::geometry::cnorm(&a);
    if s <= 1e-9 {
        return None;
    }
    let raw: Vec<C> = a.iter().map(|x| x / s).collect();
    let h = Hyperplane::new(&raw, (b0 * (1.0 - t) + b1 * t) / s)?;
    let theta = alignment(&h, &raw);
    Some((h, theta))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let nx = self.0[j];
            self.0[j] = r;
            j = nx;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

pub fn check_connectivity(set: &ConvexSet, plan: &SamplingPlan) -> CheckResult {
    let mut r = CheckResult::new("connectivity", "stable-disjoint-hyperplanes-connected", plan);
    if set.lineality().len() >= 2 {
        return r.with(Verdict::Inconclusive, "no stable hyperplane avoids E (lineality dimension >= 2)");
    }
    let mut rng = sampling::rng(plan.seed, 404);
    let mut qs = Vec::new();
    for _ in 0..plan.hyperplanes {
        if let Some(q) = exterior_point(set, plan, &mut rng) {
            qs.push(q);
        }
    }
    let nodes: Vec<Node> = exec::map_indexed(plan.execution, qs.len(), |i| {
        let mut local = sampling::rng(plan.seed, 5000 + i as u64);
        node_through(set, &qs[i], plan.tol, &mut local)
    })
    .into_iter()
    .flatten()
    .collect();
    r.samples = nodes.len();
    if nodes.len() < 2 {
        return r.with(Verdict::Inconclusive, format!("only {} stable disjoint hyperplanes sampled", nodes.len()));
    }
    let z0 = complexify(&set.point());
    let rec: Vec<Vec<C>> = stability::recession_samples(set.recession_cone(), 256).iter().map(|v| complexify(v)).collect();
    let mut uf = UnionFind((0..nodes.len()).collect());
    let mut blocking = Vec::new();
    let mut paths = 0;
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if uf.find(i) == uf.find(j) {
                continue;
            }
            paths += 1;
            let (ni, nj) = (&nodes[i], &nodes[j]);
            let f1 = path_failure(set, &rec, plan.path_steps, plan.tol, |t| aligned_path(ni, nj, t));
            let Some(f1) = f1 else {
                uf.union(i, j);
                continue;
            };
            let f2 = path_failure(set, &rec, plan.path_steps, plan.tol, |t| {
                let h = polar_lerp(&ni.h, &nj.h, &z0, t)?;
                let th = (1.0 - t) * ni.theta + t * nj.theta;
                Some((h, th))
            });
            match f2 {
                None => uf.union(i, j),
                Some(_) if blocking.len() < 4 => blocking.push(json!({ "from": i, "to": j, "failure": f1 })),
                Some(_) => {}
            }
        }
    }
    let mut comps: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..nodes.len() {
        let root = uf.find(i);
        comps.entry(root).or_default().push(i);
    }
    let retraction: Vec<Value> = nodes
        .iter()
        .take(MAX_WITNESSES)
        .map(|n| {
            let (a, _) = n.aligned();
            let contact = set.support(&realify(&a)).ok().and_then(|s| s.argmax);
            json!({ "translate_to_contact": n.margin, "contact": contact })
        })
        .collect();
    if comps.len() == 1 {
        r.witnesses.push(json!({ "kind": "graph", "nodes": nodes.len(), "paths_tested": paths, "retraction": retraction }));
        r.with(Verdict::VerifiedSampled, format!("{} sampled hyperplanes form one connected component", nodes.len()))
    } else {
        let components: Vec<Vec<usize>> = comps.into_values().collect();
        let reps: Vec<Value> = components.iter().map(|c| nodes[c[0]].to_json()).collect();
        let w = json!({
            "kind": "disconnected",
            "components": components,
            "representatives": reps,
            "blocking": blocking,
            "retraction": retraction,
        });
        if recheck_disconnected(set, &w, plan.tol) {
            r.witnesses.push(w);
            r.with(Verdict::Refuted, "sampled stable disjoint hyperplanes fall into several components")
        } else {
            r.witnesses.push(w);
            r.with(Verdict::Inconclusive, "graph disconnected but the blocking evidence did not recheck")
        }
    }
}

pub fn check_chart_compact(set: &ConvexSet, hyperplanes: &[Hyperplane], grid: &[f64], plan: &SamplingPlan) -> CheckResult {
    let mut r = CheckResult::new("chart_compact", "compact-cone-section", plan);
    if hyperplanes.is_empty() {
        return r.with(Verdict::Inconclusive, "no candidate hyperplanes");
    }
    let cmin = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let mut smallest_all = f64::NEG_INFINITY;
    let used = hyperplanes.len().min(20);
    r.samples = used;
    for h in &hyperplanes[..used] {
        let dirs = h.real_directions();
        if let Some(v) = h.unstable_direction(set) {
            let w = json!({ "kind": "cone-direction", "a": cjson(&h.a), "beta": [h.beta.re, h.beta.im], "v": v, "ratio": 0.0 });
            if r.witnesses.len() < MAX_WITNESSES && recheck_cone_direction(set, &w, cmin) {
                r.witnesses.push(w);
            }
            continue;
        }
        match stability::aperture_witness(set, &dirs, 256) {
            Some((ratio, v)) if ratio < cmin => {
                let w = json!({ "kind": "cone-direction", "a": cjson(&h.a), "beta": [h.beta.re, h.beta.im], "v": v, "ratio": ratio });
                if r.witnesses.len() < MAX_WITNESSES && recheck_cone_direction(set, &w, cmin) {
                    r.witnesses.push(w);
                }
            }
            other => {
                let bound = other.map_or(f64::INFINITY, |o| o.0);
                let smallest = grid.iter().copied().filter(|&c| c < bound).fold(f64::INFINITY, f64::min);
                smallest_all = smallest_all.max(smallest);
            }
        }
    }
    if !r.witnesses.is_empty() {
        r.with(Verdict::Refuted, format!("the recession cone meets every cone of the grid down to c = {cmin}"))
    } else {
        r.with(Verdict::VerifiedSampled, format!("every candidate cone section is compact; smallest passing c = {smallest_all}"))
    }
}

/// Smoothing evidence for epigraphs of norm combinations.
pub fn check_normcombo_smoothing(set: &ConvexSet, plan: &SamplingPlan) -> Option<CheckResult> {
    let terms = normcombo_terms(set.spec())?;
    let r = CheckResult::new("normcombo_smoothing", "irreducible-normcombo-smoothing", plan);
    let eta = 0.1;
    let psi = match smooth_normcombo(&terms, eta) {
        Ok(p) => p,
        Err(e) => return Some(r.with(Verdict::Inconclusive, format!("irreducibility undecided: {e}"))),
    };
    let k = terms[0].u.len();
    let bound = eta * psi.coef_sum();
    let mut rng = sampling::rng(plan.seed, 505);
    let mut r = r;
    r.samples = 11_000;
    for _ in 0..10_000 {
        let x = sampling::ball(&mut rng, k, plan.window);
        let (p, f) = (psi.value(&x), psi.phi(&x));
        if p > f + 1e-12 || p < f - bound - 1e-12 {
            r.witnesses.push(json!({ "kind": "sandwich-violation", "x": x, "psi": p, "phi": f }));
            return Some(r.with(Verdict::Inconclusive, "sampled sandwich violated"));
        }
    }
    for _ in 0..1000 {
        let x = sampling::ball(&mut rng, k, 0.5 * plan.window);
        let fd = hessian_min_eig(&|y| psi.value(y), &x, 1e-4);
        if !(fd > 0.0) || !(linalg::min_eigenvalue(&psi.hessian(&x)) > 0.0) {
            r.witnesses.push(json!({ "kind": "flat-hessian", "x": x, "fd_min_eig": fd }));
            return Some(r.with(Verdict::Inconclusive, "Hessian not positive at a sample"));
        }
    }
    Some(r.with(
        Verdict::VerifiedSampled,
        format!("positive coefficients, spanning functionals; smooth strictly convex psi within {bound} of phi"),
    ))
}

fn recheck_halfline(set: &ConvexSet, w: &Value) -> bool {
    let (Some(p), Some(n), Some(x), Some(v)) =
        (rparse(&w["boundary_point"]), rparse(&w["normal"]), rparse(&w["point"]), rparse(&w["direction"]))
    else {
        return false;
    };
    let jn = j_op(&n);
    let in_tangent = |y: &[f64]| {
        let r = linalg::sub(y, &p);
        let s = 1e-8 * (1.0 + linalg::norm(&r));
        linalg::dot(&r, &n).abs() <= s && linalg::dot(&r, &jn).abs() <= s
    };
    (linalg::norm(&v) - 1.0).abs() < 1e-9 && in_tangent(&x) && in_tangent(&linalg::add(&x, &v)) && set.ray_probe(&x, &v)
}

fn hyperplane_of(h: &Value) -> Option<Hyperplane> {
    Some(Hyperplane { a: cparse(&h["a"])?, beta: cnum(&h["beta"])? })
}

fn recheck_failure(set: &ConvexSet, f: &Value) -> bool {
    match f["reason"].as_str() {
        Some("unstable") => {
            let (Some(h), Some(v)) = (hyperplane_of(&f["hyperplane"]).or_else(|| hyperplane_of(f)), rparse(&f["v"])) else {
                return false;
            };
            herm(&complexify(&v), &h.a).norm() <= 1e-8 && set.ray_probe(&set.point(), &v)
        }
        // the hyperplane is within a sine of 1e-6 of containing a recession
        // direction; bisection stopped one nanostep short of it
        Some("near-unstable") => {
            let (Some(h), Some(v)) = (hyperplane_of(&f["hyperplane"]), rparse(&f["v"])) else {
                return false;
            };
            herm(&complexify(&v), &h.a).norm() <= 1e-6 && set.ray_probe(&set.point(), &v)
        }
        Some("meets") => {
            let (Some(h), Some(x)) = (hyperplane_of(&f["hyperplane"]).or_else(|| hyperplane_of(f)), rparse(&f["x"])) else {
                return false;
            };
            let s = 1.0 + linalg::norm(&x);
            h.residual(&complexify(&x)) <= 1e-7 * s && set.contains(&x, 1e-7 * s).unwrap_or(false)
        }
        Some("degenerate") => true,
        _ => false,
    }
}

fn recheck_obstruction(set: &ConvexSet, w: &Value) -> bool {
    let (Some(q), Some(hs)) = (rparse(&w["q"]), w["hyperplanes"].as_array()) else {
        return false;
    };
    if set.contains(&q, 0.0).unwrap_or(true) || hs.is_empty() {
        return false;
    }
    hs.iter().all(|h| {
        hyperplane_of(h).is_some_and(|hp| hp.residual(&complexify(&q)) <= 1e-9 * (1.0 + linalg::norm(&q)))
            && recheck_failure(set, h)
    })
}

fn recheck_tube(set: &ConvexSet, w: &Value, seed: u64) -> bool {
    let (Some(base), Some(dir), Some(fiber)) = (rparse(&w["base"]), cparse(&w["direction"]), w["fiber"].as_array()) else {
        return false;
    };
    let Some(fiber): Option<Vec<Vec<f64>>> = fiber.iter().map(rparse).collect() else {
        return false;
    };
    let line = AffineSubspaceC::new(ComplexPoint::from_real(&base), &[dir]).realify();
    fiber.iter().all(|v| {
        linalg::normalized(v).is_some_and(|u| set.ray_probe(&set.point(), &u) && set.ray_probe(&set.point(), &linalg::scale(&u, -1.0)))
    }) && stability::verify_tube(set, &line, &fiber, 1000, seed)
}

fn recheck_disconnected(set: &ConvexSet, w: &Value, tol: f64) -> bool {
    let reps_ok = w["representatives"].as_array().is_some_and(|reps| {
        reps.len() >= 2
            && reps.iter().all(|r| {
                let Some(h) = hyperplane_of(r) else { return false };
                let theta = r["theta"].as_f64().unwrap_or(0.0);
                h.is_stable(set) && h.margin_at(set, theta) > margin_tol(tol, h.beta)
            })
    });
    let blocking_ok = w["blocking"].as_array().is_some_and(|b| !b.is_empty() && b.iter().all(|x| recheck_failure(set, &x["failure"])));
    reps_ok && blocking_ok
}

fn recheck_cone_direction(set: &ConvexSet, w: &Value, cmin: f64) -> bool {
    let (Some(h), Some(v)) = (hyperplane_of(w), rparse(&w["v"])) else {
        return false;
    };
    let z = complexify(&v);
    // |v''| is the component along the conormal, |v'| the rest
    let perp = herm(&z, &h.a).norm();
    let par = (linalg::dot(&v, &v) - perp * perp).max(0.0).sqrt();
    (perp < cmin * par) && set.ray_probe(&set.point(), &v)
}

/// Independent recheck of a stored witness under the check that produced
/// it; true when the witness still refutes.
pub fn recheck_witness(set: &ConvexSet, check: &str, w: &Value, seed: u64, tol: f64) -> bool {
    match (check, w["kind"].as_str()) {
        ("complex_tangent_halfline", Some("halfline")) => recheck_halfline(set, w),
        ("weak_projective", Some("lineality-obstruction")) => recheck_obstruction(set, w),
        ("line_lift", Some("tube")) => recheck_tube(set, w, seed),
        ("connectivity", Some("disconnected")) => recheck_disconnected(set, w, tol),
        ("chart_compact", Some("cone-direction")) => recheck_cone_direction(set, w, 0.01),
        _ => false,
    }
}
