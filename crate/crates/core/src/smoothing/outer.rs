//! Nested strongly convex outer approximations `E_k = {tau_k <= 0}` with
//! `tau_{k+1} = rmax{tau_k, rho}` folded over batches of separators.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{ExpSeparator, Jet, Profile, SmoothMax, SmoothingError, WeightSpec};
use crate::convex::ConvexSet;
use crate::exec::{self, Execution};
use crate::linalg;
use crate::sampling;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterOptions {
    pub seed: u64,
    /// Separators per step.
    pub batch: usize,
    /// Exterior candidates drawn from the window.
    pub pool: usize,
    /// Mollifier width for each pairwise combination.
    pub delta: f64,
    pub execution: Execution,
}

impl Default for OuterOptions {
    fn default() -> Self {
        OuterOptions { seed: 42, batch: 32, pool: 4096, delta: 0.02, execution: Execution::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoothingState {
    pub dim: usize,
    pub window: f64,
    pub weight: WeightSpec,
    pub separators: Vec<ExpSeparator>,
    /// `tau_k` folds `separators[..step_ends[k - 1]]`.
    pub step_ends: Vec<usize>,
    pub anchors: Vec<Vec<f64>>,
    /// `-max tau_k` over the samples of `E` used at construction.
    pub c: Vec<f64>,
    #[serde(skip)]
    sm: Option<SmoothMax>,
}

impl SmoothingState {
    pub fn steps(&self) -> usize {
        self.step_ends.len()
    }

    fn smooth_max(&self) -> SmoothMax {
        match &self.sm {
            Some(s) => s.clone(),
            None => SmoothMax::new(&self.weight).expect("validated weight"),
        }
    }

    /// Rebuild the tabulated pair maximum after deserializing.
    pub fn prepare(&mut self) {
        if self.sm.is_none() {
            self.sm = Some(SmoothMax::new(&self.weight).expect("validated weight"));
        }
    }

    fn fold_values(&self, sm: &SmoothMax, x: &[f64], k: usize) -> f64 {
        let end = self.step_ends[k - 1];
        let mut t = self.separators[0].value(x);
        for s in &self.separators[1..end] {
            t = sm.pair(t, s.value(x));
        }
        t
    }

    /// `tau_k(x)` for `k` in `1..=steps`.
    pub fn tau(&self, k: usize, x: &[f64]) -> f64 {
        match &self.sm {
            Some(sm) => self.fold_values(sm, x, k),
            None => self.fold_values(&self.smooth_max(), x, k),
        }
    }

    /// All `tau_1(x), ..., tau_K(x)` in one pass.
    pub fn taus(&self, x: &[f64]) -> Vec<f64> {
        let owned;
        let sm = match &self.sm {
            Some(sm) => sm,
            None => {
                owned = self.smooth_max();
                &owned
            }
        };
        let mut out = Vec::with_capacity(self.steps());
        let mut t = self.separators[0].value(x);
        let mut next = 0;
        for (i, s) in self.separators.iter().enumerate() {
            if i > 0 {
                t = sm.pair(t, s.value(x));
            }
            while next < self.step_ends.len() && self.step_ends[next] == i + 1 {
                out.push(t);
                next += 1;
            }
        }
        out
    }

    /// Analytic value, gradient and Hessian of `tau_k`.
    pub fn tau_jet(&self, k: usize, x: &[f64]) -> Jet {
        let sm = self.smooth_max();
        let end = self.step_ends[k - 1];
        let mut j = self.separators[0].jet(x);
        for s in &self.separators[1..end] {
            j = j.combine(&s.jet(x), &sm);
        }
        j
    }

    /// CSV rows `x..., tau_1, ..., tau_K` on a square planar grid.
    pub fn grid_csv(&self, n: usize) -> String {
        let mut out = String::new();
        let cols: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        let taus: Vec<String> = (1..=self.steps()).map(|k| format!("tau_{k}")).collect();
        out.push_str(&format!("{},{}\n", cols.join(","), taus.join(",")));
        for x in planar_grid(self.dim, self.window, n) {
            let vals: Vec<String> = x.iter().chain(self.taus(&x).iter()).map(|v| format!("{v:.12e}")).collect();
            out.push_str(&vals.join(","));
            out.push('\n');
        }
        out
    }
}

/// Grid of `n x n` points on `[-w, w]^2` in the first two coordinates.
pub fn planar_grid(d: usize, w: f64, n: usize) -> Vec<Vec<f64>> {
    let step = if n > 1 { 2.0 * w / (n - 1) as f64 } else { 0.0 };
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut x = vec![0.0; d];
            x[0] = -w + i as f64 * step;
            if d > 1 {
                x[1] = -w + j as f64 * step;
            }
            out.push(x);
        }
    }
    out
}

/// Separator that cuts off `q` and is `<= -1` on `E`.
fn separator_for(set: &ConvexSet, q: &[f64], w0: &[f64]) -> Result<ExpSeparator, SmoothingError> {
    let d = set.dim();
    let p = set.nearest_boundary(q)?;
    let dist = linalg::dist(q, &p);
    if dist <= 1e-9 {
        return Err(SmoothingError::SeparatorNotFound);
    }
    let nu = linalg::scale(&linalg::sub(q, &p), 1.0 / dist);
    let inf_along = |e: &[f64]| -> f64 {
        match set.support_sup(&linalg::scale(e, -1.0)) {
            Ok(h) => -h,
            Err(_) => f64::NEG_INFINITY,
        }
    };
    // tilt the axis from -nu toward the interior of the dual cone while the
    // gap between q and E along it stays at least dist / 2
    let mut chosen = None;
    let mut t = 1.0;
    for _ in 0..12 {
        if let Some(e) = linalg::normalized(&linalg::axpy(&linalg::scale(&nu, -1.0), t, w0)) {
            let g = inf_along(&e) - linalg::dot(q, &e);
            if g.is_finite() && g >= 0.5 * dist {
                chosen = Some((e, g));
                break;
            }
        }
        t *= 0.5;
    }
    let (axis, gap) = match chosen {
        Some(c) => c,
        None => {
            let e = linalg::scale(&nu, -1.0);
            (e.clone(), inf_along(&e) - linalg::dot(q, &e))
        }
    };
    if !(gap > 0.0) {
        return Err(SmoothingError::SeparatorNotFound);
    }
    let origin = linalg::axpy(q, 0.5 * gap, &axis);
    let perp = linalg::complement(&[axis.clone()], d);
    let eps = 0.25 * gap;
    // y_m - c |y'|_1 >= eps on E bounds y_m - f(y') from below by eps
    let k = perp.len();
    if k > 12 {
        return Err(SmoothingError::SeparatorNotFound);
    }
    let mut c = 1.0;
    let mut ok = false;
    for _ in 0..60 {
        ok = (0u32..(1 << k)).all(|mask| {
            let mut e = axis.clone();
            for (i, b) in perp.iter().enumerate() {
                let s = if mask >> i & 1 == 1 { -c } else { c };
                e = linalg::axpy(&e, -s, b);
            }
            inf_along(&e) - linalg::dot(&origin, &e) >= eps
        });
        if ok {
            break;
        }
        c *= 0.5;
    }
    if !ok {
        return Err(SmoothingError::SeparatorNotFound);
    }
    Ok(ExpSeparator { origin, axis, perp, profile: Profile::Hyperbolic { c }, scale: 1.0 / (-(-eps).exp_m1()) })
}

/// Greedy farthest-point choice of up to `m` anchors, seeded by the
/// distance to `E`.
fn pick_anchors(cands: &[(Vec<f64>, f64)], m: usize) -> Vec<Vec<f64>> {
    let mut score: Vec<f64> = cands.iter().map(|c| c.1).collect();
    let mut out = Vec::new();
    for _ in 0..m.min(cands.len()) {
        let (i, s) = score.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &s)| if s > b.1 { (i, s) } else { b });
        if s <= 0.0 {
            break;
        }
        out.push(cands[i].0.clone());
        for (j, c) in cands.iter().enumerate() {
            score[j] = score[j].min(linalg::dist(&c.0, &cands[i].0));
        }
    }
    out
}

/// Build `tau_1, ..., tau_{k_max}` for a closed convex set without lines,
/// exhausting the complement of `E` inside the window ball.
pub fn outer_sequence(set: &ConvexSet, k_max: usize, window: f64, opts: &OuterOptions) -> Result<SmoothingState, SmoothingError> {
    if !set.lineality().is_empty() {
        return Err(SmoothingError::LinealityNonEmpty);
    }
    let weight = WeightSpec::new(opts.delta);
    let sm = SmoothMax::new(&weight)?;
    let d = set.dim();
    let cone = set.recession_cone();
    let mut w0 = vec![0.0; d];
    for r in &cone.ineq {
        if let Some(u) = linalg::normalized(r) {
            w0 = linalg::axpy(&w0, -1.0, &u);
        }
    }
    let mut rng = sampling::rng(opts.seed, 21);
    let pool: Vec<Vec<f64>> = (0..opts.pool).map(|_| sampling::ball(&mut rng, d, window)).collect();
    let inside: Vec<Vec<f64>> = pool.iter().filter(|x| set.contains(x, 0.0).unwrap_or(false)).cloned().collect();
    let exterior: Vec<(Vec<f64>, f64)> = exec::map_slice(opts.execution, &pool, |x| {
        if set.contains(x, 0.0).unwrap_or(true) {
            return None;
        }
        set.nearest_boundary(x).ok().map(|p| (x.clone(), linalg::dist(x, &p)))
    })
    .into_iter()
    .flatten()
    .collect();

    let mut state = SmoothingState {
        dim: d,
        window,
        weight,
        separators: Vec::new(),
        step_ends: Vec::new(),
        anchors: Vec::new(),
        c: Vec::new(),
        sm: Some(sm),
    };
    for k in 1..=k_max {
        let remaining: Vec<(Vec<f64>, f64)> = if k == 1 {
            exterior.clone()
        } else {
            let flags = exec::map_slice(opts.execution, &exterior, |(x, _)| state.tau(k - 1, x) <= 0.0);
            exterior.iter().zip(flags).filter(|(_, f)| *f).map(|(c, _)| c.clone()).collect()
        };
        let anchors = pick_anchors(&remaining, opts.batch);
        if anchors.is_empty() && state.separators.is_empty() {
            return Err(SmoothingError::SeparatorNotFound);
        }
        let seps: Vec<Result<ExpSeparator, SmoothingError>> =
            exec::map_slice(opts.execution, &anchors, |q| separator_for(set, q, &w0));
        for s in seps {
            state.separators.push(s?);
        }
        state.anchors.extend(anchors);
        state.step_ends.push(state.separators.len());
        let worst = exec::map_slice(opts.execution, &inside, |x| state.tau(k, x))
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        state.c.push(-worst);
    }
    Ok(state)
}

/// Grid verification of `E ⊂ E_K ⊂ ... ⊂ E_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestingReport {
    pub points: usize,
    pub points_in_e: usize,
    /// Points of `E` with `tau_k > 0` for some `k`.
    pub e_violations: usize,
    /// Points with `tau_{k+1} <= 0 < tau_k` for some `k`.
    pub nesting_violations: usize,
    /// `max tau_k` over the grid points of `E`, per step.
    pub max_tau_on_e: Vec<f64>,
}

impl SmoothingState {
    pub fn verify_nesting(&self, set: &ConvexSet, n: usize, execution: Execution) -> NestingReport {
        let grid = planar_grid(self.dim, self.window, n);
        let rows = exec::map_slice(execution, &grid, |x| (set.contains(x, 0.0).unwrap_or(false), self.taus(x)));
        let k = self.steps();
        let mut rep = NestingReport {
            points: grid.len(),
            points_in_e: 0,
            e_violations: 0,
            nesting_violations: 0,
            max_tau_on_e: vec![f64::NEG_INFINITY; k],
        };
        for (in_e, t) in rows {
            if in_e {
                rep.points_in_e += 1;
                if t.iter().any(|&v| v > 0.0) {
                    rep.e_violations += 1;
                }
                for (m, v) in rep.max_tau_on_e.iter_mut().zip(&t) {
                    *m = m.max(*v);
                }
            }
            if t.windows(2).any(|w| w[1] <= 0.0 && w[0] > 0.0) {
                rep.nesting_violations += 1;
            }
        }
        rep
    }

    /// Minimum over `samples` window points of the smallest analytic
    /// Hessian eigenvalue of `tau_k`.
    pub fn min_hessian_eig(&self, k: usize, samples: usize, seed: u64) -> f64 {
        let mut rng = sampling::rng(seed, 23);
        let pts: Vec<Vec<f64>> = (0..samples).map(|_| sampling::ball(&mut rng, self.dim, self.window)).collect();
        pts.iter()
            .map(|x| {
                let h: DMatrix<f64> = self.tau_jet(k, x).hess;
                linalg::min_eigenvalue(&h)
            })
            .fold(f64::INFINITY, f64::min)
    }
}
