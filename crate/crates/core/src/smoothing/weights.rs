//! The mollifier `xi`, Gauss-Legendre rules and the regularized maximum.

use serde::{Deserialize, Serialize};

use super::SmoothingError;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub delta: f64,
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_order() -> usize {
    32
}

impl WeightSpec {
    pub fn new(delta: f64) -> Self {
        WeightSpec { delta, order: 32 }
    }

    pub fn validate(&self) -> Result<(), SmoothingError> {
        if !(self.delta > 0.0) || !self.delta.is_finite() || self.order < 2 {
            return Err(SmoothingError::InvalidWeight);
        }
        Ok(())
    }
}

/// `xi(t) = C exp(-1 / (1 - (2t/delta)^2))` on `(-delta/2, delta/2)` with
/// `C` normalizing the Gauss-Legendre integral to 1.
#[derive(Debug, Clone)]
pub struct Mollifier {
    pub delta: f64,
    norm: f64,
    gx: Vec<f64>,
    gw: Vec<f64>,
    /// Quadrature nodes on the support and the induced discrete weights.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

impl Mollifier {
    pub fn new(w: &WeightSpec) -> Result<Self, SmoothingError> {
        w.validate()?;
        let (gx, gw) = gauss_legendre(w.order);
        let h = w.delta / 2.0;
        let raw: Vec<f64> = gx.iter().zip(&gw).map(|(x, wt)| wt * h * bump(*x)).collect();
        let total: f64 = raw.iter().sum();
        let nodes: Vec<f64> = gx.iter().map(|x| x * h).collect();
        // symmetrize so the discrete measure is exactly even
        let n = raw.len();
        let weights: Vec<f64> = (0..n).map(|i| 0.5 * (raw[i] + raw[n - 1 - i]) / total).collect();
        Ok(Mollifier { delta: w.delta, norm: 1.0 / total, gx, gw, nodes, weights })
    }

    pub fn xi(&self, t: f64) -> f64 {
        self.norm * bump(2.0 * t / self.delta)
    }

    /// Gauss-Legendre integral of `f` over `[lo, hi]`.
    pub fn integrate(&self, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let (m, r) = (0.5 * (hi + lo), 0.5 * (hi - lo));
        self.gx.iter().zip(&self.gw).map(|(x, w)| w * r * f(m + r * x)).sum()
    }

    /// `int_{-inf}^x xi`.
    pub fn cdf(&self, x: f64) -> f64 {
        let h = self.delta / 2.0;
        if x <= -h {
            0.0
        } else if x >= h {
            1.0
        } else if x > 0.0 {
            1.0 - self.cdf(-x)
        } else {
            self.integrate(-h, x, |t| self.xi(t))
        }
    }

    /// `E[(x + T)^+]` for `T ~ xi`.
    pub fn ramp(&self, x: f64) -> f64 {
        let h = self.delta / 2.0;
        if x <= -h {
            0.0
        } else if x >= h {
            x
        } else if x > 0.0 {
            x + self.ramp(-x)
        } else {
            self.integrate(-x, h, |t| (x + t) * self.xi(t))
        }
    }
}

/// Regularized maximum `E[max_i (u_i + t_i)]` for independent `t_i`
/// distributed by the quadrature measure of `xi`. Exact on the separated
/// regime, where it returns `max(u)`. Tuples longer than three are folded
/// pairwise from the left.
pub fn rmax(u: &[f64], w: &WeightSpec) -> Result<f64, SmoothingError> {
    let m = Mollifier::new(w)?;
    Ok(rmax_with(u, &m))
}

pub fn rmax_with(u: &[f64], m: &Mollifier) -> f64 {
    match u.len() {
        0 => f64::NEG_INFINITY,
        1 => u[0],
        2 | 3 => rmax_small(u, m),
        _ => {
            let mut acc = rmax_small(&u[..2], m);
            for &x in &u[2..] {
                acc = rmax_small(&[acc, x], m);
            }
            acc
        }
    }
}

fn rmax_small(u: &[f64], m: &Mollifier) -> f64 {
    let top = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let second = {
        let mut seen = false;
        u.iter().copied().fold(f64::NEG_INFINITY, |acc, x| {
            if x == top && !seen {
                seen = true;
                acc
            } else {
                acc.max(x)
            }
        })
    };
    if top - second >= m.delta {
        return top;
    }
    rmax_quadrature(u, m)
}

/// The quadrature sum behind `rmax`, without the separated-regime shortcut.
pub fn rmax_quadrature(u: &[f64], m: &Mollifier) -> f64 {
    let top = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // E[M] = sum_s s (prod_i F_i(s) - prod_i F_i(s-)) over the sorted atoms
    let q = m.nodes.len();
    let mut atoms: Vec<(f64, usize, usize)> = Vec::with_capacity(u.len() * q);
    for (i, &ui) in u.iter().enumerate() {
        for j in 0..q {
            atoms.push((ui + m.nodes[j], i, j));
        }
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut cdf = vec![0.0; u.len()];
    let mut prev = 0.0;
    let mut acc = 0.0;
    let mut k = 0;
    while k < atoms.len() {
        let s = atoms[k].0;
        while k < atoms.len() && atoms[k].0 == s {
            cdf[atoms[k].1] += m.weights[atoms[k].2];
            k += 1;
        }
        let prod: f64 = cdf.iter().product();
        acc += s * (prod - prev);
        prev = prod;
    }
    // the sum telescopes to total mass 1 up to rounding; correct it
    acc + top * (1.0 - prev)
}

/// Tabulated smooth pairwise maximum `u1 + g(u2 - u1)`, with
/// `g(d) = E[(d + T2 - T1)^+]` for independent `T1, T2 ~ xi`. `g` is convex,
/// `0 <= g' <= 1`, `g(d) = max(d, 0)` for `|d| >= delta`.
#[derive(Debug, Clone)]
pub struct SmoothMax {
    pub delta: f64,
    step: f64,
    g: Vec<f64>,
    g1: Vec<f64>,
    g2: Vec<f64>,
}

impl SmoothMax {
    pub fn new(w: &WeightSpec) -> Result<Self, SmoothingError> {
        let m = Mollifier::new(w)?;
        let d = w.delta;
        let h = d / 2.0;
        let cells = 2048;
        let step = 2.0 * d / cells as f64;
        let mut g = vec![0.0; cells + 1];
        let mut g1 = vec![0.0; cells + 1];
        let mut g2 = vec![0.0; cells + 1];
        // only the left half is integrated; the right follows by symmetry
        for k in 0..=cells / 2 {
            let x = -d + k as f64 * step;
            let hi = (x + h).min(h);
            g[k] = m.integrate(-h, hi, |t| m.ramp(x - t) * m.xi(t));
            g1[k] = m.integrate(-h, hi, |t| m.cdf(x - t) * m.xi(t));
            g2[k] = m.integrate((x - h).max(-h), (x + h).min(h), |t| m.xi(x - t) * m.xi(t));
        }
        for k in cells / 2 + 1..=cells {
            let x = -d + k as f64 * step;
            let r = cells - k;
            g[k] = x + g[r];
            g1[k] = 1.0 - g1[r];
            g2[k] = g2[r];
        }
        g[0] = 0.0;
        g1[0] = 0.0;
        g2[0] = 0.0;
        g[cells] = d;
        g1[cells] = 1.0;
        g2[cells] = 0.0;
        Ok(SmoothMax { delta: d, step, g, g1, g2 })
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let s = (x + self.delta) / self.step;
        let i = (s.floor() as usize).min(self.g.len() - 2);
        (i, s - i as f64)
    }

    fn hermite(y0: f64, y1: f64, d0: f64, d1: f64, h: f64, t: f64) -> f64 {
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * h * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * h * d1
    }

    /// `(g, g', g'')` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        if x <= -self.delta {
            return (0.0, 0.0, 0.0);
        }
        if x >= self.delta {
            return (x, 1.0, 0.0);
        }
        let (i, t) = self.locate(x);
        let h = self.step;
        let g = Self::hermite(self.g[i], self.g[i + 1], self.g1[i], self.g1[i + 1], h, t);
        let g1 = Self::hermite(self.g1[i], self.g1[i + 1], self.g2[i], self.g2[i + 1], h, t);
        let g2 = (1.0 - t) * self.g2[i] + t * self.g2[i + 1];
        (g.max(x.max(0.0)), g1.clamp(0.0, 1.0), g2.max(0.0))
    }

    pub fn pair(&self, u1: f64, u2: f64) -> f64 {
        u1 + self.eval(u2 - u1).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(6)).sum();
        assert!((i - 2.0 / 7.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn mollifier_is_normalized() {
        let m = Mollifier::new(&WeightSpec::new(0.1)).unwrap();
        let total = m.integrate(-0.05, 0.05, |t| m.xi(t));
        assert!((total - 1.0).abs() < 1e-10);
        assert!((m.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn separated_regime_is_exact() {
        let w = WeightSpec::new(0.1);
        assert_eq!(rmax(&[5.0, 1.0], &w).unwrap(), 5.0);
        let r = rmax(&[0.0, 0.0], &w).unwrap();
        assert!((0.0..=0.1).contains(&r));
    }

    #[test]
    fn smooth_pair_matches_direct_quadrature() {
        let w = WeightSpec::new(0.1);
        let s = SmoothMax::new(&w).unwrap();
        let (g0, g1, _) = s.eval(0.0);
        // frozen from an independent double quadrature of the same formula
        assert!((g0 - 0.011437).abs() < 1e-6);
        assert!((g1 - 0.5).abs() < 1e-12);
        assert_eq!(s.pair(5.0, 1.0), 5.0);
    }
}
