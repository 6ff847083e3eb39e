//! Seeded random sampling helpers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SeededRng = ChaCha8Rng;

/// Independent stream for `(seed, stream)`.
pub fn rng(seed: u64, stream: u64) -> SeededRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn gaussian(rng: &mut SeededRng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn unit_sphere(rng: &mut SeededRng, d: usize) -> Vec<f64> {
    loop {
        let v = gaussian(rng, d);
        let n = norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform point of the closed ball of radius `r` about the origin.
pub fn ball(rng: &mut SeededRng, d: usize, r: f64) -> Vec<f64> {
    let s = unit_sphere(rng, d);
    let rad = r * rng.gen::<f64>().powf(1.0 / d as f64);
    s.into_iter().map(|x| x * rad).collect()
}

pub fn uniform(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
