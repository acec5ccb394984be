//! Seeded Monte Carlo integration.
//!
//! Samples are drawn in fixed-size chunks; chunk `i` uses a ChaCha8 stream
//! derived from `(seed, i)`. Chunk statistics are merged in chunk order, so
//! the estimate is bit-identical for any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::{IntegralResult, QuadratureSpec};
use crate::error::Result;

pub type McRng = ChaCha8Rng;

pub const CHUNK_SIZE: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub accepted: usize,
    pub empty_region: bool,
}

impl McResult {
    pub fn to_integral(&self, spec: &QuadratureSpec) -> IntegralResult {
        IntegralResult {
            value: self.value,
            error_estimate: self.std_error,
            evals: self.samples,
            converged: !self.empty_region && spec.accepts(self.value, self.std_error),
        }
    }
}

/// A region with a sampling density.
pub trait Sampler: Sync {
    fn dim(&self) -> usize;

    /// Writes a point into `out` and returns `1/pdf` at that point, or `None`
    /// when the draw falls outside the region.
    fn draw(&self, rng: &mut McRng, out: &mut [f64]) -> Option<f64>;
}

/// Uniform density on an axis-aligned box.
#[derive(Debug, Clone)]
pub struct BoxSampler {
    lo: Vec<f64>,
    hi: Vec<f64>,
    volume: f64,
}

impl BoxSampler {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        let volume = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
        Self { lo, hi, volume }
    }

    pub fn cube(dim: usize, half_width: f64) -> Self {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }
}

impl Sampler for BoxSampler {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn draw(&self, rng: &mut McRng, out: &mut [f64]) -> Option<f64> {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.lo[k] + (self.hi[k] - self.lo[k]) * rng.gen::<f64>();
        }
        Some(self.volume)
    }
}

/// Uniform density in a `dim`-ball of given radius, centred at the origin.
#[derive(Debug, Clone, Copy)]
pub struct BallSampler {
    pub dim: usize,
    pub radius: f64,
}

impl BallSampler {
    pub fn unit(dim: usize) -> Self {
        Self { dim, radius: 1.0 }
    }

    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.dim) * self.radius.powi(self.dim as i32)
    }
}

impl Sampler for BallSampler {
    fn dim(&self) -> usize {
        self.dim
    }

    fn draw(&self, rng: &mut McRng, out: &mut [f64]) -> Option<f64> {
        sample_unit_ball(rng, out);
        for o in out.iter_mut() {
            *o *= self.radius;
        }
        Some(self.volume())
    }
}

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    use std::f64::consts::PI;
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * PI / d as f64,
    }
}

/// Uniform point in the unit ball by rejection from the enclosing cube (d ≤ 4)
/// or by normalised Gaussian direction and `u^{1/d}` radius otherwise.
pub fn sample_unit_ball(rng: &mut McRng, out: &mut [f64]) {
    let d = out.len();
    if d <= 4 {
        loop {
            let mut r2 = 0.0;
            for o in out.iter_mut() {
                *o = 2.0 * rng.gen::<f64>() - 1.0;
                r2 += *o * *o;
            }
            if r2 < 1.0 {
                return;
            }
        }
    }
    let mut norm2 = 0.0;
    for o in out.iter_mut() {
        *o = standard_normal(rng);
        norm2 += *o * *o;
    }
    let scale = rng.gen::<f64>().powf(1.0 / d as f64) / norm2.sqrt();
    for o in out.iter_mut() {
        *o *= scale;
    }
}

/// Uniform direction on the unit sphere in `out.len()` dimensions.
pub fn sample_unit_direction(rng: &mut McRng, out: &mut [f64]) {
    loop {
        let mut norm2 = 0.0;
        for o in out.iter_mut() {
            *o = standard_normal(rng);
            norm2 += *o * *o;
        }
        if norm2 > 1e-300 {
            let inv = norm2.sqrt().recip();
            for o in out.iter_mut() {
                *o *= inv;
            }
            return;
        }
    }
}

fn standard_normal(rng: &mut McRng) -> f64 {
    // Box–Muller; one of the pair is discarded to keep streams simple.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    accepted: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return Moments { accepted: self.accepted + other.accepted, ..other };
        }
        if other.n == 0 {
            return Moments { accepted: self.accepted + other.accepted, ..self };
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        Moments { n, accepted: self.accepted + other.accepted, mean, m2 }
    }
}

/// Deterministic chunked estimator of `E[draw]`. `draw` returns the weighted
/// sample, or `None` for a rejected draw (counted as zero).
pub fn mc_estimate<D>(samples: usize, seed: u64, draw: D) -> McResult
where
    D: Fn(&mut McRng) -> Option<f64> + Sync,
{
    let n_chunks = samples.div_ceil(CHUNK_SIZE);
    let chunks: Vec<Moments> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let count = CHUNK_SIZE.min(samples - chunk * CHUNK_SIZE);
            let mut m = Moments::default();
            for _ in 0..count {
                match draw(&mut rng) {
                    Some(v) => {
                        m.accepted += 1;
                        m.push(v);
                    }
                    None => m.push(0.0),
                }
            }
            m
        })
        .collect();
    let total = chunks.into_iter().fold(Moments::default(), Moments::merge);
    if total.accepted == 0 {
        return McResult { value: 0.0, std_error: 0.0, samples, accepted: 0, empty_region: true };
    }
    let var = if total.n > 1 { total.m2 / (total.n - 1) as f64 } else { 0.0 };
    McResult {
        value: total.mean,
        std_error: (var / total.n as f64).sqrt(),
        samples,
        accepted: total.accepted,
        empty_region: false,
    }
}

/// `∫ f` over the sampler's region using `spec.mc_samples` draws and `spec.seed`.
pub fn integrate_mc<F, S>(f: F, sampler: &S, spec: &QuadratureSpec) -> Result<McResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
    S: Sampler,
{
    spec.validate()?;
    let dim = sampler.dim();
    Ok(mc_estimate(spec.mc_samples, spec.seed, |rng| {
        let mut x = [0.0f64; 16];
        let pt = &mut x[..dim];
        sampler.draw(rng, pt).map(|w| w * f(pt))
    }))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn spec(samples: usize, seed: u64) -> QuadratureSpec {
        QuadratureSpec::default().with_samples(samples).with_seed(seed)
    }

    fn disk_indicator(x: &[f64]) -> f64 {
        if x[0] * x[0] + x[1] * x[1] < 1.0 { 1.0 } else { 0.0 }
    }

    #[test]
    fn unit_disk_area_within_three_sigma() {
        let r = integrate_mc(disk_indicator, &BoxSampler::cube(2, 1.0), &spec(400_000, 7)).unwrap();
        assert!((r.value - PI).abs() < 3.0 * r.std_error, "{r:?}");
    }

    #[test]
    fn constant_integrand_is_exact() {
        let r = integrate_mc(|_| 2.5, &BoxSampler::cube(3, 0.5), &spec(10_000, 1)).unwrap();
        assert_eq!(r.value, 2.5);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn four_ball_volume() {
        let ind = |x: &[f64]| if x.iter().map(|v| v * v).sum::<f64>() < 1.0 { 1.0 } else { 0.0 };
        let r = integrate_mc(ind, &BoxSampler::cube(4, 1.0), &spec(1_000_000, 11)).unwrap();
        assert!((r.value - PI * PI / 2.0).abs() < 3.0 * r.std_error, "{r:?}");
    }

    #[test]
    fn standard_error_halves_when_samples_quadruple() {
        let s = BoxSampler::cube(2, 1.0);
        let a = integrate_mc(disk_indicator, &s, &spec(100_000, 3)).unwrap();
        let b = integrate_mc(disk_indicator, &s, &spec(400_000, 3)).unwrap();
        let ratio = a.std_error / b.std_error;
        assert!(ratio > 2.0 / 1.5 && ratio < 2.0 * 1.5, "ratio {ratio}");
    }

    #[test]
    fn empty_region_is_flagged() {
        let r = mc_estimate(1000, 5, |_| None);
        assert!(r.empty_region);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn independent_of_thread_count() {
        let s = BoxSampler::cube(2, 1.0);
        let sp = spec(100_003, 99);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = single.install(|| integrate_mc(disk_indicator, &s, &sp).unwrap());
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let b = many.install(|| integrate_mc(disk_indicator, &s, &sp).unwrap());
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn ball_sampler_is_uniform_in_radius() {
        // E[r^2] for the uniform 3-ball is 3/5
        let r = mc_estimate(200_000, 4, |rng| {
            let mut x = [0.0; 3];
            sample_unit_ball(rng, &mut x);
            Some(x.iter().map(|v| v * v).sum())
        });
        assert!((r.value - 0.6).abs() < 4.0 * r.std_error);
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-15);
    }
}
