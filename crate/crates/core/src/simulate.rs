//! Monte Carlo simulation of the flight.
//!
//! Sample `i` of a run is drawn from sub-stream `w` of a ChaCha8 generator
//! keyed by the run seed, where `w` is the worker that owns the sample. The
//! sample range is split into `workers` contiguous blocks, each block is
//! simulated independently, and the per-block sums are merged in block order,
//! so a run is reproducible for fixed `(seed, workers, samples)` whatever the
//! thread scheduling.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::FlightParams;
use crate::error::{Error, Result};

/// Run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub params: FlightParams,
    pub t: f64,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(params: FlightParams, t: f64, samples: u64, seed: u64, workers: usize) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("time t must be > 0, got {t}")));
        }
        if samples == 0 {
            return Err(Error::InvalidArgument("samples must be >= 1".into()));
        }
        if workers == 0 {
            return Err(Error::InvalidArgument("workers must be >= 1".into()));
        }
        Ok(McConfig { params, t, samples, seed, workers })
    }

    /// Radius `c t` of the support ball.
    pub fn radius(&self) -> f64 {
        self.params.c * self.t
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Distance to `target` in units of the standard error (infinite when
    /// the standard error is zero and the values differ).
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else if self.stderr == 0.0 {
            f64::INFINITY
        } else {
            d / self.stderr
        }
    }
}

/// Estimate of a complex expectation, real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfEstimate {
    pub re: McEstimate,
    pub im: McEstimate,
}

/// End point of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub position: Vec<f64>,
    /// Number of direction changes in `(0, t)`.
    pub switches: u32,
}

/// Uniform direction on the unit sphere of `ℝᵐ`, as a normalized standard
/// Gaussian vector.
pub fn sample_direction<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    assert!(m >= 2, "sample_direction needs m >= 2");
    let mut d = vec![0.0; m];
    fill_direction(&mut d, rng);
    d
}

fn fill_direction<R: Rng + ?Sized>(d: &mut [f64], rng: &mut R) {
    loop {
        let mut norm2 = 0.0;
        for x in d.iter_mut() {
            *x = StandardNormal.sample(rng);
            norm2 += *x * *x;
        }
        if norm2 > 1e-200 {
            let inv = norm2.sqrt().recip();
            d.iter_mut().for_each(|x| *x *= inv);
            return;
        }
    }
}

fn exp_gap(lambda: f64) -> Option<Exp<f64>> {
    (lambda > 0.0).then(|| Exp::new(lambda).expect("lambda > 0"))
}

fn walk<R: Rng + ?Sized>(
    cfg: &McConfig,
    gaps: Option<&Exp<f64>>,
    rng: &mut R,
    dir: &mut [f64],
    pos: &mut [f64],
) -> u32 {
    pos.iter_mut().for_each(|x| *x = 0.0);
    let c = cfg.params.c;
    let mut remaining = cfg.t;
    let mut switches = 0;
    loop {
        fill_direction(dir, rng);
        let gap = gaps.map_or(f64::INFINITY, |g| g.sample(rng));
        let step = gap.min(remaining);
        for (p, d) in pos.iter_mut().zip(dir.iter()) {
            *p += c * step * d;
        }
        if gap >= remaining {
            return switches;
        }
        remaining -= gap;
        switches += 1;
    }
}

/// Simulates one trajectory up to time `cfg.t`: uniform initial direction,
/// exponential(λ) gaps between direction changes, fresh uniform direction at
/// each change, constant speed `c`.
pub fn simulate_position<R: Rng + ?Sized>(cfg: &McConfig, rng: &mut R) -> Trajectory {
    let m = cfg.params.dim();
    let mut dir = vec![0.0; m];
    let mut position = vec![0.0; m];
    let gaps = exp_gap(cfg.params.lambda);
    let switches = walk(cfg, gaps.as_ref(), rng, &mut dir, &mut position);
    Trajectory { position, switches }
}

/// Generator for sub-stream `worker` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker as u64);
    rng
}

fn block_len(samples: u64, workers: usize, w: usize) -> u64 {
    let workers = workers as u64;
    let w = w as u64;
    samples / workers + u64::from(w < samples % workers)
}

/// Per-estimand running sums.
#[derive(Debug, Clone)]
struct Sums {
    sum: Vec<f64>,
    sumsq: Vec<f64>,
    max: Vec<f64>,
    count: u64,
}

impl Sums {
    fn new(k: usize) -> Self {
        Sums { sum: vec![0.0; k], sumsq: vec![0.0; k], max: vec![f64::NEG_INFINITY; k], count: 0 }
    }

    fn push(&mut self, out: &[f64]) {
        for (i, &x) in out.iter().enumerate() {
            self.sum[i] += x;
            self.sumsq[i] += x * x;
            self.max[i] = self.max[i].max(x);
        }
        self.count += 1;
    }

    fn merge(mut self, other: &Sums) -> Self {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sumsq[i] += other.sumsq[i];
            self.max[i] = self.max[i].max(other.max[i]);
        }
        self.count += other.count;
        self
    }

    fn estimate(&self, i: usize, seed: u64) -> McEstimate {
        let n = self.count as f64;
        let mean = self.sum[i] / n;
        let stderr = if self.count > 1 {
            let var = ((self.sumsq[i] - n * mean * mean) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        McEstimate { mean, stderr, samples: self.count, seed }
    }
}

/// Runs `cfg.samples` trajectories and accumulates `k` statistics per
/// trajectory through `observe`.
fn accumulate<F>(cfg: &McConfig, k: usize, observe: F) -> Sums
where
    F: Fn(&[f64], u32, &mut [f64]) + Sync,
{
    let m = cfg.params.dim();
    let gaps = exp_gap(cfg.params.lambda);
    let blocks: Vec<Sums> = (0..cfg.workers)
        .into_par_iter()
        .map(|w| {
            let mut rng = stream_rng(cfg.seed, w);
            let mut dir = vec![0.0; m];
            let mut pos = vec![0.0; m];
            let mut out = vec![0.0; k];
            let mut sums = Sums::new(k);
            for _ in 0..block_len(cfg.samples, cfg.workers, w) {
                let switches = walk(cfg, gaps.as_ref(), &mut rng, &mut dir, &mut pos);
                observe(&pos, switches, &mut out);
                sums.push(&out);
            }
            sums
        })
        .collect();
    blocks.iter().fold(Sums::new(k), |acc, b| acc.merge(b))
}

fn check_len(cfg: &McConfig, len: usize, what: &str) -> Result<()> {
    if len != cfg.params.dim() {
        return Err(Error::InvalidArgument(format!("{what} has length {len}, expected m = {}", cfg.params.dim())));
    }
    Ok(())
}

/// Sample means of `cos⟨α, X(t)⟩` and `sin⟨α, X(t)⟩`.
pub fn estimate_cf(cfg: &McConfig, alpha: &[f64]) -> Result<CfEstimate> {
    check_len(cfg, alpha.len(), "alpha")?;
    let sums = accumulate(cfg, 2, |x, _, out| {
        let phase: f64 = x.iter().zip(alpha).map(|(a, b)| a * b).sum();
        let (s, c) = phase.sin_cos();
        out[0] = c;
        out[1] = s;
    });
    Ok(CfEstimate { re: sums.estimate(0, cfg.seed), im: sums.estimate(1, cfg.seed) })
}

/// Sample mean of `Π_j X_j(t)^{q_j}`.
pub fn estimate_mixed_moment(cfg: &McConfig, q: &[u32]) -> Result<McEstimate> {
    check_len(cfg, q.len(), "multi-index")?;
    let sums = accumulate(cfg, 1, |x, _, out| {
        out[0] = x.iter().zip(q).map(|(xj, &qj)| xj.powi(qj as i32)).product();
    });
    Ok(sums.estimate(0, cfg.seed))
}

/// Fraction of trajectories without a direction change, i.e. ending on the
/// sphere `‖x‖ = c t`.
pub fn estimate_no_switch_fraction(cfg: &McConfig) -> McEstimate {
    let sums = accumulate(cfg, 1, |_, switches, out| {
        out[0] = if switches == 0 { 1.0 } else { 0.0 };
    });
    sums.estimate(0, cfg.seed)
}

/// Outcome of checking `‖X(t)‖ <= c t` over a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub samples: u64,
    /// Largest `‖x‖ / (c t)` seen.
    pub max_ratio: f64,
    /// Trajectories with `‖x‖ > c t (1 + 1e-12)`.
    pub violations: u64,
}

pub fn check_support(cfg: &McConfig) -> SupportReport {
    let radius = cfg.radius();
    let sums = accumulate(cfg, 2, |x, _, out| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt() / radius;
        out[0] = r;
        out[1] = if r > 1.0 + 1e-12 { 1.0 } else { 0.0 };
    });
    SupportReport { samples: sums.count, max_ratio: sums.max[0], violations: sums.sum[1] as u64 }
}

/// Sample mean of `d_j²` for a uniform direction `d` in `ℝᵐ`, `m >= 2`.
pub fn estimate_direction_second_moment(
    m: usize,
    j: usize,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<McEstimate> {
    if m < 2 || j >= m {
        return Err(Error::InvalidArgument(format!("need m >= 2 and j < m, got m = {m}, j = {j}")));
    }
    if samples == 0 || workers == 0 {
        return Err(Error::InvalidArgument("samples and workers must be >= 1".into()));
    }
    let blocks: Vec<Sums> = (0..workers)
        .into_par_iter()
        .map(|w| {
            let mut rng = stream_rng(seed, w);
            let mut d = vec![0.0; m];
            let mut sums = Sums::new(1);
            for _ in 0..block_len(samples, workers, w) {
                fill_direction(&mut d, &mut rng);
                sums.push(&[d[j] * d[j]]);
            }
            sums
        })
        .collect();
    Ok(blocks.iter().fold(Sums::new(1), |acc, b| acc.merge(b)).estimate(0, seed))
}
