//! Seeded Monte Carlo simulation of SIRs, minimum SIRs, outage and rate.
//!
//! Trial i draws from its own ChaCha8 stream i under the configured seed,
//! so results depend only on (seed, trials) and never on how the trials are
//! split across worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::policy::{PowerPolicyProblem, RateProblem};
use crate::sir::SirModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub seed: u64,
    pub trials: usize,
    pub parallel_chunks: usize,
}

impl McConfig {
    pub fn new(seed: u64, trials: usize) -> Self {
        Self {
            seed,
            trials,
            parallel_chunks: rayon::current_num_threads().max(1),
        }
    }

    pub fn with_chunks(mut self, parallel_chunks: usize) -> Self {
        self.parallel_chunks = parallel_chunks;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.parallel_chunks == 0 {
            return Err(Error::InvalidParam("trials and parallel_chunks must be >= 1".into()));
        }
        Ok(())
    }
}

/// Generator for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs `trial` for every index and returns the outputs in trial order.
fn run_trials<T, F>(cfg: &McConfig, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    cfg.validate()?;
    let n = cfg.trials;
    let chunk = n.div_ceil(cfg.parallel_chunks);
    let parts: Vec<Vec<T>> = (0..n)
        .step_by(chunk)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            (start..(start + chunk).min(n))
                .map(|i| trial(&mut trial_rng(cfg.seed, i as u64)))
                .collect()
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

fn draw_sir(model: &SirModel, rng: &mut ChaCha8Rng) -> f64 {
    let x = model.signal().sample(rng);
    let y: f64 = model.interferers().iter().map(|p| p.sample(rng)).sum();
    x / y
}

fn draw_min_sir(model: &SirModel, k: usize, rng: &mut ChaCha8Rng) -> f64 {
    (0..k).map(|_| draw_sir(model, rng)).fold(f64::INFINITY, f64::min)
}

/// `cfg.trials` SIR draws X / Σ Yⱼ.
pub fn simulate_sir(model: &SirModel, cfg: &McConfig) -> Result<Vec<f64>> {
    run_trials(cfg, |rng| draw_sir(model, rng))
}

/// `cfg.trials` draws of the minimum of `k` independent SIRs.
pub fn simulate_min_sir(model: &SirModel, k: usize, cfg: &McConfig) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidParam("K must be >= 1".into()));
    }
    run_trials(cfg, |rng| draw_min_sir(model, k, rng))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageRateEstimate {
    /// Fraction of trials with minimum primary SIR ≤ γ₀.
    pub primary_outage: f64,
    /// Fraction of trials with minimum secondary SIR ≤ the secondary threshold.
    pub secondary_outage: f64,
    /// Mean of log₂(1 + minimum secondary SIR).
    pub rate_per_user: f64,
    pub trials: usize,
}

/// Joint simulation of the primary and secondary networks at secondary
/// power `p_s`. The secondary outage threshold defaults to γ₀.
pub fn simulate_outage_and_rate(
    policy: &PowerPolicyProblem,
    rate: &RateProblem,
    p_s: f64,
    secondary_threshold: Option<f64>,
    cfg: &McConfig,
) -> Result<OutageRateEstimate> {
    if !(p_s >= 0.0 && p_s.is_finite()) {
        return Err(Error::InvalidParam(format!("P_s = {p_s} must be finite and >= 0")));
    }
    if policy.m_users == 0 || rate.l_users == 0 {
        return Err(Error::InvalidParam("M and L must be >= 1".into()));
    }
    let threshold = secondary_threshold.unwrap_or(policy.gamma0);
    let primary_gain = policy.p_primary / p_s;
    let secondary_gain = p_s / rate.p_primary;
    let per_trial = run_trials(cfg, |rng| {
        let prim = primary_gain * draw_min_sir(&policy.primary_model, policy.m_users, rng);
        let sec = secondary_gain * draw_min_sir(&rate.secondary_model, rate.l_users, rng);
        (prim <= policy.gamma0, sec <= threshold, sec.ln_1p() / std::f64::consts::LN_2)
    })?;
    // sequential, trial-ordered sums keep the result independent of chunking
    let n = per_trial.len() as f64;
    let (mut po, mut so, mut r) = (0usize, 0usize, 0.0f64);
    for (a, b, c) in per_trial {
        po += a as usize;
        so += b as usize;
        r += c;
    }
    Ok(OutageRateEstimate {
        primary_outage: po as f64 / n,
        secondary_outage: so as f64 / n,
        rate_per_user: r / n,
        trials: cfg.trials,
    })
}

/// Empirical distribution function of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() || samples.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidParam("empirical CDF needs a nonempty NaN-free sample".into()));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of the sample ≤ z.
    pub fn eval(&self, z: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= z) as f64 / self.sorted.len() as f64
    }

    /// Largest |F̂(z) − F(z)| over `grid`.
    pub fn sup_distance<F: Fn(f64) -> Result<f64>>(&self, grid: &[f64], f: F) -> Result<f64> {
        let mut d = 0.0f64;
        for &z in grid {
            d = d.max((self.eval(z) - f(z)?).abs());
        }
        Ok(d)
    }

    /// Mean of g over the sample, summed in sorted order.
    pub fn mean_of<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        self.sorted.iter().map(|&v| g(v)).sum::<f64>() / self.sorted.len() as f64
    }
}
