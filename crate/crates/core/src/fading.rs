//! κ-μ shadowed fading links.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::special::{ln_confluent_1f1, TruncationControl};

/// Parameters of one κ-μ shadowed power-gain link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaMuShadowedParams {
    kappa: f64,
    mu: f64,
    m: f64,
    mean_power: f64,
}

impl KappaMuShadowedParams {
    /// `kappa >= 0`, `mu > 0`, `m > 0`, `mean_power > 0`; all finite.
    pub fn new(kappa: f64, mu: f64, m: f64, mean_power: f64) -> Result<Self> {
        let ok = kappa.is_finite()
            && mu.is_finite()
            && m.is_finite()
            && mean_power.is_finite()
            && kappa >= 0.0
            && mu > 0.0
            && m > 0.0
            && mean_power > 0.0;
        if !ok {
            return Err(Error::InvalidParam(format!(
                "kappa-mu shadowed parameters out of range: kappa={kappa}, mu={mu}, m={m}, mean_power={mean_power}"
            )));
        }
        Ok(Self {
            kappa,
            mu,
            m,
            mean_power,
        })
    }

    /// Unit-mean-power link.
    pub fn unit(kappa: f64, mu: f64, m: f64) -> Result<Self> {
        Self::new(kappa, mu, m, 1.0)
    }

    /// Rayleigh fading (κ = 0, μ = 1) with the given mean power.
    pub fn rayleigh(mean_power: f64) -> Result<Self> {
        Self::new(0.0, 1.0, 1.0, mean_power)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn mean_power(&self) -> f64 {
        self.mean_power
    }

    /// θ = x̄ / (μ(1+κ)).
    pub fn theta(&self) -> f64 {
        self.mean_power / (self.mu * (1.0 + self.kappa))
    }

    /// λ = (μκ + m)x̄ / (μ(1+κ)m), evaluated as θ(1 + μκ/m) so that κ = 0
    /// yields λ = θ bit for bit.
    pub fn lambda(&self) -> f64 {
        self.theta() * (1.0 + self.mu * self.kappa / self.m)
    }

    /// 1 − θ/λ = μκ/(μκ + m), the success probability of the negative
    /// binomial mixing law.
    pub(crate) fn mixing_ratio(&self) -> f64 {
        let mk = self.mu * self.kappa;
        mk / (mk + self.m)
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        Self::new(kappa, self.mu, self.m, self.mean_power)
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(self.kappa, mu, self.m, self.mean_power)
    }

    pub fn with_m(&self, m: f64) -> Result<Self> {
        Self::new(self.kappa, self.mu, m, self.mean_power)
    }

    pub fn with_mean_power(&self, mean_power: f64) -> Result<Self> {
        Self::new(self.kappa, self.mu, self.m, mean_power)
    }

    pub fn pdf(&self, x: f64, ctl: &TruncationControl) -> Result<f64> {
        kmu_shadowed_pdf(self, x, ctl)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        kmu_shadowed_sample(self, rng)
    }
}

/// Density f_X(x) = x^{μ−1} e^{−x/θ} ₁F₁(m; μ; x/θ − x/λ) / (θ^{μ−m} λ^m Γ(μ)).
///
/// At x = 0 the density is 0 for μ > 1, θ^{m−1}λ^{−m} for μ = 1 and
/// unbounded (an error) for μ < 1.
pub fn kmu_shadowed_pdf(
    params: &KappaMuShadowedParams,
    x: f64,
    ctl: &TruncationControl,
) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidParam(format!("density argument x = {x} must be finite and >= 0")));
    }
    let (mu, m) = (params.mu, params.m);
    let theta = params.theta();
    let lambda = params.lambda();
    if x == 0.0 {
        return if mu > 1.0 {
            Ok(0.0)
        } else if mu == 1.0 {
            Ok(theta.powf(m - 1.0) / lambda.powf(m))
        } else {
            Err(Error::InvalidParam(
                "density is unbounded at x = 0 when mu < 1".into(),
            ))
        };
    }
    // e^{-x/λ} times at most a power of x: nothing representable is left.
    if x / lambda > 1000.0 {
        return Ok(0.0);
    }
    let arg = x * params.mixing_ratio() / theta;
    let ln_f11 = ln_confluent_1f1(m, mu, arg, ctl)?;
    let ln_f = (mu - 1.0) * x.ln() - x / theta + ln_f11
        - (mu - m) * theta.ln()
        - m * lambda.ln()
        - ln_gamma(mu);
    Ok(ln_f.exp())
}

/// One draw of the κ-μ shadowed power gain via its gamma-Poisson-gamma
/// mixture: s ~ Γ(m, 1/m), p ~ Poisson(μκs), X ~ Γ(μ + p, θ).
pub fn kmu_shadowed_sample<R: Rng + ?Sized>(params: &KappaMuShadowedParams, rng: &mut R) -> f64 {
    let theta = params.theta();
    let clusters = if params.kappa > 0.0 {
        let shadow = Gamma::new(params.m, 1.0 / params.m)
            .expect("validated shape")
            .sample(rng);
        let rate = params.mu * params.kappa * shadow;
        if rate > 0.0 {
            Poisson::new(rate).expect("positive rate").sample(rng)
        } else {
            0.0
        }
    } else {
        0.0
    };
    Gamma::new(params.mu + clusters, theta)
        .expect("validated shape")
        .sample(rng)
}
