//! Exact law of the SIR γ = X / Σⱼ Yⱼ for a κ-μ shadowed desired link X and
//! N independent, non-identical κ-μ shadowed interferers Yⱼ.
//!
//! Each link is a negative-binomial mixture of gamma laws. Expanding every
//! interferer factor (1 + cs)^{−b} of the summed interference around one
//! common reference scale τ turns the interference into a (signed) gamma
//! mixture of scale τ, and the SIR distribution becomes an E_D series in
//!
//! ```text
//! w = τz/(θ + τz),   q·w,   yᵢ·(1 − w)  with  yᵢ = (cᵢ − τ)/cᵢ,
//! ```
//!
//! where cᵢ runs over the interferer scales θᵢ (exponent μᵢ − mᵢ) and λᵢ
//! (exponent mᵢ). Picking τ = θ₁ of the first interferer gives the classical
//! 2N+1 variable form; by default the interferer with the smallest θ is used
//! as the reference, which keeps every yᵢ in [0, 1).

use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::fading::KappaMuShadowedParams;
use crate::special::{lauricella_ed, TruncationControl};

/// One desired link plus N ≥ 1 interferers.
#[derive(Debug, Clone, PartialEq)]
pub struct SirModel {
    signal: KappaMuShadowedParams,
    interferers: Vec<KappaMuShadowedParams>,
}

impl SirModel {
    pub fn new(signal: KappaMuShadowedParams, interferers: Vec<KappaMuShadowedParams>) -> Result<Self> {
        if interferers.is_empty() {
            return Err(Error::InvalidParam("an SIR model needs at least one interferer".into()));
        }
        Ok(Self {
            signal,
            interferers,
        })
    }

    /// Single-interferer model.
    pub fn single(signal: KappaMuShadowedParams, interferer: KappaMuShadowedParams) -> Self {
        Self {
            signal,
            interferers: vec![interferer],
        }
    }

    pub fn signal(&self) -> &KappaMuShadowedParams {
        &self.signal
    }

    pub fn interferers(&self) -> &[KappaMuShadowedParams] {
        &self.interferers
    }

    pub fn with_signal(&self, signal: KappaMuShadowedParams) -> Self {
        Self {
            signal,
            interferers: self.interferers.clone(),
        }
    }

    pub fn with_interferer(&self, index: usize, params: KappaMuShadowedParams) -> Result<Self> {
        if index >= self.interferers.len() {
            return Err(Error::InvalidParam(format!("no interferer at index {index}")));
        }
        let mut interferers = self.interferers.clone();
        interferers[index] = params;
        Ok(Self {
            signal: self.signal,
            interferers,
        })
    }

    pub fn cdf(&self, z: f64, ctl: &TruncationControl) -> Result<f64> {
        sir_cdf(self, z, ctl)
    }

    pub fn pdf(&self, z: f64, ctl: &TruncationControl) -> Result<f64> {
        sir_pdf(self, z, ctl)
    }

    pub fn quantile(&self, p: f64, ctl: &TruncationControl) -> Result<f64> {
        sir_cdf_inverse(self, p, ctl)
    }
}

/// Which interferer supplies the reference scale τ = θⱼ of the expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reference {
    /// The interferer with the smallest θ (first one on ties).
    #[default]
    Canonical,
    /// A fixed interferer index; `Interferer(0)` is the classical θ₁ form.
    Interferer(usize),
}

/// z-independent pieces of the expansion for one reference choice.
#[derive(Debug, Clone)]
struct Expansion {
    mu: f64,
    m: f64,
    theta: f64,
    q: f64,
    tau: f64,
    /// Σ μᵢ over the interferers.
    s: f64,
    /// Interferer factors (exponent, yᵢ), reference θ factor removed.
    factors: Vec<(f64, f64)>,
    /// ln[(θ/λ)^m ∏ (τ/cᵢ)^{bᵢ}]
    ln_weight: f64,
}

impl Expansion {
    fn new(model: &SirModel, reference: Reference) -> Result<Self> {
        let sig = &model.signal;
        let ints = &model.interferers;
        let r = match reference {
            Reference::Canonical => ints
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.theta().total_cmp(&b.1.theta()))
                .map(|(i, _)| i)
                .expect("nonempty"),
            Reference::Interferer(i) if i < ints.len() => i,
            Reference::Interferer(i) => {
                return Err(Error::InvalidParam(format!("reference interferer {i} does not exist")))
            }
        };
        let tau = ints[r].theta();
        let (theta, lambda) = (sig.theta(), sig.lambda());
        let mut ln_weight = sig.m() * (theta / lambda).ln();
        let mut theta_factors = Vec::with_capacity(ints.len());
        let mut lambda_factors = Vec::with_capacity(ints.len());
        for (i, p) in ints.iter().enumerate() {
            let (ti, li) = (p.theta(), p.lambda());
            let b_theta = p.mu() - p.m();
            ln_weight += b_theta * (tau / ti).ln() + p.m() * (tau / li).ln();
            if i != r {
                theta_factors.push((b_theta, (ti - tau) / ti));
            }
            lambda_factors.push((p.m(), (li - tau) / li));
        }
        theta_factors.extend(lambda_factors);
        Ok(Self {
            mu: sig.mu(),
            m: sig.m(),
            theta,
            q: sig.mixing_ratio(),
            tau,
            s: ints.iter().map(|p| p.mu()).sum(),
            factors: theta_factors,
            ln_weight,
        })
    }

    /// (w, 1 − w) computed without cancellation.
    fn split(&self, z: f64) -> (f64, f64) {
        let d = self.theta + self.tau * z;
        (self.tau * z / d, self.theta / d)
    }

    fn interferer_args(&self, one_minus_w: f64) -> (Vec<f64>, Vec<f64>) {
        self.factors
            .iter()
            .map(|&(b, y)| (b, y * one_minus_w))
            .unzip()
    }

    /// Reformulated CDF: first group {w, qw} over (μ+1), rest over Σμᵢ.
    fn cdf(&self, z: f64, ctl: &TruncationControl) -> Result<f64> {
        let (w, wc) = self.split(z);
        let (ib, ix) = self.interferer_args(wc);
        let b: Vec<f64> = [1.0, self.m].into_iter().chain(ib).collect();
        let x: Vec<f64> = [w, self.q * w].into_iter().chain(ix).collect();
        let a = self.mu + self.s;
        let series = lauricella_ed(2, a, &b, self.mu + 1.0, self.s, &x, ctl)?;
        let ln_pre = self.ln_weight + self.mu * w.ln() + self.s * wc.ln() + ln_gamma(a)
            - ln_gamma(self.mu + 1.0)
            - ln_gamma(self.s);
        Ok(ln_pre.exp() * series.value)
    }

    /// Complementary form: first group {qw} over μ, rest {1 − w, yᵢ(1 − w)}
    /// over Σμᵢ + 1.
    fn ccdf(&self, z: f64, ctl: &TruncationControl) -> Result<f64> {
        let (w, wc) = self.split(z);
        let (ib, ix) = self.interferer_args(wc);
        let b: Vec<f64> = [self.m, 1.0].into_iter().chain(ib).collect();
        let x: Vec<f64> = [self.q * w, wc].into_iter().chain(ix).collect();
        let a = self.mu + self.s;
        let series = lauricella_ed(1, a, &b, self.mu, self.s + 1.0, &x, ctl)?;
        let ln_pre = self.ln_weight + self.mu * w.ln() + self.s * wc.ln() + ln_gamma(a)
            - ln_gamma(self.s + 1.0)
            - ln_gamma(self.mu);
        Ok(ln_pre.exp() * series.value)
    }

    fn pdf(&self, z: f64, ctl: &TruncationControl) -> Result<f64> {
        let (w, wc) = self.split(z);
        let (ib, ix) = self.interferer_args(wc);
        let b: Vec<f64> = std::iter::once(self.m).chain(ib).collect();
        let x: Vec<f64> = std::iter::once(self.q * w).chain(ix).collect();
        let a = self.mu + self.s;
        let series = lauricella_ed(1, a, &b, self.mu, self.s, &x, ctl)?;
        let ln_pre = self.ln_weight + (self.tau / self.theta).ln() + (self.mu - 1.0) * w.ln()
            + (self.s + 1.0) * wc.ln()
            + ln_gamma(a)
            - ln_gamma(self.mu)
            - ln_gamma(self.s);
        Ok(ln_pre.exp() * series.value)
    }

    /// Asymptotic per-layer decay of the CDF and CCDF series at z.
    fn rates(&self, z: f64) -> (f64, f64) {
        let (w, wc) = self.split(z);
        let ymax = self
            .factors
            .iter()
            .filter(|f| f.0 != 0.0)
            .map(|f| f.1.abs())
            .fold(0.0, f64::max);
        let cdf_rate = w + ymax * wc;
        let ccdf_rate = self.q * w + wc.max(ymax * wc);
        (cdf_rate, ccdf_rate)
    }
}

fn check_z(z: f64) -> Result<()> {
    if z.is_nan() || z < 0.0 {
        return Err(Error::InvalidParam(format!("SIR argument z = {z} must be >= 0")));
    }
    Ok(())
}

/// CDF of the SIR at z ≥ 0.
///
/// The reformulated CDF series is used unless the complementary series
/// converges markedly faster at this z (large z, F near 1); if the chosen
/// series hits its cap the other one is tried.
pub fn sir_cdf(model: &SirModel, z: f64, ctl: &TruncationControl) -> Result<f64> {
    check_z(z)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    if z.is_infinite() {
        return Ok(1.0);
    }
    let e = Expansion::new(model, Reference::Canonical)?;
    let (cdf_rate, ccdf_rate) = e.rates(z);
    let direct = |e: &Expansion| e.cdf(z, ctl);
    let complement = |e: &Expansion| e.ccdf(z, ctl).map(|c| 1.0 - c);
    let prefer_direct = cdf_rate <= 0.9 || cdf_rate <= ccdf_rate;
    let (first, second): (&dyn Fn(&Expansion) -> Result<f64>, &dyn Fn(&Expansion) -> Result<f64>) =
        if prefer_direct {
            (&direct, &complement)
        } else {
            (&complement, &direct)
        };
    let value = match first(&e) {
        Err(Error::NonConvergent { .. }) => second(&e)?,
        other => other?,
    };
    Ok(value.clamp(0.0, 1.0))
}

/// CDF from the reformulated series only, with an explicit reference.
pub fn sir_cdf_direct(
    model: &SirModel,
    z: f64,
    reference: Reference,
    ctl: &TruncationControl,
) -> Result<f64> {
    check_z(z)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    Expansion::new(model, reference)?.cdf(z, ctl)
}

/// CDF as 1 − CCDF, from the complementary series only.
pub fn sir_cdf_via_ccdf(
    model: &SirModel,
    z: f64,
    reference: Reference,
    ctl: &TruncationControl,
) -> Result<f64> {
    check_z(z)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 - Expansion::new(model, reference)?.ccdf(z, ctl)?)
}

/// Density of the SIR at z > 0.
pub fn sir_pdf(model: &SirModel, z: f64, ctl: &TruncationControl) -> Result<f64> {
    sir_pdf_with_reference(model, z, Reference::Canonical, ctl)
}

pub fn sir_pdf_with_reference(
    model: &SirModel,
    z: f64,
    reference: Reference,
    ctl: &TruncationControl,
) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidParam(format!("SIR density needs finite z > 0, got {z}")));
    }
    Expansion::new(model, reference)?.pdf(z, ctl)
}

/// Inverse CDF: the z with F(z) = p, by geometric bracketing from z = 1 and
/// bisection. The result satisfies |F(z) − p| ≤ 1e−10.
pub fn sir_cdf_inverse(model: &SirModel, p: f64, ctl: &TruncationControl) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParam(format!("probability p = {p} must lie in (0, 1)")));
    }
    let f = |z: f64| sir_cdf(model, z, ctl);
    let mut lo;
    let mut hi = 1.0;
    if f(hi)? < p {
        lo = hi;
        loop {
            hi *= 2.0;
            if !hi.is_finite() || hi > 1e300 {
                return Err(Error::BracketFailure { p });
            }
            if f(hi)? >= p {
                break;
            }
            lo = hi;
        }
    } else {
        lo = 0.5;
        loop {
            if f(lo)? < p {
                break;
            }
            hi = lo;
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(Error::BracketFailure { p });
            }
        }
    }
    // F(lo) < p <= F(hi)
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    if (f(z)? - p).abs() > 1e-10 {
        return Err(Error::BracketFailure { p });
    }
    Ok(z)
}

/// Moment-matched gamma law (equal mean and variance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaApprox {
    pub shape: f64,
    pub scale: f64,
}

/// Gamma law with shape mμ(1+κ)²/(m + μκ² + 2mκ) and the link's mean.
pub fn gamma_moment_match(params: &KappaMuShadowedParams) -> GammaApprox {
    let (k, mu, m) = (params.kappa(), params.mu(), params.m());
    let shape = m * mu * (1.0 + k) * (1.0 + k) / (m + mu * k * k + 2.0 * m * k);
    GammaApprox {
        shape,
        scale: params.mean_power() / shape,
    }
}

/// Beta-prime approximation of the single-interferer SIR CDF:
/// P(Γ(ψ₁,ψ₂)/Γ(φ₁,φ₂) ≤ z) = I_t(ψ₁, φ₁) with y = zφ₂/ψ₂, t = y/(1+y).
pub fn sir_cdf_betaprime(signal: &GammaApprox, interferer: &GammaApprox, z: f64) -> Result<f64> {
    check_z(z)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    if z.is_infinite() {
        return Ok(1.0);
    }
    let y = z * interferer.scale / signal.scale;
    let t = y / (1.0 + y);
    Ok(beta_reg(signal.shape, interferer.shape, t))
}
