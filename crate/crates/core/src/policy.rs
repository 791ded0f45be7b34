//! Underlay power policy of the secondary transmitter and the asymptotic
//! ergodic multicast rate of the secondary network.
//!
//! The primary network has M receivers; receiver m sees SIR
//! P_p·h_m / (P_s·α_m). With a_M the Weibull scale of min_m h_m/α_m, the
//! outage constraint Pr{min SIR ≤ γ₀} ≤ p₀ is met by every
//! P_s ≤ P_s⁺ = (P_p a_M/γ₀)(−ln(1−p₀))^{1/μ_p}.

use crate::error::{Error, Result};
use crate::evt::{asymptotic_min_law, weibull_min_cdf, WeibullMinLaw};
use crate::fading::KappaMuShadowedParams;
use crate::quad::integrate;
use crate::sir::{gamma_moment_match, SirModel};
use crate::special::TruncationControl;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Minimum SIR γ₀ = 2^{R₀} − 1 for a target rate R₀ in bits/s/Hz.
pub fn gamma0_from_rate(r0: f64) -> f64 {
    (r0 * std::f64::consts::LN_2).exp_m1()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerPolicyProblem {
    /// Primary transmit power P_p (linear).
    pub p_primary: f64,
    /// Minimum primary SIR γ₀.
    pub gamma0: f64,
    /// Largest tolerated primary outage p₀.
    pub p0: f64,
    /// Secondary power cap P_s,max (linear).
    pub ps_max: f64,
    /// Number of primary receivers M.
    pub m_users: usize,
    /// Signal: primary link. Interferer: secondary transmitter to primary receiver.
    pub primary_model: SirModel,
}

impl PowerPolicyProblem {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !(positive(self.p_primary) && positive(self.gamma0) && positive(self.ps_max)) {
            return Err(Error::InvalidParam("powers and gamma0 must be positive".into()));
        }
        if !(self.p0 > 0.0 && self.p0 < 1.0) {
            return Err(Error::InvalidParam(format!("p0 = {} must lie in (0, 1)", self.p0)));
        }
        if self.m_users < 2 {
            return Err(Error::InvalidParam("the asymptotic policy needs M >= 2".into()));
        }
        if self.primary_model.interferers().len() != 1 {
            return Err(Error::InvalidParam("the primary model must have one interferer".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateProblem {
    /// Number of secondary receivers L.
    pub l_users: usize,
    /// Secondary transmit power P_s (linear).
    pub p_secondary: f64,
    /// Primary transmit power P_p (linear).
    pub p_primary: f64,
    /// Signal: secondary link. Interferer: primary transmitter to secondary receiver.
    pub secondary_model: SirModel,
}

impl RateProblem {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_secondary >= 0.0 && self.p_secondary.is_finite()) {
            return Err(Error::InvalidParam("P_s must be finite and >= 0".into()));
        }
        if !(self.p_primary > 0.0 && self.p_primary.is_finite()) {
            return Err(Error::InvalidParam("P_p must be positive".into()));
        }
        if self.l_users < 2 {
            return Err(Error::InvalidParam("the asymptotic rate needs L >= 2".into()));
        }
        if self.secondary_model.interferers().len() != 1 {
            return Err(Error::InvalidParam("the secondary model must have one interferer".into()));
        }
        Ok(())
    }
}

/// Solved power policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPolicy {
    /// Weibull scale a_M of the minimum primary channel ratio.
    pub a_m: f64,
    /// Largest power meeting the outage constraint.
    pub ps_plus: f64,
    /// min(P_s⁺, P_s,max).
    pub ps_bar: f64,
}

pub fn solve_power_policy(problem: &PowerPolicyProblem, ctl: &TruncationControl) -> Result<PowerPolicy> {
    problem.validate()?;
    let law = asymptotic_min_law(&problem.primary_model, problem.m_users, ctl)?;
    let ps_plus = problem.p_primary * law.scale / problem.gamma0
        * (-(-problem.p0).ln_1p()).powf(1.0 / law.shape);
    Ok(PowerPolicy {
        a_m: law.scale,
        ps_plus,
        ps_bar: ps_plus.min(problem.ps_max),
    })
}

pub fn optimal_secondary_power(problem: &PowerPolicyProblem, ctl: &TruncationControl) -> Result<f64> {
    Ok(solve_power_policy(problem, ctl)?.ps_bar)
}

/// Weibull approximation of the primary outage at secondary power `p_s`.
pub fn asymptotic_outage(problem: &PowerPolicyProblem, p_s: f64, ctl: &TruncationControl) -> Result<f64> {
    problem.validate()?;
    if !(p_s >= 0.0) {
        return Err(Error::InvalidParam(format!("P_s = {p_s} must be >= 0")));
    }
    let law = asymptotic_min_law(&problem.primary_model, problem.m_users, ctl)?;
    Ok(weibull_min_cdf(&law, problem.gamma0 * p_s / problem.p_primary))
}

/// E[log₂(1 + c·X)] for X following `law`, via x = a(−ln u)^{1/υ}, u ∈ (0, 1).
pub fn weibull_log_rate(law: &WeibullMinLaw, c: f64, abs_tol: f64) -> Result<f64> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidParam(format!("power ratio {c} must be finite and >= 0")));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    let (a, inv_shape) = (law.scale, 1.0 / law.shape);
    let r = integrate(
        |u| {
            if u <= 0.0 {
                return 0.0;
            }
            (c * a * (-u.ln()).powf(inv_shape)).ln_1p() / std::f64::consts::LN_2
        },
        0.0,
        1.0,
        abs_tol,
        1e-12,
        4000,
    )?;
    Ok(r.value.max(0.0))
}

/// Asymptotic ergodic multicast rate C_sec = L·E[log₂(1 + P_s/P_p · min SIR)]
/// in bits/s/Hz, summed over the L receivers.
pub fn ergodic_multicast_rate(problem: &RateProblem, ctl: &TruncationControl) -> Result<f64> {
    problem.validate()?;
    if problem.p_secondary == 0.0 {
        return Ok(0.0);
    }
    let law = asymptotic_min_law(&problem.secondary_model, problem.l_users, ctl)?;
    let l = problem.l_users as f64;
    let per_user = weibull_log_rate(&law, problem.p_secondary / problem.p_primary, 1e-8 / l)?;
    Ok(l * per_user)
}

/// A full underlay scenario: the policy fixes P_s, which drives the rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub policy: PowerPolicyProblem,
    pub l_users: usize,
    pub secondary_model: SirModel,
}

impl Scenario {
    /// Rate problem at the given secondary power.
    pub fn rate_problem(&self, p_secondary: f64) -> RateProblem {
        RateProblem {
            l_users: self.l_users,
            p_secondary,
            p_primary: self.policy.p_primary,
            secondary_model: self.secondary_model.clone(),
        }
    }
}

/// Parameters whose effect on the policy and the rate is tabulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parameter {
    PrimaryPower,
    OutageTarget,
    Gamma0,
    PrimaryUsers,
    SecondaryUsers,
    /// Primary link (PU-Tx to PU-Rx).
    KappaP,
    MuP,
    MP,
    /// SU-Tx to PU-Rx link.
    KappaPs,
    MuPs,
    MPs,
    /// Secondary link (SU-Tx to SU-Rx).
    KappaS,
    MuS,
    MS,
    /// PU-Tx to SU-Rx link.
    KappaSp,
    MuSp,
    MSp,
}

impl Parameter {
    pub const ALL: [Parameter; 17] = [
        Parameter::PrimaryPower,
        Parameter::OutageTarget,
        Parameter::Gamma0,
        Parameter::PrimaryUsers,
        Parameter::SecondaryUsers,
        Parameter::KappaP,
        Parameter::MuP,
        Parameter::MP,
        Parameter::KappaPs,
        Parameter::MuPs,
        Parameter::MPs,
        Parameter::KappaS,
        Parameter::MuS,
        Parameter::MS,
        Parameter::KappaSp,
        Parameter::MuSp,
        Parameter::MSp,
    ];
}

/// Quantity whose response is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    /// Uncapped secondary power P_s⁺ (and hence P̄_s below the cap).
    SecondaryPower,
    /// Per-user rate C_sec/L at P_s = P_s⁺.
    RatePerUser,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Increases,
    Decreases,
    Unchanged,
}

impl Direction {
    fn flip(self) -> Self {
        match self {
            Direction::Increases => Direction::Decreases,
            Direction::Decreases => Direction::Increases,
            Direction::Unchanged => Direction::Unchanged,
        }
    }
}

/// Response direction expected when `param` is increased from the base
/// scenario. For κ the direction follows the sign of m − μ of that link;
/// None when m = μ, where κ has no effect at fixed mean.
pub fn expected_direction(base: &Scenario, param: Parameter, quantity: Quantity) -> Option<Direction> {
    use Direction::*;
    use Parameter::*;
    let primary = base.policy.primary_model.signal();
    let ps_link = &base.policy.primary_model.interferers()[0];
    let secondary = base.secondary_model.signal();
    let sp_link = &base.secondary_model.interferers()[0];
    let kappa_sign = |p: &KappaMuShadowedParams| {
        let d = p.m() - p.mu();
        if d > 0.0 {
            Some(Increases)
        } else if d < 0.0 {
            Some(Decreases)
        } else {
            None
        }
    };
    // Direction of P_s⁺; the rate follows it for the policy-side parameters.
    let power = match param {
        PrimaryPower | OutageTarget | MuP | MP => Some(Increases),
        Gamma0 | PrimaryUsers | MuPs | MPs => Some(Decreases),
        KappaP => kappa_sign(primary),
        KappaPs => kappa_sign(ps_link).map(Direction::flip),
        SecondaryUsers | KappaS | MuS | MS | KappaSp | MuSp | MSp => Some(Unchanged),
    };
    match quantity {
        Quantity::SecondaryPower => power,
        Quantity::RatePerUser => match param {
            SecondaryUsers | MuSp | MSp => Some(Decreases),
            MuS | MS => Some(Increases),
            KappaS => kappa_sign(secondary),
            KappaSp => kappa_sign(sp_link).map(Direction::flip),
            _ => power,
        },
    }
}

/// How the mean power of a link responds when its κ, μ or m changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanConvention {
    /// The scale of the moment-matched gamma law stays fixed, so the mean
    /// power moves in proportion to the matched shape.
    #[default]
    FixedGammaScale,
    /// The mean power stays fixed.
    FixedMean,
}

fn bump_link(
    p: &KappaMuShadowedParams,
    param: Parameter,
    convention: MeanConvention,
) -> Result<KappaMuShadowedParams> {
    use Parameter::*;
    let bumped = match param {
        KappaP | KappaPs | KappaS | KappaSp => p.with_kappa(p.kappa() + 1.0),
        MuP | MuPs | MuS | MuSp => p.with_mu(p.mu() * 1.5),
        _ => p.with_m(p.m() * 1.5),
    }?;
    match convention {
        MeanConvention::FixedMean => Ok(bumped),
        MeanConvention::FixedGammaScale => {
            let ratio = gamma_moment_match(&bumped).shape / gamma_moment_match(p).shape;
            bumped.with_mean_power(p.mean_power() * ratio)
        }
    }
}

/// The base scenario with `param` increased by a finite step: +1 for κ, M
/// and L, ×1.5 for everything else.
pub fn perturb(base: &Scenario, param: Parameter, convention: MeanConvention) -> Result<Scenario> {
    use Parameter::*;
    let mut s = base.clone();
    match param {
        PrimaryPower => s.policy.p_primary *= 1.5,
        OutageTarget => {
            s.policy.p0 *= 1.5;
            if s.policy.p0 >= 1.0 {
                return Err(Error::InvalidParam("perturbed p0 leaves (0, 1)".into()));
            }
        }
        Gamma0 => s.policy.gamma0 *= 1.5,
        PrimaryUsers => s.policy.m_users += 1,
        SecondaryUsers => s.l_users += 1,
        KappaP | MuP | MP => {
            let sig = bump_link(s.policy.primary_model.signal(), param, convention)?;
            s.policy.primary_model = s.policy.primary_model.with_signal(sig);
        }
        KappaPs | MuPs | MPs => {
            let i = bump_link(&s.policy.primary_model.interferers()[0], param, convention)?;
            s.policy.primary_model = s.policy.primary_model.with_interferer(0, i)?;
        }
        KappaS | MuS | MS => {
            let sig = bump_link(s.secondary_model.signal(), param, convention)?;
            s.secondary_model = s.secondary_model.with_signal(sig);
        }
        KappaSp | MuSp | MSp => {
            let i = bump_link(&s.secondary_model.interferers()[0], param, convention)?;
            s.secondary_model = s.secondary_model.with_interferer(0, i)?;
        }
    }
    Ok(s)
}

/// Value of `quantity` for a scenario; the rate is evaluated at P_s⁺.
pub fn evaluate(s: &Scenario, quantity: Quantity, ctl: &TruncationControl) -> Result<f64> {
    let policy = solve_power_policy(&s.policy, ctl)?;
    match quantity {
        Quantity::SecondaryPower => Ok(policy.ps_plus),
        Quantity::RatePerUser => {
            Ok(ergodic_multicast_rate(&s.rate_problem(policy.ps_plus), ctl)? / s.l_users as f64)
        }
    }
}

/// Direction of the change in `quantity` when `param` is increased.
/// Changes within a relative 1e−9 count as unchanged.
pub fn observed_direction(
    base: &Scenario,
    param: Parameter,
    quantity: Quantity,
    convention: MeanConvention,
    ctl: &TruncationControl,
) -> Result<Direction> {
    let before = evaluate(base, quantity, ctl)?;
    let after = evaluate(&perturb(base, param, convention)?, quantity, ctl)?;
    let d = after - before;
    Ok(if d.abs() <= 1e-9 * before.abs().max(after.abs()) {
        Direction::Unchanged
    } else if d > 0.0 {
        Direction::Increases
    } else {
        Direction::Decreases
    })
}

/// Whether increasing `param` moves `quantity` in `direction`.
pub fn observation_monotonicity_check(
    base: &Scenario,
    param: Parameter,
    quantity: Quantity,
    direction: Direction,
    convention: MeanConvention,
    ctl: &TruncationControl,
) -> Result<bool> {
    Ok(observed_direction(base, param, quantity, convention, ctl)? == direction)
}
