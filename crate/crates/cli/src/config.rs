//! Run configuration, read from a TOML file.
//!
//! Powers are given in dB and converted to linear units on load. Links are
//! `{ kappa, mu, m, mean_power }` tables with `mean_power` defaulting to 1.

use std::path::{Path, PathBuf};

use minsir::fading::KappaMuShadowedParams;
use minsir::policy::{db_to_linear, gamma0_from_rate, PowerPolicyProblem, RateProblem};
use minsir::sir::SirModel;
use minsir::special::TruncationControl;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub kappa: f64,
    pub mu: f64,
    pub m: f64,
    #[serde(default = "one")]
    pub mean_power: f64,
}

fn one() -> f64 {
    1.0
}

impl LinkConfig {
    fn params(&self, name: &str) -> Result<KappaMuShadowedParams, String> {
        KappaMuShadowedParams::new(self.kappa, self.mu, self.m, self.mean_power)
            .map_err(|e| format!("link `{name}`: {e}"))
    }
}

/// Desired link plus interferers for the `min-cdf` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SirConfig {
    pub signal: LinkConfig,
    pub interferers: Vec<LinkConfig>,
    /// Number of receivers K over which the minimum is taken.
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinksConfig {
    pub primary: Option<LinkConfig>,
    pub primary_interferer: Option<LinkConfig>,
    pub secondary: Option<LinkConfig>,
    pub secondary_interferer: Option<LinkConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub p_primary_db: f64,
    /// Target primary rate R₀ in bits/s/Hz; γ₀ = 2^{R₀} − 1 unless `gamma0` is given.
    pub r0: Option<f64>,
    pub gamma0: Option<f64>,
    pub p0: f64,
    #[serde(default = "default_ps_max_db")]
    pub ps_max_db: f64,
    pub m_users: usize,
    pub l_users: Option<usize>,
    /// Fixed secondary power for `rate`; P̄_s from the policy when absent.
    pub p_secondary_db: Option<f64>,
    /// SIR threshold for the secondary outage in `simulate`; γ₀ when absent.
    pub secondary_threshold: Option<f64>,
}

fn default_ps_max_db() -> f64 {
    20.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Z,
    PPrimaryDb,
    P0,
    MUsers,
    LUsers,
    PSecondaryDb,
}

impl SweepAxis {
    pub fn is_integer(self) -> bool {
        matches!(self, SweepAxis::MUsers | SweepAxis::LUsers)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    #[serde(default)]
    pub seed: u64,
    /// 0 leaves the empirical columns empty.
    #[serde(default)]
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    pub per_variable_cap: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        let d = TruncationControl::default();
        Self {
            per_variable_cap: d.per_variable_cap,
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub scenario: String,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub monte_carlo: MonteCarloConfig,
    #[serde(default)]
    pub truncation: TruncationConfig,
    pub sir: Option<SirConfig>,
    pub links: Option<LinksConfig>,
    pub system: Option<SystemConfig>,
    pub sweep: SweepConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn truncation_control(&self) -> Result<TruncationControl, String> {
        let t = self.truncation;
        TruncationControl::new(t.per_variable_cap, t.rel_tol, t.abs_tol).map_err(|e| e.to_string())
    }

    /// Checks the sweep grid: nonempty, finite, strictly increasing, and
    /// integral for integer axes.
    pub fn validate_sweep(&self, allowed: &[SweepAxis]) -> Result<(), String> {
        let s = &self.sweep;
        if !allowed.contains(&s.axis) {
            return Err(format!("sweep axis {:?} is not valid for this command", s.axis));
        }
        if s.values.is_empty() {
            return Err("sweep grid is empty".into());
        }
        if s.values.iter().any(|v| v.is_nan()) || s.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err("sweep grid must be strictly increasing".into());
        }
        if s.axis.is_integer() && s.values.iter().any(|v| *v < 1.0 || v.fract() != 0.0) {
            return Err("user-count sweep values must be positive integers".into());
        }
        Ok(())
    }

    pub fn sir_model(&self) -> Result<(SirModel, usize), String> {
        let sir = self.sir.as_ref().ok_or("missing [sir] section")?;
        let signal = sir.signal.params("sir.signal")?;
        let interferers = sir
            .interferers
            .iter()
            .enumerate()
            .map(|(i, l)| l.params(&format!("sir.interferers[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let model = SirModel::new(signal, interferers).map_err(|e| e.to_string())?;
        if sir.k == 0 {
            return Err("sir.k must be >= 1".into());
        }
        Ok((model, sir.k))
    }

    fn system(&self) -> Result<&SystemConfig, String> {
        self.system.as_ref().ok_or_else(|| "missing [system] section".to_string())
    }

    fn link(&self, pick: fn(&LinksConfig) -> Option<LinkConfig>, name: &str) -> Result<KappaMuShadowedParams, String> {
        let links = self.links.as_ref().ok_or("missing [links] section")?;
        pick(links)
            .ok_or_else(|| format!("missing links.{name}"))?
            .params(&format!("links.{name}"))
    }

    pub fn gamma0(&self) -> Result<f64, String> {
        let s = self.system()?;
        match (s.gamma0, s.r0) {
            (Some(g), None) => Ok(g),
            (None, Some(r)) => Ok(gamma0_from_rate(r)),
            (None, None) => Ok(gamma0_from_rate(0.03)),
            (Some(_), Some(_)) => Err("give either system.gamma0 or system.r0, not both".into()),
        }
    }

    /// Power-policy problem at the base system settings.
    pub fn policy_problem(&self) -> Result<PowerPolicyProblem, String> {
        let s = self.system()?;
        let p = PowerPolicyProblem {
            p_primary: db_to_linear(s.p_primary_db),
            gamma0: self.gamma0()?,
            p0: s.p0,
            ps_max: db_to_linear(s.ps_max_db),
            m_users: s.m_users,
            primary_model: SirModel::single(
                self.link(|l| l.primary, "primary")?,
                self.link(|l| l.primary_interferer, "primary_interferer")?,
            ),
        };
        p.validate().map_err(|e| e.to_string())?;
        Ok(p)
    }

    /// Rate problem at the base system settings; P_s is filled in later.
    pub fn rate_problem(&self) -> Result<RateProblem, String> {
        let s = self.system()?;
        let l_users = s.l_users.ok_or("missing system.l_users")?;
        let r = RateProblem {
            l_users,
            p_secondary: s.p_secondary_db.map(db_to_linear).unwrap_or(0.0),
            p_primary: db_to_linear(s.p_primary_db),
            secondary_model: SirModel::single(
                self.link(|l| l.secondary, "secondary")?,
                self.link(|l| l.secondary_interferer, "secondary_interferer")?,
            ),
        };
        r.validate().map_err(|e| e.to_string())?;
        Ok(r)
    }

    pub fn p_secondary_db(&self) -> Option<f64> {
        self.system.as_ref().and_then(|s| s.p_secondary_db)
    }

    pub fn secondary_threshold(&self) -> Option<f64> {
        self.system.as_ref().and_then(|s| s.secondary_threshold)
    }
}
