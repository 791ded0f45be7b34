use std::fmt::Write as _;

use minsir::error::Error;
use minsir::evt::{asymptotic_min_law, exact_min_cdf, weibull_min_cdf};
use minsir::montecarlo::{simulate_min_sir, simulate_outage_and_rate, EmpiricalCdf, McConfig};
use minsir::policy::{
    asymptotic_outage, db_to_linear, ergodic_multicast_rate, linear_to_db, solve_power_policy,
    PowerPolicyProblem, RateProblem,
};

use crate::config::{RunConfig, SweepAxis};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numeric(e)
    }
}

impl From<String> for CliError {
    fn from(s: String) -> Self {
        CliError::Config(s)
    }
}

impl From<&str> for CliError {
    fn from(s: &str) -> Self {
        CliError::Config(s.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// CSV text with a '#' provenance block.
pub struct Table {
    provenance: Vec<String>,
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(command: &str, cfg: &RunConfig, header: &'static [&'static str]) -> Self {
        let mut provenance = vec![format!("minsir {command}")];
        provenance.extend(cfg.to_toml().lines().map(str::to_string));
        Self {
            provenance,
            header,
            rows: Vec::new(),
        }
    }

    fn note(&mut self, line: String) {
        self.provenance.push(line);
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in &self.provenance {
            if line.is_empty() {
                out.push_str("#\n");
            } else {
                let _ = writeln!(out, "# {line}");
            }
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn mc(cfg: &RunConfig) -> Option<McConfig> {
    let m = cfg.monte_carlo;
    (m.trials > 0).then(|| McConfig::new(m.seed, m.trials))
}

fn apply_policy_axis(p: &mut PowerPolicyProblem, axis: SweepAxis, v: f64) {
    match axis {
        SweepAxis::PPrimaryDb => p.p_primary = db_to_linear(v),
        SweepAxis::P0 => p.p0 = v,
        SweepAxis::MUsers => p.m_users = v as usize,
        _ => {}
    }
}

fn apply_rate_axis(r: &mut RateProblem, axis: SweepAxis, v: f64) {
    match axis {
        SweepAxis::PPrimaryDb => r.p_primary = db_to_linear(v),
        SweepAxis::LUsers => r.l_users = v as usize,
        SweepAxis::PSecondaryDb => r.p_secondary = db_to_linear(v),
        _ => {}
    }
}

pub fn min_cdf(cfg: &RunConfig) -> Result<Table> {
    cfg.validate_sweep(&[SweepAxis::Z])?;
    if cfg.sweep.values[0] < 0.0 {
        return Err("z grid must be >= 0".into());
    }
    let (model, k) = cfg.sir_model()?;
    let ctl = cfg.truncation_control()?;
    let mut t = Table::new("min-cdf", cfg, &["z", "exact_cdf", "asymptotic_cdf", "empirical_cdf"]);
    let law = if k >= 2 {
        let law = asymptotic_min_law(&model, k, &ctl)?;
        t.note(format!("weibull shape = {}, scale a_K = {}", law.shape, law.scale));
        Some(law)
    } else {
        None
    };
    let empirical = match mc(cfg) {
        Some(c) => Some(EmpiricalCdf::new(simulate_min_sir(&model, k, &c)?)?),
        None => None,
    };
    for &z in &cfg.sweep.values {
        t.push(vec![
            num(z),
            num(exact_min_cdf(&model, k, z, &ctl)?),
            opt(law.map(|l| weibull_min_cdf(&l, z))),
            opt(empirical.as_ref().map(|e| e.eval(z))),
        ]);
    }
    Ok(t)
}

pub fn power(cfg: &RunConfig) -> Result<Table> {
    let axis = cfg.sweep.axis;
    cfg.validate_sweep(&[SweepAxis::PPrimaryDb, SweepAxis::P0, SweepAxis::MUsers])?;
    let base = cfg.policy_problem()?;
    let ctl = cfg.truncation_control()?;
    let mut t = Table::new(
        "power",
        cfg,
        &[
            "sweep_value",
            "a_M",
            "Ps_plus_dB",
            "Ps_bar_dB",
            "asymptotic_outage_at_Ps_bar",
            "empirical_outage",
        ],
    );
    t.note(format!("gamma0 = {}", base.gamma0));
    let mc_cfg = mc(cfg);
    for &v in &cfg.sweep.values {
        let mut p = base.clone();
        apply_policy_axis(&mut p, axis, v);
        p.validate()?;
        let pol = solve_power_policy(&p, &ctl)?;
        let empirical = match &mc_cfg {
            Some(c) => {
                let e = EmpiricalCdf::new(simulate_min_sir(&p.primary_model, p.m_users, c)?)?;
                Some(e.eval(p.gamma0 * pol.ps_bar / p.p_primary))
            }
            None => None,
        };
        t.push(vec![
            num(v),
            num(pol.a_m),
            num(linear_to_db(pol.ps_plus)),
            num(linear_to_db(pol.ps_bar)),
            num(asymptotic_outage(&p, pol.ps_bar, &ctl)?),
            opt(empirical),
        ]);
    }
    Ok(t)
}

/// Secondary power for one sweep point: the fixed value when configured,
/// otherwise P̄_s from the policy.
fn secondary_power(cfg: &RunConfig, v: f64, rate: &RateProblem) -> Result<f64> {
    let axis = cfg.sweep.axis;
    if axis == SweepAxis::PSecondaryDb || cfg.p_secondary_db().is_some() {
        return Ok(rate.p_secondary);
    }
    let mut p = cfg.policy_problem()?;
    apply_policy_axis(&mut p, axis, v);
    p.validate()?;
    let ctl = cfg.truncation_control()?;
    Ok(solve_power_policy(&p, &ctl)?.ps_bar)
}

pub fn rate(cfg: &RunConfig) -> Result<Table> {
    let axis = cfg.sweep.axis;
    cfg.validate_sweep(&[
        SweepAxis::LUsers,
        SweepAxis::MUsers,
        SweepAxis::P0,
        SweepAxis::PPrimaryDb,
        SweepAxis::PSecondaryDb,
    ])?;
    let base = cfg.rate_problem()?;
    let ctl = cfg.truncation_control()?;
    let mut t = Table::new(
        "rate",
        cfg,
        &["sweep_value", "a_L", "rate_per_user_quadrature", "rate_per_user_mc"],
    );
    let mc_cfg = mc(cfg);
    for &v in &cfg.sweep.values {
        let mut r = base.clone();
        apply_rate_axis(&mut r, axis, v);
        r.p_secondary = secondary_power(cfg, v, &r)?;
        r.validate()?;
        let l = r.l_users as f64;
        let law = asymptotic_min_law(&r.secondary_model, r.l_users, &ctl)?;
        let quad = ergodic_multicast_rate(&r, &ctl)? / l;
        let empirical = match &mc_cfg {
            Some(c) => {
                let e = EmpiricalCdf::new(simulate_min_sir(&r.secondary_model, r.l_users, c)?)?;
                let ratio = r.p_secondary / r.p_primary;
                Some(e.mean_of(|x| (ratio * x).ln_1p() / std::f64::consts::LN_2))
            }
            None => None,
        };
        t.push(vec![num(v), num(law.scale), num(quad), opt(empirical)]);
    }
    Ok(t)
}

pub fn simulate(cfg: &RunConfig) -> Result<Table> {
    let axis = cfg.sweep.axis;
    cfg.validate_sweep(&[
        SweepAxis::PPrimaryDb,
        SweepAxis::P0,
        SweepAxis::MUsers,
        SweepAxis::LUsers,
    ])?;
    let mc_cfg = mc(cfg).ok_or("simulate needs monte_carlo.trials >= 1")?;
    let base_policy = cfg.policy_problem()?;
    let base_rate = cfg.rate_problem()?;
    let mut t = Table::new(
        "simulate",
        cfg,
        &["sweep_value", "Ps_dB", "primary_outage", "secondary_outage", "rate_per_user"],
    );
    t.note(format!("gamma0 = {}", base_policy.gamma0));
    for &v in &cfg.sweep.values {
        let mut p = base_policy.clone();
        apply_policy_axis(&mut p, axis, v);
        let mut r = base_rate.clone();
        apply_rate_axis(&mut r, axis, v);
        let p_s = secondary_power(cfg, v, &r)?;
        let est = simulate_outage_and_rate(&p, &r, p_s, cfg.secondary_threshold(), &mc_cfg)?;
        t.push(vec![
            num(v),
            num(linear_to_db(p_s)),
            num(est.primary_outage),
            num(est.secondary_outage),
            num(est.rate_per_user),
        ]);
    }
    Ok(t)
}
