//! Minimum of K i.i.d. SIRs: exact law and its Weibull limit.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sir::{sir_cdf, sir_cdf_inverse, SirModel};
use crate::special::TruncationControl;

/// Weibull law of the minimum SIR over `k_users` i.i.d. copies:
/// shape υ = μ of the desired link and scale a_K = F⁻¹(1/K).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullMinLaw {
    pub shape: f64,
    pub scale: f64,
    pub k_users: usize,
}

impl WeibullMinLaw {
    pub fn new(shape: f64, scale: f64, k_users: usize) -> Result<Self> {
        if !(shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()) || k_users == 0 {
            return Err(Error::InvalidParam(format!(
                "Weibull law needs positive shape/scale/K (got {shape}, {scale}, {k_users})"
            )));
        }
        Ok(Self {
            shape,
            scale,
            k_users,
        })
    }

    pub fn cdf(&self, z: f64) -> f64 {
        weibull_min_cdf(self, z)
    }

    pub fn pdf(&self, z: f64) -> f64 {
        weibull_min_pdf(self, z)
    }
}

/// 1 − (1 − F(z))^K.
pub fn exact_min_cdf(model: &SirModel, k: usize, z: f64, ctl: &TruncationControl) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParam("K must be >= 1".into()));
    }
    let f = sir_cdf(model, z, ctl)?;
    if k == 1 {
        return Ok(f);
    }
    // -expm1(K ln(1 - F)) keeps precision when F is small
    Ok(-(k as f64 * (-f).ln_1p()).exp_m1())
}

pub fn asymptotic_min_law(model: &SirModel, k: usize, ctl: &TruncationControl) -> Result<WeibullMinLaw> {
    if k < 2 {
        return Err(Error::InvalidParam(format!(
            "the asymptotic minimum law needs K >= 2, got {k}"
        )));
    }
    let scale = sir_cdf_inverse(model, 1.0 / k as f64, ctl)?;
    WeibullMinLaw::new(model.signal().mu(), scale, k)
}

/// 1 − exp(−(z/a_K)^υ) for z ≥ 0, and 0 for z < 0.
pub fn weibull_min_cdf(law: &WeibullMinLaw, z: f64) -> f64 {
    if z < 0.0 {
        return 0.0;
    }
    -(-(z / law.scale).powf(law.shape)).exp_m1()
}

/// (υ/a)(z/a)^{υ−1} exp(−(z/a)^υ).
pub fn weibull_min_pdf(law: &WeibullMinLaw, z: f64) -> f64 {
    if z < 0.0 {
        return 0.0;
    }
    let u = z / law.scale;
    law.shape / law.scale * u.powf(law.shape - 1.0) * (-u.powf(law.shape)).exp()
}

/// Default sup-norm grid: `points` log-spaced values in (scale/100, 5·scale).
pub fn default_z_grid(scale: f64, points: usize) -> Vec<f64> {
    let (lo, hi) = ((scale / 100.0).ln(), (5.0 * scale).ln());
    let n = points.max(2);
    (0..n)
        .map(|i| (lo + (hi - lo) * (i as f64 + 0.5) / n as f64).exp())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceDiagnostic {
    pub k_values: Vec<usize>,
    pub scales: Vec<f64>,
    /// sup over the grid of |exact_min_cdf − weibull_min_cdf| per K.
    pub errors: Vec<f64>,
    /// Least-squares slope of ln e(K) against ln K.
    pub slope: f64,
}

/// Grid used by [`convergence_diagnostic`].
#[derive(Debug, Clone, PartialEq)]
pub enum ZGrid {
    /// `points` log-spaced values in (a_K/100, 5·a_K), rebuilt for every K.
    ScaledDefault { points: usize },
    /// A fixed list of z values shared by every K.
    Fixed(Vec<f64>),
}

impl Default for ZGrid {
    fn default() -> Self {
        ZGrid::ScaledDefault { points: 200 }
    }
}

/// Distance between the exact minimum CDF and its Weibull limit for a
/// sequence of K, plus the fitted log-log decay slope.
pub fn convergence_diagnostic(
    model: &SirModel,
    k_values: &[usize],
    grid: &ZGrid,
    ctl: &TruncationControl,
) -> Result<ConvergenceDiagnostic> {
    if k_values.len() < 3 || k_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParam(
            "K list must be strictly increasing with at least 3 entries".into(),
        ));
    }
    let mut scales = Vec::with_capacity(k_values.len());
    let mut errors = Vec::with_capacity(k_values.len());
    for &k in k_values {
        let law = asymptotic_min_law(model, k, ctl)?;
        let zs = match grid {
            ZGrid::ScaledDefault { points } => default_z_grid(law.scale, *points),
            ZGrid::Fixed(zs) => zs.clone(),
        };
        let gaps: Result<Vec<f64>> = zs
            .par_iter()
            .map(|&z| Ok((exact_min_cdf(model, k, z, ctl)? - weibull_min_cdf(&law, z)).abs()))
            .collect();
        let e = gaps?.into_iter().fold(0.0, f64::max);
        scales.push(law.scale);
        errors.push(e);
    }
    let xs: Vec<f64> = k_values.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let slope = least_squares_slope(&xs, &ys);
    Ok(ConvergenceDiagnostic {
        k_values: k_values.to_vec(),
        scales,
        errors,
        slope,
    })
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::KappaMuShadowedParams;

    fn rayleigh() -> SirModel {
        let r = KappaMuShadowedParams::rayleigh(1.0).unwrap();
        SirModel::single(r, r)
    }

    #[test]
    fn weibull_branches() {
        let law = WeibullMinLaw::new(1.7, 0.4, 20).unwrap();
        assert_eq!(weibull_min_cdf(&law, -1.0), 0.0);
        assert_eq!(weibull_min_cdf(&law, 0.0), 0.0);
        let at_scale = weibull_min_cdf(&law, 0.4);
        assert!((at_scale - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((at_scale - 0.632121).abs() < 1e-6);
    }

    #[test]
    fn weibull_density_value() {
        let law = WeibullMinLaw::new(1.0, 2.0, 5).unwrap();
        assert!((weibull_min_pdf(&law, 2.0) - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn exact_min_rayleigh() {
        let ctl = TruncationControl::default();
        let v = exact_min_cdf(&rayleigh(), 20, 0.1, &ctl).unwrap();
        assert!((v - (1.0 - 1.1f64.powi(-20))).abs() < 1e-12);
        assert!((v - 0.851356).abs() < 1e-6);
        assert!(exact_min_cdf(&rayleigh(), 0, 0.1, &ctl).is_err());
    }

    #[test]
    fn asymptotic_law_rayleigh() {
        let law = asymptotic_min_law(&rayleigh(), 20, &TruncationControl::default()).unwrap();
        assert_eq!(law.shape, 1.0);
        assert!((law.scale - 1.0 / 19.0).abs() < 1e-10);
        assert!(asymptotic_min_law(&rayleigh(), 1, &TruncationControl::default()).is_err());
    }

    #[test]
    fn diagnostic_input_validation() {
        let ctl = TruncationControl::default();
        assert!(convergence_diagnostic(&rayleigh(), &[5, 10], &ZGrid::default(), &ctl).is_err());
        assert!(convergence_diagnostic(&rayleigh(), &[5, 10, 10], &ZGrid::default(), &ctl).is_err());
    }

    #[test]
    fn slope_of_exact_power_law() {
        let xs: Vec<f64> = [1.0f64, 2.0, 4.0, 8.0].iter().map(|v| v.ln()).collect();
        let ys: Vec<f64> = [1.0f64, 2.0, 4.0, 8.0].iter().map(|v| (3.0 * v.powf(-0.5)).ln()).collect();
        assert!((least_squares_slope(&xs, &ys) + 0.5).abs() < 1e-12);
    }
}
