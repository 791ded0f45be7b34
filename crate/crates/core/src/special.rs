//! Hypergeometric series used by the fading and SIR densities.
//!
//! Two evaluators live here: the confluent hypergeometric function ₁F₁ and
//! the confluent Lauricella-type series E_D whose summation indices are split
//! into two groups with separate lower Pochhammer parameters `c` and `c'`:
//!
//! ```text
//! E_D(k; a, b, c, c', x) = Σ (a)_{p₁+…+pₙ} ∏(bᵢ)_{pᵢ} ∏xᵢ^{pᵢ}
//!                          ───────────────────────────────────────────
//!                          (c)_{p₁+…+p_k} (c')_{p_{k+1}+…+pₙ} p₁!…pₙ!
//! ```
//!
//! E_D is summed by diagonal layers of equal total degree. Inside each
//! index group the numerator factors only through the group total, so the
//! group is collapsed into one coefficient sequence (the power series of
//! ∏(1 − xᵢt)^{−bᵢ}) built by running convolution. A layer of total degree t
//! is then a single sum over the split t = n₁ + n₂, which keeps the cost
//! polynomial in the truncation depth regardless of the number of variables.

use crate::error::{Error, Result};

/// Truncation settings shared by every series evaluator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationControl {
    /// Largest index any summation variable may reach. For E_D this is also
    /// the largest total degree, since layers are summed in order.
    pub per_variable_cap: usize,
    /// Relative stagnation threshold.
    pub rel_tol: f64,
    /// Absolute stagnation threshold.
    pub abs_tol: f64,
    /// Largest accepted number of E_D variables.
    pub max_dimension: usize,
}

impl Default for TruncationControl {
    fn default() -> Self {
        Self {
            per_variable_cap: 4000,
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            max_dimension: 9,
        }
    }
}

impl TruncationControl {
    pub fn new(per_variable_cap: usize, rel_tol: f64, abs_tol: f64) -> Result<Self> {
        let ctl = Self {
            per_variable_cap,
            rel_tol,
            abs_tol,
            ..Self::default()
        };
        ctl.validate()?;
        Ok(ctl)
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.per_variable_cap = cap;
        self
    }

    pub fn with_max_dimension(mut self, n: usize) -> Self {
        self.max_dimension = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.per_variable_cap < 1 {
            return Err(Error::InvalidParam("per_variable_cap must be >= 1".into()));
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParam("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Convergence threshold for a partial sum of the given magnitude.
    pub fn threshold(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Value of a truncated series together with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    /// Terms (₁F₁) or diagonal layers (E_D) summed.
    pub terms_used: usize,
    /// Estimated magnitude of the discarded tail.
    pub tail_estimate: f64,
    pub converged: bool,
}

/// Consecutive below-threshold layers required before stopping.
const STAGNATION_RUN: usize = 3;

fn is_nonpositive_integer(v: f64) -> bool {
    v <= 0.0 && v == v.round()
}

/// Rising factorial (a)_n kept as log-magnitude and sign, extended on demand.
#[derive(Debug, Clone)]
pub(crate) struct Pochhammer {
    a: f64,
    ln_abs: Vec<f64>,
    sign: Vec<f64>,
}

impl Pochhammer {
    pub(crate) fn new(a: f64) -> Self {
        Self {
            a,
            ln_abs: vec![0.0],
            sign: vec![1.0],
        }
    }

    fn extend_to(&mut self, n: usize) {
        while self.ln_abs.len() <= n {
            let k = self.ln_abs.len() - 1;
            let f = self.a + k as f64;
            let (l, s) = (self.ln_abs[k], self.sign[k]);
            if f == 0.0 || s == 0.0 {
                self.ln_abs.push(f64::NEG_INFINITY);
                self.sign.push(0.0);
            } else {
                self.ln_abs.push(l + f.abs().ln());
                self.sign.push(if f < 0.0 { -s } else { s });
            }
        }
    }

    /// (ln|(a)_n|, sign((a)_n)); the sign is 0 when the product vanishes.
    pub(crate) fn get(&mut self, n: usize) -> (f64, f64) {
        self.extend_to(n);
        (self.ln_abs[n], self.sign[n])
    }
}

/// Confluent hypergeometric function ₁F₁(a; b; z).
///
/// Negative arguments go through Kummer's transformation
/// ₁F₁(a; b; z) = e^z ₁F₁(b − a; b; −z) so that the summed series has a
/// positive argument; polynomial cases (a a nonpositive integer) are summed
/// directly.
pub fn confluent_1f1(a: f64, b: f64, z: f64, ctl: &TruncationControl) -> Result<SeriesResult> {
    let (ln_scale, res) = confluent_1f1_scaled(a, b, z, ctl)?;
    Ok(SeriesResult {
        value: res.value * ln_scale.exp(),
        tail_estimate: res.tail_estimate * ln_scale.exp(),
        ..res
    })
}

/// Natural log of ₁F₁(a; b; z), for arguments where the value is positive.
/// Avoids overflow of e^z for large |z|.
pub fn ln_confluent_1f1(a: f64, b: f64, z: f64, ctl: &TruncationControl) -> Result<f64> {
    let (ln_scale, res) = confluent_1f1_scaled(a, b, z, ctl)?;
    if res.value <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "1F1({a}, {b}, {z}) is not positive; its logarithm is undefined"
        )));
    }
    Ok(res.value.ln() + ln_scale)
}

/// Returns (ln s, r) with ₁F₁(a; b; z) = e^{ln s} · r.value.
fn confluent_1f1_scaled(
    a: f64,
    b: f64,
    z: f64,
    ctl: &TruncationControl,
) -> Result<(f64, SeriesResult)> {
    ctl.validate()?;
    if is_nonpositive_integer(b) {
        return Err(Error::InvalidParam(format!(
            "1F1 lower parameter b = {b} is a nonpositive integer"
        )));
    }
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(Error::InvalidParam("1F1 arguments must be finite".into()));
    }
    if z < 0.0 && !is_nonpositive_integer(a) {
        let (ln_s, res) = positive_argument(b - a, b, -z, ctl)?;
        return Ok((z + ln_s, res));
    }
    positive_argument(a, b, z, ctl)
}

/// Below this argument the power series is always used.
const ASYMPTOTIC_MIN_ARG: f64 = 50.0;

fn positive_argument(
    a: f64,
    b: f64,
    z: f64,
    ctl: &TruncationControl,
) -> Result<(f64, SeriesResult)> {
    if z >= ASYMPTOTIC_MIN_ARG && z >= 4.0 * (a.abs() + b.abs()) && !is_nonpositive_integer(a) {
        if let Some(r) = large_argument(a, b, z, ctl) {
            return Ok(r);
        }
    }
    kummer_series(a, b, z, ctl)
}

/// ₁F₁(a; b; z) ~ Γ(b)/Γ(a) e^z z^{a−b} Σ_s (b−a)_s (1−a)_s / (s! z^s) for
/// large positive z; the asymptotic sum is cut before its terms grow.
/// Returns None when that happens before the tolerance is met.
fn large_argument(a: f64, b: f64, z: f64, ctl: &TruncationControl) -> Option<(f64, SeriesResult)> {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for s in 0..ctl.per_variable_cap {
        let sf = s as f64;
        let next = term * (b - a + sf) * (1.0 - a + sf) / ((sf + 1.0) * z);
        if next.abs() > term.abs() {
            return None;
        }
        sum += next;
        term = next;
        if term.abs() <= ctl.threshold(sum) {
            let gamma_b = statrs::function::gamma::ln_gamma(b);
            let gamma_a = statrs::function::gamma::ln_gamma(a);
            let sign = statrs::function::gamma::gamma(b).signum()
                * statrs::function::gamma::gamma(a).signum();
            let ln_scale = gamma_b - gamma_a + z + (a - b) * z.ln();
            return Some((
                ln_scale,
                SeriesResult {
                    value: sign * sum,
                    terms_used: s + 2,
                    tail_estimate: term.abs(),
                    converged: true,
                },
            ));
        }
    }
    None
}

/// Plain power series Σ (a)_p z^p / ((b)_p p!), rescaled to stay finite.
fn kummer_series(a: f64, b: f64, z: f64, ctl: &TruncationControl) -> Result<(f64, SeriesResult)> {
    const RESCALE_AT: f64 = 1e280;
    let mut ln_scale = 0.0;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut quiet = 0usize;
    if z == 0.0 || a == 0.0 {
        return Ok((
            0.0,
            SeriesResult {
                value: 1.0,
                terms_used: 1,
                tail_estimate: 0.0,
                converged: true,
            },
        ));
    }
    for p in 0..ctl.per_variable_cap {
        let pf = p as f64;
        term *= (a + pf) / (b + pf) * z / (pf + 1.0);
        sum += term;
        if term == 0.0 {
            // terminating polynomial
            return Ok((
                ln_scale,
                SeriesResult {
                    value: sum,
                    terms_used: p + 2,
                    tail_estimate: 0.0,
                    converged: true,
                },
            ));
        }
        if sum.abs() > RESCALE_AT || term.abs() > RESCALE_AT {
            sum /= RESCALE_AT;
            term /= RESCALE_AT;
            ln_scale += RESCALE_AT.ln();
        }
        if term.abs() <= ctl.threshold(sum) {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= STAGNATION_RUN {
            let next = pf + 1.0;
            let ratio = ((a + next) / (b + next) * z / (next + 1.0)).abs();
            if ratio < 1.0 {
                let tail = term.abs() * ratio / (1.0 - ratio);
                if tail <= ctl.threshold(sum) {
                    return Ok((
                        ln_scale,
                        SeriesResult {
                            value: sum,
                            terms_used: p + 2,
                            tail_estimate: tail,
                            converged: true,
                        },
                    ));
                }
            }
        }
    }
    Err(Error::NonConvergent {
        terms: ctl.per_variable_cap + 1,
        tail: term.abs() * ln_scale.exp(),
    })
}

/// Coefficients of ∏ᵢ (1 − xᵢ t)^{−bᵢ} over one index group, grown one
/// degree at a time. Also tracks the product of absolute-value series,
/// which majorizes every layer of the full sum.
#[derive(Debug, Clone)]
struct GroupSeries {
    vars: Vec<VarSeries>,
    /// partial[j][n]: coefficient n of the product of the first j+1 series.
    partial: Vec<Vec<f64>>,
    partial_abs: Vec<Vec<f64>>,
    /// Degree beyond which every coefficient vanishes, if finite.
    degree: Option<usize>,
    /// Largest |xᵢ| in the group; the asymptotic per-degree decay rate.
    rate: f64,
}

#[derive(Debug, Clone)]
struct VarSeries {
    b: f64,
    x: f64,
    coef: Vec<f64>,
    degree: Option<usize>,
}

impl VarSeries {
    fn new(b: f64, x: f64) -> Self {
        let degree = if is_nonpositive_integer(b) {
            Some((-b) as usize)
        } else {
            None
        };
        Self {
            b,
            x,
            coef: vec![1.0],
            degree,
        }
    }

    fn coef(&mut self, k: usize) -> f64 {
        while self.coef.len() <= k {
            let j = self.coef.len() - 1;
            let jf = j as f64;
            let next = self.coef[j] * (self.b + jf) * self.x / (jf + 1.0);
            self.coef.push(next);
        }
        self.coef[k]
    }
}

impl GroupSeries {
    fn new(b: &[f64], x: &[f64]) -> Self {
        // Variables with x = 0 or b = 0 contribute only their constant term.
        let vars: Vec<VarSeries> = b
            .iter()
            .zip(x)
            .filter(|(&bi, &xi)| bi != 0.0 && xi != 0.0)
            .map(|(&bi, &xi)| VarSeries::new(bi, xi))
            .collect();
        let degree = if vars.is_empty() {
            Some(0)
        } else {
            vars.iter()
                .map(|v| v.degree)
                .try_fold(0usize, |acc, d| d.map(|d| acc + d))
        };
        let rate = vars.iter().map(|v| v.x.abs()).fold(0.0, f64::max);
        let n = vars.len();
        Self {
            vars,
            partial: vec![Vec::new(); n],
            partial_abs: vec![Vec::new(); n],
            degree,
            rate,
        }
    }

    /// (coefficient, majorant coefficient) at degree `n`. Degrees must be
    /// requested in nondecreasing order per group, which layer summation does.
    fn coef(&mut self, n: usize) -> (f64, f64) {
        if self.vars.is_empty() {
            return if n == 0 { (1.0, 1.0) } else { (0.0, 0.0) };
        }
        let last = self.vars.len() - 1;
        while self.partial[last].len() <= n {
            let d = self.partial[last].len();
            for j in 0..self.vars.len() {
                let (val, abs) = if j == 0 {
                    let c = self.vars[0].coef(d);
                    (c, c.abs())
                } else {
                    let mut s = 0.0;
                    let mut sa = 0.0;
                    let top = match self.vars[j].degree {
                        Some(dj) => dj.min(d),
                        None => d,
                    };
                    for k in 0..=top {
                        let c = self.vars[j].coef(k);
                        s += c * self.partial[j - 1][d - k];
                        sa += c.abs() * self.partial_abs[j - 1][d - k];
                    }
                    (s, sa)
                };
                self.partial[j].push(val);
                self.partial_abs[j].push(abs);
            }
        }
        (self.partial[last][n], self.partial_abs[last][n])
    }
}

/// Confluent Lauricella series E_D with the first `k` indices sharing the
/// lower parameter `c` and the remaining `n − k` sharing `c_prime`.
///
/// Convergence requires max|x| over the first group plus max|x| over the
/// second group to stay below one (each |xᵢ| < 1 alone is not enough once
/// both groups are populated).
pub fn lauricella_ed(
    k: usize,
    a: f64,
    b: &[f64],
    c: f64,
    c_prime: f64,
    x: &[f64],
    ctl: &TruncationControl,
) -> Result<SeriesResult> {
    let res = lauricella_ed_truncated(k, a, b, c, c_prime, x, ctl)?;
    if res.converged {
        Ok(res)
    } else {
        Err(Error::NonConvergent {
            terms: res.terms_used,
            tail: res.tail_estimate,
        })
    }
}

/// Same as [`lauricella_ed`] but returns the partial sum with
/// `converged = false` instead of failing when the cap is reached.
pub fn lauricella_ed_truncated(
    k: usize,
    a: f64,
    b: &[f64],
    c: f64,
    c_prime: f64,
    x: &[f64],
    ctl: &TruncationControl,
) -> Result<SeriesResult> {
    ctl.validate()?;
    let n = x.len();
    if n == 0 || b.len() != n {
        return Err(Error::InvalidParam(format!(
            "E_D needs matching nonempty b and x (got {} and {})",
            b.len(),
            n
        )));
    }
    if k < 1 || k > n {
        return Err(Error::InvalidParam(format!("group split k = {k} not in 1..={n}")));
    }
    if n > ctl.max_dimension {
        return Err(Error::DimensionTooLarge {
            n,
            limit: ctl.max_dimension,
        });
    }
    if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !(v.abs() < 1.0)) {
        return Err(Error::OutOfConvergenceRegion { index, value });
    }
    let uses_c = b[..k].iter().zip(&x[..k]).any(|(&bi, &xi)| bi != 0.0 && xi != 0.0);
    let uses_cp = b[k..].iter().zip(&x[k..]).any(|(&bi, &xi)| bi != 0.0 && xi != 0.0);
    if uses_c && is_nonpositive_integer(c) {
        return Err(Error::InvalidParam(format!("E_D parameter c = {c} is a nonpositive integer")));
    }
    if uses_cp && is_nonpositive_integer(c_prime) {
        return Err(Error::InvalidParam(format!(
            "E_D parameter c' = {c_prime} is a nonpositive integer"
        )));
    }

    let mut first = GroupSeries::new(&b[..k], &x[..k]);
    let mut second = GroupSeries::new(&b[k..], &x[k..]);
    let rate = first.rate + second.rate;
    if rate >= 1.0 {
        let (index, value) = x
            .iter()
            .enumerate()
            .max_by(|p, q| p.1.abs().total_cmp(&q.1.abs()))
            .map(|(i, v)| (i, *v))
            .unwrap_or((0, 0.0));
        return Err(Error::OutOfConvergenceRegion { index, value });
    }

    let mut poch_a = Pochhammer::new(a);
    let mut poch_c = Pochhammer::new(c);
    let mut poch_cp = Pochhammer::new(c_prime);

    let mut sum = 1.0;
    let mut prev_major = 1.0;
    let mut ratios = [0.0f64; STAGNATION_RUN];
    let mut quiet = 0usize;
    let mut tail = f64::INFINITY;

    for t in 1..=ctl.per_variable_cap {
        let (ln_at, sign_at) = poch_a.get(t);
        let mut layer = 0.0;
        let mut major = 0.0;
        if sign_at != 0.0 {
            let lo = second.degree.map_or(0, |d2| t.saturating_sub(d2));
            let hi = first.degree.map_or(t, |d1| d1.min(t));
            for n1 in lo..=hi {
                let n2 = t - n1;
                let (ca, ca_abs) = first.coef(n1);
                let (cb, cb_abs) = second.coef(n2);
                if ca_abs == 0.0 || cb_abs == 0.0 {
                    continue;
                }
                let (ln_c, sign_c) = poch_c.get(n1);
                let (ln_cp, sign_cp) = poch_cp.get(n2);
                let ln_ratio = ln_at - ln_c - ln_cp;
                let mag = (ln_ratio + ca_abs.ln() + cb_abs.ln()).exp();
                let lead = (ln_ratio + ca.abs().ln() + cb.abs().ln()).exp();
                let s = sign_at * sign_c * sign_cp * ca.signum() * cb.signum();
                if ca != 0.0 && cb != 0.0 {
                    layer += s * lead;
                }
                major += mag;
            }
        }
        sum += layer;

        if major == 0.0 {
            // Every later layer vanishes as well (terminating series).
            return Ok(SeriesResult {
                value: sum,
                terms_used: t + 1,
                tail_estimate: 0.0,
                converged: true,
            });
        }
        ratios.rotate_left(1);
        ratios[STAGNATION_RUN - 1] = major / prev_major;
        prev_major = major;

        if major <= ctl.threshold(sum) {
            quiet += 1;
        } else {
            quiet = 0;
        }
        let r = ratios.iter().copied().fold(rate, f64::max);
        tail = if r < 1.0 { major * r / (1.0 - r) } else { f64::INFINITY };
        if quiet >= STAGNATION_RUN && tail <= ctl.threshold(sum) {
            return Ok(SeriesResult {
                value: sum,
                terms_used: t + 1,
                tail_estimate: tail,
                converged: true,
            });
        }
    }
    Ok(SeriesResult {
        value: sum,
        terms_used: ctl.per_variable_cap + 1,
        tail_estimate: tail,
        converged: false,
    })
}
