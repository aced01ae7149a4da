//! Closed-form word error rates.
//!
//! For `m×n` Gaussian `A` the OSIC decoder fails with probability
//! `1 − Π_{i=1..n} P_{m−i+1}` and the BSIC decoder (truth uniform over the
//! box) with probability `1 − Π_{i=1..n} P̄_{m−i+1}(u_i − ℓ_i)`.
//!
//! Each rate is computed on two routes that must agree: a reference route
//! that multiplies the per-stage probabilities term by term, and an
//! efficient route that pulls the gamma-ratio prefactor
//! `α = (2/√π)ⁿ Γ((m+1)/2)/Γ((m−n+1)/2)` out of the product. Products are
//! accumulated as compensated sums of logs, and the rate is recovered as
//! `−expm1(Σ log P)` so values near zero keep their leading digits.

use crate::decoder::BoxConstraint;
use crate::error::{Error, Result};
use crate::special::{cos_power_integral, ln_gamma, log_c_k, log_p_bar_k, log_p_k};
use std::f64::consts::LN_2;

/// Absolute log-domain disagreement between the reference and efficient
/// routes that trips the internal consistency error. The routes agree to
/// ~1e-13 when healthy; anything past this is a bug.
const LOG_PATH_TOLERANCE: f64 = 1e-10;

/// Slack past [0, 1] that still counts as rounding; anything further is an
/// internal consistency error.
const RANGE_TOLERANCE: f64 = 1e-9;

/// A WER request: OSIC when `box_constraint` is absent, BSIC otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct WerQuery {
    pub m: usize,
    pub n: usize,
    pub sigma: f64,
    pub box_constraint: Option<BoxConstraint>,
}

impl WerQuery {
    pub fn new(
        m: usize,
        n: usize,
        sigma: f64,
        box_constraint: Option<BoxConstraint>,
    ) -> Result<Self> {
        let query = Self {
            m,
            n,
            sigma,
            box_constraint,
        };
        query.validate()?;
        Ok(query)
    }

    pub fn validate(&self) -> Result<()> {
        check_dims(self.m, self.n)?;
        check_sigma(self.sigma)?;
        if let Some(b) = &self.box_constraint {
            if b.len() != self.n {
                return Err(Error::Dimension(format!(
                    "box length {} does not match n = {}",
                    b.len(),
                    self.n
                )));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self) -> Result<f64> {
        self.validate()?;
        match &self.box_constraint {
            None => wer_osic(self.m, self.n, self.sigma),
            Some(b) => wer_bsic(self.m, b, self.sigma),
        }
    }
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if n < 1 || m < n {
        return Err(Error::Dimension(format!(
            "requires m >= n >= 1, got m={m}, n={n}"
        )));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!(
            "sigma must be positive and finite, got {sigma}"
        )));
    }
    Ok(())
}

fn phi_from_sigma(sigma: f64) -> f64 {
    (1.0 / (2.0 * sigma)).atan()
}

/// Neumaier-compensated sum; keeps n-term log products accurate to a few
/// ulps of the largest term rather than of the running sum.
fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for term in terms {
        let t = sum + term;
        if sum.abs() >= term.abs() {
            compensation += (sum - t) + term;
        } else {
            compensation += (term - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

/// `ln α` for `α = (2/√π)ⁿ Γ((m+1)/2)/Γ((m−n+1)/2)`. The square case uses
/// `Γ(1/2) = √π` directly instead of log-gamma at the half-integer boundary.
fn log_alpha(m: usize, n: usize) -> f64 {
    let half_ln_pi = 0.5 * std::f64::consts::PI.ln();
    let base = n as f64 * (LN_2 - half_ln_pi);
    let numerator = ln_gamma((m as f64 + 1.0) / 2.0);
    let denominator = if m == n {
        half_ln_pi
    } else {
        ln_gamma((m - n) as f64 / 2.0 + 0.5)
    };
    base + numerator - denominator
}

fn wer_from_log_success(log_success: f64) -> Result<f64> {
    let wer = -f64::exp_m1(log_success);
    if !(-RANGE_TOLERANCE..=1.0 + RANGE_TOLERANCE).contains(&wer) {
        return Err(Error::Consistency(format!(
            "computed WER {wer} lies outside [0, 1]"
        )));
    }
    Ok(wer.clamp(0.0, 1.0))
}

fn cross_check(reference: f64, efficient: f64, what: &str) -> Result<()> {
    if (reference - efficient).abs() > LOG_PATH_TOLERANCE {
        return Err(Error::Consistency(format!(
            "{what}: reference log-success {reference} vs efficient {efficient}"
        )));
    }
    Ok(())
}

fn log_success_osic_reference(m: usize, n: usize, sigma: f64) -> Result<f64> {
    let terms: Result<Vec<f64>> = (1..=n).map(|i| log_p_k(m - i + 1, sigma)).collect();
    Ok(compensated_sum(terms?))
}

fn log_success_osic_efficient(m: usize, n: usize, sigma: f64) -> Result<f64> {
    let phi = phi_from_sigma(sigma);
    let terms: Result<Vec<f64>> = (1..=n)
        .map(|i| Ok(cos_power_integral(m - i + 1, phi)?.ln()))
        .collect();
    Ok(log_alpha(m, n) + compensated_sum(terms?))
}

/// Word error rate of the OSIC decoder: `1 − Π_{i=1..n} P_{m−i+1}`.
///
/// Evaluated through the prefactor form; the term-by-term product is
/// recomputed as a permanent self-check and any disagreement is an error.
pub fn wer_osic(m: usize, n: usize, sigma: f64) -> Result<f64> {
    check_dims(m, n)?;
    check_sigma(sigma)?;
    let efficient = log_success_osic_efficient(m, n, sigma)?;
    let reference = log_success_osic_reference(m, n, sigma)?;
    cross_check(reference, efficient, "OSIC WER")?;
    wer_from_log_success(efficient)
}

/// The term-by-term route alone, exposed for cross-validation.
pub fn wer_osic_reference(m: usize, n: usize, sigma: f64) -> Result<f64> {
    check_dims(m, n)?;
    check_sigma(sigma)?;
    wer_from_log_success(log_success_osic_reference(m, n, sigma)?)
}

/// Square-case (`m = n`) specialization:
/// `1 − (2ⁿΓ((n+1)/2)/√π^{n+1}) Π_{i=1..n} I_i(arctan(1/(2σ)))`.
pub fn wer_osic_square(n: usize, sigma: f64) -> Result<f64> {
    check_dims(n, n)?;
    check_sigma(sigma)?;
    let phi = phi_from_sigma(sigma);
    let ln_pi = std::f64::consts::PI.ln();
    let prefactor =
        n as f64 * LN_2 + ln_gamma((n as f64 + 1.0) / 2.0) - (n as f64 + 1.0) / 2.0 * ln_pi;
    let terms: Result<Vec<f64>> = (1..=n)
        .map(|i| Ok(cos_power_integral(i, phi)?.ln()))
        .collect();
    wer_from_log_success(prefactor + compensated_sum(terms?))
}

fn log_success_bsic_reference(m: usize, widths: &[u64], sigma: f64) -> Result<f64> {
    let terms: Result<Vec<f64>> = widths
        .iter()
        .enumerate()
        .map(|(i, &eta)| log_p_bar_k(m - i, eta, sigma))
        .collect();
    Ok(compensated_sum(terms?))
}

fn log_success_bsic_efficient(m: usize, widths: &[u64], sigma: f64) -> Result<f64> {
    let n = widths.len();
    let phi = phi_from_sigma(sigma);
    // β = (2/√π)ⁿ · Γ((m+1)/2)/Γ((m−n+1)/2) · Π 1/(η_i + 1), and the product
    // runs over P̂_i = 1/C_{m−i+1} + η_i·I_{m−i+1}. Width-0 coordinates
    // contribute exactly C_k/(C_k·1) = 1, so both factors are skipped
    // together when η_i = 0.
    let mut log_terms = Vec::with_capacity(2 * n + 1);
    let mut skipped_c = Vec::new();
    for (i, &eta) in widths.iter().enumerate() {
        let k = m - i;
        if eta == 0 {
            // α includes this C_k; cancel it exactly by removing it again.
            skipped_c.push(k);
            continue;
        }
        let inv_c = (-log_c_k(k)?).exp();
        let hat = inv_c + eta as f64 * cos_power_integral(k, phi)?;
        log_terms.push(hat.ln());
        log_terms.push(-((eta + 1) as f64).ln());
    }
    for k in skipped_c {
        log_terms.push(-log_c_k(k)?);
    }
    Ok(log_alpha(m, n) + compensated_sum(log_terms))
}

/// Word error rate of the BSIC decoder for a truth uniform over the box:
/// `1 − Π_{i=1..n} P̄_{m−i+1}(u_i − ℓ_i)`.
///
/// Like [`wer_osic`], the prefactor route is returned and the per-term
/// route is recomputed as a self-check.
pub fn wer_bsic(m: usize, bounds: &BoxConstraint, sigma: f64) -> Result<f64> {
    let n = bounds.len();
    check_dims(m, n)?;
    check_sigma(sigma)?;
    let widths = bounds.widths();
    if widths.iter().all(|&w| w == 0) {
        return Ok(0.0); // single-point box decodes exactly
    }
    let efficient = log_success_bsic_efficient(m, &widths, sigma)?;
    let reference = log_success_bsic_reference(m, &widths, sigma)?;
    cross_check(reference, efficient, "BSIC WER")?;
    wer_from_log_success(efficient)
}

/// The term-by-term BSIC route alone, exposed for cross-validation.
pub fn wer_bsic_reference(m: usize, bounds: &BoxConstraint, sigma: f64) -> Result<f64> {
    let n = bounds.len();
    check_dims(m, n)?;
    check_sigma(sigma)?;
    let widths = bounds.widths();
    if widths.iter().all(|&w| w == 0) {
        return Ok(0.0);
    }
    wer_from_log_success(log_success_bsic_reference(m, &widths, sigma)?)
}

/// Cube specialization (`m = n`, box `[0, d]ⁿ`):
/// `1 − β Π_{i=1..n} (1/C_i + d·I_i(arctan(1/(2σ))))` with
/// `β = (2/(√π(d+1)))ⁿ Γ((n+1)/2)/√π`.
pub fn wer_bsic_cube(n: usize, d: u64, sigma: f64) -> Result<f64> {
    check_dims(n, n)?;
    check_sigma(sigma)?;
    if d == 0 {
        return Ok(0.0);
    }
    let phi = phi_from_sigma(sigma);
    let half_ln_pi = 0.5 * std::f64::consts::PI.ln();
    let log_beta = n as f64 * (LN_2 - half_ln_pi - ((d + 1) as f64).ln())
        + ln_gamma((n as f64 + 1.0) / 2.0)
        - half_ln_pi;
    let terms: Result<Vec<f64>> = (1..=n)
        .map(|i| {
            let inv_c = (-log_c_k(i)?).exp();
            Ok((inv_c + d as f64 * cos_power_integral(i, phi)?).ln())
        })
        .collect();
    wer_from_log_success(log_beta + compensated_sum(terms?))
}

fn check_sizes(n1: usize, n2: usize) -> Result<()> {
    if n1 < 1 || n1 >= n2 {
        return Err(Error::Domain(format!(
            "requires 1 <= n1 < n2, got n1={n1}, n2={n2}"
        )));
    }
    Ok(())
}

/// Success-rate ratio between two square OSIC sizes:
/// `(1 − WER(n2))/(1 − WER(n1)) = Π_{k=n1+1..n2} P_k`.
pub fn success_ratio_osic(n1: usize, n2: usize, sigma: f64) -> Result<f64> {
    check_sizes(n1, n2)?;
    check_sigma(sigma)?;
    let terms: Result<Vec<f64>> = (n1 + 1..=n2).map(|k| log_p_k(k, sigma)).collect();
    Ok(compensated_sum(terms?).exp())
}

/// Success-rate ratio between two cube BSIC sizes with edge `d`:
/// `Π_{k=n1+1..n2} P̄_k(d)`.
pub fn success_ratio_bsic(n1: usize, n2: usize, d: u64, sigma: f64) -> Result<f64> {
    check_sizes(n1, n2)?;
    check_sigma(sigma)?;
    let terms: Result<Vec<f64>> = (n1 + 1..=n2).map(|k| log_p_bar_k(k, d, sigma)).collect();
    Ok(compensated_sum(terms?).exp())
}

/// SNR in decibels of a `(u+1)`-ary PAM constellation on `[0, u]` at noise
/// level `sigma`: `10·log₁₀(u(u+2)/(12σ²))`.
pub fn snr_db_from_sigma(u: u64, sigma: f64) -> Result<f64> {
    if u < 1 {
        return Err(Error::Domain("PAM parameter u must be at least 1".into()));
    }
    check_sigma(sigma)?;
    let uf = u as f64;
    Ok(10.0 * (uf * (uf + 2.0) / (12.0 * sigma * sigma)).log10())
}

/// Inverse of [`snr_db_from_sigma`]: `σ = √(u(u+2)/(12·10^(snr/10)))`.
pub fn sigma_from_snr_db(u: u64, snr_db: f64) -> Result<f64> {
    if u < 1 {
        return Err(Error::Domain("PAM parameter u must be at least 1".into()));
    }
    if !snr_db.is_finite() {
        return Err(Error::Domain(format!("SNR must be finite, got {snr_db}")));
    }
    let uf = u as f64;
    Ok((uf * (uf + 2.0) / (12.0 * 10f64.powf(snr_db / 10.0))).sqrt())
}
