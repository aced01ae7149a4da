//! Scalar building blocks for the word error rate formulas.
//!
//! Everything in this module reduces to two ingredients: the normalization
//! constant `C_k = 2Γ((k+1)/2)/(√π Γ(k/2))` and the cosine-power integral
//! `I_k(φ) = ∫₀^φ cos^{k−1}θ dθ`. The scalar success probability of a
//! rounding estimator whose gain is chi-distributed with `k` degrees of
//! freedom is `P_k = C_k · I_k(arctan(1/(2σ)))`, and its box-constrained
//! counterpart for a width-`η` interval is
//! `P̄_k(η) = (C_k/(η+1))·(1/C_k + η · I_k(arctan(1/(2σ))))`,
//! which is algebraically `(1 + η P_k)/(η + 1)`.
//!
//! `I_k` is evaluated by the exact two-step-down reduction from the analytic
//! bases `I_1(φ) = φ` and `I_2(φ) = sin φ`; an independent adaptive-Simpson
//! evaluator is kept as a cross-check oracle. Gamma ratios are computed as
//! log-gamma differences so large `k` cannot overflow.

use crate::error::{Error, Result};
use std::f64::consts::{FRAC_PI_2, LN_2};

/// Controls the adaptive-quadrature cross-check path for `I_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Absolute tolerance on the integral value.
    pub abs_tolerance: f64,
    /// Maximum interval bisection depth before giving up refinement.
    pub max_refinement_depth: u32,
}

impl QuadratureSettings {
    pub fn new(abs_tolerance: f64, max_refinement_depth: u32) -> Result<Self> {
        if !(abs_tolerance > 0.0) {
            return Err(Error::Domain(format!(
                "abs_tolerance must be positive, got {abs_tolerance}"
            )));
        }
        if max_refinement_depth == 0 {
            return Err(Error::Domain(
                "max_refinement_depth must be at least 1".into(),
            ));
        }
        Ok(Self {
            abs_tolerance,
            max_refinement_depth,
        })
    }
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tolerance: 1e-12,
            max_refinement_depth: 60,
        }
    }
}

/// Parameters of the scalar rounding model: gain `r` with `r² ~ χ²_k`,
/// noise std `sigma`, and an optional box width `eta` (`None` means the
/// estimate is an unconstrained rounding, `Some(η)` clamps it to a
/// width-`η` integer interval).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSuccessInputs {
    pub k: usize,
    pub sigma: f64,
    pub eta: Option<u64>,
}

impl ScalarSuccessInputs {
    pub fn new(k: usize, sigma: f64, eta: Option<u64>) -> Result<Self> {
        let inputs = Self { k, sigma, eta };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn validate(&self) -> Result<()> {
        check_k(self.k)?;
        check_sigma(self.sigma)?;
        Ok(())
    }

    /// Closed-form success probability: `P_k` without a box, `P̄_k(η)` with one.
    pub fn success_probability(&self) -> Result<f64> {
        match self.eta {
            None => p_k(self.k, self.sigma),
            Some(eta) => p_bar_k(self.k, eta, self.sigma),
        }
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Domain("degrees of freedom k must be >= 1".into()));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!(
            "noise std sigma must be positive and finite, got {sigma}"
        )));
    }
    Ok(())
}

/// Natural log of the gamma function for positive arguments.
///
/// Lanczos approximation with g = 7 and 9 coefficients; relative accuracy on
/// Γ is a few ulps over the range used here.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];

    debug_assert!(x > 0.0, "ln_gamma expects positive arguments");
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π/sin(πx).
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }

    let z = x - 1.0;
    let mut series = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    let half_ln_two_pi = 0.918_938_533_204_672_7; // ln(2π)/2
    half_ln_two_pi + (z + 0.5) * t.ln() - t + series.ln()
}

/// `ln C_k` where `C_k = 2Γ((k+1)/2)/(√π Γ(k/2))`.
pub fn log_c_k(k: usize) -> Result<f64> {
    check_k(k)?;
    let half_ln_pi = 0.5 * std::f64::consts::PI.ln();
    let kf = k as f64;
    Ok(LN_2 + ln_gamma((kf + 1.0) / 2.0) - half_ln_pi - ln_gamma(kf / 2.0))
}

/// The normalization constant `C_k = 2Γ((k+1)/2)/(√π Γ(k/2))`.
///
/// Evaluated as a log-gamma difference, so `k` in the tens of thousands
/// stays representable.
pub fn c_k(k: usize) -> Result<f64> {
    Ok(log_c_k(k)?.exp())
}

fn check_phi(phi: f64) -> Result<()> {
    if !phi.is_finite() || !(0.0..=FRAC_PI_2).contains(&phi) {
        return Err(Error::Domain(format!(
            "angle phi must lie in [0, pi/2], got {phi}"
        )));
    }
    Ok(())
}

/// `I_k(φ) = ∫₀^φ cos^{k−1}θ dθ` for `φ ∈ [0, π/2]`.
///
/// Walks the reduction
/// `I_k(φ) = cos^{k−2}(φ) sin(φ)/(k−1) + ((k−2)/(k−1)) I_{k−2}(φ)`
/// upward from `I_1(φ) = φ` or `I_2(φ) = sin φ`. At `φ = π/2` exactly the
/// value is `1/C_k` and is returned directly, avoiding `cos^{k−2}(π/2)`
/// subnormal residue in the recurrence.
pub fn cos_power_integral(k: usize, phi: f64) -> Result<f64> {
    check_k(k)?;
    check_phi(phi)?;
    if phi == FRAC_PI_2 {
        return Ok((-log_c_k(k)?).exp());
    }

    let sin = phi.sin();
    let cos = phi.cos();
    let cos_sq = cos * cos;
    let (mut j, mut value, mut cos_pow) = if k % 2 == 1 {
        (1usize, phi, cos)
    } else {
        (2usize, sin, cos_sq)
    };
    while j + 2 <= k {
        j += 2;
        // cos_pow holds cos^{j−2}(φ) at this point.
        value = cos_pow * sin / (j - 1) as f64 + ((j - 2) as f64 / (j - 1) as f64) * value;
        cos_pow *= cos_sq;
    }
    Ok(value)
}

/// Adaptive-Simpson evaluation of `I_k(φ)`; the independent cross-check
/// path for [`cos_power_integral`].
pub fn cos_power_integral_quadrature(
    k: usize,
    phi: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    check_k(k)?;
    check_phi(phi)?;
    QuadratureSettings::new(settings.abs_tolerance, settings.max_refinement_depth)?;
    if phi == 0.0 {
        return Ok(0.0);
    }

    let power = (k - 1) as i32;
    let f = |theta: f64| theta.cos().powi(power);
    let fa = f(0.0);
    let fm = f(phi / 2.0);
    let fb = f(phi);
    let whole = simpson(0.0, phi, fa, fm, fb);
    Ok(adaptive_simpson(
        &f,
        0.0,
        phi,
        fa,
        fm,
        fb,
        whole,
        settings.abs_tolerance,
        settings.max_refinement_depth,
    ))
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

fn phi_from_sigma(sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok((1.0 / (2.0 * sigma)).atan())
}

/// Scalar success probability `P_k = C_k · I_k(arctan(1/(2σ)))`.
pub fn p_k(k: usize, sigma: f64) -> Result<f64> {
    let phi = phi_from_sigma(sigma)?;
    Ok(c_k(k)? * cos_power_integral(k, phi)?)
}

/// `ln P_k`, for assembling long products without underflow.
pub fn log_p_k(k: usize, sigma: f64) -> Result<f64> {
    let phi = phi_from_sigma(sigma)?;
    Ok(log_c_k(k)? + cos_power_integral(k, phi)?.ln())
}

/// Box-constrained scalar success probability
/// `P̄_k(η) = (C_k/(η+1))·(1/C_k + η · I_k(arctan(1/(2σ))))`.
///
/// A width-0 box pins the estimate to a single point, so the probability is
/// exactly one.
pub fn p_bar_k(k: usize, eta: u64, sigma: f64) -> Result<f64> {
    check_k(k)?;
    check_sigma(sigma)?;
    if eta == 0 {
        return Ok(1.0);
    }
    let ck = c_k(k)?;
    let ik = cos_power_integral(k, phi_from_sigma(sigma)?)?;
    Ok(ck / (eta + 1) as f64 * (1.0 / ck + eta as f64 * ik))
}

/// `ln P̄_k(η)`; exactly zero for a width-0 box.
pub fn log_p_bar_k(k: usize, eta: u64, sigma: f64) -> Result<f64> {
    if eta == 0 {
        check_k(k)?;
        check_sigma(sigma)?;
        return Ok(0.0);
    }
    Ok(p_bar_k(k, eta, sigma)?.ln())
}
