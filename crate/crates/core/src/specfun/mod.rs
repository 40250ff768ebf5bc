//! Special functions needed by the closed-form optimal solutions: modified
//! Bessel `I_0..I_2`, modified Struve `L_0, L_1` (and `M_0, M_1`), the
//! hypergeometric `2F3(1, 2; 3/2, 5/2, 3; z)`, and the derived quantities
//! `upsilon(kappa) = I_1 L_0 - I_0 L_1` and `d_0(kappa)`.
//!
//! All functions are pure. Plain evaluations refuse arguments whose result
//! would overflow; the `*_scaled`, `*_ratio` and `*_over_i0` variants stay
//! finite for arbitrarily large arguments.

mod bessel;
mod hypergeometric;
pub mod quadrature;
mod struve;

use std::f64::consts::PI;

use thiserror::Error;

pub use bessel::{bessel_i, bessel_i_ratio, bessel_i_scaled, bessel_i_with_error};
pub use hypergeometric::{hyp2f3_special, hyp2f3_special_capped, DEFAULT_TERM_CAP, HYP2F3_MAX_Z};
pub use struve::{struve_l, struve_l_with_error, struve_m, struve_m0_integral, struve_m_with_error, M_SWITCH_X};

/// Series / asymptotic switchover for `I_nu` and `L_nu`.
pub const SWITCH_X: f64 = 30.0;

/// Largest argument accepted by the unscaled evaluations.
pub const OVERFLOW_X: f64 = 700.0;

/// Below this `upsilon` is formed from the ascending series directly.
const UPSILON_SERIES_MAX: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("{function}: argument {x} outside domain ({reason})")]
    Domain {
        function: &'static str,
        x: f64,
        reason: &'static str,
    },
    #[error("{function}: order {order} not supported")]
    UnsupportedOrder { function: &'static str, order: u32 },
    #[error("{function}: no convergence after {terms} terms")]
    Convergence { function: &'static str, terms: usize },
}

impl SpecFunError {
    pub(crate) fn domain(function: &'static str, x: f64, reason: &'static str) -> Self {
        Self::Domain { function, x, reason }
    }
}

/// A function value with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialFunctionResult {
    pub value: f64,
    pub estimated_abs_error: f64,
}

/// `Gamma(k + 1/2)`, built up from `Gamma(1/2) = sqrt(pi)`.
pub fn gamma_half_integer(k: u32) -> f64 {
    (0..k).fold(PI.sqrt(), |g, j| g * (j as f64 + 0.5))
}

fn check_kappa(function: &'static str, kappa: f64) -> Result<(), SpecFunError> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(SpecFunError::domain(function, kappa, "requires finite kappa > 0"));
    }
    Ok(())
}

/// `upsilon(kappa) = I_1(kappa) L_0(kappa) - I_0(kappa) L_1(kappa)` for `0 < kappa <= 700`.
///
/// Past small arguments this is evaluated as `I_1 M_0 - I_0 M_1`.
pub fn upsilon(kappa: f64) -> Result<f64, SpecFunError> {
    check_kappa("upsilon", kappa)?;
    if kappa > OVERFLOW_X {
        return Err(SpecFunError::domain(
            "upsilon",
            kappa,
            "result overflows; use upsilon_over_i0",
        ));
    }
    if kappa <= UPSILON_SERIES_MAX {
        let i0 = bessel_i(0, kappa)?;
        let i1 = bessel_i(1, kappa)?;
        return Ok(i1 * struve_l(0, kappa)? - i0 * struve_l(1, kappa)?);
    }
    Ok(bessel_i(1, kappa)? * struve_m(0, kappa)? - bessel_i(0, kappa)? * struve_m(1, kappa)?)
}

/// `upsilon(kappa) / I_0(kappa)` for any finite `kappa > 0`.
pub fn upsilon_over_i0(kappa: f64) -> Result<f64, SpecFunError> {
    check_kappa("upsilon_over_i0", kappa)?;
    if kappa <= UPSILON_SERIES_MAX {
        return Ok(upsilon(kappa)? / bessel_i(0, kappa)?);
    }
    let ratio = bessel_i_ratio(1, kappa, 0, kappa)?;
    Ok(ratio * struve_m(0, kappa)? - struve_m(1, kappa)?)
}

/// `int_0^kappa I_0(s) ds / I_0(kappa) = kappa - (pi kappa / 2) upsilon(kappa) / I_0(kappa)`.
pub fn bessel_i0_integral_ratio(kappa: f64) -> Result<f64, SpecFunError> {
    Ok(kappa - 0.5 * PI * kappa * upsilon_over_i0(kappa)?)
}

/// `d_0(kappa) = [3 pi upsilon + 2 kappa^2 I_0 - 6 kappa I_1] / (3 kappa^2 I_2)`,
/// evaluated with every Bessel factor divided by `I_0(kappa)`.
pub fn d_zero(kappa: f64) -> Result<f64, SpecFunError> {
    check_kappa("d_zero", kappa)?;
    let k2 = kappa * kappa;
    let i1 = bessel_i_ratio(1, kappa, 0, kappa)?;
    let i2 = bessel_i_ratio(2, kappa, 0, kappa)?;
    let ups = upsilon_over_i0(kappa)?;
    Ok((3.0 * PI * ups + 2.0 * k2 - 6.0 * kappa * i1) / (3.0 * k2 * i2))
}
