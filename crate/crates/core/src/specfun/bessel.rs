//! Modified Bessel functions of the first kind, integer orders 0..=2.
//!
//! Below [`SWITCH_X`] the ascending series is summed directly; every term is
//! positive, so the sum is accurate to a few ulps. Above it the Hankel
//! asymptotic expansion is used in exponentially scaled form.

use super::{SpecFunError, SpecialFunctionResult, OVERFLOW_X, SWITCH_X};

const MAX_SERIES_TERMS: usize = 500;
const MAX_ASYMPTOTIC_TERMS: usize = 60;

fn check_order(order: u32) -> Result<(), SpecFunError> {
    if order > 2 {
        return Err(SpecFunError::UnsupportedOrder {
            function: "bessel_i",
            order,
        });
    }
    Ok(())
}

/// `I_order(x)` for `0 <= x <= 700`.
pub fn bessel_i(order: u32, x: f64) -> Result<f64, SpecFunError> {
    bessel_i_with_error(order, x).map(|r| r.value)
}

/// `I_order(x)` together with an estimate of its absolute error.
pub fn bessel_i_with_error(order: u32, x: f64) -> Result<SpecialFunctionResult, SpecFunError> {
    check_order(order)?;
    if !(x >= 0.0) || x > OVERFLOW_X {
        return Err(SpecFunError::domain("bessel_i", x, "requires 0 <= x <= 700"));
    }
    if x <= SWITCH_X {
        Ok(series(order, x))
    } else {
        let scaled = asymptotic_scaled(order, x);
        let e = x.exp();
        Ok(SpecialFunctionResult {
            value: scaled.value * e,
            estimated_abs_error: scaled.estimated_abs_error * e,
        })
    }
}

/// `exp(-x) I_order(x)`, valid for every finite `x >= 0`.
pub fn bessel_i_scaled(order: u32, x: f64) -> Result<f64, SpecFunError> {
    check_order(order)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(SpecFunError::domain("bessel_i_scaled", x, "requires finite x >= 0"));
    }
    if x <= SWITCH_X {
        Ok(series(order, x).value * (-x).exp())
    } else {
        Ok(asymptotic_scaled(order, x).value)
    }
}

/// `I_a(x) / I_b(y)` without forming either factor; safe for large arguments.
pub fn bessel_i_ratio(a: u32, x: f64, b: u32, y: f64) -> Result<f64, SpecFunError> {
    let num = bessel_i_scaled(a, x)?;
    let den = bessel_i_scaled(b, y)?;
    if den == 0.0 {
        return Err(SpecFunError::domain("bessel_i_ratio", y, "denominator vanishes"));
    }
    Ok(num / den * (x - y).exp())
}

fn series(order: u32, x: f64) -> SpecialFunctionResult {
    let half = 0.5 * x;
    let q = half * half;
    let nu = order as f64;
    // (x/2)^nu / nu!
    let mut term = match order {
        0 => 1.0,
        1 => half,
        _ => 0.5 * q,
    };
    let mut sum = term;
    let mut k = 0usize;
    while k < MAX_SERIES_TERMS {
        let kf = k as f64;
        term *= q / ((kf + 1.0) * (kf + nu + 1.0));
        sum += term;
        k += 1;
        if term <= f64::EPSILON * 0.25 * sum {
            break;
        }
    }
    SpecialFunctionResult {
        value: sum,
        estimated_abs_error: term + f64::EPSILON * sum,
    }
}

/// Scaled Hankel expansion `e^{-x} I_nu(x) ~ (2 pi x)^{-1/2} sum (-1)^k a_k(nu) / x^k`.
fn asymptotic_scaled(order: u32, x: f64) -> SpecialFunctionResult {
    let mu = 4.0 * (order as f64).powi(2);
    let prefactor = 1.0 / (2.0 * std::f64::consts::PI * x).sqrt();
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut omitted = 0.0;
    for k in 1..=MAX_ASYMPTOTIC_TERMS {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            // divergence sets in; the previous term bounds the error
            omitted = term.abs();
            break;
        }
        term = next;
        sum += term;
        omitted = term.abs();
        if term.abs() <= f64::EPSILON * 0.25 * sum.abs() {
            break;
        }
    }
    SpecialFunctionResult {
        value: prefactor * sum,
        estimated_abs_error: prefactor * (omitted + f64::EPSILON * sum.abs()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_values() {
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_i(2, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(bessel_i(0, -1.0).is_err());
        assert!(bessel_i(0, 701.0).is_err());
        assert!(bessel_i(0, f64::NAN).is_err());
        assert!(bessel_i(3, 1.0).is_err());
        assert!(bessel_i_scaled(1, 1e6).is_ok());
    }

    #[test]
    fn series_and_asymptotic_agree_at_switch() {
        for order in 0..=2 {
            let s = series(order, SWITCH_X).value * (-SWITCH_X).exp();
            let a = asymptotic_scaled(order, SWITCH_X).value;
            assert!((s - a).abs() < 2e-15 * a, "order {order}: {s} vs {a}");
        }
    }

    #[test]
    fn ratio_is_finite_for_huge_arguments() {
        let r = bessel_i_ratio(2, 1e6, 1, 1e6).unwrap();
        // I2/I1 -> 1 - 3/(2x) for large x
        assert!((r - (1.0 - 1.5e-6)).abs() < 1e-11);
    }

    #[test]
    fn error_estimate_is_small() {
        for &x in &[0.5, 5.0, 29.0, 31.0, 200.0] {
            for order in 0..=2 {
                let r = bessel_i_with_error(order, x).unwrap();
                assert!(r.estimated_abs_error < 1e-12 * r.value.abs().max(1.0));
            }
        }
    }
}
