//! Modified Bessel function of the first kind, `I_ν(x)`, for real order
//! `ν > -1` and `x ≥ 0`.
//!
//! For `x ≤ 30` the ascending power series is summed directly (all terms are
//! positive so there is no cancellation). Above the cutoff the Hankel
//! asymptotic expansion of `e^{-x} I_ν(x)` is used while `ν²` is small
//! relative to `x`; otherwise the series is summed again with running
//! rescaling so that nothing overflows. Everything is computed in the log
//! domain and exponentiated only by [`bessel_i`].

use super::ln_gamma;
use crate::error::{Error, Result};

/// Largest argument evaluated by the plain power series.
pub const SERIES_CUTOFF: f64 = 30.0;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

fn check_args(nu: f64, x: f64) -> Result<()> {
    if !(nu > -1.0) || !nu.is_finite() {
        return Err(Error::domain(format!("Bessel order must exceed -1, got {nu}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "Bessel argument must be finite and nonnegative, got {x}"
        )));
    }
    Ok(())
}

/// `ln I_ν(x)`.
///
/// Returns `-∞` at `x = 0` for `ν > 0` and `+∞` at `x = 0` for `ν < 0`.
pub fn log_bessel_i(nu: f64, x: f64) -> Result<f64> {
    check_args(nu, x)?;
    if x == 0.0 {
        return Ok(if nu == 0.0 {
            0.0
        } else if nu > 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        });
    }
    if x <= SERIES_CUTOFF || nu * nu > 0.2 * x {
        Ok(log_series(nu, x))
    } else {
        Ok(log_hankel(nu, x))
    }
}

/// `ln(x^{-ν} I_ν(x))`, finite at `x = 0` where it equals `-ν ln 2 - ln Γ(ν+1)`.
pub fn log_bessel_i_reduced(nu: f64, x: f64) -> Result<f64> {
    check_args(nu, x)?;
    if x <= SERIES_CUTOFF || nu * nu > 0.2 * x {
        Ok(log_series_reduced(nu, x))
    } else {
        Ok(log_hankel(nu, x) - nu * x.ln())
    }
}

/// `I_ν(x)`; signals overflow as a numeric failure.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    let l = log_bessel_i(nu, x)?;
    if l > 709.0 {
        return Err(Error::numeric(format!(
            "I_{nu}({x}) overflows double precision; use log_bessel_i"
        )));
    }
    Ok(l.exp())
}

/// `ln(I_μ(x) / I_ν(x))`, with the `x → 0` limit handled.
pub fn log_bessel_i_ratio(mu: f64, nu: f64, x: f64) -> Result<f64> {
    check_args(mu, x)?;
    check_args(nu, x)?;
    if mu == nu {
        return Ok(0.0);
    }
    if x == 0.0 {
        return Ok(if mu > nu { f64::NEG_INFINITY } else { f64::INFINITY });
    }
    Ok(log_bessel_i(mu, x)? - log_bessel_i(nu, x)?)
}

/// Series `Σ_k (x/2)^{2k+ν} / (k! Γ(k+ν+1))` in log form.
fn log_series(nu: f64, x: f64) -> f64 {
    nu * x.ln() + log_series_reduced(nu, x)
}

fn log_series_reduced(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    // running rescale offset, only needed far above the cutoff
    let mut offset = 0.0f64;
    let peak = 0.5 * x;
    let mut k = 1.0f64;
    loop {
        term *= q / (k * (k + nu));
        sum += term;
        if sum > 1e280 {
            sum *= 1e-280;
            term *= 1e-280;
            offset += 280.0 * std::f64::consts::LN_10;
        }
        if k > peak && term < 1e-17 * sum {
            break;
        }
        k += 1.0;
        if k > 1e7 {
            break;
        }
    }
    -nu * std::f64::consts::LN_2 - ln_gamma(nu + 1.0) + sum.ln() + offset
}

/// Hankel expansion `I_ν(x) ~ e^x / √(2πx) · Σ (-1)^k a_k(ν) / x^k`.
fn log_hankel(nu: f64, x: f64) -> f64 {
    let mu4 = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut prev_abs = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu4 - odd * odd) / (8.0 * kf * x);
        let a = next.abs();
        if a > prev_abs {
            break;
        }
        term = next;
        sum += term;
        prev_abs = a;
        if a < 1e-17 * sum.abs() {
            break;
        }
    }
    x - 0.5 * (LN_2PI + x.ln()) + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn half_order_closed(x: f64) -> f64 {
        (2.0 / (PI * x)).sqrt() * x.sinh()
    }

    #[test]
    fn trivial_values() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn half_order_matches_closed_form() {
        let got = bessel_i(0.5, 1.0).unwrap();
        let want = (2.0 / PI).sqrt() * 1.0f64.sinh();
        assert!((got - want).abs() / want < 1e-13, "{got} vs {want}");
        for &x in &[0.01, 0.3, 2.0, 7.5, 15.0, 29.9] {
            let got = bessel_i(0.5, x).unwrap();
            let want = half_order_closed(x);
            assert!((got - want).abs() / want < 1e-12, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn log_domain_large_arguments() {
        // ln I_{1/2}(x) = ½ ln(2/(πx)) + x + ln((1 - e^{-2x})/2)
        for &x in &[30.5, 50.0, 200.0, 701.0, 5000.0] {
            let want = 0.5 * (2.0 / (PI * x)).ln() + x + (0.5 * (-(-2.0 * x).exp_m1())).ln();
            let got = log_bessel_i(0.5, x).unwrap();
            assert!((got - want).abs() / want.abs() < 1e-12, "x={x}: {got} vs {want}");
        }
        // I_{3/2}(x) = √(2/(πx)) (cosh x - sinh x / x)
        for &x in &[31.0, 80.0, 800.0] {
            let want = 0.5 * (2.0 / (PI * x)).ln()
                + x
                + (0.5 * (1.0 + (-2.0 * x).exp()) - 0.5 * (1.0 - (-2.0 * x).exp()) / x).ln();
            let got = log_bessel_i(1.5, x).unwrap();
            assert!((got - want).abs() / want.abs() < 1e-12, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn overflow_only_in_linear_variant() {
        assert!(bessel_i(0.0, 800.0).is_err());
        assert!(log_bessel_i(0.0, 800.0).unwrap().is_finite());
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(bessel_i(-1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_i(-2.5, 1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_i(0.5, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn branch_switch_is_continuous() {
        for &nu in &[0.0, 0.5, 1.0, 2.5] {
            let below = log_series(nu, 30.0);
            let above = log_hankel(nu, 30.0);
            assert!((below - above).abs() < 1e-12, "nu={nu}: {below} vs {above}");
            let below = log_series(nu, 45.0);
            let above = log_hankel(nu, 45.0);
            assert!((below - above).abs() < 1e-12, "nu={nu}: {below} vs {above}");
        }
    }

    #[test]
    fn log_and_linear_agree() {
        for &nu in &[-0.5, 0.0, 0.5, 1.3, 4.0] {
            for &x in &[0.05, 1.0, 10.0, 29.0, 35.0, 120.0, 600.0] {
                let l = log_bessel_i(nu, x).unwrap();
                let v = bessel_i(nu, x).unwrap();
                assert!((l - v.ln()).abs() < 1e-10, "nu={nu} x={x}");
            }
        }
    }

    #[test]
    fn recurrence_residual() {
        let mut nu = 0.5;
        while nu <= 5.0 {
            for &x in &[0.1, 0.7, 3.0, 12.0, 29.0, 31.0, 40.0, 50.0] {
                let lo = bessel_i(nu - 1.0, x).unwrap();
                let mid = bessel_i(nu, x).unwrap();
                let hi = bessel_i(nu + 1.0, x).unwrap();
                let r = (lo - hi - 2.0 * nu / x * mid).abs() / lo;
                assert!(r <= 1e-9, "nu={nu} x={x} r={r}");
            }
            nu += 0.25;
        }
    }

    #[test]
    fn reduced_kernel() {
        let at_zero = log_bessel_i_reduced(0.5, 0.0).unwrap();
        let want = -0.5 * std::f64::consts::LN_2 - ln_gamma(1.5);
        assert!((at_zero - want).abs() < 1e-15);
        for &x in &[1e-9, 0.3, 12.0, 40.0, 300.0] {
            let a = log_bessel_i_reduced(1.3, x).unwrap();
            let b = log_bessel_i(1.3, x).unwrap() - 1.3 * x.ln();
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "x={x}");
        }
    }

    #[test]
    fn ratio_limit_at_zero() {
        assert_eq!(log_bessel_i_ratio(1.5, 0.5, 0.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(log_bessel_i_ratio(0.5, 0.5, 3.0).unwrap(), 0.0);
    }
}
