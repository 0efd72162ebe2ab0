//! Scalar numerics shared by every other module: modified Bessel functions,
//! adaptive quadrature, finite differences and Kolmogorov-Smirnov tests.

mod bessel;
mod diff;
mod ks;
mod quad;

pub use bessel::{bessel_i, log_bessel_i, log_bessel_i_ratio, log_bessel_i_reduced, SERIES_CUTOFF};
pub use diff::{central_derivative, central_second_derivative, fd_step, homogeneity_residual};
pub use ks::{
    kolmogorov_survival, ks_one_sample, ks_one_sample_density, ks_two_sample, EmpiricalSample,
    KsResult,
};
pub use quad::{integrate_1d, Quadrature, Tolerance};

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `Γ(x)`.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Relative deviation `|a - b| / max(|a|, |b|, 1e-300)`.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Relative deviation between two positive quantities given by their logs.
///
/// Equals `|q1 - q2| / max(q1, q2)` without leaving the log domain.
pub fn rel_diff_log(l1: f64, l2: f64) -> f64 {
    if l1 == l2 {
        return 0.0;
    }
    if !l1.is_finite() || !l2.is_finite() {
        return if l1 == l2 { 0.0 } else { 1.0 };
    }
    -(-(l1 - l2).abs()).exp_m1()
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}
