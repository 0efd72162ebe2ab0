//! Special functions of a symmetric matrix argument: generalized gamma and
//! Pochhammer symbols, hypergeometric series `ₚF_q` built on zonal
//! polynomials, and the matrix Bessel function `Ĩ_ν`.

mod zonal;

pub use zonal::{partitions, shared_table, zonal, Partition, ZonalTable, MAX_DEGREE};

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{ln_gamma, log_bessel_i_reduced};
use crate::symmat::SymMatrix;

/// Default series truncation degree.
pub const DEFAULT_K_MAX: usize = 30;

/// Rising factorial `(a)_j = a (a+1) ⋯ (a+j-1)`.
fn rising(a: f64, j: usize) -> f64 {
    (0..j).map(|r| a + r as f64).product()
}

/// `(a)_κ = Π_i (a - (i-1)/2)_{k_i}`.
pub fn gen_pochhammer(a: f64, kappa: &Partition) -> f64 {
    kappa
        .parts()
        .iter()
        .enumerate()
        .map(|(i, &k)| rising(a - 0.5 * i as f64, k))
        .product()
}

/// `ln Γ_m(α)`.
pub fn ln_gamma_m(m: usize, alpha: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("matrix side must be at least 1"));
    }
    let bound = 0.5 * (m as f64 - 1.0);
    if !(alpha > bound) || !alpha.is_finite() {
        return Err(Error::domain(format!(
            "multivariate gamma Γ_{m}(α) needs α > {bound}, got {alpha}"
        )));
    }
    let mf = m as f64;
    Ok(0.25 * mf * (mf - 1.0) * PI.ln() + (0..m).map(|i| ln_gamma(alpha - 0.5 * i as f64)).sum::<f64>())
}

/// `Γ_m(α) = π^{m(m-1)/4} Π_i Γ(α - (i-1)/2)`.
pub fn gamma_m(m: usize, alpha: f64) -> Result<f64> {
    ln_gamma_m(m, alpha).map(f64::exp)
}

/// A truncated matrix-argument series together with its truncation diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperSeries {
    pub value: f64,
    /// Magnitude of the final degree's contribution.
    pub last_term: f64,
    /// Degree at which summation stopped.
    pub degree: usize,
    /// Set when the final contributions were not decreasing.
    pub tail_increasing: bool,
}

impl HyperSeries {
    pub fn converged(&self, rel: f64) -> bool {
        !self.tail_increasing && self.last_term <= rel * self.value.abs()
    }
}

fn check_denominator(b: f64, m: usize) -> Result<()> {
    for i in 0..m {
        let shifted = b - 0.5 * i as f64;
        if shifted <= 0.0 && shifted == shifted.round() {
            return Err(Error::domain(format!(
                "denominator parameter {b} makes a generalized Pochhammer symbol vanish"
            )));
        }
    }
    Ok(())
}

enum Stop {
    AtDegree(usize),
    /// Stop after the peak once a degree contributes below `rel` of the sum.
    Negligible { rel: f64, cap: usize },
}

fn sum_series(a: &[f64], b: &[f64], x: &SymMatrix, stop: Stop) -> Result<HyperSeries> {
    let m = x.dim();
    for &bj in b {
        check_denominator(bj, m)?;
    }
    let cap = match stop {
        Stop::AtDegree(k) | Stop::Negligible { cap: k, .. } => k,
    };
    let eig = x.eigenvalues()?;
    let table = shared_table(m, cap)?;
    let mut value = 0.0;
    let mut prev = f64::INFINITY;
    let mut last = 0.0;
    let mut increasing = false;
    let mut factorial = 1.0;
    let mut degree = 0;
    for k in 0..=cap {
        if k > 0 {
            factorial *= k as f64;
        }
        let parts = table.partitions(k)?;
        let zonals = table.zonal_all(k, &eig)?;
        let mut term = 0.0;
        for (kappa, c) in parts.iter().zip(zonals) {
            let num: f64 = a.iter().map(|&ai| gen_pochhammer(ai, kappa)).product();
            let den: f64 = b.iter().map(|&bj| gen_pochhammer(bj, kappa)).product();
            term += num / den * c;
        }
        term /= factorial;
        value += term;
        increasing = term.abs() > prev && term != 0.0;
        prev = term.abs();
        last = term.abs();
        degree = k;
        if let Stop::Negligible { rel, .. } = stop {
            if k > 0 && !increasing && last <= rel * value.abs() {
                break;
            }
        }
    }
    if !value.is_finite() {
        return Err(Error::numeric("matrix hypergeometric series overflowed"));
    }
    Ok(HyperSeries { value, last_term: last, degree, tail_increasing: increasing })
}

/// `ₚF_q(a; b; X) = Σ_k Σ_{κ⊢k} (a_1)_κ⋯(a_p)_κ / ((b_1)_κ⋯(b_q)_κ) · C_κ(X)/k!`,
/// truncated after degree `k_max`.
pub fn hyper_pfq(a: &[f64], b: &[f64], x: &SymMatrix, k_max: usize) -> Result<HyperSeries> {
    sum_series(a, b, x, Stop::AtDegree(k_max))
}

/// `₀F₁(b; X)` truncated after degree `k_max`.
pub fn hyper_0f1(b: f64, x: &SymMatrix, k_max: usize) -> Result<HyperSeries> {
    sum_series(&[], &[b], x, Stop::AtDegree(k_max))
}

/// Largest degree summed by the adaptive evaluators for side `m`.
pub fn adaptive_cap(m: usize) -> usize {
    match m {
        1 | 2 => MAX_DEGREE,
        3 => DEFAULT_K_MAX,
        _ => 20,
    }
}

/// `₀F₁(b; X)` summed until a degree past the peak contributes less than
/// `1e-16` of the total, up to [`adaptive_cap`]. Fails when the series has
/// not settled by then.
pub fn hyper_0f1_adaptive(b: f64, x: &SymMatrix) -> Result<HyperSeries> {
    let s = sum_series(&[], &[b], x, Stop::Negligible { rel: 1e-16, cap: adaptive_cap(x.dim()) })?;
    if !s.converged(1e-12) {
        return Err(Error::NoConvergence { value: s.value, error: s.last_term });
    }
    Ok(s)
}

/// `ln ₀F₁(b; X)`. For `m = 1` and `b > 0` this goes through the scalar
/// identity `₀F₁(b; z) = Γ(b) (√z)^{1-b} I_{b-1}(2√z)`, which has no
/// truncation limit; otherwise it is [`hyper_0f1_adaptive`].
pub fn log_hyper_0f1(b: f64, x: &SymMatrix) -> Result<f64> {
    if x.dim() == 1 && b > 0.0 {
        let z = x.get(0, 0);
        if z < 0.0 {
            return Err(Error::domain("scalar 0F1 argument must be nonnegative here"));
        }
        let nu = b - 1.0;
        return Ok(ln_gamma(b) + nu * LN_2 + log_bessel_i_reduced(nu, 2.0 * z.sqrt())?);
    }
    Ok(hyper_0f1_adaptive(b, x)?.value.ln())
}

fn check_bessel_args(nu: f64, x: &SymMatrix) -> Result<Vec<f64>> {
    if !(nu > -1.0) {
        return Err(Error::domain(format!("matrix Bessel order must exceed -1, got {nu}")));
    }
    let eig = x.eigenvalues()?;
    let band = 1e-10 * x.frobenius();
    if eig.iter().any(|&l| l < -band) {
        return Err(Error::domain("matrix Bessel argument must be positive semidefinite"));
    }
    Ok(eig)
}

fn log_bessel_from(nu: f64, eig: &[f64], series: f64) -> Result<f64> {
    let m = eig.len();
    let b = nu + 0.5 * (m as f64 + 1.0);
    let log_det: f64 = eig.iter().map(|&l| l.max(0.0).ln()).sum();
    let det_part = if nu == 0.0 { 0.0 } else { 0.5 * nu * log_det };
    Ok(det_part - ln_gamma_m(m, b)? + series.ln())
}

/// `Ĩ_ν(X) = det(X)^{ν/2} / Γ_m(ν + (m+1)/2) · ₀F₁(ν + (m+1)/2; X)` with the
/// series truncated after degree `k_max`.
pub fn bessel_matrix(nu: f64, x: &SymMatrix, k_max: usize) -> Result<f64> {
    let eig = check_bessel_args(nu, x)?;
    let s = hyper_0f1(nu + 0.5 * (x.dim() as f64 + 1.0), x, k_max)?;
    log_bessel_from(nu, &eig, s.value).map(f64::exp)
}

/// `ln Ĩ_ν(X)` with adaptive truncation.
pub fn log_bessel_matrix(nu: f64, x: &SymMatrix) -> Result<f64> {
    let eig = check_bessel_args(nu, x)?;
    let b = nu + 0.5 * (x.dim() as f64 + 1.0);
    let log_det: f64 = eig.iter().map(|&l| l.max(0.0).ln()).sum();
    let det_part = if nu == 0.0 { 0.0 } else { 0.5 * nu * log_det };
    Ok(det_part - ln_gamma_m(x.dim(), b)? + log_hyper_0f1(b, x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::bessel_i;
    use proptest::prelude::*;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(gen_pochhammer(2.7, &Partition::empty()), 1.0);
        assert_eq!(gen_pochhammer(2.7, &p(&[1])), 2.7);
        assert!((gen_pochhammer(2.7, &p(&[1, 1])) - 2.7 * 2.2).abs() < 1e-14);
        // (a)_{(2,1)} = a (a+1) (a - 1/2)
        assert!((gen_pochhammer(1.5, &p(&[2, 1])) - 1.5 * 2.5 * 1.0).abs() < 1e-14);
    }

    #[test]
    fn multivariate_gamma() {
        for &a in &[0.3, 1.0, 2.5, 7.2] {
            let g = gamma_m(1, a).unwrap();
            assert!((g - ln_gamma(a).exp()).abs() <= 1e-14 * g);
        }
        assert!((gamma_m(2, 1.5).unwrap() - PI / 2.0).abs() < 1e-14);
        assert!(matches!(gamma_m(2, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn scalar_fast_path_agrees_with_series() {
        for &(b, z) in &[(0.7, 0.0), (1.5, 0.3), (2.0, 4.0), (3.25, 30.0)] {
            let x = SymMatrix::diag(&[z]);
            let series = hyper_0f1_adaptive(b, &x).unwrap().value.ln();
            assert!((log_hyper_0f1(b, &x).unwrap() - series).abs() < 1e-13, "b={b} z={z}");
        }
        assert!(log_hyper_0f1(1.5, &SymMatrix::diag(&[1e6])).unwrap().is_finite());
    }

    #[test]
    fn zero_argument() {
        let s = hyper_0f1(1.7, &SymMatrix::zeros(3), 10).unwrap();
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn scalar_series() {
        let (b, x) = (1.5, 0.25);
        let mut want = 0.0;
        let mut term = 1.0;
        for k in 0..40 {
            want += term;
            term *= x / ((b + k as f64) * (k as f64 + 1.0));
        }
        let got = hyper_0f1(b, &SymMatrix::diag(&[x]), 30).unwrap();
        assert!((got.value - want).abs() <= 1e-15 * want);
    }

    #[test]
    fn excluded_denominators() {
        let x = SymMatrix::identity(3);
        for &b in &[0.0, 0.5, 1.0, -1.0] {
            assert!(matches!(hyper_0f1(b, &x, 5), Err(Error::Domain(_))), "b={b}");
        }
        assert!(hyper_0f1(1.5, &x, 5).is_ok());
    }

    #[test]
    fn two_truncation_levels() {
        let x = SymMatrix::diag(&[0.1, 0.1]);
        let short = hyper_0f1(2.0, &x, 10).unwrap();
        let reference = hyper_0f1(2.0, &x, 40).unwrap();
        assert!((short.value - reference.value).abs() <= short.last_term);
        assert!(!short.tail_increasing);
    }

    #[test]
    fn truncation_diagnostic_dominates_tail() {
        let x = SymMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        for k_max in [12, 20, 30] {
            let a = hyper_0f1(1.8, &x, k_max).unwrap();
            let b = hyper_0f1(1.8, &x, k_max + 10).unwrap();
            assert!((a.value - b.value).abs() <= a.last_term, "k_max={k_max}");
        }
    }

    #[test]
    fn growing_tail_is_flagged() {
        let s = hyper_0f1(1.5, &SymMatrix::diag(&[200.0]), 5).unwrap();
        assert!(s.tail_increasing);
        assert!(!s.converged(1e-10));
    }

    #[test]
    fn scalar_bessel_reduction() {
        for &nu in &[0.5, 1.0, 2.5] {
            for &x in &[0.01, 0.5, 1.0, 3.7, 10.0] {
                let got = bessel_matrix(nu, &SymMatrix::diag(&[x]), 60).unwrap();
                let want = bessel_i(nu, 2.0 * x.sqrt()).unwrap();
                assert!((got - want).abs() <= 1e-10 * want, "nu={nu} x={x}: {got} vs {want}");
                let l = log_bessel_matrix(nu, &SymMatrix::diag(&[x])).unwrap();
                assert!((l - want.ln()).abs() <= 1e-10 * want.ln().abs().max(1.0));
            }
        }
    }

    #[test]
    fn small_argument_limit() {
        let nu = 0.8;
        for m in 1..=3 {
            let x = SymMatrix::identity(m).scale(1e-8);
            let det = x.det();
            let got = bessel_matrix(nu, &x, 10).unwrap() / det.powf(0.5 * nu);
            let want = 1.0 / gamma_m(m, nu + 0.5 * (m as f64 + 1.0)).unwrap();
            assert!((got - want).abs() <= 1e-6 * want);
        }
    }

    #[test]
    fn indefinite_argument_rejected() {
        assert!(bessel_matrix(0.5, &SymMatrix::diag(&[1.0, -1.0]), 10).is_err());
    }

    fn pd2() -> impl Strategy<Value = SymMatrix> {
        (0.2f64..2.0, 0.2f64..2.0, -1.0f64..1.0).prop_map(|(a, b, r)| {
            let c = r * (a * b).sqrt() * 0.9;
            SymMatrix::from_rows(&[vec![a, c], vec![c, b]]).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn conjugation_symmetry(x in pd2(), y in pd2(), nu in 0.0f64..2.0) {
            let xy = x.sqrt_pd().unwrap().conjugate(&y);
            let yx = y.sqrt_pd().unwrap().conjugate(&x);
            let a = bessel_matrix(nu, &xy, 30).unwrap();
            let b = bessel_matrix(nu, &yx, 30).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * a);
        }
    }
}
