//! One- and two-sample Kolmogorov-Smirnov tests with asymptotic p-values.

use std::f64::consts::PI;

use serde::Serialize;

use super::quad::{integrate_1d, Tolerance};
use crate::error::{Error, Result};

/// A sorted sample, optionally weighted (weights normalised to sum to one).
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("empirical sample must be nonempty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("empirical sample contains non-finite values"));
        }
        values.sort_by(f64::total_cmp);
        Ok(EmpiricalSample { values, weights: None })
    }

    pub fn weighted(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::domain("values and weights differ in length"));
        }
        if values.is_empty() {
            return Err(Error::domain("empirical sample must be nonempty"));
        }
        if values.iter().any(|v| !v.is_finite()) || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::domain("weights must be nonnegative and values finite"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::domain("weights sum to zero"));
        }
        let mut pairs: Vec<(f64, f64)> = values.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (values, weights): (Vec<f64>, Vec<f64>) =
            pairs.into_iter().map(|(v, w)| (v, w / total)).unzip();
        Ok(EmpiricalSample { values, weights: Some(weights) })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn weight(&self, i: usize) -> f64 {
        match &self.weights {
            Some(w) => w[i],
            None => 1.0 / self.values.len() as f64,
        }
    }

    /// Kish effective sample size; `n` when unweighted.
    pub fn effective_size(&self) -> f64 {
        match &self.weights {
            Some(w) => 1.0 / w.iter().map(|x| x * x).sum::<f64>(),
            None => self.values.len() as f64,
        }
    }

    pub fn mean(&self) -> f64 {
        (0..self.len()).map(|i| self.weight(i) * self.values[i]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // theta-function form, converges fast for small λ
        let y = -PI * PI / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for j in 0..20 {
            let k = (2 * j + 1) as f64;
            s += (y * k * k).exp();
        }
        (1.0 - (2.0 * PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        for j in 1..=100 {
            let jf = j as f64;
            let term = (-2.0 * jf * jf * lambda * lambda).exp();
            s += if j % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

fn p_value(statistic: f64, n_eff: f64) -> f64 {
    let rn = n_eff.sqrt();
    kolmogorov_survival((rn + 0.12 + 0.11 / rn) * statistic)
}

/// One-sample test against a cumulative distribution function.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &EmpiricalSample, cdf: F) -> KsResult {
    let cdfs: Vec<f64> = sample.values.iter().map(|&v| cdf(v)).collect();
    one_sample_from_cdf_values(sample, &cdfs)
}

fn one_sample_from_cdf_values(sample: &EmpiricalSample, cdfs: &[f64]) -> KsResult {
    let mut below = 0.0;
    let mut d = 0.0f64;
    for (i, &f) in cdfs.iter().enumerate() {
        let above = below + sample.weight(i);
        d = d.max((f - below).abs()).max((above - f).abs());
        below = above;
    }
    KsResult { statistic: d, p_value: p_value(d, sample.effective_size()) }
}

/// One-sample test against a density; the CDF is accumulated by quadrature
/// between consecutive sorted sample points, starting from `lower` (which may
/// be `-∞`).
pub fn ks_one_sample_density<F: Fn(f64) -> f64>(
    sample: &EmpiricalSample,
    density: F,
    lower: f64,
) -> Result<KsResult> {
    let tol = Tolerance { rel: 1e-10, abs: 1e-13 };
    let mut cdfs = Vec::with_capacity(sample.len());
    let mut acc = 0.0;
    let mut prev = lower;
    for &v in &sample.values {
        if v < lower {
            return Err(Error::domain(format!("sample value {v} lies below support start {lower}")));
        }
        if v > prev {
            acc += integrate_1d(&density, prev, v, tol)?.value;
            prev = v;
        }
        cdfs.push(acc);
    }
    Ok(one_sample_from_cdf_values(sample, &cdfs))
}

/// Classical two-sample test.
pub fn ks_two_sample(a: &EmpiricalSample, b: &EmpiricalSample) -> KsResult {
    let (mut i, mut j) = (0usize, 0usize);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a.values[i].min(b.values[j]);
        while i < a.len() && a.values[i] == x {
            fa += a.weight(i);
            i += 1;
        }
        while j < b.len() && b.values[j] == x {
            fb += b.weight(j);
            j += 1;
        }
        d = d.max((fa - fb).abs());
    }
    let (na, nb) = (a.effective_size(), b.effective_size());
    KsResult { statistic: d, p_value: p_value(d, na * nb / (na + nb)) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_samples() {
        let a = EmpiricalSample::new(vec![0.3, 0.1, 0.9, 0.5]).unwrap();
        let r = ks_two_sample(&a, &a.clone());
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn survival_endpoints_and_continuity() {
        assert_eq!(kolmogorov_survival(0.0), 1.0);
        assert!(kolmogorov_survival(5.0) < 1e-20);
        let a = kolmogorov_survival(1.18 - 1e-9);
        let b = kolmogorov_survival(1.18 + 1e-9);
        assert!((a - b).abs() < 1e-8);
        // textbook value: P(K > 1.36) ≈ 0.0494
        assert!((kolmogorov_survival(1.36) - 0.0494).abs() < 5e-4);
    }

    #[test]
    fn uniform_calibration() {
        // p-values of a correctly specified test are ≈ U(0,1); count rejections.
        let mut rejections = 0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
            let s = EmpiricalSample::new(v).unwrap();
            if ks_one_sample(&s, |x| x.clamp(0.0, 1.0)).p_value <= 0.01 {
                rejections += 1;
            }
        }
        assert!(rejections <= 5, "{rejections} rejections out of 100");
    }

    #[test]
    fn half_width_uniform_has_statistic_one_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let s = EmpiricalSample::new(v).unwrap();
        let r = ks_one_sample(&s, |x| (x / 2.0).clamp(0.0, 1.0));
        assert!((r.statistic - 0.5).abs() < 0.02, "{r:?}");
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn density_variant_matches_cdf_variant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v: Vec<f64> = (0..2000).map(|_| -rng.random::<f64>().ln()).collect();
        let s = EmpiricalSample::new(v).unwrap();
        let a = ks_one_sample(&s, |x| 1.0 - (-x).exp());
        let b = ks_one_sample_density(&s, |x| (-x).exp(), 0.0).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-9);
    }

    #[test]
    fn weighted_sample_normalises() {
        let s = EmpiricalSample::weighted(vec![2.0, 1.0], vec![3.0, 1.0]).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0]);
        assert!((s.mean() - 1.75).abs() < 1e-15);
        assert!((s.effective_size() - 1.0 / (0.0625 + 0.5625)).abs() < 1e-12);
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(EmpiricalSample::new(vec![]).is_err());
    }
}
