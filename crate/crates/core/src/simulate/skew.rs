use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{simulate_radial, PathEnsemble, RngContract, STAGE_FLIPS};
use crate::error::{Error, Result};
use crate::models::{SamplerHook, State};
use crate::numerics::log_bessel_i_ratio;

/// Probability of an odd Poisson(λΔA) count.
fn flip_probability(lambda: f64, da: f64) -> f64 {
    -0.5 * (-2.0 * lambda * da).exp_m1()
}

fn reflect(x: &[f64], e: &[f64]) -> Vec<f64> {
    let c: f64 = x.iter().zip(e).map(|(a, b)| a * b).sum();
    x.iter().zip(e).map(|(a, b)| a - 2.0 * c * b).collect()
}

/// Signs the base paths with independent Poisson clocks run at the
/// functional: over a grid interval with increment `ΔA` the sign flips with
/// probability `½(1 − e^{−2λΔA})`. With a root frame, each root flips its
/// own reflection using its own functional and rate; otherwise the whole
/// state changes sign and `lambda` has one entry.
pub fn skew_product(base: &PathEnsemble, lambda: &[f64], seed: u64) -> Result<PathEnsemble> {
    let roots = base.frame.len().max(1);
    if lambda.len() != roots {
        return Err(Error::config(format!("{} flip rates given for {roots} sign components", lambda.len())));
    }
    if lambda.iter().any(|&l| !(l >= 0.0)) {
        return Err(Error::config("flip rates must be nonnegative"));
    }
    let paths: Vec<Vec<State>> = (0..base.paths.len())
        .into_par_iter()
        .map(|i| -> Result<Vec<State>> {
            let mut rng = RngContract::new(seed, STAGE_FLIPS, i as u64).rng();
            let mut signs = vec![false; roots];
            let mut prev = vec![0.0; roots];
            let mut out = Vec::with_capacity(base.times.len());
            for (j, state) in base.paths[i].iter().enumerate() {
                for r in 0..roots {
                    let a = if base.frame.is_empty() { base.functionals[i][j] } else { base.root_functionals[i][j][r] };
                    let u: f64 = rng.random();
                    if u < flip_probability(lambda[r], a - prev[r]) {
                        signs[r] = !signs[r];
                    }
                    prev[r] = a;
                }
                let s = if base.frame.is_empty() {
                    state.scale(if signs[0] { -1.0 } else { 1.0 })
                } else {
                    let mut x = state.as_vector()?.to_vec();
                    for (e, &flip) in base.frame.iter().zip(&signs) {
                        if flip {
                            x = reflect(&x, e);
                        }
                    }
                    State::vector(&x)
                };
                out.push(s);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut parameters = base.parameters.clone();
    if let Some(obj) = parameters.as_object_mut() {
        obj.insert("flip_rates".into(), serde_json::json!(lambda));
    }
    Ok(PathEnsemble {
        times: base.times.clone(),
        paths,
        functionals: base.functionals.clone(),
        seed: base.seed,
        scheme: format!("skew-product of {}", base.scheme),
        parameters,
        quality: base.quality.clone(),
        frame: base.frame.clone(),
        root_functionals: base.root_functionals.clone(),
    })
}

/// One endpoint bin of the conditional-functional comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalBin {
    pub y_low: f64,
    pub y_high: f64,
    pub count: usize,
    /// Mean of `e^{−2λA_t}` over the bin.
    pub empirical: f64,
    /// Mean of `(I_μ/I_ν)(x₀y/t)` over the same endpoints.
    pub analytic: f64,
    /// Standard error of `empirical − analytic`.
    pub standard_error: f64,
}

impl ConditionalBin {
    pub fn z_score(&self) -> f64 {
        if self.standard_error == 0.0 {
            if self.empirical == self.analytic {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.empirical - self.analytic).abs() / self.standard_error
        }
    }
}

/// Simulates Bessel(ν) from `x0` to time `t` with the functional
/// `A_t = ∫ ds / X_s²` and compares, in `bins` equal-count endpoint bins,
/// the mean of `e^{−2λA_t}` with `(I_μ/I_ν)(x₀ y / t)`, `μ = √(ν² + 4λ)`.
#[allow(clippy::too_many_arguments)]
pub fn mc_conditional_functional(
    nu: f64,
    lambda: f64,
    x0: f64,
    t: f64,
    paths: usize,
    substeps: usize,
    bins: usize,
    seed: u64,
) -> Result<Vec<ConditionalBin>> {
    if paths < 10_000 {
        return Err(Error::precondition(format!("conditional functional needs at least 10^4 paths, got {paths}")));
    }
    if !(x0 > 0.0) || !(lambda >= 0.0) || bins == 0 {
        return Err(Error::config("need x0 > 0, lambda >= 0 and at least one bin"));
    }
    let base = simulate_radial(&SamplerHook::Bessel { nu, sigma: 1.0 }, &State::scalar(x0), &[t], substeps, paths, seed)?;
    let mu = (nu * nu + 4.0 * lambda).sqrt();
    let mut rows: Vec<(f64, f64, f64)> = base
        .paths
        .par_iter()
        .zip(&base.functionals)
        .map(|(p, a)| {
            let y = p[0].as_scalar()?;
            let analytic = log_bessel_i_ratio(mu, nu, x0 * y / t)?.exp();
            Ok((y, (-2.0 * lambda * a[0]).exp(), analytic))
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let per = rows.len() / bins;
    let mut out = Vec::with_capacity(bins);
    for b in 0..bins {
        let lo = b * per;
        let hi = if b + 1 == bins { rows.len() } else { lo + per };
        let chunk = &rows[lo..hi];
        if chunk.len() < 2 {
            continue;
        }
        let n = chunk.len() as f64;
        let emp = chunk.iter().map(|r| r.1).sum::<f64>() / n;
        let ana = chunk.iter().map(|r| r.2).sum::<f64>() / n;
        let diff_mean = emp - ana;
        let var = chunk.iter().map(|r| (r.1 - r.2 - diff_mean).powi(2)).sum::<f64>() / (n - 1.0);
        out.push(ConditionalBin {
            y_low: chunk[0].0,
            y_high: chunk[chunk.len() - 1].0,
            count: chunk.len(),
            empirical: emp,
            analytic: ana,
            standard_error: (var / n).sqrt(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_flips_without_rate() {
        let hook = SamplerHook::GenDunkl { k: 1.0, lambda: 0.0 };
        let base = simulate_radial(&hook, &State::scalar(1.0), &[0.5, 1.0], 4, 50, 2).unwrap();
        let s = skew_product(&base, &[0.0], 2).unwrap();
        assert_eq!(s.paths, base.paths);
    }

    #[test]
    fn flip_probability_limits() {
        assert_eq!(flip_probability(0.0, 5.0), 0.0);
        assert!((flip_probability(1.0, 1e6) - 0.5).abs() < 1e-15);
        assert!((flip_probability(0.5, 0.2) - 0.5 * (1.0 - (-0.2f64).exp())).abs() < 1e-16);
    }

    #[test]
    fn rate_count_must_match() {
        let hook = SamplerHook::GenDunkl { k: 1.0, lambda: 0.5 };
        let base = simulate_radial(&hook, &State::scalar(1.0), &[1.0], 4, 5, 2).unwrap();
        assert!(skew_product(&base, &[0.5, 0.5], 2).is_err());
    }

    #[test]
    fn zero_rate_table_is_flat() {
        let rows = mc_conditional_functional(0.5, 0.0, 1.0, 1.0, 10_000, 4, 5, 1).unwrap();
        for r in rows {
            assert_eq!(r.empirical, 1.0);
            assert_eq!(r.analytic, 1.0);
            assert_eq!(r.z_score(), 0.0);
        }
        assert!(mc_conditional_functional(0.5, 0.1, 1.0, 1.0, 100, 4, 5, 1).is_err());
    }
}
