//! Path simulation: exact squared-Bessel transitions, Wishart paths, the
//! additive functionals that drive Poisson-clock sign flips, path
//! time-inversion and Monte Carlo comparison with the analytic laws.
//!
//! Every path draws from its own ChaCha8 stream keyed by the master seed,
//! so ensembles are bit-identical whatever the thread count.

mod ensemble;
mod radial;
mod skew;

pub use ensemble::{PathEnsemble, Quality};
pub use radial::{sample_besq, simulate_brownian, simulate_radial, EIGEN_FLOOR, ZERO_CAP};
pub use skew::{mc_conditional_functional, skew_product, ConditionalBin};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ProcessModel, SamplerHook, State};

/// Default number of sub-steps per grid interval for functional accuracy.
pub const DEFAULT_SUBSTEPS: usize = 8;

/// Independent per-path random streams derived from one master seed.
///
/// The stream id packs a stage (base path, sign flips, ...) above bit 40 and
/// the path index below it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngContract {
    pub master_seed: u64,
    pub stream_id: u64,
}

pub(crate) const STAGE_PATHS: u64 = 0;
pub(crate) const STAGE_FLIPS: u64 = 1;

impl RngContract {
    pub fn new(master_seed: u64, stage: u64, path: u64) -> Self {
        RngContract { master_seed, stream_id: (stage << 40) | path }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.master_seed);
        r.set_stream(self.stream_id);
        r
    }
}

/// `log:<min>:<max>:<count>`, log-spaced and inclusive.
pub fn parse_grid_spec(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::config(format!("grid spec '{spec}' is not log:<min>:<max>:<count>"));
    if parts.len() != 4 || parts[0] != "log" {
        return Err(bad());
    }
    let lo: f64 = parts[1].parse().map_err(|_| bad())?;
    let hi: f64 = parts[2].parse().map_err(|_| bad())?;
    let count: usize = parts[3].parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || count == 0 || (count == 1 && hi != lo) {
        return Err(Error::config(format!("grid spec '{spec}' needs 0 < min <= max and count >= 1")));
    }
    Ok(log_grid(lo, hi, count))
}

pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| match i {
            0 => lo,
            _ if i == count - 1 => hi,
            _ => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}

/// Simulation times `{1/u}` (ascending) for an inversion output grid `u`.
pub fn reciprocal_times(u: &[f64]) -> Vec<f64> {
    let mut t: Vec<f64> = u.iter().map(|v| 1.0 / v).collect();
    t.sort_by(f64::total_cmp);
    t
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.first().is_some_and(|&t| !(t > 0.0)) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("simulation times must be positive and strictly increasing"));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::domain("simulation times must be finite"));
    }
    Ok(())
}

/// Simulate any model with a sampler: radial models directly, jump models
/// as skew products of their radial part, Brownian models exactly.
pub fn simulate(
    model: &ProcessModel,
    x0: &State,
    times: &[f64],
    substeps: usize,
    paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    let hook = model
        .sampler()
        .ok_or_else(|| Error::precondition(format!("{} has no path sampler", model.name())))?;
    model.domain().check_start(x0)?;
    match hook {
        SamplerHook::Brownian { drift } => simulate_brownian(drift, x0, times, paths, seed),
        SamplerHook::Bessel { .. } | SamplerHook::SquaredBessel { .. } | SamplerHook::Wishart { .. } => {
            simulate_radial(hook, x0, times, substeps, paths, seed)
        }
        SamplerHook::GenDunkl { lambda, .. } | SamplerHook::SkewWishart { lambda, .. } => {
            let base = simulate_radial(hook, x0, times, substeps, paths, seed)?;
            skew_product(&base, &[*lambda], seed)
        }
        SamplerHook::DunklOrthogonal { lambda, .. } => {
            let base = simulate_radial(hook, x0, times, substeps, paths, seed)?;
            skew_product(&base, lambda, seed)
        }
    }
}

/// `Y_u = u^α X_{1/u}` for every simulated time, on the ascending grid
/// `u = 1/t`. Functionals are reset to zero: they are not carried over.
pub fn invert_paths(ensemble: &PathEnsemble, alpha: f64) -> Result<PathEnsemble> {
    let u: Vec<f64> = ensemble.times.iter().rev().map(|t| 1.0 / t).collect();
    invert_paths_on(ensemble, alpha, &u)
}

/// As [`invert_paths`] on a chosen `u` grid; each `1/u` must be a simulated
/// time (relative match 1e-9), there is no interpolation.
pub fn invert_paths_on(ensemble: &PathEnsemble, alpha: f64, u: &[f64]) -> Result<PathEnsemble> {
    check_times(u)?;
    let idx: Vec<usize> = u
        .iter()
        .map(|&v| {
            let t = 1.0 / v;
            ensemble
                .times
                .iter()
                .position(|&s| (s - t).abs() <= 1e-9 * t)
                .ok_or_else(|| Error::domain(format!("u = {v} needs X at time {t}, which was not simulated")))
        })
        .collect::<Result<_>>()?;
    let paths = ensemble
        .paths
        .iter()
        .map(|p| idx.iter().zip(u).map(|(&i, &v)| p[i].scale(v.powf(alpha))).collect())
        .collect();
    let mut out = PathEnsemble {
        times: u.to_vec(),
        paths,
        functionals: vec![vec![0.0; u.len()]; ensemble.paths.len()],
        seed: ensemble.seed,
        scheme: format!("inverted(alpha={alpha}) of {}", ensemble.scheme),
        parameters: ensemble.parameters.clone(),
        quality: ensemble.quality.clone(),
        frame: Vec::new(),
        root_functionals: Vec::new(),
    };
    out.quality.notes.push("functionals are not defined for inverted paths and are set to 0".into());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmat::SymMatrix;

    #[test]
    fn grid_spec() {
        let g = parse_grid_spec("log:0.1:10:3").unwrap();
        assert_eq!(g[0], 0.1);
        assert!((g[1] - 1.0).abs() < 1e-15);
        assert_eq!(g[2], 10.0);
        for bad in ["lin:0:1:3", "log:0:1:3", "log:1:0.5:3", "log:1:2:0", "log:1:2", "log:a:2:3"] {
            assert!(parse_grid_spec(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        use rand::Rng;
        let a: u64 = RngContract::new(7, STAGE_PATHS, 0).rng().random();
        let b: u64 = RngContract::new(7, STAGE_PATHS, 1).rng().random();
        let c: u64 = RngContract::new(7, STAGE_FLIPS, 0).rng().random();
        assert!(a != b && a != c && b != c);
        assert_eq!(a, RngContract::new(7, STAGE_PATHS, 0).rng().random::<u64>());
    }

    fn constant(times: &[f64], c: State) -> PathEnsemble {
        PathEnsemble {
            times: times.to_vec(),
            paths: vec![vec![c; times.len()]],
            functionals: vec![vec![0.0; times.len()]],
            seed: 0,
            scheme: "constant".into(),
            parameters: serde_json::Value::Null,
            quality: Quality::default(),
            frame: Vec::new(),
            root_functionals: Vec::new(),
        }
    }

    #[test]
    fn inverting_a_constant_path() {
        let e = constant(&reciprocal_times(&[0.5, 1.0, 2.0]), State::scalar(3.0));
        let y = invert_paths(&e, 1.0).unwrap();
        assert_eq!(y.times, vec![0.5, 1.0, 2.0]);
        for (u, s) in y.times.iter().zip(&y.paths[0]) {
            assert_eq!(s.as_scalar().unwrap(), 3.0 * u);
        }
        assert!(invert_paths_on(&e, 1.0, &[3.0]).is_err());
    }

    #[test]
    fn inverting_matrix_paths_scales_entrywise() {
        let m = SymMatrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 3.0]]).unwrap();
        let e = constant(&[0.5, 1.0], State::Matrix(m.clone()));
        let y = invert_paths(&e, 2.0).unwrap();
        assert_eq!(y.paths[0][1], State::Matrix(m.scale(4.0)));
    }
}
