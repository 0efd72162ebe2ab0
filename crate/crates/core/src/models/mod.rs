//! Process catalog: transition densities `p_t(x, y)`, their time-inversion
//! degree `α`, declared factorizations
//! `p_t(x,y) = t^{-nα/2} Φ(x', y') θ(y') exp(ρ(x') + ρ(y'))` with
//! `x' = x / t^{α/2}`, and Doob h-transforms.

mod catalog;
mod config;
mod state;

pub use catalog::{eigen_kmg_density, log_dunkl_kernel};
pub use config::{model_from_config, model_from_json, ModelConfig};
pub use state::{Domain, State};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{central_derivative, central_second_derivative, log_bessel_i_reduced};

pub type LogKernel = Arc<dyn Fn(f64, &State, &State) -> Result<f64> + Send + Sync>;
pub type LogPairFn = Arc<dyn Fn(&State, &State) -> Result<f64> + Send + Sync>;
pub type StateFn = Arc<dyn Fn(&State) -> Result<f64> + Send + Sync>;

/// Doob h-transform `p^h_t(x,y) = h(y)/h(x) · e^{-νt} · p_t(x,y)`.
#[derive(Clone)]
pub struct HTransform {
    /// `ln h`.
    pub log_h: StateFn,
    /// Killing rate `ν`.
    pub nu: f64,
}

impl HTransform {
    pub fn new(log_h: impl Fn(&State) -> Result<f64> + Send + Sync + 'static, nu: f64) -> Result<Self> {
        if !(nu >= 0.0) {
            return Err(Error::domain(format!("killing rate must be nonnegative, got {nu}")));
        }
        Ok(HTransform { log_h: Arc::new(log_h), nu })
    }

    pub fn h(&self, x: &State) -> Result<f64> {
        (self.log_h)(x).map(f64::exp)
    }

    /// `ln(h(y)/h(x)) - νt`.
    pub fn log_weight(&self, t: f64, x: &State, y: &State) -> Result<f64> {
        Ok((self.log_h)(y)? - (self.log_h)(x)? - self.nu * t)
    }
}

impl fmt::Debug for HTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HTransform").field("nu", &self.nu).finish_non_exhaustive()
    }
}

/// The functions `Φ`, `θ`, `ρ` of a homogeneous density, kept in log form
/// (`ρ` is already a logarithm).
///
/// When `h_transform` is set the model's density is the h-transform of the
/// factorized density, which is the form taken by models that enjoy
/// time-inversion only up to an h-transform (Brownian motion with drift,
/// Bessel processes in the wide sense).
#[derive(Clone)]
pub struct Factorization {
    pub log_phi: LogPairFn,
    pub log_theta: StateFn,
    pub rho: StateFn,
    pub beta: f64,
    pub symmetric: bool,
    pub h_transform: Option<HTransform>,
}

impl Factorization {
    pub fn phi(&self, x: &State, y: &State) -> Result<f64> {
        (self.log_phi)(x, y).map(f64::exp)
    }

    pub fn theta(&self, y: &State) -> Result<f64> {
        (self.log_theta)(y).map(f64::exp)
    }

    /// Log of the homogeneous density rebuilt from `Φ`, `θ`, `ρ`.
    pub fn log_homogeneous(&self, alpha: f64, n: usize, t: f64, x: &State, y: &State) -> Result<f64> {
        let c = t.powf(-0.5 * alpha);
        let (xs, ys) = (x.scale(c), y.scale(c));
        Ok(-0.5 * n as f64 * alpha * t.ln()
            + (self.log_phi)(&xs, &ys)?
            + (self.log_theta)(&ys)?
            + (self.rho)(&xs)?
            + (self.rho)(&ys)?)
    }

    /// Log of the model density rebuilt from the factorization, including the
    /// h-transform weight when present.
    pub fn log_reconstruct(&self, alpha: f64, n: usize, t: f64, x: &State, y: &State) -> Result<f64> {
        let base = self.log_homogeneous(alpha, n, t, x, y)?;
        match &self.h_transform {
            Some(h) => Ok(base + h.log_weight(t, x, y)?),
            None => Ok(base),
        }
    }
}

impl fmt::Debug for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Factorization")
            .field("beta", &self.beta)
            .field("symmetric", &self.symmetric)
            .field("h_transform", &self.h_transform)
            .finish_non_exhaustive()
    }
}

/// Which exact or approximate path generator applies to a model.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplerHook {
    Bessel { nu: f64, sigma: f64 },
    SquaredBessel { delta: f64 },
    GenDunkl { k: f64, lambda: f64 },
    DunklOrthogonal { frame: Vec<Vec<f64>>, roots: usize, k: Vec<f64>, lambda: Vec<f64> },
    Wishart { delta: f64, m: usize },
    SkewWishart { delta: f64, m: usize, lambda: f64 },
    Brownian { drift: Vec<f64> },
}

/// A catalog process.
#[derive(Clone)]
pub struct ProcessModel {
    name: String,
    alpha: f64,
    domain: Domain,
    kernel: LogKernel,
    factorization: Option<Factorization>,
    sampler: Option<SamplerHook>,
    config: Option<ModelConfig>,
}

impl fmt::Debug for ProcessModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProcessModel")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("domain", &self.domain)
            .field("factorization", &self.factorization)
            .finish_non_exhaustive()
    }
}

impl ProcessModel {
    pub fn new(
        name: impl Into<String>,
        alpha: f64,
        domain: Domain,
        kernel: impl Fn(f64, &State, &State) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        ProcessModel {
            name: name.into(),
            alpha,
            domain,
            kernel: Arc::new(kernel),
            factorization: None,
            sampler: None,
            config: None,
        }
    }

    pub fn with_factorization(mut self, f: Factorization) -> Self {
        self.factorization = Some(f);
        self
    }

    pub fn with_sampler(mut self, s: SamplerHook) -> Self {
        self.sampler = Some(s);
        self
    }

    pub(crate) fn with_config(mut self, c: ModelConfig) -> Self {
        self.config = Some(c);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of scalar coordinates `n`.
    pub fn state_dim(&self) -> usize {
        self.domain.state_dim()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn factorization(&self) -> Option<&Factorization> {
        self.factorization.as_ref()
    }

    pub fn sampler(&self) -> Option<&SamplerHook> {
        self.sampler.as_ref()
    }

    pub fn config(&self) -> Option<&ModelConfig> {
        self.config.as_ref()
    }

    /// `ln p_t(x, y)`; `-∞` where the density vanishes.
    pub fn log_density(&self, t: f64, x: &State, y: &State) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain(format!("time must be positive and finite, got {t}")));
        }
        self.domain.check_start(x)?;
        self.domain.check_target(y)?;
        (self.kernel)(t, x, y)
    }

    /// `p_t(x, y)`; overflow is a numeric failure.
    pub fn density(&self, t: f64, x: &State, y: &State) -> Result<f64> {
        let l = self.log_density(t, x, y)?;
        if l > 709.0 {
            return Err(Error::numeric(format!(
                "density {} overflows at t={t}; use the log density",
                self.name
            )));
        }
        Ok(l.exp())
    }

    /// Log density with any declared h-transform weight removed, i.e. the
    /// density of the homogeneous representative.
    pub fn log_base_density(&self, t: f64, x: &State, y: &State) -> Result<f64> {
        let l = self.log_density(t, x, y)?;
        match self.factorization.as_ref().and_then(|f| f.h_transform.as_ref()) {
            Some(h) => Ok(l - h.log_weight(t, x, y)?),
            None => Ok(l),
        }
    }
}

/// `p^h_t(x,y) = h(y)/h(x) · e^{-νt} · p_t(x,y)`. The factorization is not
/// carried over and neither is the sampler.
pub fn apply_h_transform(model: &ProcessModel, h: HTransform) -> ProcessModel {
    let base = Arc::clone(&model.kernel);
    let name = format!("h-transform of {}", model.name);
    let kernel = move |t: f64, x: &State, y: &State| -> Result<f64> {
        let l = base(t, x, y)?;
        if l == f64::NEG_INFINITY {
            return Ok(l);
        }
        Ok(l + h.log_weight(t, x, y)?)
    };
    ProcessModel {
        name,
        alpha: model.alpha,
        domain: model.domain.clone(),
        kernel: Arc::new(kernel),
        factorization: None,
        sampler: None,
        config: None,
    }
}

/// Residual of `½φ″(z) + (2ν+1)/(2z) φ′(z) − k²/(2σ²) φ(z)` for an arbitrary
/// `φ`, derivatives by central differences.
pub fn ode_residual_with(phi: impl Fn(f64) -> f64, nu: f64, kconst: f64, sigma: f64, z: f64) -> f64 {
    let d1 = central_derivative(&phi, z);
    let d2 = central_second_derivative(&phi, z);
    0.5 * d2 + (2.0 * nu + 1.0) / (2.0 * z) * d1 - kconst * kconst / (2.0 * sigma * sigma) * phi(z)
}

/// The radial eigenfunction `φ(z) = (kz/σ)^{-ν} I_ν(kz/σ)`.
pub fn watanabe_phi(nu: f64, kconst: f64, sigma: f64, z: f64) -> Result<f64> {
    log_bessel_i_reduced(nu, kconst * z / sigma).map(f64::exp)
}

/// [`ode_residual_with`] evaluated at the radial eigenfunction.
pub fn watanabe_ode_residual(nu: f64, kconst: f64, sigma: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain(format!("z must be positive, got {z}")));
    }
    if !(kconst > 0.0) || !(sigma > 0.0) {
        return Err(Error::domain("k and σ must be positive"));
    }
    watanabe_phi(nu, kconst, sigma, z)?;
    let phi = |s: f64| watanabe_phi(nu, kconst, sigma, s).unwrap_or(f64::NAN);
    Ok(ode_residual_with(phi, nu, kconst, sigma, z))
}
