//! Densities and factorizations of the catalog processes.
//!
//! Every density is written through the reduced Bessel kernel
//! `K_ν(z) = z^{-ν} I_ν(z)`, which is finite at `z = 0`, so starting points
//! on the boundary (`x = 0`, singular `x`) need no separate limit branch.

use std::f64::consts::LN_2;
use std::sync::Arc;

use super::{Domain, Factorization, HTransform, ProcessModel, SamplerHook, State};
use crate::error::{Error, Result};
use crate::matrix_special::{ln_gamma_m, log_hyper_0f1};
use crate::numerics::{ln_gamma, log_bessel_i_ratio, log_bessel_i_reduced};
use crate::symmat::{SignClass, SymMatrix};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `p · ln y` with the conventions `0 · ln 0 = 0` and `±∞` otherwise.
fn pow_log(p: f64, y: f64) -> f64 {
    if y == 0.0 {
        if p == 0.0 {
            0.0
        } else if p > 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        p * y.ln()
    }
}

fn scalar_pair(x: &State, y: &State) -> Result<(f64, f64)> {
    Ok((x.as_scalar()?, y.as_scalar()?))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::config(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::config(format!("{name} must be nonnegative, got {v}")));
    }
    Ok(())
}

// ---------------------------------------------------------------- Brownian

fn brownian_factorization(n: usize) -> Factorization {
    Factorization {
        log_phi: Arc::new(move |x, y| Ok(-0.5 * n as f64 * LN_2PI + dot(x.as_vector()?, y.as_vector()?))),
        log_theta: Arc::new(|_| Ok(0.0)),
        rho: Arc::new(|x| {
            let v = x.as_vector()?;
            Ok(-0.5 * dot(v, v))
        }),
        beta: 0.0,
        symmetric: true,
        h_transform: None,
    }
}

pub(crate) fn brownian(n: usize) -> Result<ProcessModel> {
    if n == 0 {
        return Err(Error::config("dimension n must be at least 1"));
    }
    let kernel = move |t: f64, x: &State, y: &State| {
        let (x, y) = (x.as_vector()?, y.as_vector()?);
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (b - a) * (b - a)).sum();
        Ok(-0.5 * n as f64 * (LN_2PI + t.ln()) - d2 / (2.0 * t))
    };
    Ok(ProcessModel::new(format!("brownian(n={n})"), 1.0, Domain::RealLine { n }, kernel)
        .with_factorization(brownian_factorization(n))
        .with_sampler(SamplerHook::Brownian { drift: vec![0.0; n] }))
}

/// Brownian motion with drift `b`: the h-transform of Brownian motion by
/// `h(y) = e^{b·y}` at rate `|b|²/2`. The density is the recentred Gaussian.
pub(crate) fn brownian_drift(b: Vec<f64>) -> Result<ProcessModel> {
    let n = b.len();
    if n == 0 {
        return Err(Error::config("drift vector b must be nonempty"));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("drift entries must be finite"));
    }
    let bk = b.clone();
    let kernel = move |t: f64, x: &State, y: &State| {
        let (x, y) = (x.as_vector()?, y.as_vector()?);
        let d2: f64 = (0..n).map(|i| (y[i] - x[i] - bk[i] * t).powi(2)).sum();
        Ok(-0.5 * n as f64 * (LN_2PI + t.ln()) - d2 / (2.0 * t))
    };
    let bh = b.clone();
    let h = HTransform::new(move |y: &State| Ok(dot(&bh, y.as_vector()?)), 0.5 * dot(&b, &b))?;
    let mut fact = brownian_factorization(n);
    fact.h_transform = Some(h);
    let label: Vec<String> = b.iter().map(|v| v.to_string()).collect();
    Ok(
        ProcessModel::new(format!("brownian_drift(b=[{}])", label.join(",")), 1.0, Domain::RealLine { n }, kernel)
            .with_factorization(fact)
            .with_sampler(SamplerHook::Brownian { drift: b }),
    )
}

pub(crate) fn ornstein_uhlenbeck(theta: f64) -> Result<ProcessModel> {
    positive("theta", theta)?;
    let kernel = move |t: f64, x: &State, y: &State| {
        let (x, y) = scalar_pair(x, y)?;
        let mean = x * (-theta * t).exp();
        let var = -(-2.0 * theta * t).exp_m1() / (2.0 * theta);
        Ok(-0.5 * (LN_2PI + var.ln()) - (y - mean).powi(2) / (2.0 * var))
    };
    Ok(ProcessModel::new(format!("ornstein_uhlenbeck(theta={theta})"), 1.0, Domain::RealLine { n: 1 }, kernel))
}

// ---------------------------------------------------------------- Bessel family

fn bessel_parts(nu: f64, sigma: f64) -> Factorization {
    let s2 = sigma * sigma;
    Factorization {
        log_phi: Arc::new(move |x, y| {
            let (x, y) = scalar_pair(x, y)?;
            Ok(-2.0 * nu * sigma.ln() + log_bessel_i_reduced(nu, x * y / s2)?)
        }),
        log_theta: Arc::new(move |y| Ok(pow_log(2.0 * nu + 1.0, y.as_scalar()?) - s2.ln())),
        rho: Arc::new(move |x| Ok(-x.as_scalar()?.powi(2) / (2.0 * s2))),
        beta: 2.0 * nu + 1.0,
        symmetric: true,
        h_transform: None,
    }
}

/// `ln p_t(x,y) = (2ν+1) ln y − (ν+1) ln(σ²t) − (x²+y²)/(2σ²t) + ln K_ν(xy/(σ²t))`.
fn bessel_log_density(nu: f64, sigma: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    let s2t = sigma * sigma * t;
    Ok(pow_log(2.0 * nu + 1.0, y) - (nu + 1.0) * s2t.ln() - (x * x + y * y) / (2.0 * s2t)
        + log_bessel_i_reduced(nu, x * y / s2t)?)
}

pub(crate) fn bessel(nu: f64, sigma: f64) -> Result<ProcessModel> {
    if !(nu > -1.0) || !nu.is_finite() {
        return Err(Error::config(format!("Bessel index must satisfy nu > -1, got {nu}")));
    }
    positive("sigma", sigma)?;
    let kernel = move |t: f64, x: &State, y: &State| {
        let (x, y) = scalar_pair(x, y)?;
        bessel_log_density(nu, sigma, t, x, y)
    };
    Ok(ProcessModel::new(format!("bessel(nu={nu}, sigma={sigma})"), 1.0, Domain::HalfLine, kernel)
        .with_factorization(bessel_parts(nu, sigma))
        .with_sampler(SamplerHook::Bessel { nu, sigma }))
}

/// `ln h_c(x)` with `h_c(x) = 2^ν Γ(ν+1) K_ν(√(2c) x)`, so `h_c(0) = 1`.
fn log_h_wide(nu: f64, c: f64, x: f64) -> Result<f64> {
    Ok(nu * LN_2 + ln_gamma(nu + 1.0) + log_bessel_i_reduced(nu, (2.0 * c).sqrt() * x)?)
}

pub(crate) fn bessel_wide(nu: f64, c: f64) -> Result<ProcessModel> {
    if !(nu > -1.0) || !nu.is_finite() {
        return Err(Error::config(format!("Bessel index must satisfy nu > -1, got {nu}")));
    }
    nonnegative("c", c)?;
    let kernel = move |t: f64, x: &State, y: &State| {
        let (x, y) = scalar_pair(x, y)?;
        Ok(bessel_log_density(nu, 1.0, t, x, y)? + log_h_wide(nu, c, y)? - log_h_wide(nu, c, x)? - c * t)
    };
    let mut fact = bessel_parts(nu, 1.0);
    fact.h_transform = Some(HTransform::new(move |x: &State| log_h_wide(nu, c, x.as_scalar()?), c)?);
    Ok(ProcessModel::new(format!("bessel_wide(nu={nu}, c={c})"), 1.0, Domain::HalfLine, kernel)
        .with_factorization(fact))
}

pub(crate) fn squared_bessel(delta: f64) -> Result<ProcessModel> {
    positive("delta", delta)?;
    let nu = 0.5 * delta - 1.0;
    let kernel = move |t: f64, x: &State, y: &State| {
        let (x, y) = scalar_pair(x, y)?;
        Ok(pow_log(nu, y) - LN_2 - (nu + 1.0) * t.ln() - (x + y) / (2.0 * t)
            + log_bessel_i_reduced(nu, (x * y).sqrt() / t)?)
    };
    let fact = Factorization {
        log_phi: Arc::new(move |x, y| {
            let (x, y) = scalar_pair(x, y)?;
            log_bessel_i_reduced(nu, (x * y).sqrt())
        }),
        log_theta: Arc::new(move |y| Ok(pow_log(nu, y.as_scalar()?) - LN_2)),
        rho: Arc::new(|x| Ok(-0.5 * x.as_scalar()?)),
        beta: nu,
        symmetric: true,
        h_transform: None,
    };
    Ok(ProcessModel::new(format!("squared_bessel(delta={delta})"), 2.0, Domain::HalfLine, kernel)
        .with_factorization(fact)
        .with_sampler(SamplerHook::SquaredBessel { delta }))
}

// ---------------------------------------------------------------- Dunkl family

/// `ln D_{k,λ}(z)` with `ν = k − ½`, `μ = √(ν² + 4λ)`:
/// `D(z) = ½ K_ν(|z|) (1 ± (I_μ/I_ν)(|z|))`, sign `+` for `z > 0`.
///
/// At `z = 0` the kernel takes the value `½ K_ν(0)`, the common one-sided
/// limit when `λ > 0` and the average of the two one-sided limits when `λ = 0`.
pub fn log_dunkl_kernel(k: f64, lambda: f64, z: f64) -> Result<f64> {
    let nu = k - 0.5;
    let mu = (nu * nu + 4.0 * lambda).sqrt();
    let a = z.abs();
    let base = log_bessel_i_reduced(nu, a)? - LN_2;
    if z == 0.0 {
        return Ok(base);
    }
    let lr = log_bessel_i_ratio(mu, nu, a)?;
    if z > 0.0 {
        Ok(base + lr.exp().ln_1p())
    } else {
        Ok(base + (-lr.exp_m1()).ln())
    }
}

/// `ln p_t(x,y) = 2k ln|y| − (k+½) ln t − (x²+y²)/(2t) + ln D_{k,λ}(xy/t)`.
fn gen_dunkl_log_density(k: f64, lambda: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    Ok(pow_log(2.0 * k, y.abs()) - (k + 0.5) * t.ln() - (x * x + y * y) / (2.0 * t)
        + log_dunkl_kernel(k, lambda, x * y / t)?)
}

fn check_dunkl_params(k: f64, lambda: f64) -> Result<()> {
    positive("k", k)?;
    nonnegative("lambda", lambda)
}

pub(crate) fn gen_dunkl1d(k: f64, lambda: f64) -> Result<ProcessModel> {
    check_dunkl_params(k, lambda)?;
    let kernel = move |t: f64, x: &State, y: &State| {
        let (x, y) = scalar_pair(x, y)?;
        gen_dunkl_log_density(k, lambda, t, x, y)
    };
    let fact = Factorization {
        log_phi: Arc::new(move |x, y| {
            let (x, y) = scalar_pair(x, y)?;
            log_dunkl_kernel(k, lambda, x * y)
        }),
        log_theta: Arc::new(move |y| Ok(pow_log(2.0 * k, y.as_scalar()?.abs()))),
        rho: Arc::new(|x| Ok(-0.5 * x.as_scalar()?.powi(2))),
        beta: 2.0 * k,
        symmetric: true,
        h_transform: None,
    };
    Ok(ProcessModel::new(format!("gen_dunkl1d(k={k}, lambda={lambda})"), 1.0, Domain::RealLine { n: 1 }, kernel)
        .with_factorization(fact)
        .with_sampler(SamplerHook::GenDunkl { k, lambda }))
}

/// Orthonormal frame whose first rows are `αᵢ/√2`, completed by Gram–Schmidt.
fn root_frame(n: usize, roots: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if roots.len() > n {
        return Err(Error::config(format!("at most {n} orthogonal roots fit in R^{n}")));
    }
    for (i, a) in roots.iter().enumerate() {
        if a.len() != n {
            return Err(Error::config(format!("root {i} has length {}, expected {n}", a.len())));
        }
        for (j, b) in roots.iter().enumerate() {
            let want = if i == j { 2.0 } else { 0.0 };
            if (dot(a, b) - want).abs() > 1e-9 {
                return Err(Error::config(format!(
                    "roots must satisfy <a_i, a_j> = 2 delta_ij; <a_{i}, a_{j}> = {}",
                    dot(a, b)
                )));
            }
        }
    }
    let mut frame: Vec<Vec<f64>> =
        roots.iter().map(|a| a.iter().map(|v| v / 2f64.sqrt()).collect()).collect();
    for e in 0..n {
        if frame.len() == n {
            break;
        }
        let mut v: Vec<f64> = (0..n).map(|i| if i == e { 1.0 } else { 0.0 }).collect();
        for f in &frame {
            let c = dot(&v, f);
            for (vi, fi) in v.iter_mut().zip(f) {
                *vi -= c * fi;
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-8 {
            frame.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    Ok(frame)
}

fn rotate(frame: &[Vec<f64>], x: &State) -> Result<Vec<f64>> {
    let v = x.as_vector()?;
    Ok(frame.iter().map(|row| dot(row, v)).collect())
}

pub(crate) fn dunkl_orthogonal(
    n: usize,
    roots: Vec<Vec<f64>>,
    ks: Vec<f64>,
    lambdas: Vec<f64>,
) -> Result<ProcessModel> {
    if n == 0 {
        return Err(Error::config("dimension n must be at least 1"));
    }
    if roots.is_empty() {
        return Err(Error::config("at least one root is required"));
    }
    if ks.len() != roots.len() || lambdas.len() != roots.len() {
        return Err(Error::config("k and lambda need one entry per root"));
    }
    for (&k, &l) in ks.iter().zip(&lambdas) {
        check_dunkl_params(k, l)?;
    }
    let frame = Arc::new(root_frame(n, &roots)?);
    let l = roots.len();
    let (kk, ll) = (Arc::new(ks.clone()), Arc::new(lambdas.clone()));

    let (f, k2, l2) = (Arc::clone(&frame), Arc::clone(&kk), Arc::clone(&ll));
    let kernel = move |t: f64, x: &State, y: &State| {
        let (u, v) = (rotate(&f, x)?, rotate(&f, y)?);
        let mut total = 0.0;
        for i in 0..n {
            total += if i < l {
                gen_dunkl_log_density(k2[i], l2[i], t, u[i], v[i])?
            } else {
                -0.5 * (LN_2PI + t.ln()) - (v[i] - u[i]).powi(2) / (2.0 * t)
            };
        }
        Ok(total)
    };
    let (f, k2, l2) = (Arc::clone(&frame), Arc::clone(&kk), Arc::clone(&ll));
    let log_phi = move |x: &State, y: &State| {
        let (u, v) = (rotate(&f, x)?, rotate(&f, y)?);
        let mut total = 0.0;
        for i in 0..n {
            total += if i < l {
                log_dunkl_kernel(k2[i], l2[i], u[i] * v[i])?
            } else {
                -0.5 * LN_2PI + u[i] * v[i]
            };
        }
        Ok(total)
    };
    let (f, k2) = (Arc::clone(&frame), Arc::clone(&kk));
    let log_theta = move |y: &State| {
        let v = rotate(&f, y)?;
        Ok((0..l).map(|i| pow_log(2.0 * k2[i], v[i].abs())).sum())
    };
    let fact = Factorization {
        log_phi: Arc::new(log_phi),
        log_theta: Arc::new(log_theta),
        rho: Arc::new(|x| {
            let v = x.as_vector()?;
            Ok(-0.5 * dot(v, v))
        }),
        beta: 2.0 * ks.iter().sum::<f64>(),
        symmetric: true,
        h_transform: None,
    };
    let sampler = SamplerHook::DunklOrthogonal { frame: (*frame).clone(), roots: l, k: ks, lambda: lambdas };
    Ok(ProcessModel::new(format!("dunkl_orthogonal(n={n}, roots={l})"), 1.0, Domain::RealLine { n }, kernel)
        .with_factorization(fact)
        .with_sampler(sampler))
}

// ---------------------------------------------------------------- eigenvalues

/// `ln h(x) = Σ_{i<j} ln(x_j − x_i)`.
fn log_vandermonde(x: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for j in 0..x.len() {
        for i in 0..j {
            let d = x[j] - x[i];
            if !(d > 0.0) {
                return Err(Error::domain(format!("point {x:?} is not strictly ordered")));
            }
            s += d.ln();
        }
    }
    Ok(s)
}

/// `ln det[e^{L_ij}]` for an `m × m` matrix of logs, rows rescaled by their
/// maxima. A determinant that is nonpositive only through rounding is
/// reported as `-∞`.
fn log_det_exp(l: &[f64], m: usize) -> Result<f64> {
    let mut a = vec![0.0; m * m];
    let mut shift = 0.0;
    for i in 0..m {
        let row = &l[i * m..(i + 1) * m];
        let mx = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if mx == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        shift += mx;
        for j in 0..m {
            a[i * m + j] = (row[j] - mx).exp();
        }
    }
    let det = lu_det(&mut a, m);
    if det > 0.0 {
        Ok(shift + det.ln())
    } else if det.abs() <= 1e-12 {
        Ok(f64::NEG_INFINITY)
    } else {
        Err(Error::numeric(format!("determinant kernel is negative ({det:e})")))
    }
}

fn lu_det(a: &mut [f64], m: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..m {
        let p = (c..m).max_by(|&i, &j| a[i * m + c].abs().total_cmp(&a[j * m + c].abs())).unwrap();
        if a[p * m + c] == 0.0 {
            return 0.0;
        }
        if p != c {
            for k in 0..m {
                a.swap(c * m + k, p * m + k);
            }
            det = -det;
        }
        let piv = a[c * m + c];
        det *= piv;
        for r in (c + 1)..m {
            let f = a[r * m + c] / piv;
            for k in c..m {
                a[r * m + k] -= f * a[c * m + k];
            }
        }
    }
    det
}

fn pairwise_logs(
    f: &(dyn Fn(&State, &State) -> Result<f64> + Send + Sync),
    x: &[f64],
    y: &[f64],
) -> Result<Vec<f64>> {
    let m = x.len();
    let mut l = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            l[i * m + j] = f(&State::scalar(x[i]), &State::scalar(y[j]))?;
        }
    }
    Ok(l)
}

/// `(h(y)/h(x)) · det[p_t(xᵢ, yⱼ)]` for a one-dimensional base model.
pub fn eigen_kmg_density(base: &ProcessModel, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::domain("x and y must be nonempty and of equal length"));
    }
    let lh = log_vandermonde(y)? - log_vandermonde(x)?;
    let f = |a: &State, b: &State| base.log_density(t, a, b);
    Ok((lh + log_det_exp(&pairwise_logs(&f, x, y)?, x.len())?).exp())
}

pub(crate) fn eigen_kmg(base: ProcessModel, m: usize) -> Result<ProcessModel> {
    if m == 0 {
        return Err(Error::config("m must be at least 1"));
    }
    let positive = match base.domain() {
        Domain::RealLine { n: 1 } => false,
        Domain::HalfLine => true,
        _ => return Err(Error::config("eigenvalue process needs a one-dimensional base model")),
    };
    let bf = base
        .factorization()
        .cloned()
        .ok_or_else(|| Error::config("eigenvalue process needs a factorized base model"))?;
    if bf.h_transform.is_some() {
        return Err(Error::config("eigenvalue base must be homogeneous"));
    }
    let base = Arc::new(base);
    let b = Arc::clone(&base);
    let kernel = move |t: f64, x: &State, y: &State| {
        let (x, y) = (x.as_vector()?, y.as_vector()?);
        let lh = log_vandermonde(y)? - log_vandermonde(x)?;
        let f = |a: &State, c: &State| b.log_density(t, a, c);
        Ok(lh + log_det_exp(&pairwise_logs(&f, x, y)?, m)?)
    };
    let phi = Arc::clone(&bf.log_phi);
    let log_phi = move |x: &State, y: &State| {
        let (x, y) = (x.as_vector()?, y.as_vector()?);
        Ok(log_det_exp(&pairwise_logs(phi.as_ref(), x, y)?, m)? - log_vandermonde(x)? - log_vandermonde(y)?)
    };
    let theta = Arc::clone(&bf.log_theta);
    let log_theta = move |y: &State| {
        let v = y.as_vector()?;
        let mut s = 2.0 * log_vandermonde(v)?;
        for &yj in v {
            s += theta(&State::scalar(yj))?;
        }
        Ok(s)
    };
    let rho_b = Arc::clone(&bf.rho);
    let rho = move |x: &State| {
        let mut s = 0.0;
        for &xi in x.as_vector()? {
            s += rho_b(&State::scalar(xi))?;
        }
        Ok(s)
    };
    let fact = Factorization {
        log_phi: Arc::new(log_phi),
        log_theta: Arc::new(log_theta),
        rho: Arc::new(rho),
        beta: m as f64 * bf.beta + (m * (m - 1)) as f64,
        symmetric: bf.symmetric,
        h_transform: None,
    };
    Ok(ProcessModel::new(
        format!("eigen_kmg(base={}, m={m})", base.name()),
        base.alpha(),
        Domain::WeylChamber { m, positive },
        kernel,
    )
    .with_factorization(fact))
}

// ---------------------------------------------------------------- Wishart family

fn log_det_pd(a: &SymMatrix) -> Result<f64> {
    let ev = a.eigenvalues()?;
    if ev.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::domain("matrix is not positive definite"));
    }
    Ok(ev.iter().map(|l| l.ln()).sum())
}

/// `√x · y · √x · c` for PSD `x`.
fn conjugated(x: &SymMatrix, y: &SymMatrix, c: f64) -> Result<SymMatrix> {
    Ok(x.sqrt_psd()?.conjugate(y).scale(c))
}

#[derive(Debug, Clone, Copy)]
struct WishartParams {
    delta: f64,
    m: usize,
    nu: f64,
}

impl WishartParams {
    fn new(delta: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::config("matrix size m must be at least 1"));
        }
        if !(delta > m as f64 - 1.0) || !delta.is_finite() {
            return Err(Error::config(format!(
                "Wishart dimension must satisfy delta > m - 1 = {}, got delta = {delta}",
                m as f64 - 1.0
            )));
        }
        Ok(WishartParams { delta, m, nu: 0.5 * (delta - m as f64 - 1.0) })
    }

    fn n(&self) -> usize {
        self.m * (self.m + 1) / 2
    }

    /// `ln p_t(x,y) = −(mδ/2) ln(2t) − Tr(x+y)/(2t) + ν ln det y − ln Γ_m(δ/2)
    ///   + ln ₀F₁(δ/2; √x y √x/(4t²))`; finite for singular `x`.
    fn log_density(&self, t: f64, x: &SymMatrix, y: &SymMatrix) -> Result<f64> {
        let m = self.m as f64;
        let z = conjugated(x, y, 1.0 / (4.0 * t * t))?;
        Ok(-0.5 * m * self.delta * (2.0 * t).ln() - (x.trace() + y.trace()) / (2.0 * t)
            + self.nu * log_det_pd(y)?
            - ln_gamma_m(self.m, 0.5 * self.delta)?
            + log_hyper_0f1(0.5 * self.delta, &z)?)
    }

    /// `ln Φ(x,y) = −mν ln 2 − ln Γ_m(δ/2) + ln ₀F₁(δ/2; √x y √x/4)`.
    fn log_phi(&self, x: &SymMatrix, y: &SymMatrix) -> Result<f64> {
        let z = conjugated(x, y, 0.25)?;
        Ok(-(self.m as f64) * self.nu * LN_2 - ln_gamma_m(self.m, 0.5 * self.delta)? + log_hyper_0f1(0.5 * self.delta, &z)?)
    }

    fn log_theta(&self, y: &SymMatrix) -> Result<f64> {
        Ok(-(self.n() as f64) * LN_2 + self.nu * log_det_pd(y)?)
    }
}

pub(crate) fn wishart(delta: f64, m: usize) -> Result<ProcessModel> {
    let p = WishartParams::new(delta, m)?;
    let kernel = move |t: f64, x: &State, y: &State| p.log_density(t, x.as_matrix()?, y.as_matrix()?);
    let fact = Factorization {
        log_phi: Arc::new(move |x, y| p.log_phi(x.as_matrix()?, y.as_matrix()?)),
        log_theta: Arc::new(move |y| p.log_theta(y.as_matrix()?)),
        rho: Arc::new(|x| Ok(-0.5 * x.as_matrix()?.trace())),
        beta: m as f64 * p.nu,
        symmetric: true,
        h_transform: None,
    };
    Ok(ProcessModel::new(format!("wishart(delta={delta}, m={m})"), 2.0, Domain::PositiveDefinite { m }, kernel)
        .with_factorization(fact)
        .with_sampler(SamplerHook::Wishart { delta, m }))
}

/// `ln (Ĩ_{ν'}/Ĩ_ν)(Z)`.
fn log_bessel_matrix_ratio(nu: f64, nu_p: f64, z: &SymMatrix) -> Result<f64> {
    if nu_p == nu {
        return Ok(0.0);
    }
    let m = z.dim();
    let half = 0.5 * (m as f64 + 1.0);
    let ev = z.eigenvalues()?;
    let log_det: f64 = ev.iter().map(|&l| l.max(0.0).ln()).sum();
    if log_det == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(0.5 * (nu_p - nu) * log_det + ln_gamma_m(m, nu + half)? - ln_gamma_m(m, nu_p + half)?
        + log_hyper_0f1(nu_p + half, z)?
        - log_hyper_0f1(nu + half, z)?)
}

/// `ln(½(1 + s·r))` for `r = e^{lr} ∈ [0, 1]`, `s = ±1`.
fn log_half_one_plus(same_sign: bool, lr: f64) -> f64 {
    if same_sign {
        lr.exp().ln_1p() - LN_2
    } else {
        (-lr.exp_m1()).ln() - LN_2
    }
}

fn signed(a: &SymMatrix) -> Result<(bool, SymMatrix)> {
    match a.signed_abs()? {
        (SignClass::PositiveDefinite, abs) => Ok((true, abs)),
        (SignClass::NegativeDefinite, abs) => Ok((false, abs)),
        // a singular start (only x can be) is treated as positive
        (SignClass::IndefiniteOrSingular, _) if a.eigenvalues()?.iter().all(|&l| l >= -1e-12 * a.frobenius()) => {
            Ok((true, a.clone()))
        }
        _ => Err(Error::domain("state is neither positive nor negative definite")),
    }
}

pub(crate) fn skew_wishart(delta: f64, m: usize, lambda: f64) -> Result<ProcessModel> {
    let p = WishartParams::new(delta, m)?;
    nonnegative("lambda", lambda)?;
    let nu_p = (p.nu * p.nu + 4.0 * lambda).sqrt();
    let kernel = move |t: f64, x: &State, y: &State| {
        let (sx, ax) = signed(x.as_matrix()?)?;
        let (sy, ay) = signed(y.as_matrix()?)?;
        let z = conjugated(&ax, &ay, 1.0 / (4.0 * t * t))?;
        let lr = log_bessel_matrix_ratio(p.nu, nu_p, &z)?;
        Ok(p.log_density(t, &ax, &ay)? + log_half_one_plus(sx == sy, lr))
    };
    let log_phi = move |x: &State, y: &State| {
        let (sx, ax) = signed(x.as_matrix()?)?;
        let (sy, ay) = signed(y.as_matrix()?)?;
        let z = conjugated(&ax, &ay, 0.25)?;
        let lr = log_bessel_matrix_ratio(p.nu, nu_p, &z)?;
        Ok(p.log_phi(&ax, &ay)? + log_half_one_plus(sx == sy, lr))
    };
    let fact = Factorization {
        log_phi: Arc::new(log_phi),
        log_theta: Arc::new(move |y| p.log_theta(&signed(y.as_matrix()?)?.1)),
        rho: Arc::new(|x| Ok(-0.5 * signed(x.as_matrix()?)?.1.trace())),
        beta: m as f64 * p.nu,
        symmetric: true,
        h_transform: None,
    };
    Ok(ProcessModel::new(
        format!("skew_wishart(delta={delta}, m={m}, lambda={lambda})"),
        2.0,
        Domain::SignedDefinite { m },
        kernel,
    )
    .with_factorization(fact)
    .with_sampler(SamplerHook::SkewWishart { delta, m, lambda }))
}
