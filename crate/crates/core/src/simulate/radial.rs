use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use rayon::prelude::*;
use serde_json::json;

use super::{check_times, PathEnsemble, Quality, RngContract, STAGE_PATHS};
use crate::error::{Error, Result};
use crate::models::{SamplerHook, State};
use crate::symmat::{SignClass, SymMatrix};

/// Radius below which `1/X²` is capped at `1/ZERO_CAP²`.
pub const ZERO_CAP: f64 = 1e-12;
/// Smallest eigenvalue kept by the Euler–Maruyama Wishart scheme.
pub const EIGEN_FLOOR: f64 = 1e-10;

/// Exact draw of a squared Bessel process of dimension `delta` at time `t`
/// from `x0`: `K ~ Poisson(x0/2t)`, then `Gamma(δ/2 + K, scale 2t)`.
pub fn sample_besq<R: Rng + ?Sized>(delta: f64, x0: f64, t: f64, rng: &mut R) -> Result<f64> {
    if !(delta > 0.0) || !(x0 >= 0.0) || !(t > 0.0) || !x0.is_finite() || !t.is_finite() {
        return Err(Error::domain(format!("BESQ draw needs delta > 0, x0 >= 0, t > 0; got {delta}, {x0}, {t}")));
    }
    let k = if x0 > 0.0 {
        Poisson::new(x0 / (2.0 * t)).map_err(|e| Error::numeric(format!("Poisson rate: {e}")))?.sample(rng)
    } else {
        0.0
    };
    let g = Gamma::new(0.5 * delta + k, 2.0 * t).map_err(|e| Error::numeric(format!("Gamma law: {e}")))?;
    Ok(g.sample(rng))
}

/// `1/x`, capped near zero; bumps `hits` when capped.
fn inv_capped(x: f64, hits: &mut usize) -> f64 {
    if x < ZERO_CAP * ZERO_CAP {
        *hits += 1;
        1.0 / (ZERO_CAP * ZERO_CAP)
    } else {
        1.0 / x
    }
}

fn substep_times(times: &[f64], substeps: usize) -> Vec<Vec<f64>> {
    let mut prev = 0.0;
    times
        .iter()
        .map(|&t| {
            let h = (t - prev) / substeps as f64;
            let v = (1..=substeps).map(|i| if i == substeps { t - prev } else { h * i as f64 }).collect::<Vec<_>>();
            let steps = v.iter().scan(0.0, |last, &s| {
                let d = s - *last;
                *last = s;
                Some(d)
            });
            prev = t;
            steps.collect()
        })
        .collect()
}

struct PathOut {
    states: Vec<State>,
    functional: Vec<f64>,
    roots: Vec<Vec<f64>>,
    quality: Quality,
}

/// A squared Bessel path of dimension `delta` run at clock `scale·t`,
/// recording `X` at grid times and `∫ ds / X` (in real time) by trapezoid.
fn besq_path<R: Rng>(
    delta: f64,
    scale: f64,
    x_start: f64,
    steps: &[Vec<f64>],
    rng: &mut R,
    q: &mut Quality,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut x = x_start;
    let mut f_prev = inv_capped(x, &mut q.zero_hits);
    let mut a = 0.0;
    let mut xs = Vec::with_capacity(steps.len());
    let mut fs = Vec::with_capacity(steps.len());
    for interval in steps {
        for &h in interval {
            x = sample_besq(delta, x, scale * h, rng)?;
            let f = inv_capped(x, &mut q.zero_hits);
            a += 0.5 * h * (f_prev + f);
            f_prev = f;
            q.total_steps += 1;
        }
        xs.push(x);
        fs.push(a);
    }
    Ok((xs, fs))
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn trace_inverse(x: &SymMatrix, q: &mut Quality) -> Result<f64> {
    let ev = x.eigenvalues()?;
    Ok(ev.iter().map(|&l| inv_capped(l, &mut q.zero_hits)).sum())
}

/// Wishart path: `X = BᵀB` with `B` a `δ×m` Brownian matrix when `δ` is an
/// integer, Euler–Maruyama on `dX = √X dB + dBᵀ√X + δI dt` otherwise.
fn wishart_path<R: Rng>(
    delta: f64,
    x_start: &SymMatrix,
    steps: &[Vec<f64>],
    rng: &mut R,
    q: &mut Quality,
) -> Result<(Vec<SymMatrix>, Vec<f64>)> {
    let m = x_start.dim();
    let exact = delta.fract() == 0.0 && delta >= m as f64;
    let d = delta as usize;
    // B stored row-major, δ × m; the first m rows start at √x
    let mut b = vec![0.0; if exact { d * m } else { 0 }];
    if exact {
        let r = x_start.sqrt_psd()?;
        for i in 0..m {
            for j in 0..m {
                b[i * m + j] = r.get(i, j);
            }
        }
    }
    let gram = |b: &[f64]| -> Result<SymMatrix> {
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let s: f64 = (0..d).map(|r| b[r * m + i] * b[r * m + j]).sum();
                data[i * m + j] = s;
                data[j * m + i] = s;
            }
        }
        SymMatrix::new(m, data)
    };
    let mut x = x_start.clone();
    let mut f_prev = trace_inverse(&x, q)?;
    let mut a = 0.0;
    let mut xs = Vec::with_capacity(steps.len());
    let mut fs = Vec::with_capacity(steps.len());
    for interval in steps {
        for &h in interval {
            let sh = h.sqrt();
            if exact {
                for v in b.iter_mut() {
                    *v += sh * gaussian(rng);
                }
                x = gram(&b)?;
            } else {
                x = euler_step(&x, delta, h, sh, rng, q)?;
            }
            let f = trace_inverse(&x, q)?;
            a += 0.5 * h * (f_prev + f);
            f_prev = f;
            q.total_steps += 1;
        }
        xs.push(x.clone());
        fs.push(a);
    }
    Ok((xs, fs))
}

fn euler_step<R: Rng>(x: &SymMatrix, delta: f64, h: f64, sh: f64, rng: &mut R, q: &mut Quality) -> Result<SymMatrix> {
    let m = x.dim();
    let root = x.sqrt_psd()?;
    let dw: Vec<f64> = (0..m * m).map(|_| sh * gaussian(rng)).collect();
    let rdw = crate::symmat::matmul(m, root.as_slice(), &dw);
    let mut data = x.as_slice().to_vec();
    for i in 0..m {
        for j in 0..m {
            // √X dW + dWᵀ √X, symmetric by construction
            data[i * m + j] += rdw[i * m + j] + rdw[j * m + i];
        }
        data[i * m + i] += delta * h;
    }
    for i in 0..m {
        for j in 0..i {
            let s = 0.5 * (data[i * m + j] + data[j * m + i]);
            data[i * m + j] = s;
            data[j * m + i] = s;
        }
    }
    let y = SymMatrix::new(m, data)?;
    let spec = y.spectral()?;
    if spec.values.iter().any(|&l| l < EIGEN_FLOOR) {
        q.floor_events += 1;
        return Ok(SymMatrix::from_spectral(&spec, |l| l.max(EIGEN_FLOOR)));
    }
    Ok(y)
}

fn collect(
    outs: Vec<Result<PathOut>>,
    times: &[f64],
    seed: u64,
    scheme: String,
    parameters: serde_json::Value,
    frame: Vec<Vec<f64>>,
) -> Result<PathEnsemble> {
    let mut quality = Quality::default();
    let mut paths = Vec::with_capacity(outs.len());
    let mut functionals = Vec::with_capacity(outs.len());
    let mut roots = Vec::new();
    for o in outs {
        let o = o?;
        quality.merge(&o.quality);
        paths.push(o.states);
        functionals.push(o.functional);
        if !frame.is_empty() {
            roots.push(o.roots);
        }
    }
    quality.finish();
    Ok(PathEnsemble {
        times: times.to_vec(),
        paths,
        functionals,
        seed,
        scheme,
        parameters,
        quality,
        frame,
        root_functionals: roots,
    })
}

fn run_paths(paths: usize, seed: u64, f: impl Fn(&mut rand_chacha::ChaCha8Rng) -> Result<PathOut> + Sync) -> Vec<Result<PathOut>> {
    (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngContract::new(seed, STAGE_PATHS, i).rng();
            f(&mut rng)
        })
        .collect()
}

fn sign_of(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Paths of a radial model: Bessel, squared Bessel and Wishart directly;
/// for the Dunkl and skew-Wishart hooks, the radial part (kept in the
/// chamber of the start point) carrying the functional(s) that drive the
/// sign flips.
pub fn simulate_radial(
    hook: &SamplerHook,
    x0: &State,
    times: &[f64],
    substeps: usize,
    paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    check_times(times)?;
    if substeps == 0 {
        return Err(Error::config("substeps must be at least 1"));
    }
    let steps = substep_times(times, substeps);
    let steps = &steps;
    match hook {
        SamplerHook::Bessel { nu, sigma } => {
            let (nu, sigma) = (*nu, *sigma);
            let r0 = x0.as_scalar()?;
            let outs = run_paths(paths, seed, |rng| {
                let mut q = Quality::default();
                let (xs, fs) = besq_path(2.0 * nu + 2.0, sigma * sigma, r0 * r0, steps, rng, &mut q)?;
                Ok(PathOut { states: xs.iter().map(|x| State::scalar(x.sqrt())).collect(), functional: fs, roots: vec![], quality: q })
            });
            collect(outs, times, seed, "bessel/exact-besq".into(), json!({"nu": nu, "sigma": sigma, "x0": r0, "substeps": substeps}), vec![])
        }
        SamplerHook::SquaredBessel { delta } => {
            let delta = *delta;
            let x = x0.as_scalar()?;
            let outs = run_paths(paths, seed, |rng| {
                let mut q = Quality::default();
                let (xs, fs) = besq_path(delta, 1.0, x, steps, rng, &mut q)?;
                Ok(PathOut { states: xs.into_iter().map(State::scalar).collect(), functional: fs, roots: vec![], quality: q })
            });
            collect(outs, times, seed, "besq/exact".into(), json!({"delta": delta, "x0": x, "substeps": substeps}), vec![])
        }
        SamplerHook::GenDunkl { k, lambda } => {
            let nu = k - 0.5;
            let x = x0.as_scalar()?;
            let s = sign_of(x);
            let outs = run_paths(paths, seed, |rng| {
                let mut q = Quality::default();
                let (xs, fs) = besq_path(2.0 * nu + 2.0, 1.0, x * x, steps, rng, &mut q)?;
                Ok(PathOut { states: xs.iter().map(|v| State::scalar(s * v.sqrt())).collect(), functional: fs, roots: vec![], quality: q })
            });
            collect(
                outs,
                times,
                seed,
                "gen_dunkl1d/radial-bessel".into(),
                json!({"k": k, "lambda": lambda, "x0": x, "substeps": substeps}),
                vec![],
            )
        }
        SamplerHook::Wishart { delta, .. } | SamplerHook::SkewWishart { delta, .. } => {
            let delta = *delta;
            let start = x0.as_matrix()?;
            let (class, abs) = start.signed_abs()?;
            let sign = if class == SignClass::NegativeDefinite { -1.0 } else { 1.0 };
            let abs = if class == SignClass::IndefiniteOrSingular { start.clone() } else { abs };
            let m = abs.dim();
            let exact = delta.fract() == 0.0 && delta >= m as f64;
            let outs = run_paths(paths, seed, |rng| {
                let mut q = Quality::default();
                let (xs, fs) = wishart_path(delta, &abs, steps, rng, &mut q)?;
                Ok(PathOut {
                    states: xs.into_iter().map(|x| State::Matrix(x.scale(sign))).collect(),
                    functional: fs,
                    roots: vec![],
                    quality: q,
                })
            });
            let scheme = if exact { "wishart/exact-gram" } else { "wishart/euler-maruyama" };
            let mut params = json!({"delta": delta, "m": m, "x0": start, "substeps": substeps});
            if let SamplerHook::SkewWishart { lambda, .. } = hook {
                params["lambda"] = json!(lambda);
            }
            collect(outs, times, seed, scheme.into(), params, vec![])
        }
        SamplerHook::DunklOrthogonal { frame, roots, k, lambda } => {
            let x = x0.as_vector()?;
            let n = frame.len();
            let l = *roots;
            let u0: Vec<f64> = frame.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect();
            let outs = run_paths(paths, seed, |rng| {
                let mut q = Quality::default();
                let mut us = vec![vec![0.0; n]; steps.len()];
                let mut per_root = vec![vec![0.0; l]; steps.len()];
                for i in 0..n {
                    if i < l {
                        let (xs, fs) = besq_path(2.0 * k[i] + 1.0, 1.0, u0[i] * u0[i], steps, rng, &mut q)?;
                        for j in 0..steps.len() {
                            us[j][i] = sign_of(u0[i]) * xs[j].sqrt();
                            per_root[j][i] = fs[j];
                        }
                    } else {
                        let mut u = u0[i];
                        for (j, interval) in steps.iter().enumerate() {
                            let h: f64 = interval.iter().sum();
                            u += h.sqrt() * gaussian(rng);
                            us[j][i] = u;
                        }
                    }
                }
                let states = us
                    .iter()
                    .map(|u| State::vector(&(0..n).map(|c| (0..n).map(|r| frame[r][c] * u[r]).sum()).collect::<Vec<f64>>()))
                    .collect();
                let functional = per_root.iter().map(|v| v.iter().sum()).collect();
                Ok(PathOut { states, functional, roots: per_root, quality: q })
            });
            collect(
                outs,
                times,
                seed,
                "dunkl_orthogonal/radial-bessel".into(),
                json!({"k": k, "lambda": lambda, "x0": x, "substeps": substeps}),
                frame[..l].to_vec(),
            )
        }
        SamplerHook::Brownian { .. } => Err(Error::precondition("Brownian paths have no radial part; use simulate_brownian")),
    }
}

/// Exact Brownian paths with constant drift `b`; the functional is zero.
pub fn simulate_brownian(drift: &[f64], x0: &State, times: &[f64], paths: usize, seed: u64) -> Result<PathEnsemble> {
    check_times(times)?;
    let start = x0.as_vector()?.to_vec();
    if start.len() != drift.len() {
        return Err(Error::domain("start point and drift differ in dimension"));
    }
    let outs = run_paths(paths, seed, |rng| {
        let mut x = start.clone();
        let mut prev = 0.0;
        let mut states = Vec::with_capacity(times.len());
        for &t in times {
            let h = t - prev;
            for (xi, bi) in x.iter_mut().zip(drift) {
                *xi += bi * h + h.sqrt() * gaussian(rng);
            }
            prev = t;
            states.push(State::vector(&x));
        }
        Ok(PathOut { states, functional: vec![0.0; times.len()], roots: vec![], quality: Quality::default() })
    });
    collect(outs, times, seed, "brownian/exact".into(), json!({"drift": drift, "x0": start}), vec![])
}
