//! Time-inverted densities and the checks that decide whether a model has the time-inversion property.
//!
//! For a process started at `x`, the inverted process `Y_u = u^α X_{1/u}`
//! has transition densities
//!
//! ```text
//! q_{s,t}(a, b) = t^{-nα} p_{1/t}(x, b/t^α) p_{1/s-1/t}(b/t^α, a/s^α) / p_{1/s}(x, a/s^α)
//! ```
//!
//! and it is homogeneous exactly when `q_{s,t}` depends on `t - s` only.
//! With a symmetric factorization the homogeneous version is
//! `(Φ(x,b)/Φ(x,a)) e^{tρ(x)} p_t(a,b)`.

mod grid;
mod report;

pub use grid::{InversionGrid, DEFAULT_DELTA, DEFAULT_S, DEFAULT_SCALES};
pub use report::{CheckReport, Detail, PartSummary};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Factorization, ProcessModel, State};
use crate::numerics::{homogeneity_residual, rel_diff, rel_diff_log};
use grid::round;

/// `ln q_{s,t}^{(x)}(a, b)`.
pub fn log_q(model: &ProcessModel, x: &State, s: f64, t: f64, a: &State, b: &State) -> Result<f64> {
    if !(s > 0.0 && t > s && t.is_finite()) {
        return Err(Error::domain(format!("inversion window needs 0 < s < t, got ({s}, {t})")));
    }
    let alpha = model.alpha();
    let n = model.state_dim() as f64;
    let bt = b.scale(t.powf(-alpha));
    let a_s = a.scale(s.powf(-alpha));
    let denom = model.log_density(1.0 / s, x, &a_s)?;
    if denom == f64::NEG_INFINITY {
        return Err(Error::numeric(format!(
            "denominator p_(1/s)(x, a/s^alpha) vanishes for {}, s={s}, x={x}, a={a}",
            model.name()
        )));
    }
    let first = model.log_density(1.0 / t, x, &bt)?;
    if first == f64::NEG_INFINITY {
        return Ok(first);
    }
    let middle = model.log_density(1.0 / s - 1.0 / t, &bt, &a_s)?;
    Ok(-n * alpha * t.ln() + first + middle - denom)
}

/// `q_{s,t}^{(x)}(a, b)`; see [`log_q`].
pub fn compute_q(model: &ProcessModel, x: &State, s: f64, t: f64, a: &State, b: &State) -> Result<f64> {
    let l = log_q(model, x, s, t, a, b)?;
    if l > 709.0 {
        return Err(Error::numeric(format!("q overflows for {} (ln q = {l})", model.name())));
    }
    Ok(l.exp())
}

fn symmetric_factorization(model: &ProcessModel) -> Result<&Factorization> {
    let f = model
        .factorization()
        .ok_or_else(|| Error::precondition(format!("{} declares no factorization", model.name())))?;
    if !f.symmetric {
        return Err(Error::precondition(format!("{} does not declare a symmetric Φ", model.name())));
    }
    Ok(f)
}

/// `ln[(Φ(x,b)/Φ(x,a)) e^{tρ(x)} p_t(a,b)]` with `p` the homogeneous density
/// (any declared h-transform removed).
pub fn log_inverted_density(model: &ProcessModel, x: &State, t: f64, a: &State, b: &State) -> Result<f64> {
    let f = symmetric_factorization(model)?;
    model.domain().check_start(x)?;
    let p = model.log_base_density(t, a, b)?;
    if p == f64::NEG_INFINITY {
        return Ok(p);
    }
    Ok((f.log_phi)(x, b)? - (f.log_phi)(x, a)? + t * (f.rho)(x)? + p)
}

/// Transition density of the inverted process over a window of length `t`.
pub fn inverted_density(model: &ProcessModel, x: &State, t: f64, a: &State, b: &State) -> Result<f64> {
    let l = log_inverted_density(model, x, t, a, b)?;
    if l > 709.0 {
        return Err(Error::numeric(format!("inverted density overflows for {}", model.name())));
    }
    Ok(l.exp())
}

/// The checks the CLI and the suites can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Homogeneity,
    Factorization,
    Htransform,
    Semistable,
    Euler,
    HInvariance,
}

impl Check {
    pub const ALL: [Check; 6] =
        [Check::Homogeneity, Check::Factorization, Check::Htransform, Check::Semistable, Check::Euler, Check::HInvariance];

    pub fn name(self) -> &'static str {
        match self {
            Check::Homogeneity => "homogeneity",
            Check::Factorization => "factorization",
            Check::Htransform => "htransform",
            Check::Semistable => "semistable",
            Check::Euler => "euler",
            Check::HInvariance => "h-invariance",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            Check::Homogeneity => 1e-8,
            Check::Factorization => 1e-10,
            Check::Htransform | Check::HInvariance => 1e-9,
            Check::Semistable => 1e-12,
            Check::Euler => 1e-5,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::config(format!("unknown check '{s}'")))
    }
}

/// Run `check` with its default grid when `grid` is `None`. `against` is
/// the second model for [`Check::HInvariance`].
pub fn run_check(
    check: Check,
    model: &ProcessModel,
    against: Option<&ProcessModel>,
    grid: Option<&InversionGrid>,
    tol: Option<f64>,
) -> Result<CheckReport> {
    let owned;
    let grid = match grid {
        Some(g) => g,
        None => {
            owned = InversionGrid::standard(model.domain());
            &owned
        }
    };
    let tol = tol.unwrap_or(check.default_tolerance());
    match check {
        Check::Homogeneity => check_homogeneity(model, grid, tol),
        Check::Factorization => check_factorization(model, grid, tol),
        Check::Htransform => check_htransform_identity(model, grid, tol),
        Check::Semistable => check_semistable(model, grid, tol),
        Check::Euler => check_euler(model, grid, tol),
        Check::HInvariance => {
            let other = against.ok_or_else(|| Error::config("h-invariance needs a second model"))?;
            check_h_invariance(model, other, grid, tol)
        }
    }
}

fn eval(tasks: Vec<Task>) -> Vec<Detail> {
    tasks
        .into_par_iter()
        .map(|(point, f)| match f() {
            Ok((obs, exp, err)) => Detail::new(point, obs, exp, err),
            Err(e) => Detail::failed(point, e),
        })
        .collect()
}

type Task<'a> = (String, Box<dyn Fn() -> Result<(f64, f64, f64)> + Send + Sync + 'a>);

fn log_pair(obs: f64, exp: f64) -> (f64, f64, f64) {
    (obs, exp, rel_diff_log(obs, exp))
}

/// Compares `q` across windows of equal length. Values are reported as logs.
pub fn check_homogeneity(model: &ProcessModel, grid: &InversionGrid, tol: f64) -> Result<CheckReport> {
    grid.validate(model.domain())?;
    let windows: Vec<(f64, f64)> = grid.windows().collect();
    let mut tasks: Vec<Task> = Vec::new();
    for (i, &(s0, t0)) in windows.iter().enumerate() {
        // compare each window to the first earlier window with the same length
        let Some(&(s1, t1)) = windows[..i].iter().find(|(s, t)| ((t - s) - (t0 - s0)).abs() < 1e-12) else {
            continue;
        };
        for a in &grid.a_points {
            for b in &grid.b_points {
                let point = format!("s={s1},t={} vs s={s0},t={} a={a} b={b}", round(t1), round(t0));
                let x = &grid.x;
                tasks.push((
                    point,
                    Box::new(move || Ok(log_pair(log_q(model, x, s0, t0, a, b)?, log_q(model, x, s1, t1, a, b)?))),
                ));
            }
        }
    }
    if tasks.is_empty() {
        return Err(Error::config("homogeneity needs at least two windows of equal length"));
    }
    Ok(CheckReport::from_details("homogeneity", model.name(), grid.describe(), tol, eval(tasks)))
}

pub const FACTORIZATION_PARTS: [&str; 5] = ["(a)", "(b)", "(c)", "(d)", "(e)"];

/// (a) reconstruction of the density, (b) `Φ(λx,y) = Φ(x,λy)`,
/// (c) `ρ(λx) = λ^{2/α} ρ(x)`, (d) `θ(λy) = λ^β θ(y)`, (e) `Φ(x,y) = Φ(y,x)`
/// when the factorization is declared symmetric.
pub fn check_factorization(model: &ProcessModel, grid: &InversionGrid, tol: f64) -> Result<CheckReport> {
    let f = model
        .factorization()
        .ok_or_else(|| Error::precondition(format!("{} declares no factorization", model.name())))?;
    grid.validate(model.domain())?;
    let alpha = model.alpha();
    let n = model.state_dim();
    let starts = grid.all_points();
    let mut tasks: Vec<Task> = Vec::new();

    for &t in &grid.times() {
        for x in &starts {
            for y in &grid.b_points {
                tasks.push((
                    format!("(a) t={} x={x} y={y}", round(t)),
                    Box::new(move || {
                        Ok(log_pair(f.log_reconstruct(alpha, n, t, x, y)?, model.log_density(t, x, y)?))
                    }),
                ));
            }
        }
    }
    for &l in &grid.lambda_scales {
        for x in &starts {
            for y in &grid.b_points {
                tasks.push((
                    format!("(b) lambda={l} x={x} y={y}"),
                    Box::new(move || Ok(log_pair((f.log_phi)(&x.scale(l), y)?, (f.log_phi)(x, &y.scale(l))?))),
                ));
            }
        }
        for x in &starts {
            tasks.push((
                format!("(c) lambda={l} x={x}"),
                Box::new(move || {
                    let obs = (f.rho)(&x.scale(l))?;
                    let exp = l.powf(2.0 / alpha) * (f.rho)(x)?;
                    Ok((obs, exp, rel_diff(obs, exp)))
                }),
            ));
            tasks.push((
                format!("(d) lambda={l} y={x}"),
                Box::new(move || Ok(log_pair((f.log_theta)(&x.scale(l))?, f.beta * l.ln() + (f.log_theta)(x)?))),
            ));
        }
    }
    if f.symmetric {
        for x in &starts {
            for y in &grid.b_points {
                tasks.push((
                    format!("(e) x={x} y={y}"),
                    Box::new(move || Ok(log_pair((f.log_phi)(x, y)?, (f.log_phi)(y, x)?))),
                ));
            }
        }
    }
    let labels: &[&str] = if f.symmetric { &FACTORIZATION_PARTS } else { &FACTORIZATION_PARTS[..4] };
    Ok(CheckReport::from_details("factorization", model.name(), grid.describe(), tol, eval(tasks)).with_parts(labels))
}

/// `q_{s,s+t}(a,b)` from the literal formula against
/// `(Φ(x,b)/Φ(x,a)) e^{tρ(x)} p_t(a,b)`.
pub fn check_htransform_identity(model: &ProcessModel, grid: &InversionGrid, tol: f64) -> Result<CheckReport> {
    symmetric_factorization(model)?;
    grid.validate(model.domain())?;
    let x = &grid.x;
    let mut tasks: Vec<Task> = Vec::new();
    for (s, t) in grid.windows() {
        for a in &grid.a_points {
            for b in &grid.b_points {
                tasks.push((
                    format!("s={s},t={} a={a} b={b}", round(t)),
                    Box::new(move || {
                        Ok(log_pair(log_q(model, x, s, t, a, b)?, log_inverted_density(model, x, t - s, a, b)?))
                    }),
                ));
            }
        }
    }
    Ok(CheckReport::from_details("htransform", model.name(), grid.describe(), tol, eval(tasks)))
}

/// `q` of two models compared pointwise.
pub fn check_h_invariance(
    model_a: &ProcessModel,
    model_b: &ProcessModel,
    grid: &InversionGrid,
    tol: f64,
) -> Result<CheckReport> {
    if model_a.domain() != model_b.domain() || model_a.alpha() != model_b.alpha() {
        return Err(Error::precondition(format!(
            "{} and {} differ in domain or degree",
            model_a.name(),
            model_b.name()
        )));
    }
    grid.validate(model_a.domain())?;
    let x = &grid.x;
    let mut tasks: Vec<Task> = Vec::new();
    for (s, t) in grid.windows() {
        for a in &grid.a_points {
            for b in &grid.b_points {
                tasks.push((
                    format!("s={s},t={} a={a} b={b}", round(t)),
                    Box::new(move || Ok(log_pair(log_q(model_a, x, s, t, a, b)?, log_q(model_b, x, s, t, a, b)?))),
                ));
            }
        }
    }
    let name = format!("{} vs {}", model_a.name(), model_b.name());
    Ok(CheckReport::from_details("h-invariance", &name, grid.describe(), tol, eval(tasks)))
}

/// `p_t(x,y) = t^{-nγ} p_1(x/t^γ, y/t^γ)` with `γ = α/2`, on the
/// homogeneous density.
pub fn check_semistable(model: &ProcessModel, grid: &InversionGrid, tol: f64) -> Result<CheckReport> {
    grid.validate(model.domain())?;
    let gamma = 0.5 * model.alpha();
    let n = model.state_dim() as f64;
    let starts = grid.all_points();
    let mut tasks: Vec<Task> = Vec::new();
    for &t in &grid.times() {
        for x in &starts {
            for y in &grid.b_points {
                tasks.push((
                    format!("t={} x={x} y={y}", round(t)),
                    Box::new(move || {
                        let c = t.powf(-gamma);
                        let obs = model.log_base_density(t, x, y)?;
                        let exp = -n * gamma * t.ln() + model.log_base_density(1.0, &x.scale(c), &y.scale(c))?;
                        Ok(log_pair(obs, exp))
                    }),
                ));
            }
        }
    }
    Ok(CheckReport::from_details("semistable", model.name(), grid.describe(), tol, eval(tasks)))
}

/// Euler residuals `|Σ xᵢ∂ᵢf − d·f| / (|f|·max(1, d))` of `ρ` (degree `2/α`)
/// and `θ` (degree `β`), derivatives by central differences.
pub fn check_euler(model: &ProcessModel, grid: &InversionGrid, tol: f64) -> Result<CheckReport> {
    let f = model
        .factorization()
        .ok_or_else(|| Error::precondition(format!("{} declares no factorization", model.name())))?;
    grid.validate(model.domain())?;
    let rho_degree = 2.0 / model.alpha();
    let mut tasks: Vec<Task> = Vec::new();
    for p in grid.all_points() {
        let q = p.clone();
        tasks.push((
            format!("rho degree={rho_degree} x={p}"),
            Box::new(move || euler_residual(&p, rho_degree, |s| (f.rho)(s))),
        ));
        tasks.push((
            format!("theta degree={} y={q}", f.beta),
            Box::new(move || euler_residual(&q, f.beta, |s| (f.log_theta)(s).map(f64::exp))),
        ));
    }
    Ok(CheckReport::from_details("euler", model.name(), grid.describe(), tol, eval(tasks)))
}

fn euler_residual(p: &State, degree: f64, g: impl Fn(&State) -> Result<f64>) -> Result<(f64, f64, f64)> {
    let comps = p.components();
    let value = g(p)?;
    let failure = std::cell::RefCell::new(None);
    let res = homogeneity_residual(
        |c: &[f64]| match p.with_components(c).and_then(|s| g(&s)) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        &comps,
        degree,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let scale = value.abs() * degree.abs().max(1.0);
    let rel = if res == 0.0 { 0.0 } else { res / scale.max(1e-300) };
    Ok((res, 0.0, rel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::model_from_json;

    fn m(doc: &str) -> ProcessModel {
        model_from_json(doc).unwrap()
    }

    #[test]
    fn q_depends_on_window_length_only_for_bessel() {
        let b = m(r#"{"model":"bessel","nu":0.5,"sigma":1}"#);
        let (x, a, y) = (State::scalar(1.0), State::scalar(0.8), State::scalar(1.3));
        let q1 = compute_q(&b, &x, 0.4, 0.9, &a, &y).unwrap();
        let q2 = compute_q(&b, &x, 1.1, 1.6, &a, &y).unwrap();
        assert!(rel_diff(q1, q2) < 1e-10);

        let ou = m(r#"{"model":"ornstein_uhlenbeck","theta":1}"#);
        let o1 = compute_q(&ou, &x, 0.4, 0.9, &a, &y).unwrap();
        let o2 = compute_q(&ou, &x, 1.1, 1.6, &a, &y).unwrap();
        assert!(rel_diff(o1, o2) > 0.01);
    }

    #[test]
    fn start_at_origin_gives_base_density() {
        let b = m(r#"{"model":"bessel","nu":0.5}"#);
        let (x, a, y) = (State::scalar(0.0), State::scalar(0.8), State::scalar(1.3));
        let q = compute_q(&b, &x, 0.4, 0.9, &a, &y).unwrap();
        let p = b.density(0.5, &a, &y).unwrap();
        assert!(rel_diff(q, p) < 1e-12);
        assert!(rel_diff(inverted_density(&b, &x, 0.5, &a, &y).unwrap(), p) < 1e-14);
    }

    #[test]
    fn vanishing_denominator_is_numeric_failure() {
        let g = m(r#"{"model":"gen_dunkl1d","k":1,"lambda":0}"#);
        let e = log_q(&g, &State::scalar(1.0), 0.5, 1.0, &State::scalar(-1.0), &State::scalar(1.0)).unwrap_err();
        assert!(matches!(e, Error::Numeric(ref s) if s.contains("denominator")), "{e}");
    }

    #[test]
    fn check_names_roundtrip() {
        for c in Check::ALL {
            assert_eq!(c.name().parse::<Check>().unwrap(), c);
        }
        assert!("nope".parse::<Check>().is_err());
    }

    #[test]
    fn euler_for_constant_theta_is_exact() {
        let bm = m(r#"{"model":"brownian"}"#);
        let r = check_euler(&bm, &InversionGrid::standard(bm.domain()), 1e-5).unwrap();
        assert!(r.pass);
        assert!(r.details.iter().filter(|d| d.point.starts_with("theta")).all(|d| d.rel_err == 0.0));
    }
}
