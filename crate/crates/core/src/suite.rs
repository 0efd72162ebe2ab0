//! The verification battery: analytic criteria (factorization, homogeneity,
//! inverted densities, h-invariance, semi-stability, the radial ODE, special
//! function reductions, model reductions, normalization and
//! Chapman–Kolmogorov) and the Monte Carlo criteria.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inversion::{check_h_invariance, inverted_density, run_check, Check, CheckReport, InversionGrid};
use crate::matrix_special::{bessel_matrix, gamma_m, partitions, zonal, MAX_DEGREE};
use crate::models::{model_from_json, watanabe_ode_residual, watanabe_phi, ProcessModel, State};
use crate::numerics::{
    bessel_i, gamma, integrate_1d, ks_one_sample_density, rel_diff, EmpiricalSample, Tolerance,
};
use crate::simulate::{
    invert_paths_on, mc_conditional_functional, reciprocal_times, sample_besq, simulate, RngContract,
};
use crate::symmat::SymMatrix;

/// One measured quantity and its acceptance bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Item {
    pub label: String,
    pub value: f64,
    /// `"<="` or `">"`.
    pub relation: &'static str,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Item {
    pub fn at_most(label: impl Into<String>, value: f64, threshold: f64) -> Self {
        Item { label: label.into(), value, relation: "<=", threshold, pass: value <= threshold, note: None }
    }

    pub fn above(label: impl Into<String>, value: f64, threshold: f64) -> Self {
        Item { label: label.into(), value, relation: ">", threshold, pass: value > threshold, note: None }
    }

    pub fn failed(label: impl Into<String>, relation: &'static str, threshold: f64, e: &Error) -> Self {
        Item {
            label: label.into(),
            value: f64::NAN,
            relation,
            threshold,
            pass: false,
            note: Some(e.to_string()),
        }
    }

    fn from_report(r: &CheckReport) -> Self {
        let mut it = Item::at_most(format!("{} {}", r.check, r.model), r.max_rel_err, r.tolerance);
        it.pass = r.pass;
        if let Some(d) = r.failures().first() {
            it.note = Some(match &d.error {
                Some(e) => format!("{}: {e}", d.point),
                None => format!("worst at {}", d.point),
            });
        }
        it
    }

    fn from_result(label: &str, threshold: f64, r: Result<CheckReport>) -> Self {
        match r {
            Ok(r) => Item::from_report(&r),
            Err(e) => Item::failed(label, "<=", threshold, &e),
        }
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {:.3e} {} {:.1e}",
            if self.pass { "ok  " } else { "FAIL" },
            self.label,
            self.value,
            self.relation,
            self.threshold
        )?;
        if let Some(n) = &self.note {
            write!(f, " ({n})")?;
        }
        Ok(())
    }
}

/// An acceptance criterion: passes when every item does.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub id: String,
    pub title: String,
    pub pass: bool,
    pub items: Vec<Item>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

impl Criterion {
    pub fn new(id: impl Into<String>, title: impl Into<String>, items: Vec<Item>) -> Self {
        let pass = !items.is_empty() && items.iter().all(|i| i.pass);
        Criterion { id: id.into(), title: title.into(), pass, items, seconds: None }
    }

    /// `PASS criterion 3 (inverted density identity): 4 items [2.1 s]`,
    /// followed by the failing items when there are any.
    pub fn line(&self) -> String {
        let mut s = format!(
            "{} criterion {} ({}): {} items",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.items.len()
        );
        if let Some(t) = self.seconds {
            s.push_str(&format!(" [{t:.1} s]"));
        }
        for it in self.items.iter().filter(|i| !i.pass) {
            s.push_str(&format!("\n    {it}"));
        }
        s
    }
}

fn timed(f: impl FnOnce() -> Criterion) -> Criterion {
    let start = Instant::now();
    let mut c = f();
    c.seconds = Some(start.elapsed().as_secs_f64());
    c
}

fn m(doc: &str) -> ProcessModel {
    model_from_json(doc).expect("built-in model config is valid")
}

/// Catalog entries with a declared factorization, as JSON configs.
pub const FACTORIZED: [&str; 12] = [
    r#"{"model":"brownian","n":1}"#,
    r#"{"model":"brownian_drift","b":[0.7]}"#,
    r#"{"model":"bessel","nu":0.5,"sigma":1}"#,
    r#"{"model":"bessel","nu":1.5,"sigma":1}"#,
    r#"{"model":"bessel_wide","nu":0.5,"c":1.2}"#,
    r#"{"model":"squared_bessel","delta":3}"#,
    r#"{"model":"gen_dunkl1d","k":1,"lambda":0.5}"#,
    r#"{"model":"dunkl1d","k":0.75}"#,
    r#"{"model":"dunkl_orthogonal","n":3,"roots":[[1,1,0],[1,-1,0]],"k":[1,0.75],"lambda":[0.5,0.25]}"#,
    r#"{"model":"eigen_kmg","m":2,"base":{"model":"brownian"}}"#,
    r#"{"model":"wishart","delta":4,"m":2}"#,
    r#"{"model":"skew_wishart","delta":4,"m":2,"lambda":0.5}"#,
];

pub const OU: &str = r#"{"model":"ornstein_uhlenbeck","theta":1}"#;

fn per_model(check: Check, docs: &[&str], tol: f64) -> Vec<Item> {
    docs.par_iter()
        .map(|d| {
            let model = m(d);
            Item::from_result(&format!("{check} {}", model.name()), tol, run_check(check, &model, None, None, Some(tol)))
        })
        .collect()
}

pub fn criterion_1() -> Criterion {
    Criterion::new("1", "factorization suite", per_model(Check::Factorization, &FACTORIZED, 1e-10))
}

pub fn criterion_2() -> Criterion {
    let mut items = per_model(Check::Homogeneity, &FACTORIZED, 1e-8);
    let ou = m(OU);
    items.push(match run_check(Check::Homogeneity, &ou, None, None, Some(1e-2)) {
        Ok(r) => Item::above(format!("homogeneity {} must fail", ou.name()), r.max_rel_err, 1e-2),
        Err(e) => Item::failed("homogeneity ou", ">", 1e-2, &e),
    });
    Criterion::new("2", "homogeneity discrimination", items)
}

pub fn criterion_3() -> Criterion {
    let docs = [
        r#"{"model":"bessel","nu":0.5,"sigma":1}"#,
        r#"{"model":"squared_bessel","delta":3}"#,
        r#"{"model":"gen_dunkl1d","k":1,"lambda":0.5}"#,
        r#"{"model":"wishart","delta":4,"m":2}"#,
    ];
    Criterion::new("3", "inverted density identity", per_model(Check::Htransform, &docs, 1e-9))
}

pub fn criterion_4() -> Criterion {
    let pairs = [
        (r#"{"model":"bessel","nu":0.5,"sigma":1}"#, r#"{"model":"bessel_wide","nu":0.5,"c":1.2}"#),
        (r#"{"model":"bessel","nu":1.5,"sigma":1}"#, r#"{"model":"bessel_wide","nu":1.5,"c":1.2}"#),
        (r#"{"model":"brownian","n":1}"#, r#"{"model":"brownian_drift","b":[0.7]}"#),
    ];
    let items = pairs
        .par_iter()
        .map(|(a, b)| {
            let (a, b) = (m(a), m(b));
            let grid = InversionGrid::standard(a.domain());
            Item::from_result(&format!("{} vs {}", a.name(), b.name()), 1e-9, check_h_invariance(&a, &b, &grid, 1e-9))
        })
        .collect();
    Criterion::new("4", "h-invariance", items)
}

pub fn criterion_5() -> Criterion {
    let mut items = per_model(Check::Semistable, &FACTORIZED, 1e-12);
    let ou = m(OU);
    items.push(match run_check(Check::Semistable, &ou, None, None, Some(1e-12)) {
        Ok(r) => {
            let mut it = Item::above(format!("semistable {} must fail", ou.name()), r.max_rel_err, 1e-12);
            it.pass = !r.pass && it.pass;
            it
        }
        Err(e) => Item::failed("semistable ou", ">", 1e-12, &e),
    });
    Criterion::new("5", "semi-stability", items)
}

pub fn criterion_6() -> Criterion {
    let mut items = Vec::new();
    for &nu in &[0.5, 1.5] {
        for &ratio in &[0.5, 1.0, 2.0] {
            for &z in &[0.25, 0.5, 1.0, 2.0, 4.0] {
                let label = format!("nu={nu} k/sigma={ratio} z={z}");
                let r = watanabe_ode_residual(nu, ratio, 1.0, z)
                    .and_then(|res| Ok(res.abs() / watanabe_phi(nu, ratio, 1.0, z)?));
                items.push(match r {
                    Ok(v) => Item::at_most(label, v, 1e-6),
                    Err(e) => Item::failed(label, "<=", 1e-6, &e),
                });
            }
        }
    }
    Criterion::new("6", "radial ODE", items)
}

pub fn criterion_7() -> Criterion {
    let mut items = Vec::new();
    for &nu in &[0.5, 1.0, 2.5] {
        for &x in &[0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let label = format!("matrix Bessel m=1 nu={nu} x={x}");
            let r = bessel_matrix(nu, &SymMatrix::diag(&[x]), MAX_DEGREE)
                .and_then(|a| Ok(rel_diff(a, bessel_i(nu, 2.0 * x.sqrt())?)));
            items.push(match r {
                Ok(v) => Item::at_most(label, v, 1e-10),
                Err(e) => Item::failed(label, "<=", 1e-10, &e),
            });
        }
    }
    let spectra: [&[f64]; 4] = [&[1.7], &[0.3, 1.2], &[0.5, -0.25, 2.0], &[0.9, 1.1, 0.2, -0.6]];
    for eig in spectra {
        for k in 0..=6 {
            let label = format!("zonal sum k={k} m={}", eig.len());
            let r = partitions(k, eig.len()).and_then(|ps| {
                let mut s = 0.0;
                for p in &ps {
                    s += zonal(p, eig)?;
                }
                Ok(rel_diff(s, eig.iter().sum::<f64>().powi(k as i32)))
            });
            items.push(match r {
                Ok(v) => Item::at_most(label, v, 1e-10),
                Err(e) => Item::failed(label, "<=", 1e-10, &e),
            });
        }
    }
    for &a in &[0.3, 1.0, 2.5, 7.25] {
        let label = format!("Gamma_1({a}) = Gamma({a})");
        items.push(match gamma_m(1, a) {
            Ok(g) => Item::at_most(label, rel_diff(g, gamma(a)), 1e-14),
            Err(e) => Item::failed(label, "<=", 1e-14, &e),
        });
    }
    Criterion::new("7", "special function reductions", items)
}

fn pointwise(label: String, a: Result<f64>, b: Result<f64>, tol: f64) -> Item {
    match (a, b) {
        (Ok(a), Ok(b)) => Item::at_most(label, rel_diff(a, b), tol),
        (Err(e), _) | (_, Err(e)) => Item::failed(label, "<=", tol, &e),
    }
}

pub fn criterion_8() -> Criterion {
    let mut items = Vec::new();
    let pts = [(1.0, 1.0, 1.0), (0.5, 2.0, 0.3), (2.0, 0.5, 1.7), (0.3, 1.2, 2.5)];
    for &delta in &[0.6, 3.0, 4.5] {
        let w = m(&format!(r#"{{"model":"wishart","delta":{delta},"m":1}}"#));
        let q = m(&format!(r#"{{"model":"squared_bessel","delta":{delta}}}"#));
        for &(t, x, y) in &pts {
            let (xm, ym) = (State::Matrix(SymMatrix::diag(&[x])), State::Matrix(SymMatrix::diag(&[y])));
            items.push(pointwise(
                format!("wishart(delta={delta}, m=1) = squared_bessel at t={t} x={x} y={y}"),
                w.density(t, &xm, &ym),
                q.density(t, &State::scalar(x), &State::scalar(y)),
                1e-10,
            ));
        }
    }
    for &k in &[0.75, 1.0, 2.0] {
        let g = m(&format!(r#"{{"model":"gen_dunkl1d","k":{k},"lambda":0}}"#));
        let b = m(&format!(r#"{{"model":"bessel","nu":{},"sigma":1}}"#, k - 0.5));
        let d = m(&format!(r#"{{"model":"dunkl1d","k":{k}}}"#));
        let gk = m(&format!(r#"{{"model":"gen_dunkl1d","k":{k},"lambda":{k}}}"#));
        for &(t, x, y) in &pts {
            let (xs, ys) = (State::scalar(x), State::scalar(y));
            items.push(pointwise(
                format!("gen_dunkl1d(k={k}, lambda=0) = bessel at t={t} x={x} y={y}"),
                g.density(t, &xs, &ys),
                b.density(t, &xs, &ys),
                1e-10,
            ));
            let ny = State::scalar(-y);
            items.push(pointwise(
                format!("dunkl1d(k={k}) = gen_dunkl1d(k, k) at t={t} x={x} y=-{y}"),
                d.density(t, &xs, &ny),
                gk.density(t, &xs, &ny),
                1e-10,
            ));
        }
    }
    Criterion::new("8", "model reductions", items)
}

const QUAD: Tolerance = Tolerance { rel: 1e-10, abs: 1e-14 };

fn integral_over(lower: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    Ok(integrate_1d(f, lower, f64::INFINITY, QUAD)?.value)
}

/// `∫∫_{y1 < y2} f(y1, y2)`.
fn chamber_integral(f: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let inner = Tolerance { rel: 1e-11, abs: 1e-15 };
    let failure = std::sync::Mutex::new(None);
    let v = integrate_1d(
        |y2| match integrate_1d(|y1| f(y1, y2), f64::NEG_INFINITY, y2, inner) {
            Ok(q) => q.value,
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                f64::NAN
            }
        },
        f64::NEG_INFINITY,
        f64::INFINITY,
        QUAD,
    );
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(v?.value)
}

pub fn criterion_9() -> Criterion {
    let one_d = [
        (r#"{"model":"bessel","nu":0.5,"sigma":1}"#, 0.0),
        (r#"{"model":"bessel_wide","nu":0.5,"c":1.2}"#, 0.0),
        (r#"{"model":"squared_bessel","delta":3}"#, 0.0),
        (r#"{"model":"gen_dunkl1d","k":1,"lambda":0.5}"#, f64::NEG_INFINITY),
    ];
    let grid = [0.5, 1.0, 2.0];
    let times = [(0.3, 0.7), (0.7, 0.3), (0.3, 0.3), (0.7, 0.7)];
    let mut jobs: Vec<Box<dyn Fn() -> Item + Send + Sync>> = Vec::new();
    for (doc, lower) in one_d {
        let model = std::sync::Arc::new(m(doc));
        let starts: Vec<f64> = if lower < 0.0 { vec![-2.0, -0.5, 0.5, 1.0, 2.0] } else { grid.to_vec() };
        for &x in &starts {
            for &t in &[0.3, 0.7, 1.0] {
                let model = model.clone();
                jobs.push(Box::new(move || {
                    let label = format!("mass {} t={t} x={x}", model.name());
                    let xs = State::scalar(x);
                    let r = integral_over(lower, |y| model.density(t, &xs, &State::scalar(y)).unwrap_or(f64::NAN));
                    match r {
                        Ok(v) => Item::at_most(label, (v - 1.0).abs(), 1e-6),
                        Err(e) => Item::failed(label, "<=", 1e-6, &e),
                    }
                }));
            }
        }
        for &x in &grid {
            for &y in &grid {
                for &(s, t) in &times {
                    let model = model.clone();
                    jobs.push(Box::new(move || {
                        let label = format!("CK {} s={s} t={t} x={x} y={y}", model.name());
                        let (xs, ys) = (State::scalar(x), State::scalar(y));
                        let lhs = integral_over(lower, |z| {
                            let zs = State::scalar(z);
                            model.density(s, &xs, &zs).unwrap_or(f64::NAN) * model.density(t, &zs, &ys).unwrap_or(f64::NAN)
                        });
                        pointwise(label, lhs, model.density(s + t, &xs, &ys), 1e-6)
                    }));
                }
            }
        }
    }
    let kmg = std::sync::Arc::new(m(r#"{"model":"eigen_kmg","m":2,"base":{"model":"brownian"}}"#));
    let pts = kmg.domain().standard_points();
    for x in pts.clone() {
        let k2 = kmg.clone();
        let xm = x.clone();
        jobs.push(Box::new(move || {
            let label = format!("mass {} t=0.7 x={xm}", k2.name());
            let r = chamber_integral(|a, b| k2.density(0.7, &xm, &State::vector(&[a, b])).unwrap_or(f64::NAN));
            match r {
                Ok(v) => Item::at_most(label, (v - 1.0).abs(), 1e-6),
                Err(e) => Item::failed(label, "<=", 1e-6, &e),
            }
        }));
        for y in pts.clone() {
            for &(s, t) in &times[..2] {
                let (k2, xm, ym) = (kmg.clone(), x.clone(), y.clone());
                jobs.push(Box::new(move || {
                    let label = format!("CK {} s={s} t={t} x={xm} y={ym}", k2.name());
                    let lhs = chamber_integral(|a, b| {
                        let z = State::vector(&[a, b]);
                        k2.density(s, &xm, &z).unwrap_or(f64::NAN) * k2.density(t, &z, &ym).unwrap_or(f64::NAN)
                    });
                    pointwise(label, lhs, k2.density(s + t, &xm, &ym), 1e-6)
                }));
            }
        }
    }
    let items = jobs.par_iter().map(|j| j()).collect();
    Criterion::new("9", "normalization and Chapman-Kolmogorov", items)
}

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McConfig {
    pub paths: usize,
    pub seed: u64,
    /// Sub-steps per grid interval for the functional-driven tests.
    pub substeps: usize,
    pub bins: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { paths: 50_000, seed: 42, substeps: 128, bins: 10 }
    }
}

fn ks_item(label: &str, sample: Vec<f64>, density: impl Fn(f64) -> f64, lower: f64) -> Item {
    let r = EmpiricalSample::new(sample).and_then(|s| ks_one_sample_density(&s, density, lower));
    match r {
        Ok(k) => {
            let mut it = Item::above(format!("{label} KS p-value"), k.p_value, 0.01);
            it.note = Some(format!("D = {:.4}", k.statistic));
            it
        }
        Err(e) => Item::failed(label, ">", 0.01, &e),
    }
}

fn z_item(label: String, observed: f64, expected: f64, se: f64) -> Item {
    let z = if se > 0.0 { (observed - expected).abs() / se } else { f64::INFINITY };
    let mut it = Item::at_most(label, z, 3.0);
    it.note = Some(format!("observed {observed:.5}, expected {expected:.5}, SE {se:.2e}"));
    it
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn mc_besq(cfg: &McConfig) -> Result<Vec<Item>> {
    let model = m(r#"{"model":"squared_bessel","delta":3}"#);
    let mut rng = RngContract::new(cfg.seed, 2, 0).rng();
    let draws: Vec<f64> = (0..cfg.paths).map(|_| sample_besq(3.0, 1.0, 1.0, &mut rng)).collect::<Result<_>>()?;
    let x = State::scalar(1.0);
    Ok(vec![ks_item(
        "(a) BESQ(3) exact draws from 1 at t=1",
        draws,
        |y| model.density(1.0, &x, &State::scalar(y)).unwrap_or(f64::NAN),
        0.0,
    )])
}

fn mc_dunkl(cfg: &McConfig) -> Result<Vec<Item>> {
    let model = m(r#"{"model":"gen_dunkl1d","k":1,"lambda":0.5}"#);
    let x = State::scalar(1.0);
    let e = simulate(&model, &x, &[1.0], cfg.substeps, cfg.paths, cfg.seed.wrapping_add(1))?;
    Ok(vec![ks_item(
        "(b) gen_dunkl1d(k=1, lambda=0.5) skew product from 1 at t=1",
        e.scalar_marginal(0)?,
        |y| model.density(1.0, &x, &State::scalar(y)).unwrap_or(f64::NAN),
        f64::NEG_INFINITY,
    )])
}

fn mc_conditional(cfg: &McConfig) -> Result<Vec<Item>> {
    let rows = mc_conditional_functional(0.5, 0.375, 1.0, 1.0, cfg.paths, cfg.substeps, cfg.bins, cfg.seed.wrapping_add(2))?;
    Ok(rows
        .iter()
        .map(|r| {
            z_item(
                format!("(c) E[exp(-2 lambda A) | y in [{:.3}, {:.3}]]", r.y_low, r.y_high),
                r.empirical,
                r.analytic,
                r.standard_error,
            )
        })
        .collect())
}

fn mc_wishart_trace(cfg: &McConfig) -> Result<Vec<Item>> {
    let model = m(r#"{"model":"wishart","delta":4,"m":2}"#);
    let x = State::Matrix(SymMatrix::identity(2));
    let e = simulate(&model, &x, &[0.5, 1.0], 1, cfg.paths, cfg.seed.wrapping_add(3))?;
    let mut items = Vec::new();
    for (j, &t) in e.times.iter().enumerate() {
        let tr: Vec<f64> = e.marginal(j).iter().map(|s| s.as_matrix().map(|a| a.trace())).collect::<Result<_>>()?;
        let (mean, se) = mean_se(&tr);
        items.push(z_item(format!("(d) wishart(4,2) E[Tr X_t] at t={t}"), mean, 2.0 + 8.0 * t, se));
    }
    Ok(items)
}

fn mc_skew_wishart(cfg: &McConfig) -> Result<Vec<Item>> {
    let model = m(r#"{"model":"skew_wishart","delta":3,"m":1,"lambda":0.5}"#);
    let x = State::Matrix(SymMatrix::diag(&[1.0]));
    let e = simulate(&model, &x, &[1.0], cfg.substeps, cfg.paths, cfg.seed.wrapping_add(4))?;
    let neg = e
        .marginal(0)
        .iter()
        .map(|s| s.as_matrix().map(|a| a.get(0, 0) < 0.0))
        .collect::<Result<Vec<bool>>>()?;
    let frac = neg.iter().filter(|&&b| b).count() as f64 / neg.len() as f64;
    let analytic = integral_over(0.0, |y| {
        model.density(1.0, &x, &State::Matrix(SymMatrix::diag(&[-y]))).unwrap_or(f64::NAN)
    })?;
    let se = (analytic * (1.0 - analytic) / neg.len() as f64).sqrt();
    Ok(vec![z_item("(e) skew_wishart(3,1,0.5) negative fraction at t=1".into(), frac, analytic, se)])
}

fn mc_inversion(cfg: &McConfig) -> Result<Vec<Item>> {
    let u = [0.5, 1.0, 2.0];
    let times = reciprocal_times(&u);
    let x = State::scalar(1.0);
    let zero = State::scalar(0.0);
    let mut items = Vec::new();
    for (i, (doc, lower)) in [
        (r#"{"model":"bessel","nu":0.5,"sigma":1}"#, 0.0),
        (r#"{"model":"gen_dunkl1d","k":1,"lambda":0.5}"#, f64::NEG_INFINITY),
    ]
    .into_iter()
    .enumerate()
    {
        let model = m(doc);
        let e = simulate(&model, &x, &times, cfg.substeps, cfg.paths, cfg.seed.wrapping_add(5 + i as u64))?;
        let y = invert_paths_on(&e, model.alpha(), &u)?;
        let j = y.time_index(2.0)?;
        items.push(ks_item(
            &format!("(f) u X(1/u) at u=2 for {}", model.name()),
            y.scalar_marginal(j)?,
            |b| inverted_density(&model, &x, 2.0, &zero, &State::scalar(b)).unwrap_or(f64::NAN),
            lower,
        ));
    }
    Ok(items)
}

pub fn criterion_10(cfg: &McConfig) -> Criterion {
    type Part = fn(&McConfig) -> Result<Vec<Item>>;
    let parts: [(&str, Part); 6] = [
        ("(a) BESQ sampler", mc_besq),
        ("(b) skew product", mc_dunkl),
        ("(c) conditional functional", mc_conditional),
        ("(d) Wishart trace", mc_wishart_trace),
        ("(e) skew-Wishart sign", mc_skew_wishart),
        ("(f) inversion law", mc_inversion),
    ];
    let items = parts
        .iter()
        .flat_map(|(label, f)| f(cfg).unwrap_or_else(|e| vec![Item::failed(*label, "<=", 0.0, &e)]))
        .collect();
    Criterion::new("10", "Monte Carlo battery", items)
}

/// Which criteria to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Analytic,
    Montecarlo,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Suite::Analytic),
            "montecarlo" => Ok(Suite::Montecarlo),
            "all" => Ok(Suite::All),
            _ => Err(Error::config(format!("unknown suite '{s}' (expected analytic, montecarlo or all)"))),
        }
    }
}

/// Aggregate result of a suite run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub config: McConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub pass: bool,
    pub criteria: Vec<Criterion>,
}

/// Runs the suite. With `timing` off the report carries neither timestamps
/// nor durations and is byte-identical across runs.
pub fn run_suite(suite: Suite, cfg: &McConfig, timing: bool) -> SuiteReport {
    let analytic: [fn() -> Criterion; 9] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
    ];
    let mut criteria = Vec::new();
    if matches!(suite, Suite::Analytic | Suite::All) {
        criteria.extend(analytic.iter().map(timed));
    }
    if matches!(suite, Suite::Montecarlo | Suite::All) {
        criteria.push(timed(|| criterion_10(cfg)));
    }
    if !timing {
        for c in &mut criteria {
            c.seconds = None;
        }
    }
    let timestamp = timing.then(|| {
        std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
    });
    SuiteReport { suite, config: *cfg, timestamp, pass: criteria.iter().all(|c| c.pass), criteria }
}
