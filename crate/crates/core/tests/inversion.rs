use std::sync::Arc;

use proptest::prelude::*;
use timeinv::inversion::*;
use timeinv::models::{apply_h_transform, model_from_json, HTransform, ProcessModel, State};
use timeinv::numerics::{integrate_1d, rel_diff, Tolerance};

fn m(doc: &str) -> ProcessModel {
    model_from_json(doc).unwrap()
}

const FACTORIZED: [&str; 11] = [
    r#"{"model":"brownian"}"#,
    r#"{"model":"brownian_drift","b":[0.7]}"#,
    r#"{"model":"bessel","nu":0.5,"sigma":1}"#,
    r#"{"model":"bessel","nu":1.5,"sigma":1}"#,
    r#"{"model":"squared_bessel","delta":3}"#,
    r#"{"model":"gen_dunkl1d","k":1,"lambda":0.5}"#,
    r#"{"model":"dunkl1d","k":0.75}"#,
    r#"{"model":"dunkl_orthogonal","n":3,"roots":[[1,1,0],[1,-1,0]],"k":[1,0.75],"lambda":[0.5,0.25]}"#,
    r#"{"model":"eigen_kmg","m":2,"base":{"model":"brownian"}}"#,
    r#"{"model":"wishart","delta":4,"m":2}"#,
    r#"{"model":"skew_wishart","delta":4,"m":2,"lambda":0.5}"#,
];

fn show(r: &CheckReport) -> String {
    let worst: Vec<String> = r.failures().iter().take(3).map(|d| format!("{d:?}")).collect();
    format!("{}\n{}", r.summary(), worst.join("\n"))
}

#[test]
fn every_factorized_model_passes_every_check() {
    for doc in FACTORIZED {
        let model = m(doc);
        for check in [Check::Factorization, Check::Homogeneity, Check::Htransform, Check::Semistable, Check::Euler] {
            let r = run_check(check, &model, None, None, None).unwrap();
            assert!(r.pass, "{}", show(&r));
        }
    }
}

#[test]
fn ornstein_uhlenbeck_is_rejected() {
    let ou = m(r#"{"model":"ornstein_uhlenbeck","theta":1}"#);
    let r = run_check(Check::Homogeneity, &ou, None, None, Some(1e-2)).unwrap();
    assert!(!r.pass && r.max_rel_err > 1e-2, "{}", r.summary());
    let r = run_check(Check::Semistable, &ou, None, None, None).unwrap();
    assert!(!r.pass);
    assert!(matches!(run_check(Check::Factorization, &ou, None, None, None), Err(timeinv::Error::Precondition(_))));
}

#[test]
fn bessel_homogeneity_error_is_tiny() {
    let b = m(r#"{"model":"bessel","nu":0.5,"sigma":1}"#);
    let r = run_check(Check::Homogeneity, &b, None, None, None).unwrap();
    assert!(r.max_rel_err <= 1e-9, "{}", r.summary());
}

#[test]
fn corrupted_theta_fails_condition_three() {
    let b = m(r#"{"model":"bessel","nu":1.5,"sigma":1}"#);
    let mut f = b.factorization().unwrap().clone();
    let beta = f.beta;
    f.log_theta = Arc::new(move |y: &State| Ok((beta + 0.1) * y.as_scalar()?.ln()));
    let bad = b.clone().with_factorization(f);
    let r = run_check(Check::Factorization, &bad, None, None, None).unwrap();
    assert!(!r.pass);
    assert!(!r.part("(d)").unwrap().pass);
    assert!(r.part("(b)").unwrap().pass && r.part("(c)").unwrap().pass && r.part("(e)").unwrap().pass);
}

#[test]
fn wishart_parts_all_pass() {
    let w = m(r#"{"model":"wishart","delta":4,"m":2}"#);
    let r = run_check(Check::Factorization, &w, None, None, None).unwrap();
    assert_eq!(r.parts.len(), 5);
    assert!(r.parts.iter().all(|p| p.pass), "{:?}", r.parts);
}

#[test]
fn htransform_identity_examples() {
    let b = m(r#"{"model":"bessel","nu":0.5,"sigma":1}"#);
    let (x, a, y) = (State::scalar(1.0), State::scalar(0.8), State::scalar(1.3));
    let q = compute_q(&b, &x, 1.0, 1.5, &a, &y).unwrap();
    assert!(rel_diff(q, inverted_density(&b, &x, 0.5, &a, &y).unwrap()) < 1e-10);

    let g = m(r#"{"model":"gen_dunkl1d","k":1,"lambda":0.5}"#);
    let a = State::scalar(-0.8);
    let q = compute_q(&g, &x, 1.0, 1.5, &a, &y).unwrap();
    assert!(rel_diff(q, inverted_density(&g, &x, 0.5, &a, &y).unwrap()) < 1e-9);
}

#[test]
fn h_invariance() {
    let pairs = [
        (r#"{"model":"bessel","nu":0.5,"sigma":1}"#, r#"{"model":"bessel_wide","nu":0.5,"c":1.2}"#, true),
        (r#"{"model":"brownian"}"#, r#"{"model":"brownian_drift","b":[0.7]}"#, true),
        (r#"{"model":"bessel","nu":0.5,"sigma":1}"#, r#"{"model":"bessel","nu":1.5,"sigma":1}"#, false),
    ];
    for (a, b, expect) in pairs {
        let r = run_check(Check::HInvariance, &m(a), Some(&m(b)), None, None).unwrap();
        assert_eq!(r.pass, expect, "{}", r.summary());
    }
    let e = run_check(Check::HInvariance, &m(r#"{"model":"bessel","nu":0.5}"#), Some(&m(r#"{"model":"brownian"}"#)), None, None);
    assert!(matches!(e, Err(timeinv::Error::Precondition(_))));
}

#[test]
fn wishart_semistable_and_euler() {
    let w = m(r#"{"model":"wishart","delta":4,"m":2}"#);
    assert_eq!(w.factorization().unwrap().beta, 1.0);
    assert!(run_check(Check::Semistable, &w, None, None, None).unwrap().pass);
    assert!(run_check(Check::Euler, &w, None, None, None).unwrap().pass);
}

#[test]
fn inverted_density_is_a_probability_density() {
    let b = m(r#"{"model":"bessel","nu":0.5,"sigma":1}"#);
    let (x, a) = (State::scalar(1.0), State::scalar(1.0));
    let tol = Tolerance { rel: 1e-10, abs: 1e-14 };
    let q = integrate_1d(|y| inverted_density(&b, &x, 1.0, &a, &State::scalar(y)).unwrap(), 0.0, f64::INFINITY, tol)
        .unwrap();
    assert!((q.value - 1.0).abs() < 1e-6, "{}", q.value);
}

#[test]
fn q_is_chapman_kolmogorov_in_the_window() {
    let tol = Tolerance { rel: 1e-10, abs: 1e-14 };
    for (doc, lower) in [
        (r#"{"model":"bessel","nu":0.5}"#, 0.0),
        (r#"{"model":"gen_dunkl1d","k":1,"lambda":0.5}"#, f64::NEG_INFINITY),
    ] {
        let model = m(doc);
        let x = State::scalar(1.0);
        let (s, u, v) = (0.4, 0.3, 0.7);
        for &(a, b) in &[(0.5, 1.0), (2.0, 0.5)] {
            let (a, b) = (State::scalar(a), State::scalar(b));
            let lhs = integrate_1d(
                |z| {
                    let z = State::scalar(z);
                    compute_q(&model, &x, s, s + u, &a, &z).unwrap()
                        * compute_q(&model, &x, s + u, s + u + v, &z, &b).unwrap()
                },
                lower,
                f64::INFINITY,
                tol,
            )
            .unwrap()
            .value;
            let rhs = compute_q(&model, &x, s, s + u + v, &a, &b).unwrap();
            assert!(rel_diff(lhs, rhs) < 1e-6, "{doc}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn report_json_is_stable() {
    let b = m(r#"{"model":"bessel","nu":0.5,"sigma":1}"#);
    let r1 = run_check(Check::Homogeneity, &b, None, None, None).unwrap().to_json();
    let r2 = run_check(Check::Homogeneity, &b, None, None, None).unwrap().to_json();
    assert_eq!(r1, r2);
    let v: serde_json::Value = serde_json::from_str(&r1).unwrap();
    assert_eq!(v["check"], "homogeneity");
    assert!(!v["details"].as_array().unwrap().is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn q_ignores_h_transforms(c in 0.1f64..2.0, kill in 0.0f64..3.0, s in 0.2f64..1.5, d in 0.1f64..1.0,
                              a in 0.3f64..2.5, b in 0.3f64..2.5) {
        let base = m(r#"{"model":"bessel","nu":0.5}"#);
        let h = HTransform::new(move |y: &State| Ok((1.0 + c * y.as_scalar()?).ln() + 0.3 * (c * y.as_scalar()?).sin()), kill).unwrap();
        let ht = apply_h_transform(&base, h);
        let (x, a, b) = (State::scalar(1.0), State::scalar(a), State::scalar(b));
        let q0 = log_q(&base, &x, s, s + d, &a, &b).unwrap();
        let q1 = log_q(&ht, &x, s, s + d, &a, &b).unwrap();
        prop_assert!((q0 - q1).abs() < 1e-10);
    }
}
