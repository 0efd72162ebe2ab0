//! JSON model descriptions: `{"model": <name>, ...parameters}`.

use serde::{Deserialize, Serialize};

use super::{catalog, ProcessModel};
use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

/// A catalog entry with its parameters. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", deny_unknown_fields)]
pub enum ModelConfig {
    #[serde(rename = "brownian")]
    Brownian {
        #[serde(default = "one_usize")]
        n: usize,
    },
    #[serde(rename = "brownian_drift")]
    BrownianDrift { b: Vec<f64> },
    #[serde(rename = "bessel")]
    Bessel {
        nu: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
    #[serde(rename = "bessel_wide")]
    BesselWide { nu: f64, c: f64 },
    #[serde(rename = "squared_bessel")]
    SquaredBessel { delta: f64 },
    #[serde(rename = "gen_dunkl1d")]
    GenDunkl1d { k: f64, lambda: f64 },
    #[serde(rename = "dunkl1d")]
    Dunkl1d { k: f64 },
    #[serde(rename = "dunkl_orthogonal")]
    DunklOrthogonal { n: usize, roots: Vec<Vec<f64>>, k: Vec<f64>, lambda: Vec<f64> },
    #[serde(rename = "eigen_kmg")]
    EigenKmg { base: Box<ModelConfig>, m: usize },
    #[serde(rename = "wishart")]
    Wishart { delta: f64, m: usize },
    #[serde(rename = "skew_wishart")]
    SkewWishart { delta: f64, m: usize, lambda: f64 },
    #[serde(rename = "ornstein_uhlenbeck", alias = "ou")]
    OrnsteinUhlenbeck { theta: f64 },
}

impl ModelConfig {
    /// Construct the model, validating every parameter.
    pub fn build(&self) -> Result<ProcessModel> {
        let model = match self.clone() {
            ModelConfig::Brownian { n } => catalog::brownian(n)?,
            ModelConfig::BrownianDrift { b } => catalog::brownian_drift(b)?,
            ModelConfig::Bessel { nu, sigma } => catalog::bessel(nu, sigma)?,
            ModelConfig::BesselWide { nu, c } => catalog::bessel_wide(nu, c)?,
            ModelConfig::SquaredBessel { delta } => catalog::squared_bessel(delta)?,
            ModelConfig::GenDunkl1d { k, lambda } => catalog::gen_dunkl1d(k, lambda)?,
            ModelConfig::Dunkl1d { k } => catalog::gen_dunkl1d(k, k)?.with_name(format!("dunkl1d(k={k})")),
            ModelConfig::DunklOrthogonal { n, roots, k, lambda } => {
                catalog::dunkl_orthogonal(n, roots, k, lambda)?
            }
            ModelConfig::EigenKmg { base, m } => {
                match *base {
                    ModelConfig::Brownian { n: 1 } | ModelConfig::SquaredBessel { .. } => {}
                    _ => {
                        return Err(Error::config(
                            "eigen_kmg base must be brownian with n = 1 or squared_bessel",
                        ))
                    }
                }
                catalog::eigen_kmg(base.build()?, m)?
            }
            ModelConfig::Wishart { delta, m } => catalog::wishart(delta, m)?,
            ModelConfig::SkewWishart { delta, m, lambda } => catalog::skew_wishart(delta, m, lambda)?,
            ModelConfig::OrnsteinUhlenbeck { theta } => catalog::ornstein_uhlenbeck(theta)?,
        };
        Ok(model.with_config(self.clone()))
    }
}

/// Build a model from a parsed JSON document.
pub fn model_from_config(doc: &serde_json::Value) -> Result<ProcessModel> {
    let cfg: ModelConfig = serde_json::from_value(doc.clone())
        .map_err(|e| Error::config(format!("model config rejected: {e}")))?;
    cfg.build()
}

/// Build a model from JSON text.
pub fn model_from_json(text: &str) -> Result<ProcessModel> {
    let doc: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::config(format!("model config is not JSON: {e}")))?;
    model_from_config(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_echo() {
        let m = model_from_json(r#"{"model":"bessel","nu":0.5,"sigma":1}"#).unwrap();
        assert_eq!(m.alpha(), 1.0);
        assert_eq!(m.config(), Some(&ModelConfig::Bessel { nu: 0.5, sigma: 1.0 }));
        assert!(m.name().starts_with("bessel"));
    }

    #[test]
    fn rejects_bad_configs() {
        let e = model_from_json(r#"{"model":"wishart","delta":0.5,"m":2}"#).unwrap_err();
        assert!(matches!(e, Error::Config(ref s) if s.contains("delta > m - 1")), "{e}");
        assert!(model_from_json(r#"{"model":"wishart","delta":1,"m":2}"#).is_err());
        // δ = 1.5 satisfies δ > m - 1 = 1
        assert!(model_from_json(r#"{"model":"wishart","delta":1.5,"m":2}"#).is_ok());
        assert!(model_from_json(r#"{"model":"bessel","nu":0.5,"extra":1}"#).is_err());
        assert!(model_from_json(r#"{"model":"nonexistent"}"#).is_err());
        assert!(model_from_json(r#"{"model":"bessel","nu":-1}"#).is_err());
        assert!(model_from_json(r#"{"model":"eigen_kmg","m":2,"base":{"model":"bessel","nu":0.5}}"#).is_err());
        assert!(model_from_json("not json").is_err());
    }

    #[test]
    fn every_catalog_entry_builds() {
        let docs = [
            r#"{"model":"brownian","n":2}"#,
            r#"{"model":"brownian_drift","b":[0.7]}"#,
            r#"{"model":"bessel","nu":1.5}"#,
            r#"{"model":"bessel_wide","nu":0.5,"c":1.2}"#,
            r#"{"model":"squared_bessel","delta":3}"#,
            r#"{"model":"gen_dunkl1d","k":1,"lambda":0.5}"#,
            r#"{"model":"dunkl1d","k":0.75}"#,
            r#"{"model":"dunkl_orthogonal","n":3,"roots":[[1,1,0],[1,-1,0]],"k":[1,0.75],"lambda":[0.5,0.25]}"#,
            r#"{"model":"eigen_kmg","m":2,"base":{"model":"brownian"}}"#,
            r#"{"model":"wishart","delta":4,"m":2}"#,
            r#"{"model":"skew_wishart","delta":4,"m":2,"lambda":0.5}"#,
            r#"{"model":"ornstein_uhlenbeck","theta":1}"#,
            r#"{"model":"ou","theta":1}"#,
        ];
        for d in docs {
            let m = model_from_json(d).unwrap_or_else(|e| panic!("{d}: {e}"));
            let cfg = serde_json::to_value(m.config().unwrap()).unwrap();
            assert_eq!(model_from_config(&cfg).unwrap().name(), m.name());
        }
    }

    #[test]
    fn non_orthogonal_roots_rejected() {
        let d = r#"{"model":"dunkl_orthogonal","n":2,"roots":[[1,1],[1,0]],"k":[1,1],"lambda":[0,0]}"#;
        assert!(model_from_json(d).is_err());
    }
}
