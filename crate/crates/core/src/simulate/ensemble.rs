use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::State;

/// Diagnostics gathered while simulating.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Quality {
    /// Functional increments capped because the path came within `1e-12` of 0
    /// (or a matrix became singular).
    pub zero_hits: usize,
    /// Euler steps whose eigenvalues had to be floored.
    pub floor_events: usize,
    pub total_steps: usize,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

impl Quality {
    pub(crate) fn merge(&mut self, other: &Quality) {
        self.zero_hits += other.zero_hits;
        self.floor_events += other.floor_events;
        self.total_steps += other.total_steps;
    }

    pub(crate) fn finish(&mut self) {
        if self.zero_hits > 0 {
            self.warnings.push(format!("{} functional increments capped near zero", self.zero_hits));
        }
        if self.total_steps > 0 && self.floor_events as f64 > 0.01 * self.total_steps as f64 {
            self.warnings.push(format!(
                "eigenvalue floor used in {} of {} steps (more than 1%)",
                self.floor_events, self.total_steps
            ));
        }
    }
}

/// `N` paths sampled on a common time grid, with the accumulated functional
/// `A_t` along each path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub times: Vec<f64>,
    /// `paths[i][j]` is path `i` at `times[j]`.
    pub paths: Vec<Vec<State>>,
    pub functionals: Vec<Vec<f64>>,
    pub seed: u64,
    pub scheme: String,
    pub parameters: serde_json::Value,
    pub quality: Quality,
    /// Orthonormal directions `αᵢ/√2` for per-root sign flips; empty when the
    /// whole state flips.
    pub frame: Vec<Vec<f64>>,
    /// `root_functionals[i][j][r]`: functional of root `r` along path `i`.
    pub root_functionals: Vec<Vec<Vec<f64>>>,
}

#[derive(Serialize)]
struct Metadata<'a> {
    seed: u64,
    scheme: &'a str,
    parameters: &'a serde_json::Value,
    paths: usize,
    times: &'a [f64],
    quality: &'a Quality,
}

impl PathEnsemble {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty() || self.times.is_empty()
    }

    /// Index of a simulated time (relative match 1e-9).
    pub fn time_index(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs())
            .ok_or_else(|| Error::domain(format!("time {t} is not on the simulation grid")))
    }

    pub fn marginal(&self, j: usize) -> Vec<State> {
        self.paths.iter().map(|p| p[j].clone()).collect()
    }

    /// Scalar states at grid index `j`.
    pub fn scalar_marginal(&self, j: usize) -> Result<Vec<f64>> {
        self.paths.iter().map(|p| p[j].as_scalar()).collect()
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let dim = self.paths.first().and_then(|p| p.first()).map_or(0, |s| s.components().len());
        let mut header = String::from("path_id,time");
        for c in 0..dim {
            header.push_str(&format!(",component_{c}"));
        }
        header.push_str(",functional");
        writeln!(w, "{header}")?;
        for (i, (path, func)) in self.paths.iter().zip(&self.functionals).enumerate() {
            for ((t, s), a) in self.times.iter().zip(path).zip(func) {
                let comps: Vec<String> = s.components().iter().map(|v| format!("{v:e}")).collect();
                writeln!(w, "{i},{t:e},{},{a:e}", comps.join(","))?;
            }
        }
        Ok(())
    }

    pub fn metadata_json(&self) -> String {
        let meta = Metadata {
            seed: self.seed,
            scheme: &self.scheme,
            parameters: &self.parameters,
            paths: self.paths.len(),
            times: &self.times,
            quality: &self.quality,
        };
        serde_json::to_string_pretty(&meta).expect("metadata serializes")
    }

    /// Writes the CSV to `path` and the metadata next to it as
    /// `<path>.meta.json`; returns the sidecar's path.
    pub fn save(&self, path: &Path) -> Result<PathBuf> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_csv(&mut w)?;
        w.flush()?;
        let mut meta = path.as_os_str().to_owned();
        meta.push(".meta.json");
        let meta = PathBuf::from(meta);
        std::fs::write(&meta, self.metadata_json())?;
        Ok(meta)
    }
}
