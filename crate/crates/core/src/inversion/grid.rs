use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Domain, State};

pub const DEFAULT_S: [f64; 3] = [0.4, 0.8, 1.2];
pub const DEFAULT_DELTA: [f64; 2] = [0.3, 0.7];
pub const DEFAULT_SCALES: [f64; 2] = [0.5, 2.0];

/// Evaluation points for the inversion checks. Windows are the pairs
/// `(s_values[i], t_values[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionGrid {
    pub x: State,
    pub s_values: Vec<f64>,
    pub t_values: Vec<f64>,
    pub a_points: Vec<State>,
    pub b_points: Vec<State>,
    pub lambda_scales: Vec<f64>,
}

impl InversionGrid {
    /// Windows `(s, s+Δ)` for `s ∈ {0.4, 0.8, 1.2}`, `Δ ∈ {0.3, 0.7}`; the
    /// domain's standard points for `a` and `b`; scales `{0.5, 2}`.
    pub fn standard(domain: &Domain) -> Self {
        Self::with_start(domain, domain.default_start())
    }

    pub fn with_start(domain: &Domain, x: State) -> Self {
        let mut s_values = Vec::new();
        let mut t_values = Vec::new();
        for &d in &DEFAULT_DELTA {
            for &s in &DEFAULT_S {
                s_values.push(s);
                t_values.push(s + d);
            }
        }
        let pts = domain.standard_points();
        InversionGrid {
            x,
            s_values,
            t_values,
            a_points: pts.clone(),
            b_points: pts,
            lambda_scales: DEFAULT_SCALES.to_vec(),
        }
    }

    pub fn validate(&self, domain: &Domain) -> Result<()> {
        if self.s_values.is_empty() || self.s_values.len() != self.t_values.len() {
            return Err(Error::config("grid needs matching, nonempty s and t lists"));
        }
        for (&s, &t) in self.s_values.iter().zip(&self.t_values) {
            if !(s > 0.0 && t > s && t.is_finite()) {
                return Err(Error::config(format!("grid window ({s}, {t}) must satisfy 0 < s < t")));
            }
        }
        if self.a_points.is_empty() || self.b_points.is_empty() {
            return Err(Error::config("grid needs a and b points"));
        }
        if self.lambda_scales.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::config("scaling factors must be positive"));
        }
        domain.check_start(&self.x)?;
        for p in self.a_points.iter().chain(&self.b_points) {
            domain.check_target(p)?;
        }
        Ok(())
    }

    pub fn windows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.s_values.iter().copied().zip(self.t_values.iter().copied())
    }

    /// Distinct times appearing in the windows, ascending.
    pub fn times(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.s_values.iter().chain(&self.t_values).copied().collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        v
    }

    /// The start point followed by the `a` and `b` points, without repeats.
    pub fn all_points(&self) -> Vec<State> {
        let mut out = vec![self.x.clone()];
        for p in self.a_points.iter().chain(&self.b_points) {
            if !out.contains(p) {
                out.push(p.clone());
            }
        }
        out
    }

    pub fn describe(&self) -> String {
        let windows: Vec<String> = self.windows().map(|(s, t)| format!("({s},{})", round(t))).collect();
        format!(
            "x={}; windows={}; a: {} points; b: {} points; scales={:?}",
            self.x,
            windows.join(","),
            self.a_points.len(),
            self.b_points.len(),
            self.lambda_scales
        )
    }
}

/// Trim binary noise such as `1.0999999999999999` for display.
pub(crate) fn round(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_grid_is_valid() {
        for d in [
            Domain::HalfLine,
            Domain::RealLine { n: 1 },
            Domain::RealLine { n: 3 },
            Domain::PositiveDefinite { m: 2 },
            Domain::SignedDefinite { m: 2 },
            Domain::WeylChamber { m: 2, positive: false },
        ] {
            let g = InversionGrid::standard(&d);
            g.validate(&d).unwrap();
            assert_eq!(g.windows().count(), 6);
        }
        let g = InversionGrid::standard(&Domain::HalfLine);
        assert_eq!(g.times().len(), 7);
    }

    #[test]
    fn bad_windows_rejected() {
        let d = Domain::HalfLine;
        let mut g = InversionGrid::standard(&d);
        g.t_values[0] = g.s_values[0];
        assert!(g.validate(&d).is_err());
        let mut g = InversionGrid::standard(&d);
        g.a_points.push(State::scalar(-1.0));
        assert!(g.validate(&d).is_err());
    }
}
