use serde::Serialize;

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detail {
    pub point: String,
    pub observed: f64,
    pub expected: f64,
    pub rel_err: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Detail {
    pub fn new(point: String, observed: f64, expected: f64, rel_err: f64) -> Self {
        Detail { point, observed, expected, rel_err, error: None }
    }

    /// A grid point whose evaluation failed; it counts as an infinite error.
    pub fn failed(point: String, error: impl ToString) -> Self {
        Detail {
            point,
            observed: f64::NAN,
            expected: f64::NAN,
            rel_err: f64::INFINITY,
            error: Some(error.to_string()),
        }
    }
}

/// Worst error over the details sharing a label prefix such as `"(d)"`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartSummary {
    pub label: String,
    pub max_rel_err: f64,
    pub pass: bool,
}

/// Outcome of one check. JSON layout:
/// `{check, model, grid, tolerance, max_rel_err, pass, parts?, details}`.
/// Non-finite numbers serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub model: String,
    pub grid: String,
    pub tolerance: f64,
    pub max_rel_err: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<PartSummary>,
    pub details: Vec<Detail>,
}

impl CheckReport {
    /// `pass` holds iff every point evaluated and the largest error is within
    /// `tolerance`. An empty detail list does not pass.
    pub fn from_details(check: &str, model: &str, grid: String, tolerance: f64, details: Vec<Detail>) -> Self {
        let max_rel_err = worst(&details);
        let pass = !details.is_empty() && details.iter().all(|d| d.error.is_none()) && max_rel_err <= tolerance;
        CheckReport {
            check: check.to_string(),
            model: model.to_string(),
            grid,
            tolerance,
            max_rel_err,
            pass,
            parts: Vec::new(),
            details,
        }
    }

    /// Adds per-part summaries keyed on the leading `"(x)"` label of each point.
    pub fn with_parts(mut self, labels: &[&str]) -> Self {
        self.parts = labels
            .iter()
            .map(|&label| {
                let sel: Vec<Detail> =
                    self.details.iter().filter(|d| d.point.starts_with(label)).cloned().collect();
                let max_rel_err = worst(&sel);
                PartSummary {
                    label: label.to_string(),
                    max_rel_err,
                    pass: !sel.is_empty() && sel.iter().all(|d| d.error.is_none()) && max_rel_err <= self.tolerance,
                }
            })
            .collect();
        self
    }

    pub fn part(&self, label: &str) -> Option<&PartSummary> {
        self.parts.iter().find(|p| p.label == label)
    }

    /// Details that failed, worst first.
    pub fn failures(&self) -> Vec<&Detail> {
        let mut v: Vec<&Detail> =
            self.details.iter().filter(|d| d.error.is_some() || !(d.rel_err <= self.tolerance)).collect();
        v.sort_by(|a, b| b.rel_err.total_cmp(&a.rel_err));
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line: `check model: PASS (max_rel_err 1.2e-14, tol 1e-10)`.
    pub fn summary(&self) -> String {
        format!(
            "{} {}: {} (max_rel_err {:.3e}, tol {:.1e}, {} points)",
            self.check,
            self.model,
            if self.pass { "PASS" } else { "FAIL" },
            self.max_rel_err,
            self.tolerance,
            self.details.len()
        )
    }
}

fn worst(details: &[Detail]) -> f64 {
    details.iter().map(|d| if d.rel_err.is_nan() { f64::INFINITY } else { d.rel_err }).fold(0.0, f64::max)
}
