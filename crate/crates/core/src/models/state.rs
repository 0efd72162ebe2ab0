//! Process states and state-space descriptors.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symmat::{SignClass, SymMatrix};

/// A point of a state space: a real vector (1D models use length one) or a
/// symmetric matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum State {
    Vector(Vec<f64>),
    Matrix(SymMatrix),
}

impl State {
    pub fn scalar(v: f64) -> Self {
        State::Vector(vec![v])
    }

    pub fn vector(v: &[f64]) -> Self {
        State::Vector(v.to_vec())
    }

    pub fn matrix(m: SymMatrix) -> Self {
        State::Matrix(m)
    }

    /// Entrywise scaling.
    pub fn scale(&self, c: f64) -> State {
        match self {
            State::Vector(v) => State::Vector(v.iter().map(|a| a * c).collect()),
            State::Matrix(m) => State::Matrix(m.scale(c)),
        }
    }

    /// Scalar coordinates: the vector itself, or the upper triangle of a
    /// matrix.
    pub fn components(&self) -> Vec<f64> {
        match self {
            State::Vector(v) => v.clone(),
            State::Matrix(m) => m.to_upper(),
        }
    }

    /// A state of the same shape with the given coordinates.
    pub fn with_components(&self, c: &[f64]) -> Result<State> {
        match self {
            State::Vector(v) if v.len() == c.len() => Ok(State::Vector(c.to_vec())),
            State::Vector(_) => Err(Error::domain("component count does not match the state")),
            State::Matrix(m) => SymMatrix::from_upper(m.dim(), c).map(State::Matrix),
        }
    }

    pub fn as_scalar(&self) -> Result<f64> {
        match self {
            State::Vector(v) if v.len() == 1 => Ok(v[0]),
            State::Matrix(m) if m.dim() == 1 => Ok(m.get(0, 0)),
            _ => Err(Error::domain(format!("expected a scalar state, got {self}"))),
        }
    }

    pub fn as_vector(&self) -> Result<&[f64]> {
        match self {
            State::Vector(v) => Ok(v),
            State::Matrix(_) => Err(Error::domain("expected a vector state, got a matrix")),
        }
    }

    pub fn as_matrix(&self) -> Result<&SymMatrix> {
        match self {
            State::Matrix(m) => Ok(m),
            State::Vector(_) => Err(Error::domain("expected a matrix state, got a vector")),
        }
    }
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v}");
    if s.len() > 12 {
        format!("{v:.6e}")
    } else {
        s
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Vector(v) if v.len() == 1 => write!(f, "{}", fmt_num(v[0])),
            State::Vector(v) => {
                let parts: Vec<String> = v.iter().map(|&a| fmt_num(a)).collect();
                write!(f, "({})", parts.join(","))
            }
            State::Matrix(m) => {
                let rows: Vec<String> = m
                    .rows()
                    .iter()
                    .map(|r| {
                        let cells: Vec<String> = r.iter().map(|&a| fmt_num(a)).collect();
                        format!("[{}]", cells.join(","))
                    })
                    .collect();
                write!(f, "[{}]", rows.join(","))
            }
        }
    }
}

/// State space of a model.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// `ℝⁿ`.
    RealLine { n: usize },
    /// `[0, ∞)`.
    HalfLine,
    /// Ordered tuples `x₁ < … < x_m`, in `(0, ∞)` when `positive`.
    WeylChamber { m: usize, positive: bool },
    /// Positive definite `m × m` matrices (singular starts allowed).
    PositiveDefinite { m: usize },
    /// Positive or negative definite `m × m` matrices.
    SignedDefinite { m: usize },
}

const HALF_LINE_POINTS: [f64; 3] = [0.5, 1.0, 2.0];

impl Domain {
    /// Number of scalar coordinates `n`.
    pub fn state_dim(&self) -> usize {
        match self {
            Domain::RealLine { n } => *n,
            Domain::HalfLine => 1,
            Domain::WeylChamber { m, .. } => *m,
            Domain::PositiveDefinite { m } | Domain::SignedDefinite { m } => m * (m + 1) / 2,
        }
    }

    pub fn description(&self) -> String {
        match self {
            Domain::RealLine { n: 1 } => "real line".into(),
            Domain::RealLine { n } => format!("R^{n}"),
            Domain::HalfLine => "half-line".into(),
            Domain::WeylChamber { m, positive: true } => format!("positive Weyl chamber, m={m}"),
            Domain::WeylChamber { m, positive: false } => format!("Weyl chamber, m={m}"),
            Domain::PositiveDefinite { m } => format!("S{m}+"),
            Domain::SignedDefinite { m } => format!("S{m}+ u S{m}-"),
        }
    }

    fn check_shape(&self, s: &State) -> Result<()> {
        let ok = match (self, s) {
            (Domain::RealLine { n }, State::Vector(v)) => v.len() == *n,
            (Domain::HalfLine, State::Vector(v)) => v.len() == 1,
            (Domain::WeylChamber { m, .. }, State::Vector(v)) => v.len() == *m,
            (Domain::PositiveDefinite { m } | Domain::SignedDefinite { m }, State::Matrix(a)) => {
                a.dim() == *m
            }
            _ => false,
        };
        if !ok {
            return Err(Error::domain(format!("state {s} does not fit the {}", self.description())));
        }
        if s.components().iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(format!("state {s} has non-finite entries")));
        }
        Ok(())
    }

    /// Validate a starting point; boundary points with a documented limit are
    /// accepted.
    pub fn check_start(&self, x: &State) -> Result<()> {
        self.check_shape(x)?;
        match (self, x) {
            (Domain::HalfLine, State::Vector(v)) if v[0] < 0.0 => {
                Err(Error::domain(format!("start {x} lies off the half-line")))
            }
            (Domain::WeylChamber { .. }, _) => self.check_target(x),
            (Domain::PositiveDefinite { .. }, State::Matrix(a)) => {
                let band = 1e-12 * a.frobenius();
                if a.eigenvalues()?.iter().any(|&l| l < -band) {
                    return Err(Error::domain(format!("start {x} is not positive semidefinite")));
                }
                Ok(())
            }
            (Domain::SignedDefinite { .. }, _) => self.check_target(x),
            _ => Ok(()),
        }
    }

    /// Validate a target point (must be interior, except `y = 0` on the
    /// half-line, where densities have a limit).
    pub fn check_target(&self, y: &State) -> Result<()> {
        self.check_shape(y)?;
        match (self, y) {
            (Domain::HalfLine, State::Vector(v)) if v[0] < 0.0 => {
                Err(Error::domain(format!("point {y} lies off the half-line")))
            }
            (Domain::WeylChamber { positive, .. }, State::Vector(v)) => {
                if v.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::domain(format!("point {y} is not strictly ordered")));
                }
                if *positive && v[0] < 0.0 {
                    return Err(Error::domain(format!("point {y} has a negative coordinate")));
                }
                Ok(())
            }
            (Domain::PositiveDefinite { .. }, State::Matrix(a)) => {
                if a.classify_sign()? != SignClass::PositiveDefinite {
                    return Err(Error::domain(format!("point {y} is not positive definite")));
                }
                Ok(())
            }
            (Domain::SignedDefinite { .. }, State::Matrix(a)) => {
                if a.classify_sign()? == SignClass::IndefiniteOrSingular {
                    return Err(Error::domain(format!("point {y} is neither positive nor negative definite")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Fixed evaluation points used by the checks.
    pub fn standard_points(&self) -> Vec<State> {
        match self {
            Domain::HalfLine => HALF_LINE_POINTS.iter().map(|&v| State::scalar(v)).collect(),
            Domain::RealLine { n: 1 } => [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]
                .iter()
                .map(|&v| State::scalar(v))
                .collect(),
            Domain::RealLine { n } => (0..4)
                .map(|j| {
                    let v: Vec<f64> = (0..*n)
                        .map(|i| {
                            let mag = 0.5 + ((7 * i + 3 * j) % 5) as f64 * 0.375;
                            if (i + 2 * j) % 3 == 1 { -mag } else { mag }
                        })
                        .collect();
                    State::Vector(v)
                })
                .collect(),
            Domain::WeylChamber { m, .. } => chamber_points(*m),
            Domain::PositiveDefinite { m } => pd_points(*m),
            Domain::SignedDefinite { m } => {
                let pos = pd_points(*m);
                let neg: Vec<State> = pos.iter().map(|s| s.scale(-1.0)).collect();
                pos.into_iter().chain(neg).collect()
            }
        }
    }

    /// Default start point `x` of the checks.
    pub fn default_start(&self) -> State {
        match self {
            Domain::HalfLine | Domain::RealLine { n: 1 } => State::scalar(1.0),
            Domain::PositiveDefinite { m } | Domain::SignedDefinite { m } => {
                State::Matrix(SymMatrix::identity(*m))
            }
            _ => self.standard_points()[0].clone(),
        }
    }
}

fn chamber_points(m: usize) -> Vec<State> {
    // ordered m-subsets of {0.5, 1, 2}; larger m falls back to spaced tuples
    let mut out = Vec::new();
    if m <= HALF_LINE_POINTS.len() {
        let n = HALF_LINE_POINTS.len();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize == m {
                let v: Vec<f64> =
                    (0..n).filter(|i| mask & (1 << i) != 0).map(|i| HALF_LINE_POINTS[i]).collect();
                out.push(State::Vector(v));
            }
        }
        out.sort_by(|a, b| a.components().partial_cmp(&b.components()).unwrap());
    } else {
        for shift in [0.5, 1.0] {
            out.push(State::Vector((0..m).map(|i| shift + 0.5 * i as f64).collect()));
        }
    }
    out
}

fn pd_points(m: usize) -> Vec<State> {
    if m == 1 {
        return HALF_LINE_POINTS.iter().map(|&v| State::Matrix(SymMatrix::diag(&[v]))).collect();
    }
    let spread: Vec<f64> = (0..m).map(|i| if i % 2 == 0 { 0.5 } else { 2.0 }).collect();
    let tilted: Vec<f64> = (0..m).map(|i| 0.7 + 0.9 * i as f64 / (m - 1) as f64).collect();
    // rotate the tilted diagonal in the (0, 1) plane by π/5
    let (c, s) = ((PI / 5.0).cos(), (PI / 5.0).sin());
    let mut rot = SymMatrix::diag(&tilted).rows();
    let (d0, d1) = (tilted[0], tilted[1]);
    rot[0][0] = c * c * d0 + s * s * d1;
    rot[1][1] = s * s * d0 + c * c * d1;
    rot[0][1] = c * s * (d0 - d1);
    rot[1][0] = rot[0][1];
    vec![
        State::Matrix(SymMatrix::identity(m)),
        State::Matrix(SymMatrix::diag(&spread)),
        State::Matrix(SymMatrix::from_rows(&rot).expect("rotated matrix is symmetric")),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_points_lie_in_domain() {
        let domains = [
            Domain::HalfLine,
            Domain::RealLine { n: 1 },
            Domain::RealLine { n: 3 },
            Domain::WeylChamber { m: 2, positive: true },
            Domain::WeylChamber { m: 3, positive: false },
            Domain::WeylChamber { m: 5, positive: true },
            Domain::PositiveDefinite { m: 1 },
            Domain::PositiveDefinite { m: 2 },
            Domain::PositiveDefinite { m: 3 },
            Domain::SignedDefinite { m: 2 },
        ];
        for d in domains {
            let pts = d.standard_points();
            assert!(!pts.is_empty());
            for p in &pts {
                d.check_target(p).unwrap();
                d.check_start(p).unwrap();
                assert_eq!(p.components().len(), d.state_dim());
            }
            d.check_start(&d.default_start()).unwrap();
        }
        assert_eq!(Domain::WeylChamber { m: 2, positive: true }.standard_points().len(), 3);
    }

    #[test]
    fn rejects_off_domain_points() {
        assert!(Domain::HalfLine.check_target(&State::scalar(-1.0)).is_err());
        assert!(Domain::WeylChamber { m: 2, positive: false }
            .check_target(&State::vector(&[1.0, 1.0]))
            .is_err());
        let indefinite = State::Matrix(SymMatrix::diag(&[1.0, -1.0]));
        assert!(Domain::SignedDefinite { m: 2 }.check_target(&indefinite).is_err());
        assert!(Domain::PositiveDefinite { m: 2 }.check_start(&State::Matrix(SymMatrix::zeros(2))).is_ok());
        assert!(Domain::PositiveDefinite { m: 2 }.check_target(&State::Matrix(SymMatrix::zeros(2))).is_err());
    }

    #[test]
    fn components_roundtrip() {
        let s = State::Matrix(SymMatrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 3.0]]).unwrap());
        assert_eq!(s.components(), vec![1.0, 0.2, 3.0]);
        assert_eq!(s.with_components(&s.components()).unwrap(), s);
        assert_eq!(s.to_string(), "[[1,0.2],[0.2,3]]");
    }
}
