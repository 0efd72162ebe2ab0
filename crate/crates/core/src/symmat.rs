//! Real symmetric matrices: spectral decomposition by cyclic Jacobi
//! rotations, definiteness classification and PD square roots.
//!
//! Matrix-argument functions of a product `xy` are always evaluated at the
//! symmetric conjugate `√x · y · √x`, which has the same (real) spectrum.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// An `m × m` real symmetric matrix stored densely in row-major order.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    m: usize,
    data: Vec<f64>,
}

/// Eigen-decomposition `a = V diag(λ) Vᵀ`, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectral {
    pub values: Vec<f64>,
    /// Column `j` (entries `vectors[i * m + j]`) is the eigenvector of `values[j]`.
    pub vectors: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignClass {
    PositiveDefinite,
    NegativeDefinite,
    IndefiniteOrSingular,
}

impl SignClass {
    pub fn flip(self) -> Self {
        match self {
            SignClass::PositiveDefinite => SignClass::NegativeDefinite,
            SignClass::NegativeDefinite => SignClass::PositiveDefinite,
            SignClass::IndefiniteOrSingular => SignClass::IndefiniteOrSingular,
        }
    }
}

impl SymMatrix {
    /// Build from row-major entries; rejects asymmetric input.
    pub fn new(m: usize, data: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("matrix side must be at least 1"));
        }
        if data.len() != m * m {
            return Err(Error::domain(format!(
                "expected {} entries for a {m}×{m} matrix, got {}",
                m * m,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("matrix entries must be finite"));
        }
        let scale = data.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        for i in 0..m {
            for j in (i + 1)..m {
                let (a, b) = (data[i * m + j], data[j * m + i]);
                if (a - b).abs() > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::domain(format!(
                        "matrix is not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        let mut out = SymMatrix { m, data };
        out.symmetrize();
        Ok(out)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::domain("matrix rows must all have length equal to the row count"));
        }
        SymMatrix::new(m, rows.concat())
    }

    pub fn identity(m: usize) -> Self {
        SymMatrix::diag(&vec![1.0; m])
    }

    pub fn zeros(m: usize) -> Self {
        SymMatrix { m, data: vec![0.0; m * m] }
    }

    pub fn diag(d: &[f64]) -> Self {
        let m = d.len();
        let mut data = vec![0.0; m * m];
        for (i, &v) in d.iter().enumerate() {
            data[i * m + i] = v;
        }
        SymMatrix { m, data }
    }

    /// Entries on and above the diagonal, row by row (`m(m+1)/2` values).
    pub fn to_upper(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.m * (self.m + 1) / 2);
        for i in 0..self.m {
            for j in i..self.m {
                out.push(self.data[i * self.m + j]);
            }
        }
        out
    }

    pub fn from_upper(m: usize, upper: &[f64]) -> Result<Self> {
        if upper.len() != m * (m + 1) / 2 {
            return Err(Error::domain(format!(
                "expected {} upper-triangle entries, got {}",
                m * (m + 1) / 2,
                upper.len()
            )));
        }
        let mut data = vec![0.0; m * m];
        let mut k = 0;
        for i in 0..m {
            for j in i..m {
                data[i * m + j] = upper[k];
                data[j * m + i] = upper[k];
                k += 1;
            }
        }
        Ok(SymMatrix { m, data })
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.m).map(|r| r.to_vec()).collect()
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn symmetrize(&mut self) {
        let m = self.m;
        for i in 0..m {
            for j in (i + 1)..m {
                let avg = 0.5 * (self.data[i * m + j] + self.data[j * m + i]);
                self.data[i * m + j] = avg;
                self.data[j * m + i] = avg;
            }
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.m).map(|i| self.data[i * self.m + i]).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |s, v| s.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix { m: self.m, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.m, other.m, "matrix sizes differ");
        SymMatrix {
            m: self.m,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// Plain matrix product (not symmetric in general), row-major.
    pub fn matmul(&self, other: &SymMatrix) -> Vec<f64> {
        assert_eq!(self.m, other.m, "matrix sizes differ");
        matmul(self.m, &self.data, &other.data)
    }

    /// `self · b · self`, symmetrised.
    pub fn conjugate(&self, b: &SymMatrix) -> SymMatrix {
        let m = self.m;
        let ab = matmul(m, &self.data, &b.data);
        let mut out = SymMatrix { m, data: matmul(m, &ab, &self.data) };
        out.symmetrize();
        out
    }

    /// Cyclic Jacobi eigen-decomposition.
    pub fn spectral(&self) -> Result<Spectral> {
        let m = self.m;
        let mut a = self.data.clone();
        let mut v = SymMatrix::identity(m).data;
        let norm = self.frobenius();
        if norm == 0.0 || m == 1 {
            return Ok(Spectral { values: (0..m).map(|i| a[i * m + i]).collect(), vectors: v });
        }
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..m)
                .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
                .map(|(i, j)| a[i * m + j] * a[i * m + j])
                .sum();
            if off.sqrt() <= 1e-15 * norm {
                converged = true;
                break;
            }
            for p in 0..m {
                for q in (p + 1)..m {
                    let apq = a[p * m + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..m {
                        let akp = a[k * m + p];
                        let akq = a[k * m + q];
                        a[k * m + p] = c * akp - s * akq;
                        a[k * m + q] = s * akp + c * akq;
                    }
                    for k in 0..m {
                        let apk = a[p * m + k];
                        let aqk = a[q * m + k];
                        a[p * m + k] = c * apk - s * aqk;
                        a[q * m + k] = s * apk + c * aqk;
                    }
                    for k in 0..m {
                        let vkp = v[k * m + p];
                        let vkq = v[k * m + q];
                        v[k * m + p] = c * vkp - s * vkq;
                        v[k * m + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        if !converged {
            return Err(Error::numeric("Jacobi eigen-solver did not converge"));
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| a[j * m + j].total_cmp(&a[i * m + i]));
        let values = order.iter().map(|&i| a[i * m + i]).collect();
        let mut vectors = vec![0.0; m * m];
        for (col, &src) in order.iter().enumerate() {
            for r in 0..m {
                vectors[r * m + col] = v[r * m + src];
            }
        }
        Ok(Spectral { values, vectors })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.spectral()?.values)
    }

    /// Rebuild `V f(Λ) Vᵀ` from a decomposition.
    pub fn from_spectral(spec: &Spectral, f: impl Fn(f64) -> f64) -> SymMatrix {
        let m = spec.values.len();
        let fl: Vec<f64> = spec.values.iter().map(|&l| f(l)).collect();
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let s: f64 = (0..m).map(|k| spec.vectors[i * m + k] * fl[k] * spec.vectors[j * m + k]).sum();
                data[i * m + j] = s;
                data[j * m + i] = s;
            }
        }
        SymMatrix { m, data }
    }

    /// Determinant via LU with partial pivoting.
    pub fn det(&self) -> f64 {
        let m = self.m;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for c in 0..m {
            let p = (c..m)
                .max_by(|&i, &j| a[i * m + c].abs().total_cmp(&a[j * m + c].abs()))
                .unwrap_or(c);
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

    /// Definiteness from eigenvalue signs, zero band `1e-12 · ‖a‖`.
    pub fn classify_sign(&self) -> Result<SignClass> {
        let values = self.eigenvalues()?;
        let band = 1e-12 * self.frobenius();
        Ok(if values.iter().all(|&l| l > band) {
            SignClass::PositiveDefinite
        } else if values.iter().all(|&l| l < -band) {
            SignClass::NegativeDefinite
        } else {
            SignClass::IndefiniteOrSingular
        })
    }

    /// `|y| = y·(1{y ∈ S⁺} − 1{y ∈ S⁻})`; the zero matrix when indefinite.
    pub fn signed_abs(&self) -> Result<(SignClass, SymMatrix)> {
        let class = self.classify_sign()?;
        let abs = match class {
            SignClass::PositiveDefinite => self.clone(),
            SignClass::NegativeDefinite => self.scale(-1.0),
            SignClass::IndefiniteOrSingular => SymMatrix::zeros(self.m),
        };
        Ok((class, abs))
    }

    /// The unique positive definite square root.
    pub fn sqrt_pd(&self) -> Result<SymMatrix> {
        if self.classify_sign()? != SignClass::PositiveDefinite {
            return Err(Error::domain("square root requires a positive definite matrix"));
        }
        self.sqrt_psd()
    }

    /// Square root of a positive semidefinite matrix; slightly negative
    /// eigenvalues (rounding) are clamped to zero.
    pub fn sqrt_psd(&self) -> Result<SymMatrix> {
        let spec = self.spectral()?;
        let band = 1e-10 * self.frobenius();
        if spec.values.iter().any(|&l| l < -band) {
            return Err(Error::domain("square root requires a positive semidefinite matrix"));
        }
        Ok(SymMatrix::from_spectral(&spec, |l| l.max(0.0).sqrt()))
    }

    /// Inverse of a positive definite matrix.
    pub fn inverse_pd(&self) -> Result<SymMatrix> {
        let spec = self.spectral()?;
        if spec.values.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::domain("inverse requires a positive definite matrix"));
        }
        Ok(SymMatrix::from_spectral(&spec, |l| 1.0 / l))
    }
}

pub(crate) fn matmul(m: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for k in 0..m {
            let aik = a[i * m + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i * m + j] += aik * b[k * m + j];
            }
        }
    }
    out
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMatrix{:?}", self.rows())
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        SymMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reconstruct(a: &SymMatrix) -> f64 {
        let spec = a.spectral().unwrap();
        let back = SymMatrix::from_spectral(&spec, |l| l);
        back.add(&a.scale(-1.0)).frobenius()
    }

    #[test]
    fn identity_spectrum() {
        let s = SymMatrix::identity(2).spectral().unwrap();
        assert_eq!(s.values, vec![1.0, 1.0]);
    }

    #[test]
    fn diagonal_spectrum_has_axis_vectors() {
        let s = SymMatrix::diag(&[1.0, 3.0]).spectral().unwrap();
        assert_eq!(s.values, vec![3.0, 1.0]);
        // row-major: entry (1, 0) then (0, 1)
        assert_eq!(s.vectors[2].abs(), 1.0);
        assert_eq!(s.vectors[1].abs(), 1.0);
    }

    #[test]
    fn two_by_two_spectrum() {
        let a = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let s = a.spectral().unwrap();
        assert!((s.values[0] - 3.0).abs() < 1e-14 && (s.values[1] - 1.0).abs() < 1e-14);
        assert!(reconstruct(&a) < 1e-14);
    }

    #[test]
    fn sign_classes() {
        assert_eq!(SymMatrix::identity(3).classify_sign().unwrap(), SignClass::PositiveDefinite);
        assert_eq!(
            SymMatrix::identity(3).scale(-1.0).classify_sign().unwrap(),
            SignClass::NegativeDefinite
        );
        assert_eq!(
            SymMatrix::diag(&[1.0, -1.0]).classify_sign().unwrap(),
            SignClass::IndefiniteOrSingular
        );
        let (c, abs) = SymMatrix::diag(&[-2.0, -0.5]).signed_abs().unwrap();
        assert_eq!(c, SignClass::NegativeDefinite);
        assert_eq!(abs, SymMatrix::diag(&[2.0, 0.5]));
    }

    #[test]
    fn square_roots() {
        assert_eq!(SymMatrix::identity(2).sqrt_pd().unwrap(), SymMatrix::identity(2));
        let r = SymMatrix::diag(&[4.0, 9.0]).sqrt_pd().unwrap();
        assert!((r.get(0, 0) - 2.0).abs() < 1e-15 && (r.get(1, 1) - 3.0).abs() < 1e-15);
        let a = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let r = a.sqrt_pd().unwrap();
        // V diag(√3, 1) Vᵀ with V = [[1, 1], [1, -1]]/√2
        let (s3, h) = (3f64.sqrt(), 0.5);
        let want = [h * (s3 + 1.0), h * (s3 - 1.0), h * (s3 - 1.0), h * (s3 + 1.0)];
        for (g, w) in r.as_slice().iter().zip(want) {
            assert!((g - w).abs() < 1e-14);
        }
        assert!(SymMatrix::diag(&[1.0, -1.0]).sqrt_pd().is_err());
    }

    #[test]
    fn asymmetric_rejected() {
        assert!(SymMatrix::new(2, vec![1.0, 2.0, 3.0, 1.0]).is_err());
        assert!(SymMatrix::new(0, vec![]).is_err());
    }

    #[test]
    fn upper_roundtrip() {
        let a = SymMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 5.0], vec![3.0, 5.0, 6.0]])
            .unwrap();
        assert_eq!(a.to_upper(), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(SymMatrix::from_upper(3, &a.to_upper()).unwrap(), a);
    }

    fn random_pd(m: usize) -> impl Strategy<Value = SymMatrix> {
        proptest::collection::vec(-1.0f64..1.0, m * m).prop_map(move |g| {
            // G Gᵀ + 0.1 I
            let mut data = vec![0.0; m * m];
            for i in 0..m {
                for j in 0..m {
                    data[i * m + j] = (0..m).map(|k| g[i * m + k] * g[j * m + k]).sum::<f64>()
                        + if i == j { 0.1 } else { 0.0 };
                }
            }
            SymMatrix::new(m, data).unwrap()
        })
    }

    fn random_sym(m: usize) -> impl Strategy<Value = SymMatrix> {
        proptest::collection::vec(-3.0f64..3.0, m * (m + 1) / 2)
            .prop_map(move |u| SymMatrix::from_upper(m, &u).unwrap())
    }

    proptest! {
        #[test]
        fn sqrt_squares_back(a in (1usize..=5).prop_flat_map(random_pd)) {
            let r = a.sqrt_pd().unwrap();
            let sq = SymMatrix::new(a.dim(), r.matmul(&r)).unwrap();
            prop_assert!(sq.add(&a.scale(-1.0)).frobenius() <= 1e-10 * a.frobenius());
        }

        #[test]
        fn det_and_trace_from_spectrum(a in (1usize..=5).prop_flat_map(random_sym)) {
            let ev = a.eigenvalues().unwrap();
            let prod: f64 = ev.iter().product();
            let sum: f64 = ev.iter().sum();
            let scale = a.frobenius().max(1e-300);
            prop_assert!((a.det() - prod).abs() <= 1e-12 * scale.powi(a.dim() as i32) * 10.0);
            prop_assert!((a.trace() - sum).abs() <= 1e-12 * scale * 10.0);
            prop_assert!(reconstruct(&a) <= 1e-10 * scale);
        }

        #[test]
        fn negation_flips_class(a in (1usize..=4).prop_flat_map(random_sym)) {
            let c = a.classify_sign().unwrap();
            prop_assert_eq!(a.scale(-1.0).classify_sign().unwrap(), c.flip());
        }
    }
}
