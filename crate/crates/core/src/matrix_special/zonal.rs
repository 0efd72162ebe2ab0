//! Partitions and zonal polynomials `C_κ` of a symmetric matrix argument.
//!
//! `C_κ` is stored in the monomial symmetric basis, `C_κ = Σ_λ c_{κλ} m_λ`.
//! The monic polynomial `P_κ = m_κ + Σ_{λ<κ} c_{κλ} m_λ` is produced by
//! James's recurrence
//!
//! ```text
//! c_{κλ} = Σ_μ ((l_i + t) - (l_j - t)) c_{κμ} / (ρ_κ - ρ_λ),   ρ_κ = Σ k_i (k_i - i)
//! ```
//!
//! where `μ` runs over the partitions reached from `λ = (l_1, …)` by moving
//! `t ∈ 1..=l_j` from part `j` to an earlier part `i`, and is then rescaled
//! to `C_κ = 2^k k! / Π_{s∈κ} (2(a(s)+1) + l(s)) · P_κ` (arm `a`, leg `l`).
//! All coefficients are positive so the recurrence runs in floating point
//! without cancellation.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Largest degree for which tables are built.
pub const MAX_DEGREE: usize = 60;

/// A non-increasing list of positive integers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::domain("partition parts must be positive"));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::domain(format!("partition {parts:?} is not non-increasing")));
        }
        Ok(Partition { parts })
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// `k = Σ k_i`.
    pub fn k(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Dominance order: every partial sum of `self` is at least that of `other`.
    fn dominates(&self, other: &Partition) -> bool {
        let (mut a, mut b) = (0, 0);
        for i in 0..self.len().max(other.len()) {
            a += self.parts.get(i).copied().unwrap_or(0);
            b += other.parts.get(i).copied().unwrap_or(0);
            if a < b {
                return false;
            }
        }
        true
    }

    fn rho(&self) -> f64 {
        self.parts
            .iter()
            .enumerate()
            .map(|(i, &k)| k as f64 * (k as f64 - (i + 1) as f64))
            .sum()
    }

    /// `Π_{s∈κ} (2(a(s)+1) + l(s))`.
    fn upper_hook_product(&self) -> f64 {
        let mut prod = 1.0;
        for (i, &row) in self.parts.iter().enumerate() {
            for j in 0..row {
                let arm = (row - j - 1) as f64;
                let leg = self.parts[i + 1..].iter().filter(|&&r| r > j).count() as f64;
                prod *= 2.0 * (arm + 1.0) + leg;
            }
        }
        prod
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;
    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

fn check_degree(k: usize) -> Result<()> {
    if k > MAX_DEGREE {
        return Err(Error::Capacity(format!(
            "degree {k} exceeds the zonal table limit {MAX_DEGREE}"
        )));
    }
    Ok(())
}

/// All partitions of `k` with at most `max_parts` parts, reverse-lexicographic.
pub fn partitions(k: usize, max_parts: usize) -> Result<Vec<Partition>> {
    check_degree(k)?;
    if max_parts == 0 {
        return Err(Error::domain("max_parts must be at least 1"));
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    fill(k, k, max_parts, &mut current, &mut out);
    Ok(out)
}

fn fill(rest: usize, cap: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
    if rest == 0 {
        out.push(Partition { parts: cur.clone() });
        return;
    }
    if slots == 0 {
        return;
    }
    for first in (1..=cap.min(rest)).rev() {
        cur.push(first);
        fill(rest - first, first, slots - 1, cur, out);
        cur.pop();
    }
}

/// Coefficients of every `C_κ` of one degree.
#[derive(Debug, Clone, PartialEq)]
struct Degree {
    parts: Vec<Partition>,
    /// Row `κ`, column `λ`: coefficient of `m_λ` in `C_κ`.
    coeffs: Vec<Vec<f64>>,
}

impl Degree {
    fn build(k: usize, m: usize) -> Result<Self> {
        let parts = partitions(k, m)?;
        let n = parts.len();
        let index: HashMap<&[usize], usize> =
            parts.iter().enumerate().map(|(i, p)| (p.parts(), i)).collect();
        let factorial: f64 = (1..=k).map(|i| i as f64).product();
        let mut coeffs = vec![vec![0.0; n]; n];
        for (ki, kappa) in parts.iter().enumerate() {
            let row = &mut coeffs[ki];
            row[ki] = 1.0;
            let rho_k = kappa.rho();
            for li in (ki + 1)..n {
                if !kappa.dominates(&parts[li]) {
                    continue;
                }
                let lambda = parts[li].parts();
                let mut acc = 0.0;
                for j in 1..lambda.len() {
                    for i in 0..j {
                        for t in 1..=lambda[j] {
                            let mut mu = lambda.to_vec();
                            mu[i] += t;
                            mu[j] -= t;
                            mu.retain(|&p| p > 0);
                            mu.sort_unstable_by(|a, b| b.cmp(a));
                            let Some(&mi) = index.get(mu.as_slice()) else { continue };
                            // partitions lexicographically above κ are not dominated by it
                            if mi < ki {
                                continue;
                            }
                            let weight = (lambda[i] + t) as f64 - (lambda[j] as f64 - t as f64);
                            acc += weight * row[mi];
                        }
                    }
                }
                row[li] = acc / (rho_k - parts[li].rho());
            }
            let scale = 2f64.powi(k as i32) * factorial / kappa.upper_hook_product();
            for c in row.iter_mut() {
                *c *= scale;
            }
        }
        Ok(Degree { parts, coeffs })
    }

    /// Values of every `m_λ` of this degree at the given eigenvalues.
    fn monomials(&self, eig: &[f64]) -> Vec<f64> {
        self.parts.iter().map(|p| monomial(p.parts(), eig)).collect()
    }
}

/// `m_λ(x)`: sum over distinct rearrangements of `λ` (padded with zeros).
fn monomial(lambda: &[usize], eig: &[f64]) -> f64 {
    let m = eig.len();
    if lambda.len() > m {
        return 0.0;
    }
    let mut exps: Vec<usize> = lambda.to_vec();
    exps.resize(m, 0);
    exps.sort_unstable();
    let mut total = 0.0;
    loop {
        total += exps.iter().zip(eig).map(|(&e, &x)| x.powi(e as i32)).product::<f64>();
        if !next_permutation(&mut exps) {
            break;
        }
    }
    total
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Zonal polynomial coefficients for matrices of side `m`, degrees `0..=k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalTable {
    m: usize,
    k_max: usize,
    degrees: Vec<Degree>,
}

const CACHE_MAGIC: &[u8; 4] = b"ZNLT";
const CACHE_VERSION: u32 = 1;

impl ZonalTable {
    pub fn build(m: usize, k_max: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("matrix side must be at least 1"));
        }
        check_degree(k_max)?;
        let degrees = (0..=k_max).map(|k| Degree::build(k, m)).collect::<Result<_>>()?;
        Ok(ZonalTable { m, k_max, degrees })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn partitions(&self, k: usize) -> Result<&[Partition]> {
        self.degree(k).map(|d| d.parts.as_slice())
    }

    fn degree(&self, k: usize) -> Result<&Degree> {
        self.degrees.get(k).ok_or_else(|| {
            Error::Capacity(format!("degree {k} exceeds this table's limit {}", self.k_max))
        })
    }

    /// `C_κ` at the eigenvalues; zero when `κ` has more parts than eigenvalues.
    pub fn zonal(&self, kappa: &Partition, eig: &[f64]) -> Result<f64> {
        if eig.len() != self.m {
            return Err(Error::domain(format!(
                "table is for {}×{} matrices, got {} eigenvalues",
                self.m,
                self.m,
                eig.len()
            )));
        }
        if kappa.len() > self.m {
            return Ok(0.0);
        }
        let d = self.degree(kappa.k())?;
        let row = d.parts.iter().position(|p| p == kappa).expect("partition is tabulated");
        Ok(d.coeffs[row].iter().zip(d.monomials(eig)).map(|(c, v)| c * v).sum())
    }

    /// Every `C_κ`, `κ ⊢ k`, at the eigenvalues, in the order of
    /// [`ZonalTable::partitions`].
    pub fn zonal_all(&self, k: usize, eig: &[f64]) -> Result<Vec<f64>> {
        let d = self.degree(k)?;
        let mono = d.monomials(eig);
        Ok(d.coeffs
            .iter()
            .map(|row| row.iter().zip(&mono).map(|(c, v)| c * v).sum())
            .collect())
    }

    /// Binary layout, little endian: magic `ZNLT`, version `u32`, `m u32`,
    /// `k_max u32`; per degree the partition count `u32`, each partition as a
    /// part count `u32` followed by its parts `u32`, then the coefficient matrix
    /// row-major as `f64`; finally the SHA-256 of all preceding bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(CACHE_MAGIC);
        for v in [CACHE_VERSION, self.m as u32, self.k_max as u32] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for d in &self.degrees {
            buf.extend_from_slice(&(d.parts.len() as u32).to_le_bytes());
            for p in &d.parts {
                buf.extend_from_slice(&(p.len() as u32).to_le_bytes());
                for &x in p.parts() {
                    buf.extend_from_slice(&(x as u32).to_le_bytes());
                }
            }
            for row in &d.coeffs {
                for c in row {
                    buf.extend_from_slice(&c.to_le_bytes());
                }
            }
        }
        let digest = Sha256::digest(&buf);
        buf.extend_from_slice(&digest);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let corrupt = |why: &str| Error::numeric(format!("zonal cache rejected: {why}"));
        if bytes.len() < 16 + 32 {
            return Err(corrupt("truncated"));
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(corrupt("checksum mismatch"));
        }
        let mut r = Reader { buf: body, pos: 0 };
        if r.take(4).ok_or_else(|| corrupt("truncated"))? != CACHE_MAGIC {
            return Err(corrupt("bad magic"));
        }
        let u32_field = |r: &mut Reader| r.u32().ok_or_else(|| corrupt("truncated"));
        if u32_field(&mut r)? != CACHE_VERSION {
            return Err(corrupt("unsupported version"));
        }
        let m = u32_field(&mut r)? as usize;
        let k_max = u32_field(&mut r)? as usize;
        if m == 0 || k_max > MAX_DEGREE {
            return Err(corrupt("header out of range"));
        }
        let mut degrees = Vec::with_capacity(k_max + 1);
        for _ in 0..=k_max {
            let n = u32_field(&mut r)? as usize;
            let mut parts = Vec::with_capacity(n);
            for _ in 0..n {
                let len = u32_field(&mut r)? as usize;
                let p = (0..len).map(|_| u32_field(&mut r).map(|v| v as usize)).collect::<Result<_>>()?;
                parts.push(Partition::new(p)?);
            }
            let mut coeffs = vec![vec![0.0; n]; n];
            for row in coeffs.iter_mut() {
                for c in row.iter_mut() {
                    *c = r.f64().ok_or_else(|| corrupt("truncated"))?;
                }
            }
            degrees.push(Degree { parts, coeffs });
        }
        if r.pos != body.len() {
            return Err(corrupt("trailing bytes"));
        }
        Ok(ZonalTable { m, k_max, degrees })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        ZonalTable::from_bytes(&fs::read(path)?)
    }

    /// Load a cached table for `(m, k_max)`; rebuild and rewrite the file when
    /// it is absent, corrupt or built for different parameters.
    pub fn load_or_build(path: &Path, m: usize, k_max: usize) -> Result<Self> {
        if let Ok(t) = ZonalTable::load(path) {
            if t.m == m && t.k_max == k_max {
                return Ok(t);
            }
        }
        let t = ZonalTable::build(m, k_max)?;
        t.save(path)?;
        Ok(t)
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.buf.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(s)
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64(&mut self) -> Option<f64> {
        self.take(8).map(|b| f64::from_le_bytes(b.try_into().unwrap()))
    }
}

/// Process-wide tables, one per matrix side, grown on demand.
pub fn shared_table(m: usize, k_max: usize) -> Result<Arc<ZonalTable>> {
    static TABLES: OnceLock<Mutex<HashMap<usize, Arc<ZonalTable>>>> = OnceLock::new();
    check_degree(k_max)?;
    let mut tables = TABLES.get_or_init(Default::default).lock().expect("zonal table lock poisoned");
    if let Some(t) = tables.get(&m) {
        if t.k_max >= k_max {
            return Ok(Arc::clone(t));
        }
    }
    let t = Arc::new(ZonalTable::build(m, k_max)?);
    tables.insert(m, Arc::clone(&t));
    Ok(t)
}

/// `C_κ(X)` from the eigenvalues of `X`.
pub fn zonal(kappa: &Partition, eigenvalues: &[f64]) -> Result<f64> {
    if eigenvalues.is_empty() {
        return Err(Error::domain("need at least one eigenvalue"));
    }
    if kappa.len() > eigenvalues.len() {
        return Ok(0.0);
    }
    shared_table(eigenvalues.len(), kappa.k())?.zonal(kappa, eigenvalues)
}
