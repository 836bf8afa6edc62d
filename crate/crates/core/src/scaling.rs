//! Generators of one-parameter scaling groups `t^E = exp((ln t) E)` and the
//! group-theoretic predicates used by the symbol decompositions.
//!
//! A `ScalingMap` is a small dense real matrix.  The two predicates that
//! matter downstream are:
//!
//! * contracting: `t^E -> 0` as `t -> 0`,
//! * non-expanding: `sup_{0 < t <= 1} ||t^E|| < infinity`.
//!
//! Both are decided by two independent routes, a spectral criterion on the
//! eigenvalue real parts and a sampled route that evaluates `||t^E||_F` on a
//! logarithmic grid.  The routes are kept separate on purpose: when they
//! disagree the verdict is `Inconclusive` rather than whichever route the
//! implementer happens to trust more.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{logspace, ls_slope};

/// Tri-state outcome of a numerical check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Eigenvalue real parts within this distance of the threshold count as on
/// the threshold for the spectral predicates.
const SPECTRAL_TOL: f64 = 1e-9;

/// Minimal log-log decay slope accepted as evidence of contraction on the
/// sampled route.
const CONTRACT_SLOPE_MIN: f64 = 1e-3;

/// Allowed relative growth of the sampled sup norm per two decades for the
/// non-expanding route.
const STABILIZE_FACTOR: f64 = 1.02;

/// Dense square real matrix acting as the generator (or an element) of a
/// scaling group, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ScalingMap {
    dim: usize,
    entries: Vec<f64>,
}

impl TryFrom<Vec<Vec<f64>>> for ScalingMap {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        ScalingMap::from_rows(&rows)
    }
}

impl From<ScalingMap> for Vec<Vec<f64>> {
    fn from(m: ScalingMap) -> Self {
        (0..m.dim)
            .map(|i| m.entries[i * m.dim..(i + 1) * m.dim].to_vec())
            .collect()
    }
}

impl ScalingMap {
    /// Build from a row-major entry slice of length `dim * dim`.
    pub fn new(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(Self {
            dim,
            entries: entries.to_vec(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "row of length {} in a matrix with {dim} rows",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
        }
        Self::new(dim, &entries)
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut entries = vec![0.0; dim * dim];
        for (i, d) in diag.iter().enumerate() {
            entries[i * dim + i] = *d;
        }
        Self { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|e| c * e).collect(),
        }
    }

    /// Entrywise difference `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot subtract a {}x{} matrix from a {}x{} matrix",
                other.dim, other.dim, self.dim, self.dim
            )));
        }
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Block-diagonal direct sum, acting on the concatenated variables.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let dim = self.dim + other.dim;
        let mut entries = vec![0.0; dim * dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                entries[i * dim + j] = self.entry(i, j);
            }
        }
        for i in 0..other.dim {
            for j in 0..other.dim {
                entries[(self.dim + i) * dim + (self.dim + j)] = other.entry(i, j);
            }
        }
        Self { dim, entries }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(
                "matrix product of mismatched dimensions".into(),
            ));
        }
        let d = self.dim;
        let mut entries = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.entry(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    entries[i * d + j] += a * other.entry(k, j);
                }
            }
        }
        Ok(Self { dim: d, entries })
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "applying a {0}x{0} matrix to a vector of length {1}",
                self.dim,
                x.len()
            )));
        }
        Ok((0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.entry(i, j) * x[j]).sum())
            .collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    pub fn determinant(&self) -> f64 {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries).determinant()
    }

    /// Matrix exponential by scaling and squaring with a degree-18 Taylor
    /// evaluation of the scaled matrix.  The generators in this crate are
    /// tiny (dim <= 8) and have moderate norms, where this is accurate to a
    /// few ulps.
    pub fn exp(&self) -> Self {
        let d = self.dim;
        let norm: f64 = (0..d)
            .map(|i| (0..d).map(|j| self.entry(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let s = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let scaled = self.scale(0.5f64.powi(s as i32));

        let mut result = Self::identity(d);
        let mut term = Self::identity(d);
        for k in 1..=18u32 {
            term = term
                .matmul(&scaled)
                .expect("same dim")
                .scale(1.0 / k as f64);
            for (r, t) in result.entries.iter_mut().zip(&term.entries) {
                *r += t;
            }
        }
        for _ in 0..s {
            result = result.matmul(&result).expect("same dim");
        }
        result
    }

    /// The group element `t^E = exp((ln t) E)` for `t > 0`.
    pub fn group_element(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidInput(format!(
                "group parameter must be positive and finite, got {t}"
            )));
        }
        Ok(self.scale(t.ln()).exp())
    }

    /// Frobenius norm of the commutator `[self, other]`.
    pub fn commutator_norm(&self, other: &Self) -> Result<f64> {
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        Ok(ab.sub(&ba)?.frobenius_norm())
    }

    fn eigenvalue_real_parts(&self) -> Vec<f64> {
        let m = DMatrix::from_row_slice(self.dim, self.dim, &self.entries);
        m.complex_eigenvalues().iter().map(|z| z.re).collect()
    }

    /// Does `t^E -> 0` as `t -> 0`?
    ///
    /// Spectral route: all eigenvalue real parts strictly positive (beyond
    /// `1e-9`).  Sampled route: `||t^E||_F` on `t in [1e-8, 1e-1]` decreases
    /// overall and its final log-log slope stays above `1e-3`.  Disagreement
    /// between the routes yields `Inconclusive`.
    pub fn is_contracting(&self) -> Verdict {
        let spectral = self
            .eigenvalue_real_parts()
            .iter()
            .all(|re| *re > SPECTRAL_TOL);

        let ts = logspace(1e-8, 1e-1, 29);
        let norms: Vec<f64> = ts
            .iter()
            .map(|t| self.group_element(*t).expect("t > 0").frobenius_norm())
            .collect();
        // ts is ascending, so index 0 is the smallest t.
        let decreasing = norms[0] < *norms.last().unwrap();
        let log_t: Vec<f64> = ts[..5].iter().map(|t| t.ln()).collect();
        let log_n: Vec<f64> = norms[..5].iter().map(|n| n.max(1e-300).ln()).collect();
        let slope = ls_slope(&log_t, &log_n);
        let sampled = decreasing && slope >= CONTRACT_SLOPE_MIN;

        match (spectral, sampled) {
            (true, true) => Verdict::Pass,
            (false, false) => Verdict::Fail,
            _ => Verdict::Inconclusive,
        }
    }

    /// Is `sup_{0 < t <= 1} ||t^E||` finite?
    ///
    /// Requires both the spectral criterion (eigenvalue real parts `>= -1e-9`)
    /// and stabilization of the sampled sup norm `M(tau) = max ||t^E||_F`
    /// over `t in [tau, 1]` as `tau` shrinks through `1e-6, 1e-8, 1e-10`.
    /// The conjunction catches nilpotent blocks whose eigenvalues vanish but
    /// whose group elements blow up logarithmically.
    pub fn is_non_expanding(&self) -> Verdict {
        let spectral = self
            .eigenvalue_real_parts()
            .iter()
            .all(|re| *re >= -SPECTRAL_TOL);

        let m = |tau: f64| -> f64 {
            logspace(tau, 1.0, 33)
                .iter()
                .map(|t| self.group_element(*t).expect("t > 0").frobenius_norm())
                .fold(0.0, f64::max)
        };
        let (m6, m8, m10) = (m(1e-6), m(1e-8), m(1e-10));
        let sampled = m8 <= STABILIZE_FACTOR * m6 && m10 <= STABILIZE_FACTOR * m8;

        Verdict::from_bool(spectral && sampled)
    }
}

impl std::fmt::Display for ScalingMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.dim {
            write!(f, "[")?;
            for j in 0..self.dim {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.entry(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}
