//! Analysis of a given LTI triple `(A, B, C)`.
//!
//! The central object is the real skew-symmetric matrix
//!
//! ```text
//! S̃ = Θ B Θᵤ Bᵀ Θ − Aᵀ Θ − Θ A − Cᵀ Θᵧ C
//! ```
//!
//! whose rank `r` fixes the minimum number of extra vacuum noise channels,
//! `n_v = n_u + r`. The Hermitian companion `S = (i/4)·S̃` drives the
//! synthesis step in [`crate::synthesis`].

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::linalg::{
    build_theta, frobenius, hermitian_eig, hstack, rank_with_scale, relative_residual,
    symplectic_form, to_complex, ComplexMatrix, HermitianEigen, RealMatrix, TolerancePolicy,
};

/// Relative gap used to decide that two eigenvalues belong to the same cluster
/// when counting the multiplicity of the smallest one.
pub const MULTIPLICITY_REL_GAP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("matrix {which} is empty")]
    Empty { which: &'static str },

    #[error("matrix {which} has shape {found:?}, expected {expected}")]
    Shape {
        which: &'static str,
        expected: String,
        found: (usize, usize),
    },

    #[error("matrix {which} has a non-finite entry at row {row}, column {col}")]
    NonFinite {
        which: &'static str,
        row: usize,
        col: usize,
    },

    #[error("dimension {name} = {value} is odd; quadratures come in pairs")]
    OddDimension { name: &'static str, value: usize },

    #[error("output dimension n_y = {n_y} differs from input dimension n_u = {n_u}")]
    OutputInputMismatch { n_y: usize, n_u: usize },
}

/// A validated real triple `(A, B, C)` with even `n`, `n_u = n_y`.
#[derive(Clone, PartialEq)]
pub struct LtiSystem {
    a: RealMatrix,
    b: RealMatrix,
    c: RealMatrix,
}

impl fmt::Debug for LtiSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LtiSystem")
            .field("n", &self.n())
            .field("n_u", &self.n_u())
            .field("n_y", &self.n_y())
            .finish()
    }
}

fn check_finite(which: &'static str, m: &RealMatrix) -> std::result::Result<(), ValidationError> {
    for row in 0..m.nrows() {
        for col in 0..m.ncols() {
            if !m[(row, col)].is_finite() {
                return Err(ValidationError::NonFinite { which, row, col });
            }
        }
    }
    Ok(())
}

impl LtiSystem {
    pub fn new(
        a: RealMatrix,
        b: RealMatrix,
        c: RealMatrix,
    ) -> std::result::Result<Self, ValidationError> {
        for (which, m) in [("A", &a), ("B", &b), ("C", &c)] {
            if m.is_empty() {
                return Err(ValidationError::Empty { which });
            }
        }
        let n = a.nrows();
        if !a.is_square() {
            return Err(ValidationError::Shape {
                which: "A",
                expected: "square".into(),
                found: a.shape(),
            });
        }
        if b.nrows() != n {
            return Err(ValidationError::Shape {
                which: "B",
                expected: format!("{n} rows"),
                found: b.shape(),
            });
        }
        if c.ncols() != n {
            return Err(ValidationError::Shape {
                which: "C",
                expected: format!("{n} columns"),
                found: c.shape(),
            });
        }
        check_finite("A", &a)?;
        check_finite("B", &b)?;
        check_finite("C", &c)?;

        let (n_u, n_y) = (b.ncols(), c.nrows());
        for (name, value) in [("n", n), ("n_u", n_u), ("n_y", n_y)] {
            if value % 2 != 0 {
                return Err(ValidationError::OddDimension { name, value });
            }
        }
        if n_y != n_u {
            return Err(ValidationError::OutputInputMismatch { n_y, n_u });
        }
        Ok(Self { a, b, c })
    }

    pub fn from_rows(a: &[&[f64]], b: &[&[f64]], c: &[&[f64]]) -> Result<Self> {
        Ok(Self::new(from_rows(a)?, from_rows(b)?, from_rows(c)?)?)
    }

    pub fn a(&self) -> &RealMatrix {
        &self.a
    }

    pub fn b(&self) -> &RealMatrix {
        &self.b
    }

    pub fn c(&self) -> &RealMatrix {
        &self.c
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_u(&self) -> usize {
        self.b.ncols()
    }

    pub fn n_y(&self) -> usize {
        self.c.nrows()
    }
}

/// Row-major slices to a matrix. Ragged input is a dimension error.
pub fn from_rows(rows: &[&[f64]]) -> Result<RealMatrix> {
    let cols = rows.first().map_or(0, |r| r.len());
    if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
        return Err(Error::Dimension(format!(
            "row {bad} has {} entries, expected {cols}",
            rows[bad].len()
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// Ito matrices of vacuum noise, `F = I + i·diag(J)`, and the skew part
/// `T_w = ½·blockdiag(F_v − F_vᵀ, F_u − F_uᵀ)`.
#[derive(Debug, Clone)]
pub struct NoiseItoStructure {
    pub f_v: ComplexMatrix,
    pub f_u: ComplexMatrix,
    pub t_w: ComplexMatrix,
}

impl NoiseItoStructure {
    pub fn vacuum(n_v: usize, n_u: usize) -> Result<Self> {
        let ito = |k: usize| -> Result<ComplexMatrix> {
            Ok(ComplexMatrix::identity(k, k) + to_complex(&build_theta(k)?) * Complex64::i())
        };
        let f_v = ito(n_v)?;
        let f_u = ito(n_u)?;
        let half = Complex64::new(0.5, 0.0);
        let skew_v = (&f_v - f_v.transpose()) * half;
        let skew_u = (&f_u - f_u.transpose()) * half;
        let mut t_w = ComplexMatrix::zeros(n_v + n_u, n_v + n_u);
        t_w.view_mut((0, 0), (n_v, n_v)).copy_from(&skew_v);
        t_w.view_mut((n_v, n_v), (n_u, n_u)).copy_from(&skew_u);
        Ok(Self { f_v, f_u, t_w })
    }
}

/// `S̃`, its Hermitian companion, eigen data and numerical rank.
#[derive(Debug, Clone)]
pub struct SkewReport {
    pub s_tilde: RealMatrix,
    /// `S = (i/4)·S̃`.
    pub s: ComplexMatrix,
    /// Eigen-decomposition of `S`, eigenvalues descending.
    pub eigen: HermitianEigen,
    pub rank: usize,
    /// Sum of the Frobenius norms of the four terms making up `S̃`. Rank
    /// cutoffs are measured against this so that exact cancellation reads
    /// as rank zero.
    pub term_scale: f64,
    pub tol: TolerancePolicy,
}

impl SkewReport {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    /// `‖S̃ + S̃ᵀ‖_F / ‖S̃‖_F`.
    pub fn skew_residual(&self) -> f64 {
        relative_residual(
            frobenius(&(&self.s_tilde + self.s_tilde.transpose())),
            frobenius(&self.s_tilde),
        )
    }

    /// `max_k |λ_k + λ_{n+1-k}| / max|λ|` over the sorted eigenvalues of `S`.
    pub fn pairing_residual(&self) -> f64 {
        let values = &self.eigen.values;
        let n = values.len();
        let peak = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let worst = (0..n).fold(0.0_f64, |acc, k| {
            acc.max((values[k] + values[n - 1 - k]).abs())
        });
        relative_residual(worst, peak)
    }

    /// Reference scale for rank decisions on `S` (a quarter of `term_scale`).
    pub fn s_scale(&self) -> f64 {
        self.term_scale / 4.0
    }

    /// Whether `S̃` is numerically zero relative to the terms it is built from.
    pub fn is_zero(&self) -> bool {
        frobenius(&self.s_tilde) <= self.tol.rank_cutoff(0.0, self.term_scale)
    }

    pub fn noise_count(&self, n_u: usize) -> Result<NoiseCount> {
        if !self.rank.is_multiple_of(2) {
            return Err(Error::OddRank { rank: self.rank });
        }
        Ok(NoiseCount {
            r: self.rank,
            n_v: n_u + self.rank,
        })
    }
}

pub fn compute_s_tilde(sys: &LtiSystem, tol: &TolerancePolicy) -> Result<SkewReport> {
    tol.validate()?;
    let theta = build_theta(sys.n())?;
    let (a, b, c) = (sys.a(), sys.b(), sys.c());

    // ΘBΘᵤBᵀΘ = −(ΘB)Θᵤ(ΘB)ᵀ since Θᵀ = −Θ.
    let input_term = -symplectic_form(&(&theta * b))?;
    // −AᵀΘ − ΘA = (ΘA)ᵀ − ΘA, formed so that every term is exactly skew.
    let theta_a = &theta * a;
    let drift_term = theta_a.transpose() - &theta_a;
    let output_term = symplectic_form(&c.transpose())?;

    let s_tilde = &input_term - &output_term + &drift_term;
    let term_scale = frobenius(&input_term) + 2.0 * frobenius(&theta_a) + frobenius(&output_term);

    let asym = frobenius(&(&s_tilde + s_tilde.transpose()));
    let asym_rel = relative_residual(asym, frobenius(&s_tilde).max(term_scale));
    if asym_rel > tol.symmetry_tol {
        return Err(Error::Numerical(format!(
            "S̃ is not skew-symmetric: relative residual {asym_rel:.3e}"
        )));
    }

    let s = to_complex(&s_tilde) * Complex64::new(0.0, 0.25);
    let eigen = hermitian_eig(&s, tol)?;
    let rank = rank_with_scale(&s_tilde, tol, term_scale);

    Ok(SkewReport {
        s_tilde,
        s,
        eigen,
        rank,
        term_scale,
        tol: *tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseCount {
    pub r: usize,
    pub n_v: usize,
}

/// Exact minimum number of noise channels: `n_v = n_u + rank S̃`.
pub fn minimal_noise_count(sys: &LtiSystem, tol: &TolerancePolicy) -> Result<NoiseCount> {
    compute_s_tilde(sys, tol)?.noise_count(sys.n_u())
}

/// The older multiplicity-based count `n_u + 2(n − n_λ)`, where `n_λ` is the
/// multiplicity of the most negative eigenvalue of `i·S̃`.
pub fn multiplicity_noise_bound(sys: &LtiSystem, tol: &TolerancePolicy) -> Result<usize> {
    let skew = compute_s_tilde(sys, tol)?;
    Ok(multiplicity_noise_bound_from(&skew, sys.n_u()))
}

pub fn multiplicity_noise_bound_from(skew: &SkewReport, n_u: usize) -> usize {
    let n = skew.eigen.values.len();
    // i·S̃ = 4·S
    let values: Vec<f64> = skew.eigen.values.iter().map(|v| 4.0 * v).collect();
    let peak = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let gap = (MULTIPLICITY_REL_GAP * peak).max(skew.tol.rank_cutoff(0.0, skew.term_scale));
    let lowest = values.last().copied().unwrap_or(0.0);
    let multiplicity = values.iter().filter(|&&v| v - lowest <= gap).count();
    n_u + 2 * (n - multiplicity)
}

/// One named residual norm and its verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Named residual norms; stores raw values, not just verdicts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub entries: Vec<Residual>,
}

impl ResidualReport {
    pub fn push(&mut self, name: impl Into<String>, value: f64, tol: f64) {
        self.entries.push(Residual {
            name: name.into(),
            value,
            tol,
            pass: value.is_finite() && value <= tol,
        });
    }

    pub fn extend(&mut self, other: ResidualReport) {
        self.entries.extend(other.entries);
    }

    pub fn get(&self, name: &str) -> Option<&Residual> {
        self.entries.iter().find(|r| r.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|r| r.value)
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<String> {
        self.entries
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.name.clone())
            .collect()
    }
}

pub const CONDITION_COMMUTATION: &str = "condition (i)";
pub const CONDITION_OUTPUT_NOISE: &str = "condition (ii)";
pub const CONDITION_FEEDTHROUGH: &str = "condition (iii)";

/// Check the realizability conditions for a candidate `(B1, D1)`:
///
/// * (i)   `iAΘ + iΘAᵀ + [B1 B]·T_w·[B1 B]ᵀ = 0`
/// * (ii)  the first `n_y` columns of `B1` equal `Θ Cᵀ diag(J)`
/// * (iii) `D1 = [I 0]`
///
/// Each residual is a Frobenius norm relative to the size of the terms involved.
pub fn check_physical_realizability(
    sys: &LtiSystem,
    b1: &RealMatrix,
    d1: &RealMatrix,
    tol: &TolerancePolicy,
) -> Result<ResidualReport> {
    let (n, n_u, n_y) = (sys.n(), sys.n_u(), sys.n_y());
    let n_v = b1.ncols();
    if b1.nrows() != n {
        return Err(Error::Dimension(format!(
            "B1 has {} rows, system has n = {n}",
            b1.nrows()
        )));
    }
    if !n_v.is_multiple_of(2) || n_v < n_y {
        return Err(Error::Dimension(format!(
            "B1 has {n_v} columns; need an even count >= n_y = {n_y}"
        )));
    }
    if d1.shape() != (n_y, n_v) {
        return Err(Error::Dimension(format!(
            "D1 has shape {:?}, expected ({n_y}, {n_v})",
            d1.shape()
        )));
    }

    let theta = build_theta(n)?;
    let a = sys.a();
    let i = Complex64::i();
    let mut report = ResidualReport::default();

    // (i)
    let w = to_complex(&hstack(&[b1, sys.b()])?);
    let ito = NoiseItoStructure::vacuum(n_v, n_u)?;
    let drift = to_complex(&(a * &theta)) * i;
    let drift_t = to_complex(&(&theta * a.transpose())) * i;
    let noise = &w * &ito.t_w * w.transpose();
    let total = &drift + &drift_t + &noise;
    // ‖W‖² bounds every pair product summed into the noise term (‖T_w‖₂ = 1).
    let scale = frobenius(&drift) + frobenius(&drift_t) + frobenius(&w).powi(2);
    report.push(
        CONDITION_COMMUTATION,
        relative_residual(frobenius(&total), scale),
        tol.residual_tol,
    );

    // (ii)
    let target = &theta * sys.c().transpose() * build_theta(n_y)?;
    let leading = b1.columns(0, n_y);
    report.push(
        CONDITION_OUTPUT_NOISE,
        relative_residual(frobenius(&(leading - &target)), frobenius(&target)),
        tol.residual_tol,
    );

    // (iii)
    let expected = feedthrough(n_y, n_v);
    report.push(
        CONDITION_FEEDTHROUGH,
        relative_residual(frobenius(&(d1 - &expected)), frobenius(&expected)),
        tol.residual_tol,
    );

    Ok(report)
}

/// `[I_{n_y} 0]` with `n_v` columns.
pub fn feedthrough(n_y: usize, n_v: usize) -> RealMatrix {
    let mut d = RealMatrix::zeros(n_y, n_v);
    d.fill_diagonal(1.0);
    d
}
