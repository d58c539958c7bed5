//! JSON documents: system input, full synthesis report, and the
//! realization subset read back by `qrealize check`.
//!
//! Matrices are nested row-major arrays. Complex entries are written as
//! `[re, im]` pairs. Numbers use the shortest decimal form that round-trips
//! to the same `f64`, so reports carry the exact computed values.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, RealMatrix, TolerancePolicy};
use crate::realizability::{LtiSystem, Residual};
use crate::synthesis::{MinimalityCertificate, Realization};

pub type Rows = Vec<Vec<f64>>;
pub type ComplexRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry_tol: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: TolerancePolicy) -> TolerancePolicy {
        TolerancePolicy {
            rank_rel_tol: self.rank_rel_tol.unwrap_or(base.rank_rel_tol),
            residual_tol: self.residual_tol.unwrap_or(base.residual_tol),
            symmetry_tol: self.symmetry_tol.unwrap_or(base.symmetry_tol),
        }
    }
}

/// Input document: `{"A": [[..]], "B": [[..]], "C": [[..]]}` plus optional
/// `tolerances` and `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDocument {
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "C")]
    pub c: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SystemDocument {
    pub fn from_system(sys: &LtiSystem) -> Self {
        Self {
            a: matrix_to_rows(sys.a()),
            b: matrix_to_rows(sys.b()),
            c: matrix_to_rows(sys.c()),
            tolerances: None,
            seed: None,
        }
    }

    pub fn to_system(&self) -> Result<LtiSystem> {
        let a = rows_to_matrix("A", &self.a)?;
        let b = rows_to_matrix("B", &self.b)?;
        let c = rows_to_matrix("C", &self.c)?;
        Ok(LtiSystem::new(a, b, c)?)
    }

    pub fn tolerance(&self) -> Result<TolerancePolicy> {
        let tol = self
            .tolerances
            .clone()
            .unwrap_or_default()
            .apply(TolerancePolicy::default());
        tol.validate()?;
        Ok(tol)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn matrix_to_rows(m: &RealMatrix) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn complex_matrix_to_rows(m: &ComplexMatrix) -> ComplexRows {
    m.row_iter()
        .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn complex_rows_to_matrix(name: &str, rows: &ComplexRows) -> Result<ComplexMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
        return Err(Error::Parse(format!(
            "{name}: row {bad} has {} entries, expected {cols}",
            rows[bad].len()
        )));
    }
    Ok(ComplexMatrix::from_fn(rows.len(), cols, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

/// Row-major arrays to a matrix, reporting ragged rows and non-finite
/// entries with their position.
pub fn rows_to_matrix(name: &str, rows: &Rows) -> Result<RealMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Parse(format!(
                "{name}: row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse(format!(
                "{name}: non-finite entry at row {i}, column {j}"
            )));
        }
    }
    Ok(RealMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

pub fn parse_system_document(text: &str) -> Result<SystemDocument> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_system(text: &str) -> Result<LtiSystem> {
    parse_system_document(text)?.to_system()
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisDocument {
    pub n: usize,
    pub n_u: usize,
    pub n_y: usize,
    pub s_tilde: Rows,
    pub s_eigenvalues: Vec<f64>,
    pub r: usize,
    pub n_v: usize,
    pub multiplicity_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationDocument {
    #[serde(rename = "R")]
    pub r: Rows,
    #[serde(rename = "Lambda")]
    pub lambda: ComplexRows,
    #[serde(rename = "B1")]
    pub b1: Rows,
    #[serde(rename = "D1")]
    pub d1: Rows,
    pub n_v: usize,
}

impl RealizationDocument {
    pub fn from_realization(real: &Realization) -> Self {
        Self {
            r: matrix_to_rows(&real.hamiltonian),
            lambda: complex_matrix_to_rows(&real.coupling),
            b1: matrix_to_rows(&real.b1),
            d1: matrix_to_rows(&real.d1),
            n_v: real.n_v,
        }
    }
}

/// Everything `qrealize synthesize` writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: ToolInfo,
    pub tolerances: TolerancePolicy,
    pub seed: u64,
    pub input: SystemDocument,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realization: Option<RealizationDocument>,
    pub residuals: Vec<Residual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<MinimalityCertificate>,
    pub all_pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ReportDocument {
    pub fn to_json(&self) -> Result<String> {
        let mut text =
            serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }
}

/// `(B1, D1)` from either a bare `{"B1": .., "D1": ..}` object or a full
/// report with a `realization` section.
pub fn parse_realization(text: &str) -> Result<(RealMatrix, RealMatrix)> {
    #[derive(Deserialize)]
    struct NoiseMatrices {
        #[serde(rename = "B1")]
        b1: Rows,
        #[serde(rename = "D1")]
        d1: Rows,
    }

    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let section = match value.get("realization") {
        Some(inner) if !inner.is_null() => inner.clone(),
        Some(_) => {
            return Err(Error::Parse(
                "report has no realization section".to_string(),
            ))
        }
        None => value,
    };
    let parsed: NoiseMatrices =
        serde_json::from_value(section).map_err(|e| Error::Parse(e.to_string()))?;
    Ok((
        rows_to_matrix("B1", &parsed.b1)?,
        rows_to_matrix("D1", &parsed.d1)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn reference_document_parses() {
        let text = SystemDocument::from_system(&fixtures::reference_system())
            .to_json()
            .unwrap();
        let sys = parse_system(&text).unwrap();
        assert_eq!(sys.n(), 4);
        assert_eq!(sys, fixtures::reference_system());
    }

    #[test]
    fn empty_document_rejected() {
        let err = parse_system(r#"{"A": [], "B": [], "C": []}"#).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
        assert!(parse_system("{}").is_err());
        assert!(parse_system("not json").is_err());
    }

    #[test]
    fn odd_output_rejected() {
        let doc = SystemDocument {
            a: vec![vec![0.0; 4]; 4],
            b: vec![vec![0.0; 2]; 4],
            c: vec![vec![0.0; 4]; 3],
            tolerances: None,
            seed: None,
        };
        let err = parse_system(&doc.to_json().unwrap()).unwrap_err();
        assert!(err.to_string().contains("n_y = 3"), "{err}");
    }

    #[test]
    fn ragged_rows_report_position() {
        let err =
            parse_system(r#"{"A": [[0, 1], [1]], "B": [[1, 0], [0, 1]], "C": [[1, 0], [0, 1]]}"#)
                .unwrap_err();
        assert!(err.to_string().contains("A: row 1"), "{err}");
    }

    #[test]
    fn tolerance_overrides() {
        let doc = parse_system_document(
            r#"{"A": [[0, 1], [-1, 0]], "B": [[0, 0], [0, 0]], "C": [[0, 0], [0, 0]],
                "tolerances": {"rank_rel_tol": 1e-6}, "seed": 9}"#,
        )
        .unwrap();
        let tol = doc.tolerance().unwrap();
        assert_eq!(tol.rank_rel_tol, 1e-6);
        assert_eq!(tol.residual_tol, TolerancePolicy::default().residual_tol);
        assert_eq!(doc.seed, Some(9));

        let bad = parse_system_document(
            r#"{"A": [[0]], "B": [[0]], "C": [[0]], "tolerances": {"residual_tol": -1}}"#,
        )
        .unwrap();
        assert!(bad.tolerance().is_err());
    }

    #[test]
    fn realization_from_bare_and_nested() {
        let bare = r#"{"B1": [[1, 2]], "D1": [[1, 0]]}"#;
        let (b1, d1) = parse_realization(bare).unwrap();
        assert_eq!(b1.shape(), (1, 2));
        assert_eq!(d1[(0, 0)], 1.0);

        let nested = r#"{"realization": {"B1": [[1, 2]], "D1": [[1, 0]], "R": []}}"#;
        assert_eq!(parse_realization(nested).unwrap().0, b1);

        assert!(parse_realization(r#"{"realization": null}"#).is_err());
        assert!(parse_realization(r#"{"B1": [[1]]}"#).is_err());
    }

    #[test]
    fn complex_rows_roundtrip() {
        let m = ComplexMatrix::from_row_slice(
            1,
            2,
            &[Complex64::new(0.5, -1.0), Complex64::new(0.1, 0.2)],
        );
        let rows = complex_matrix_to_rows(&m);
        assert_eq!(rows, vec![vec![[0.5, -1.0], [0.1, 0.2]]]);
        assert_eq!(complex_rows_to_matrix("L", &rows).unwrap(), m);
    }
}
