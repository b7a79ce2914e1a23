//! JSON documents for ensembles, states, and analysis reports.
//!
//! The single wire format for complex numbers is a `[re, im]` pair of
//! decimal numbers; string forms are rejected. Diagnostics carry the
//! JSON path of the offending field.

pub mod builtins;
pub mod report;
pub mod verify;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{DensityMatrix, UnitaryEnsemble};
use crate::error::{Error, Result};
use crate::Tolerances;

/// Serialized form of a random unitary operation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    pub unitaries: Vec<UnitaryEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitaryEntry {
    pub probability: f64,
    /// Row-major matrix; every entry is a `[re, im]` pair.
    pub matrix: Vec<Vec<[f64; 2]>>,
}

/// Serialized density matrix, under a top-level `state` key.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub state: Vec<Vec<[f64; 2]>>,
}

/// Per-document overrides for the numerical thresholds of the analysis.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit_circle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nullspace: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_period: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_dim: Option<usize>,
}

impl ToleranceOverrides {
    /// Base tolerances with this document's overrides applied.
    pub fn apply(&self, base: &Tolerances) -> Tolerances {
        let mut t = base.clone();
        if let Some(v) = self.unit_circle {
            t.unit_circle = v;
        }
        if let Some(v) = self.nullspace {
            t.nullspace = Some(v);
        }
        if let Some(v) = self.convergence {
            t.convergence = v;
        }
        if let Some(v) = self.max_period {
            t.max_period = v;
        }
        if let Some(v) = self.max_dim {
            t.max_dim = v;
        }
        t
    }
}

/// Convert a complex matrix to `[re, im]`-pair rows.
pub fn matrix_to_rows(m: &Array2<Complex64>) -> Vec<Vec<[f64; 2]>> {
    m.rows()
        .into_iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

/// Parse `[re, im]`-pair rows into a square complex matrix.
pub fn rows_to_matrix(rows: &[Vec<[f64; 2]>], what: &str) -> Result<Array2<Complex64>> {
    let d = rows.len();
    if d == 0 {
        return Err(Error::Parse(format!("{what}: matrix has no rows")));
    }
    let mut m = Array2::<Complex64>::zeros((d, d));
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(Error::Parse(format!(
                "{what}: row {i} has {} entries, expected {d} (matrix must be square)",
                row.len()
            )));
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Parse(format!(
                    "{what}: entry ({i},{j}) is not finite"
                )));
            }
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let inner = e.inner();
        Error::Parse(format!(
            "{what}: {} at line {} column {} (field `{}`)",
            inner,
            inner.line(),
            inner.column(),
            e.path()
        ))
    })
}

/// Parse and structurally validate an ensemble document.
pub fn parse_ensemble(text: &str) -> Result<EnsembleDocument> {
    let doc: EnsembleDocument = parse_json(text, "ensemble document")?;
    if doc.dim == 0 {
        return Err(Error::Parse("ensemble document: dim must be positive".into()));
    }
    if doc.unitaries.is_empty() {
        return Err(Error::Parse(
            "ensemble document: `unitaries` must contain at least one entry".into(),
        ));
    }
    for (k, entry) in doc.unitaries.iter().enumerate() {
        if entry.matrix.len() != doc.dim {
            return Err(Error::Parse(format!(
                "ensemble document: unitaries[{k}].matrix has {} rows, expected dim = {}",
                entry.matrix.len(),
                doc.dim
            )));
        }
        for (i, row) in entry.matrix.iter().enumerate() {
            if row.len() != doc.dim {
                return Err(Error::Parse(format!(
                    "ensemble document: unitaries[{k}].matrix row {i} has {} entries, expected {}",
                    row.len(),
                    doc.dim
                )));
            }
        }
    }
    Ok(doc)
}

/// Parse a density-matrix document.
pub fn parse_state(text: &str) -> Result<StateDocument> {
    parse_json(text, "state document")
}

impl EnsembleDocument {
    /// Validate into a [`UnitaryEnsemble`], honoring the document's
    /// tolerance overrides on top of `base`.
    pub fn to_ensemble(&self, base: &Tolerances) -> Result<UnitaryEnsemble> {
        let tols = self.effective_tolerances(base);
        let mut items = Vec::with_capacity(self.unitaries.len());
        for (k, entry) in self.unitaries.iter().enumerate() {
            let m = rows_to_matrix(&entry.matrix, &format!("unitaries[{k}]"))?;
            items.push((entry.probability, m));
        }
        UnitaryEnsemble::with_tolerances(items, &tols)
    }

    /// The tolerances this document runs under.
    pub fn effective_tolerances(&self, base: &Tolerances) -> Tolerances {
        match &self.tolerances {
            Some(ov) => ov.apply(base),
            None => base.clone(),
        }
    }

    /// Canonical serialization used for hashing and determinism checks.
    pub fn canonical_json(&self) -> String {
        report::to_json_string_compact(self).expect("document serialization cannot fail")
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

impl StateDocument {
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let m = rows_to_matrix(&self.state, "state")?;
        DensityMatrix::new(m)
    }

    pub fn from_density(name: Option<String>, rho: &DensityMatrix) -> Self {
        StateDocument {
            name,
            state: matrix_to_rows(rho.matrix()),
        }
    }
}
