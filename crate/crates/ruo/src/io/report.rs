//! Machine-readable analysis reports with deterministic number
//! formatting.
//!
//! Every float in a report is written as a JSON number with exactly 15
//! significant digits in scientific notation, so identical inputs yield
//! byte-identical reports across runs and platforms. Complex values
//! appear as `[re, im]` pairs, matching the ensemble wire format.

use std::io::{self, Write};

use ndarray::Array2;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{Classification, ConvergenceTrace};
use crate::attractors::{AttractorBlock, AttractorSpace, RootOfUnity, UnitSpectrum};
use crate::choi::ChoiAudit;
use crate::error::{Error, Result};
use crate::io::{matrix_to_rows, rows_to_matrix, EnsembleDocument};

/// serde_json formatter that pins floats to 15 significant digits in
/// scientific notation and pretty-prints with two-space indentation.
struct SciFormatter {
    indent: usize,
    has_value: bool,
}

impl SciFormatter {
    fn new() -> Self {
        SciFormatter {
            indent: 0,
            has_value: false,
        }
    }

    fn newline<W: ?Sized + Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(b"\n")?;
        for _ in 0..self.indent {
            w.write_all(b"  ")?;
        }
        Ok(())
    }
}

/// 15 significant digits, scientific notation. Non-finite values never
/// reach this point: serde_json emits `null` for them upstream.
fn write_sci<W: ?Sized + Write>(w: &mut W, value: f64) -> io::Result<()> {
    write!(w, "{:.14e}", value)
}

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write_sci(w, value)
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write_sci(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.indent += 1;
        self.has_value = false;
        w.write_all(b"[")
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.indent -= 1;
        if self.has_value {
            self.newline(w)?;
        }
        w.write_all(b"]")
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        self.newline(w)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, _w: &mut W) -> io::Result<()> {
        self.has_value = true;
        Ok(())
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.indent += 1;
        self.has_value = false;
        w.write_all(b"{")
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.indent -= 1;
        if self.has_value {
            self.newline(w)?;
        }
        w.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        self.newline(w)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        w.write_all(b": ")
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, _w: &mut W) -> io::Result<()> {
        self.has_value = true;
        Ok(())
    }
}

/// Compact variant of [`SciFormatter`] for canonical hashing.
struct SciCompact;

impl serde_json::ser::Formatter for SciCompact {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write_sci(w, value)
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write_sci(w, value as f64)
    }
}

/// Serialize with pinned float formatting, pretty-printed.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter::new());
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(format!("report serialization failed: {e}")))?;
    String::from_utf8(out).map_err(|e| Error::Parse(format!("report is not UTF-8: {e}")))
}

/// Serialize with pinned float formatting, single line.
pub fn to_json_string_compact<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciCompact);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(format!("serialization failed: {e}")))?;
    String::from_utf8(out).map_err(|e| Error::Parse(format!("output is not UTF-8: {e}")))
}

/// Parse a report (or any JSON value) emitted by this module.
pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de)
        .map_err(|e| Error::Parse(format!("{} (field `{}`)", e.inner(), e.path())))
}

/// Outcome of one verification check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "UPPERCASE")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped { reason: String },
}

/// One named verification check with its measured residual and the
/// threshold it was held to.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    #[serde(flatten)]
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    pub fn pass(name: &str, residual: f64, threshold: f64) -> Self {
        CheckResult {
            name: name.into(),
            status: CheckStatus::Pass,
            residual: Some(residual),
            threshold: Some(threshold),
            detail: None,
        }
    }

    pub fn from_residual(name: &str, residual: f64, threshold: f64) -> Self {
        CheckResult {
            name: name.into(),
            status: if residual <= threshold {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            residual: Some(residual),
            threshold: Some(threshold),
            detail: None,
        }
    }

    pub fn skipped(name: &str, reason: &str) -> Self {
        CheckResult {
            name: name.into(),
            status: CheckStatus::Skipped {
                reason: reason.into(),
            },
            residual: None,
            threshold: None,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn passed(&self) -> bool {
        matches!(self.status, CheckStatus::Pass)
    }

    pub fn is_skipped(&self) -> bool {
        matches!(self.status, CheckStatus::Skipped { .. })
    }
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Identifying header of the analyzed ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleHeader {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// SHA-256 of the canonical document serialization.
    pub hash: String,
    pub dim: usize,
    pub members: usize,
}

impl EnsembleHeader {
    pub fn of(doc: &EnsembleDocument) -> Self {
        EnsembleHeader {
            name: doc.name.clone(),
            hash: doc.hash(),
            dim: doc.dim,
            members: doc.unitaries.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootReport {
    pub numerator: u32,
    pub denominator: u32,
}

/// One σ_|1| point in a report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub value: [f64; 2],
    pub multiplicity: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nearest_root: Option<RootReport>,
    pub raw: Vec<[f64; 2]>,
}

pub fn spectrum_entries(spectrum: &UnitSpectrum) -> Vec<SpectrumEntry> {
    spectrum
        .points
        .iter()
        .map(|p| SpectrumEntry {
            value: pair(p.value),
            multiplicity: p.multiplicity,
            nearest_root: p.nearest_root.map(|r| RootReport {
                numerator: r.numerator,
                denominator: r.denominator,
            }),
            raw: p.raw.iter().map(|z| pair(*z)).collect(),
        })
        .collect()
}

/// One attractor block; `basis` is present only in `--full` reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockEntry {
    pub lambda: [f64; 2],
    pub dimension: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<Vec<[f64; 2]>>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttractorReport {
    pub total_dimension: usize,
    /// max_i ‖UᵢX − λXUᵢ‖ over the basis.
    pub structure_residual: f64,
    pub blocks: Vec<BlockEntry>,
}

pub fn attractor_report(
    space: &AttractorSpace,
    structure_residual: f64,
    full: bool,
) -> AttractorReport {
    AttractorReport {
        total_dimension: space.total_dim(),
        structure_residual,
        blocks: space
            .blocks()
            .iter()
            .map(|b| BlockEntry {
                lambda: pair(b.lambda),
                dimension: b.basis.len(),
                basis: full.then(|| b.basis.iter().map(matrix_to_rows).collect()),
            })
            .collect(),
    }
}

/// Rebuild an [`AttractorSpace`] from a `--full` report.
pub fn attractor_space_from_report(dim: usize, report: &AttractorReport) -> Result<AttractorSpace> {
    let mut blocks = Vec::with_capacity(report.blocks.len());
    for (k, entry) in report.blocks.iter().enumerate() {
        let rows = entry.basis.as_ref().ok_or_else(|| {
            Error::Parse(format!(
                "block {k} carries no basis matrices; re-emit the report with --full"
            ))
        })?;
        let basis: Result<Vec<Array2<Complex64>>> = rows
            .iter()
            .map(|r| rows_to_matrix(r, &format!("attractor block {k}")))
            .collect();
        blocks.push(AttractorBlock {
            lambda: Complex64::new(entry.lambda[0], entry.lambda[1]),
            basis: basis?,
        });
    }
    AttractorSpace::from_parts(dim, blocks)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub regime: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<u32>,
    /// λ values paired with nearby exact roots of unity, if any.
    pub roots: Vec<([f64; 2], Option<RootReport>)>,
}

pub fn classification_report(
    classification: Classification,
    roots: &[(Complex64, Option<RootOfUnity>)],
) -> ClassificationReport {
    let (regime, period) = match classification {
        Classification::Stationary => ("STATIONARY".to_string(), None),
        Classification::Periodic { period } => ("PERIODIC".to_string(), Some(period)),
        Classification::Aperiodic => ("APERIODIC".to_string(), None),
    };
    ClassificationReport {
        regime,
        period,
        roots: roots
            .iter()
            .map(|(l, r)| {
                (
                    pair(*l),
                    r.map(|r| RootReport {
                        numerator: r.numerator,
                        denominator: r.denominator,
                    }),
                )
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub subdominant_modulus: f64,
    pub threshold: f64,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_r_squared: Option<f64>,
    pub distances: Vec<(usize, f64)>,
}

pub fn convergence_report(trace: &ConvergenceTrace) -> ConvergenceReport {
    ConvergenceReport {
        subdominant_modulus: trace.subdominant_modulus,
        threshold: trace.threshold,
        converged: trace.converged,
        fitted_rate: trace.fitted_rate,
        fit_r_squared: trace.fit_r_squared,
        distances: trace.distances.clone(),
    }
}

/// One audited dynamical matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChoiEntry {
    /// What was reshuffled: "phi", "phi^n", or "phi_ass^n".
    pub source: String,
    pub hermiticity_residual: f64,
    pub trace_a_residual: f64,
    pub trace_b_residual: f64,
    pub min_eigenvalue: f64,
    pub completely_positive: bool,
    pub passes: bool,
}

pub fn choi_entry(source: String, audit: &ChoiAudit) -> ChoiEntry {
    ChoiEntry {
        source,
        hermiticity_residual: audit.hermiticity_residual,
        trace_a_residual: audit.trace_a_residual,
        trace_b_residual: audit.trace_b_residual,
        min_eigenvalue: audit.min_eigenvalue,
        completely_positive: audit.completely_positive,
        passes: audit.passes(),
    }
}

/// The full analysis emitted by `verify`; subcommands emit subsets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub ensemble: EnsembleHeader,
    pub unit_spectrum: Vec<SpectrumEntry>,
    pub attractors: AttractorReport,
    pub classification: ClassificationReport,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceReport>,
    pub choi: Vec<ChoiEntry>,
    pub all_checks_passed: bool,
}

/// Output of `ruo spectrum`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumDoc {
    pub ensemble: EnsembleHeader,
    pub unit_spectrum: Vec<SpectrumEntry>,
}

/// Output of `ruo attractors`; re-ingestable when emitted with `--full`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttractorsDoc {
    pub ensemble: EnsembleHeader,
    pub dim: usize,
    pub classification: ClassificationReport,
    pub attractors: AttractorReport,
}

/// Output of `ruo evolve`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolveDoc {
    pub ensemble: EnsembleHeader,
    pub steps: usize,
    /// ρ(steps) in `[re, im]` rows.
    pub state: Vec<Vec<[f64; 2]>>,
    pub convergence: ConvergenceReport,
}

/// Output of `ruo asymptote`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoteDoc {
    pub ensemble: EnsembleHeader,
    pub steps: i64,
    /// ρ∞(steps) in `[re, im]` rows.
    pub state: Vec<Vec<[f64; 2]>>,
}

/// Output of `ruo choi`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChoiDoc {
    pub ensemble: EnsembleHeader,
    pub audits: Vec<ChoiEntry>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        x: f64,
        label: String,
        counts: Vec<u32>,
    }

    #[test]
    fn floats_use_fifteen_significant_digits() {
        let s = to_json_string_compact(&Sample {
            x: 0.5,
            label: "a".into(),
            counts: std::vec![3, 4],
        })
        .unwrap();
        assert_eq!(s, r#"{"x":5.00000000000000e-1,"label":"a","counts":[3,4]}"#);
    }

    #[test]
    fn formatting_is_deterministic() {
        let v = Sample {
            x: std::f64::consts::PI,
            label: "pi".into(),
            counts: std::vec![],
        };
        assert_eq!(to_json_string(&v).unwrap(), to_json_string(&v).unwrap());
        assert!(to_json_string(&v).unwrap().contains("3.14159265358979e0"));
    }

    #[test]
    fn non_finite_floats_become_null() {
        let v = Sample {
            x: f64::NAN,
            label: "bad".into(),
            counts: std::vec![],
        };
        assert!(to_json_string_compact(&v).unwrap().contains("\"x\":null"));
    }

    #[test]
    fn emitted_numbers_parse_back() {
        let x = 1.2345678901234567e-8;
        let s = to_json_string_compact(&x).unwrap();
        let back: f64 = serde_json::from_str(&s).unwrap();
        assert!((back - x).abs() <= 1e-22);
    }
}
