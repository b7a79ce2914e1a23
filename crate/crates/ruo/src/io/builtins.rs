//! Built-in example ensembles.
//!
//! Four systems covering the three asymptotic regimes:
//!
//! - `cnot_pair` — two CNOTs on two qubits, the flagship periodic system
//!   (period 2, attractor dimensions 5 ⊕ 1);
//! - `identity` — the trivial stationary channel at any dimension;
//! - `single_unitary_pauli_x` — one-qubit bit flip, periodic;
//! - `diag_irrational_phase` — a single diagonal unitary with phase
//!   π√2, whose asymptotics is aperiodic (the phase is not a root of
//!   unity of any bounded order).

use super::{matrix_to_rows, EnsembleDocument, UnitaryEntry};
use crate::error::{Error, Result};
use crate::linalg::identity as eye;
use ndarray::Array2;
use num_complex::Complex64;

/// Names accepted by [`builtin`].
pub const NAMES: [&str; 4] = [
    "cnot_pair",
    "identity",
    "single_unitary_pauli_x",
    "diag_irrational_phase",
];

/// Look up a builtin by name. `p1` parametrizes `cnot_pair` (default
/// 0.5); `dim` parametrizes `identity` (default 2).
pub fn builtin(name: &str, p1: Option<f64>, dim: Option<usize>) -> Result<EnsembleDocument> {
    match name {
        "cnot_pair" => {
            let p1 = p1.unwrap_or(0.5);
            if !(0.0..1.0).contains(&p1) || p1 <= 0.0 {
                return Err(Error::Parameter(format!(
                    "cnot_pair requires p1 in (0, 1), got {p1}"
                )));
            }
            Ok(cnot_pair(p1))
        }
        "identity" => Ok(identity_channel(dim.unwrap_or(2))),
        "single_unitary_pauli_x" => Ok(single_unitary_pauli_x()),
        "diag_irrational_phase" => Ok(diag_irrational_phase()),
        other => Err(Error::UnknownBuiltin(other.to_string())),
    }
}

/// Two-qubit CNOT pair: Φ(ρ) = p₁ C₁ρC₁ + (1−p₁) C₂ρC₂ with
/// C₁|i,j⟩ = |i, i⊕j⟩ and C₂|i,j⟩ = |i⊕j, j⟩ in the computational basis
/// {|00⟩, |01⟩, |10⟩, |11⟩}.
pub fn cnot_pair(p1: f64) -> EnsembleDocument {
    let c1 = permutation_matrix(&[0, 1, 3, 2]);
    let c2 = permutation_matrix(&[0, 3, 2, 1]);
    EnsembleDocument {
        name: Some(format!("cnot_pair(p1={p1})")),
        dim: 4,
        unitaries: std::vec![
            UnitaryEntry {
                probability: p1,
                matrix: matrix_to_rows(&c1),
            },
            UnitaryEntry {
                probability: 1.0 - p1,
                matrix: matrix_to_rows(&c2),
            },
        ],
        tolerances: None,
    }
}

/// The identity channel {(1, I_d)}.
pub fn identity_channel(d: usize) -> EnsembleDocument {
    EnsembleDocument {
        name: Some(format!("identity(d={d})")),
        dim: d,
        unitaries: std::vec![UnitaryEntry {
            probability: 1.0,
            matrix: matrix_to_rows(&eye(d)),
        }],
        tolerances: None,
    }
}

/// Single-qubit bit flip {(1, σx)}.
pub fn single_unitary_pauli_x() -> EnsembleDocument {
    let mut sx = Array2::<Complex64>::zeros((2, 2));
    sx[(0, 1)] = Complex64::new(1.0, 0.0);
    sx[(1, 0)] = Complex64::new(1.0, 0.0);
    EnsembleDocument {
        name: Some("single_unitary_pauli_x".into()),
        dim: 2,
        unitaries: std::vec![UnitaryEntry {
            probability: 1.0,
            matrix: matrix_to_rows(&sx),
        }],
        tolerances: None,
    }
}

/// {(1, diag(1, e^{iπ√2}))} — the aperiodic exemplar. π√2 is an
/// irrational multiple of π, so no power of the phase returns to 1.
pub fn diag_irrational_phase() -> EnsembleDocument {
    let theta = std::f64::consts::PI * 2f64.sqrt();
    let mut u = Array2::<Complex64>::zeros((2, 2));
    u[(0, 0)] = Complex64::new(1.0, 0.0);
    u[(1, 1)] = Complex64::new(theta.cos(), theta.sin());
    EnsembleDocument {
        name: Some("diag_irrational_phase".into()),
        dim: 2,
        unitaries: std::vec![UnitaryEntry {
            probability: 1.0,
            matrix: matrix_to_rows(&u),
        }],
        tolerances: None,
    }
}

/// Unitary permutation matrix sending basis vector k to `targets[k]`.
fn permutation_matrix(targets: &[usize]) -> Array2<Complex64> {
    let d = targets.len();
    let mut m = Array2::<Complex64>::zeros((d, d));
    for (k, &t) in targets.iter().enumerate() {
        m[(t, k)] = Complex64::new(1.0, 0.0);
    }
    m
}
