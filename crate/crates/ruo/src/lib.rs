//! Exact asymptotic analysis of random unitary operations.
//!
//! A random unitary operation (RUO) is a quantum channel of the form
//! Φ(ρ) = Σᵢ pᵢ Uᵢ ρ Uᵢ† with unitary Uᵢ and probabilities pᵢ > 0 summing
//! to one. Iterating Φ drives every input state into a typically
//! low-dimensional *attractor space* spanned by the solutions of the
//! generalized commutation relations Uᵢ X = λ X Uᵢ for unit-modulus λ,
//! and on that space the dynamics is exactly diagonal: the asymptotic
//! trajectory has the closed form
//!
//! ρ∞(n) = Σ_{|λ|=1, i} λⁿ Tr{ρ(0) X_{λ,i}†} X_{λ,i}.
//!
//! This crate computes everything in that picture numerically:
//!
//! - [`channel`] — ensembles, channel application, superoperator matrices;
//! - [`attractors`] — the unit spectrum σ_|1| and orthonormal attractor
//!   bases, built two independent ways (commutant relations vs. kernel
//!   solves) that are cross-checked against each other;
//! - [`asymptotics`] — the asymptotic propagator Φ_ass, closed-form state
//!   evaluation for any integer n, convergence measurement, and
//!   stationary/periodic/aperiodic classification;
//! - [`choi`] — dynamical (Choi) matrices by reshuffling, partial traces,
//!   and complete-positivity audits;
//! - [`linalg`] — the dense complex primitives underneath (Hilbert–Schmidt
//!   geometry, vectorization, Kronecker products, null spaces,
//!   eigendecomposition);
//! - [`io`] — JSON ensemble/state documents, builtin example ensembles,
//!   and deterministic machine-readable analysis reports.
//!
//! The `ruo` binary is a thin command-line front end over [`io`]; the
//! `examples/` directory shows one runnable program per capability.

pub mod asymptotics;
pub mod attractors;
pub mod channel;
pub mod choi;
pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod sample;

pub use asymptotics::{
    asymptotic_propagator, asymptotic_state, attractor_projector, classify_asymptotics,
    convergence_trace, Classification, ConvergenceTrace,
};
pub use attractors::{
    build_attractor_space, commutant_basis, kernel_basis, unit_spectrum, AttractorSpace,
    UnitSpectrum,
};
pub use channel::{DensityMatrix, Superoperator, UnitaryEnsemble};
pub use choi::{audit, choi_of_asymptotic, partial_trace, reshuffle, DynamicalMatrix, Subsystem};
pub use error::{Error, Result};

/// Every numerical threshold used by the analysis, in one place.
///
/// Defaults are chosen for dense double-precision arithmetic at Hilbert
/// space dimensions d ≤ 32; each field can be overridden per run (the CLI
/// surfaces all of them as flags).
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Unit-circle membership: λ counts as |λ| = 1 when 1 − |λ| ≤ this.
    pub unit_circle: f64,
    /// Radius for merging repeated unit-modulus eigenvalues; repeated
    /// eigenvalues of non-normal matrices scatter at roughly √ε.
    pub cluster_radius: f64,
    /// Rank cutoff for null spaces: σ ≤ tol·σ_max. When unset, the
    /// toolkit uses max(rows, cols)·ε and the attractor solves use their
    /// dedicated default (see `attractors::ATTRACTOR_RANK_TOL`).
    pub nullspace: Option<f64>,
    /// Largest allowed principal angle between the commutant-relation
    /// basis and the kernel basis before the build aborts.
    pub structure_mismatch: f64,
    /// HS-norm distance below which an iterated state counts as converged.
    pub convergence: f64,
    /// Largest root-of-unity order probed by the periodicity classifier.
    pub max_period: u32,
    /// Snap radius for reporting an eigenvalue as a nearby exact root of
    /// unity (reporting only; computations keep the numerical value).
    pub root_snap: f64,
    /// Hard cap on the Hilbert space dimension d (superoperators are
    /// d²×d²); raise explicitly for large runs.
    pub max_dim: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            unit_circle: 1e-9,
            cluster_radius: 1e-8,
            nullspace: None,
            structure_mismatch: 1e-6,
            convergence: 1e-8,
            max_period: 24,
            root_snap: 1e-8,
            max_dim: 64,
        }
    }
}
