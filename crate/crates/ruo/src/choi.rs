//! Dynamical (Choi) matrices: reshuffling, partial traces, and the
//! four-property audit that certifies hermiticity preservation, trace
//! preservation, unitality, and complete positivity.
//!
//! A superoperator S with four-index entries S^{aα}_{bβ} (row pair
//! (a,α), column pair (b,β), row-major) reshuffles into the dynamical
//! matrix
//!
//!   D^{ab}_{αβ} = S^{aα}_{bβ},
//!
//! an operator on H_A ⊗ H_B. The map behind S preserves hermiticity iff
//! D = D†, preserves traces iff Tr_A D = I, is unital iff Tr_B D = I,
//! and is completely positive iff D ⪰ 0.

use ndarray::Array2;
use num_complex::Complex64;

use crate::attractors::AttractorSpace;
use crate::channel::Superoperator;
use crate::error::{Error, Result};
use crate::linalg::{adjoint, fro_norm, hermitian_eigenvalues, identity, kron};

/// Hermiticity residual bound for dynamical matrices of valid channels.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Partial-trace residual bound ‖Tr_A D − I‖, ‖Tr_B D − I‖.
pub const PARTIAL_TRACE_TOL: f64 = 1e-9;

/// Eigenvalue floor: D counts as positive when min eig ≥ −this.
pub const POSITIVITY_TOL: f64 = 1e-9;

/// The reshuffled (Choi) form of a superoperator.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalMatrix {
    dim: usize,
    matrix: Array2<Complex64>,
}

impl DynamicalMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    /// Reshuffle back into superoperator form (reshuffling is an
    /// involution).
    pub fn to_superoperator(&self) -> Result<Superoperator> {
        Superoperator::from_matrix(reshuffle_matrix(&self.matrix)?)
    }
}

/// The raw index permutation: out[(a·d+b, α·d+β)] = in[(a·d+α, b·d+β)].
/// Exactly involutive at the bit level.
pub fn reshuffle_matrix(m: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let side = m.nrows();
    if m.ncols() != side {
        return Err(Error::Shape(format!(
            "reshuffle needs a square matrix, got {}x{}",
            side,
            m.ncols()
        )));
    }
    let d = (side as f64).sqrt().round() as usize;
    if d * d != side {
        return Err(Error::Shape(format!(
            "reshuffle needs a d²×d² matrix, got side {side}"
        )));
    }
    let mut out = Array2::<Complex64>::zeros((side, side));
    for a in 0..d {
        for b in 0..d {
            for alpha in 0..d {
                for beta in 0..d {
                    out[(a * d + b, alpha * d + beta)] = m[(a * d + alpha, b * d + beta)];
                }
            }
        }
    }
    Ok(out)
}

/// Reshuffle a superoperator into its dynamical matrix.
pub fn reshuffle(s: &Superoperator) -> DynamicalMatrix {
    let matrix = reshuffle_matrix(s.matrix()).expect("superoperator is d²×d² by construction");
    DynamicalMatrix {
        dim: s.dim(),
        matrix,
    }
}

/// Which tensor factor a partial trace sums out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Trace out one subsystem of D: Tr_A D has entries Σ_a D^{a n}_{a ν},
/// Tr_B D has entries Σ_n D^{m n}_{μ n}. Both preserve the total trace.
pub fn partial_trace(dm: &DynamicalMatrix, which: Subsystem) -> Array2<Complex64> {
    let d = dm.dim;
    let m = &dm.matrix;
    let mut out = Array2::<Complex64>::zeros((d, d));
    match which {
        Subsystem::A => {
            for n in 0..d {
                for nu in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..d {
                        acc += m[(a * d + n, a * d + nu)];
                    }
                    out[(n, nu)] = acc;
                }
            }
        }
        Subsystem::B => {
            for mm in 0..d {
                for mu in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for n in 0..d {
                        acc += m[(mm * d + n, mu * d + n)];
                    }
                    out[(mm, mu)] = acc;
                }
            }
        }
    }
    out
}

/// Property audit of a dynamical matrix. The audit measures and reports;
/// it never repairs the input.
#[derive(Debug, Clone)]
pub struct ChoiAudit {
    /// ‖D − D†‖.
    pub hermiticity_residual: f64,
    /// ‖Tr_A D − I‖.
    pub trace_a_residual: f64,
    /// ‖Tr_B D − I‖.
    pub trace_b_residual: f64,
    /// Minimum eigenvalue of the hermitian part (D + D†)/2.
    pub min_eigenvalue: f64,
    /// Complete positivity verdict: min eigenvalue ≥ −[`POSITIVITY_TOL`].
    pub completely_positive: bool,
}

impl ChoiAudit {
    /// All four properties hold at their documented thresholds.
    pub fn passes(&self) -> bool {
        self.hermiticity_residual <= HERMITICITY_TOL
            && self.trace_a_residual <= PARTIAL_TRACE_TOL
            && self.trace_b_residual <= PARTIAL_TRACE_TOL
            && self.completely_positive
    }
}

/// Measure hermiticity, both partial-trace identities, and positivity.
pub fn audit(dm: &DynamicalMatrix) -> Result<ChoiAudit> {
    let d = dm.dim;
    let herm = fro_norm(&(&dm.matrix - &adjoint(&dm.matrix)));
    let tra = fro_norm(&(&partial_trace(dm, Subsystem::A) - &identity(d)));
    let trb = fro_norm(&(&partial_trace(dm, Subsystem::B) - &identity(d)));
    let min_eig = hermitian_eigenvalues(&dm.matrix)?
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Ok(ChoiAudit {
        hermiticity_residual: herm,
        trace_a_residual: tra,
        trace_b_residual: trb,
        min_eigenvalue: min_eig,
        completely_positive: min_eig >= -POSITIVITY_TOL,
    })
}

/// Dynamical matrix of Φ_assⁿ assembled directly as Σ λⁿ X ⊗ X*,
/// independently of the reshuffling route.
pub fn choi_of_asymptotic(space: &AttractorSpace, n: i64) -> Result<DynamicalMatrix> {
    let d = space.dim();
    let d2 = d * d;
    let mut m = Array2::<Complex64>::zeros((d2, d2));
    for (lambda, x) in space.elements() {
        let scale = Complex64::from_polar(1.0, n as f64 * lambda.arg());
        let term = kron(x, &x.mapv(|z| z.conj()));
        m = m + term.mapv(|z| z * scale);
    }
    Ok(DynamicalMatrix { dim: d, matrix: m })
}

/// The quadratic form Σ λ Tr{A† X_{λ,i} A X_{λ,i}†} whose nonnegativity
/// (for every A) is equivalent to complete positivity of Φ_ass.
pub fn positivity_functional(
    space: &AttractorSpace,
    a: &Array2<Complex64>,
) -> Result<Complex64> {
    if a.nrows() != space.dim() || a.ncols() != space.dim() {
        return Err(Error::Shape(format!(
            "operand is {}x{}, space dimension is {}",
            a.nrows(),
            a.ncols(),
            space.dim()
        )));
    }
    let a_dag = adjoint(a);
    let mut acc = Complex64::new(0.0, 0.0);
    for (lambda, x) in space.elements() {
        let term = a_dag.dot(x).dot(a).dot(&adjoint(x));
        acc += lambda * term.diag().sum();
    }
    Ok(acc)
}

/// Superoperator of the transpose map A ↦ Aᵀ — the classic non-CP
/// control: unital and trace-preserving, but its dynamical matrix has a
/// −1 eigenvalue.
pub fn transpose_map(d: usize) -> Superoperator {
    let d2 = d * d;
    let mut m = Array2::<Complex64>::zeros((d2, d2));
    for i in 0..d {
        for j in 0..d {
            m[(i * d + j, j * d + i)] = Complex64::new(1.0, 0.0);
        }
    }
    Superoperator::from_matrix(m).expect("transpose map is d²×d²")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attractors::build_attractor_space;
    use crate::channel::UnitaryEnsemble;
    use crate::io::builtins;
    use crate::linalg::vec;
    use crate::sample;
    use crate::Tolerances;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn cnot() -> UnitaryEnsemble {
        builtins::cnot_pair(0.5).to_ensemble(&tols()).unwrap()
    }

    #[test]
    fn reshuffle_of_identity_superoperator_is_unnormalized_maxent() {
        let e = UnitaryEnsemble::new(std::vec![(1.0, identity(2))]).unwrap();
        let dm = reshuffle(&e.superoperator());
        // D^{ab}_{αβ} = δ_{ab} δ_{αβ} = vec(I)·vec(I)†, i.e. d times the
        // maximally entangled projector
        let vid = vec(&identity(2)).unwrap();
        for a in 0..2usize {
            for b in 0..2usize {
                for al in 0..2usize {
                    for be in 0..2usize {
                        let expect = vid[a * 2 + b] * vid[al * 2 + be].conj();
                        let got = dm.matrix()[(a * 2 + b, al * 2 + be)];
                        assert!((got - expect).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn reshuffle_is_bit_exact_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        for _ in 0..10 {
            let m = sample::random_matrix(16, &mut rng);
            let twice = reshuffle_matrix(&reshuffle_matrix(&m).unwrap()).unwrap();
            assert_eq!(m, twice);
        }
    }

    #[test]
    fn reshuffle_rejects_bad_shapes() {
        let m = Array2::<Complex64>::zeros((3, 3));
        assert!(matches!(reshuffle_matrix(&m), Err(Error::Shape(_))));
    }

    #[test]
    fn cnot_dynamical_matrix_is_hermitian() {
        let dm = reshuffle(&cnot().superoperator());
        assert!(fro_norm(&(dm.matrix() - &adjoint(dm.matrix()))) < 1e-12);
    }

    #[test]
    fn partial_traces_of_valid_channel_are_identity() {
        let dm = reshuffle(&cnot().superoperator());
        let d = dm.dim();
        assert!(fro_norm(&(&partial_trace(&dm, Subsystem::A) - &identity(d))) < 1e-12);
        assert!(fro_norm(&(&partial_trace(&dm, Subsystem::B) - &identity(d))) < 1e-12);
    }

    #[test]
    fn partial_trace_preserves_total_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(93);
        let m = sample::random_matrix(9, &mut rng);
        let dm = DynamicalMatrix { dim: 3, matrix: m };
        let total: Complex64 = dm.matrix().diag().sum();
        for which in [Subsystem::A, Subsystem::B] {
            let pt: Complex64 = partial_trace(&dm, which).diag().sum();
            assert!((pt - total).norm() < 1e-12);
        }
    }

    #[test]
    fn kronecker_index_oracle() {
        // for D = A ⊗ B the four-index entries are D^{ab}_{αβ} = A_{aα} B_{bβ},
        // so tracing out A leaves Tr(A)·B and tracing out B leaves Tr(B)·A
        let mut rng = ChaCha8Rng::seed_from_u64(95);
        let a = sample::random_matrix(3, &mut rng);
        let b = sample::random_matrix(3, &mut rng);
        let dm = DynamicalMatrix {
            dim: 3,
            matrix: kron(&a, &b),
        };
        for aa in 0..3usize {
            for bb in 0..3usize {
                for al in 0..3usize {
                    for be in 0..3usize {
                        let got = dm.matrix()[(aa * 3 + bb, al * 3 + be)];
                        let expect = a[(aa, al)] * b[(bb, be)];
                        assert!((got - expect).norm() < 1e-15);
                    }
                }
            }
        }
        let tr_a: Complex64 = a.diag().sum();
        let tr_b: Complex64 = b.diag().sum();
        let pta = partial_trace(&dm, Subsystem::A);
        let ptb = partial_trace(&dm, Subsystem::B);
        assert!(fro_norm(&(&pta - &b.mapv(|z| z * tr_a))) < 1e-12);
        assert!(fro_norm(&(&ptb - &a.mapv(|z| z * tr_b))) < 1e-12);
    }

    #[test]
    fn audit_passes_for_cnot_channel_and_powers() {
        let s = cnot().superoperator();
        for n in [1u32, 2, 5] {
            let report = audit(&reshuffle(&s.matrix_power(n))).unwrap();
            assert!(report.passes(), "power {n}: {report:?}");
        }
    }

    #[test]
    fn audit_passes_for_asymptotic_propagator() {
        let e = cnot();
        let space = build_attractor_space(&e, &tols()).unwrap();
        for n in [-2i64, -1, 1, 2, 7] {
            let dm = choi_of_asymptotic(&space, n).unwrap();
            let report = audit(&dm).unwrap();
            assert!(report.passes(), "n = {n}: {report:?}");
        }
    }

    #[test]
    fn audit_flags_transpose_map_as_not_cp() {
        let dm = reshuffle(&transpose_map(2));
        let report = audit(&dm).unwrap();
        assert!((report.min_eigenvalue + 1.0).abs() < 1e-12);
        assert!(!report.completely_positive);
        // the other three properties hold: hermiticity-preserving,
        // trace-preserving, unital
        assert!(report.hermiticity_residual < 1e-12);
        assert!(report.trace_a_residual < 1e-12);
        assert!(report.trace_b_residual < 1e-12);
    }

    #[test]
    fn dual_route_choi_construction_agrees() {
        let e = cnot();
        let space = build_attractor_space(&e, &tols()).unwrap();
        for n in [-2i64, -1, 0, 1, 2] {
            let direct = choi_of_asymptotic(&space, n).unwrap();
            let via_reshuffle =
                reshuffle(&crate::asymptotics::asymptotic_propagator(&space, n).unwrap());
            let diff = fro_norm(&(direct.matrix() - via_reshuffle.matrix()));
            assert!(diff < 1e-10, "routes differ by {diff} at n = {n}");
        }
    }

    #[test]
    fn choi_of_projector_trace_and_rank() {
        let e = cnot();
        let space = build_attractor_space(&e, &tols()).unwrap();
        let dm = choi_of_asymptotic(&space, 0).unwrap();
        // Tr(X ⊗ X*) = |Tr X|², λ ≠ 1 blocks are traceless, and the
        // λ = 1 block contains I, so Tr D(0) = ‖I‖² = d
        let tr: Complex64 = dm.matrix().diag().sum();
        assert!((tr - Complex64::new(4.0, 0.0)).norm() < 1e-10);
        // the attractor dimension shows up as the rank of 𝒫 instead
        let p = crate::asymptotics::attractor_projector(&space).unwrap();
        let tr_p: Complex64 = p.matrix().diag().sum();
        assert!((tr_p - Complex64::new(6.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn identity_channel_choi_is_unnormalized_maxent_for_all_n() {
        let e = UnitaryEnsemble::new(std::vec![(1.0, identity(2))]).unwrap();
        let space = build_attractor_space(&e, &tols()).unwrap();
        let vid = vec(&identity(2)).unwrap();
        let mut expect = Array2::<Complex64>::zeros((4, 4));
        for i in 0..4 {
            for j in 0..4 {
                expect[(i, j)] = vid[i] * vid[j].conj();
            }
        }
        for n in [-3i64, 0, 1, 9] {
            let dm = choi_of_asymptotic(&space, n).unwrap();
            assert!(fro_norm(&(dm.matrix() - &expect)) < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn positivity_functional_nonnegative_on_random_operators() {
        let e = cnot();
        let space = build_attractor_space(&e, &tols()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for _ in 0..50 {
            let a = sample::random_matrix(4, &mut rng);
            let val = positivity_functional(&space, &a).unwrap();
            assert!(val.im.abs() < 1e-9, "imaginary part {}", val.im);
            assert!(val.re >= -1e-9, "negative functional {}", val.re);
        }
    }

    #[test]
    fn positivity_functional_matches_choi_quadratic_form() {
        // Σ λ Tr{A† X A X†} = ⟨vec A| D_{Φ_ass} |vec A⟩
        let e = cnot();
        let space = build_attractor_space(&e, &tols()).unwrap();
        let dm = choi_of_asymptotic(&space, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let a = sample::random_matrix(4, &mut rng);
            let va = vec(&a).unwrap();
            let dva = dm.matrix().dot(&va);
            let quad: Complex64 = va.iter().zip(dva.iter()).map(|(x, y)| x.conj() * y).sum();
            let func = positivity_functional(&space, &a).unwrap();
            assert!((quad - func).norm() < 1e-9);
        }
    }
}
