//! Random unitary operations Φ(ρ) = Σᵢ pᵢ Uᵢ ρ Uᵢ† and their matrix form.
//!
//! An ensemble is validated once at construction (probabilities positive
//! and summing to one, members unitary, dimensions consistent) and is
//! immutable afterwards. The channel can be applied directly to
//! operators, applied in adjoint form Φ†(A) = Σᵢ pᵢ Uᵢ† A Uᵢ, iterated,
//! or materialized as the d²×d² superoperator Σᵢ pᵢ Uᵢ ⊗ Uᵢ* acting on
//! row-major vectorizations.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    adjoint, all_finite, fro_norm, hermitian_eigenvalues, identity, kron, unvec, vec,
};
use crate::Tolerances;

/// Probabilities must sum to one within this bound; anything worse is an
/// input bug, not a rounding artifact, and is rejected rather than
/// renormalized.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Unitarity bound: ‖U†U − I‖_HS ≤ UNITARITY_TOL·√d.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Hermiticity, unit-trace, and positivity bound for density matrices.
pub const DENSITY_TOL: f64 = 1e-10;

/// A validated random unitary operation: pairs (pᵢ, Uᵢ) with pᵢ > 0,
/// Σ pᵢ = 1, and every Uᵢ unitary on the same d-dimensional space.
#[derive(Debug, Clone)]
pub struct UnitaryEnsemble {
    dim: usize,
    items: Vec<(f64, Array2<Complex64>)>,
}

impl UnitaryEnsemble {
    /// Validate and build an ensemble with default tolerances.
    pub fn new(items: Vec<(f64, Array2<Complex64>)>) -> Result<Self> {
        Self::with_tolerances(items, &Tolerances::default())
    }

    /// Validate and build an ensemble. The rejection lists every violated
    /// invariant, not just the first.
    pub fn with_tolerances(
        items: Vec<(f64, Array2<Complex64>)>,
        tols: &Tolerances,
    ) -> Result<Self> {
        let mut violations = Vec::new();
        if items.is_empty() {
            return Err(Error::Validation(std::vec![
                "ensemble must contain at least one unitary".into()
            ]));
        }
        let dim = items[0].1.nrows();
        if dim == 0 {
            violations.push("dimension must be positive".to_string());
        }
        if dim > tols.max_dim {
            violations.push(format!(
                "dimension {dim} exceeds the configured cap {} (raise max_dim to allow)",
                tols.max_dim
            ));
        }
        let mut prob_sum = 0.0;
        for (k, (p, u)) in items.iter().enumerate() {
            if !p.is_finite() || *p <= 0.0 {
                violations.push(format!("probability #{k} must lie in (0, 1], got {p}"));
            } else if *p > 1.0 {
                violations.push(format!("probability #{k} exceeds 1: {p}"));
            }
            prob_sum += p;
            if u.nrows() != u.ncols() {
                violations.push(format!(
                    "unitary #{k} is not square: {}x{}",
                    u.nrows(),
                    u.ncols()
                ));
                continue;
            }
            if u.nrows() != dim {
                violations.push(format!(
                    "unitary #{k} has dimension {} but the ensemble is {dim}-dimensional",
                    u.nrows()
                ));
                continue;
            }
            if !all_finite(u) {
                violations.push(format!("unitary #{k} contains non-finite entries"));
                continue;
            }
            let gram = adjoint(u).dot(u);
            let defect = fro_norm(&(&gram - &identity(dim)));
            if defect > UNITARITY_TOL * (dim as f64).sqrt() {
                violations.push(format!(
                    "member #{k} is not unitary: ‖U†U − I‖ = {defect:.3e}"
                ));
            }
        }
        if (prob_sum - 1.0).abs() > PROB_SUM_TOL {
            violations.push(format!("probabilities sum to {prob_sum}"));
        }
        if violations.is_empty() {
            Ok(UnitaryEnsemble { dim, items })
        } else {
            Err(Error::Validation(violations))
        }
    }

    /// Hilbert space dimension d.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of unitaries m in the convex decomposition.
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// The validated (probability, unitary) pairs.
    pub fn items(&self) -> &[(f64, Array2<Complex64>)] {
        &self.items
    }

    /// Same unitaries, different positive probabilities. The attractor
    /// space does not depend on this choice; the convergence rate does.
    pub fn with_probabilities(&self, probs: &[f64]) -> Result<Self> {
        if probs.len() != self.items.len() {
            return Err(Error::Parameter(format!(
                "expected {} probabilities, got {}",
                self.items.len(),
                probs.len()
            )));
        }
        let items = probs
            .iter()
            .zip(self.items.iter())
            .map(|(&p, (_, u))| (p, u.clone()))
            .collect();
        Self::new(items)
    }

    /// Φ(A) = Σᵢ pᵢ Uᵢ A Uᵢ†. Preserves trace and hermiticity and never
    /// increases the Hilbert–Schmidt norm.
    pub fn apply(&self, a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        self.check_operand(a)?;
        let mut out = Array2::<Complex64>::zeros((self.dim, self.dim));
        for (p, u) in &self.items {
            let term = u.dot(a).dot(&adjoint(u));
            out = out + term.mapv(|z| z * *p);
        }
        Ok(out)
    }

    /// Adjoint channel Φ†(A) = Σᵢ pᵢ Uᵢ† A Uᵢ, so that
    /// (B, Φ(A))_HS = (Φ†(B), A)_HS.
    pub fn apply_adjoint(&self, a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        self.check_operand(a)?;
        let mut out = Array2::<Complex64>::zeros((self.dim, self.dim));
        for (p, u) in &self.items {
            let term = adjoint(u).dot(a).dot(u);
            out = out + term.mapv(|z| z * *p);
        }
        Ok(out)
    }

    /// The d²×d² matrix Σᵢ pᵢ Uᵢ ⊗ Uᵢ* acting on vec(A).
    pub fn superoperator(&self) -> Superoperator {
        let d2 = self.dim * self.dim;
        let mut m = Array2::<Complex64>::zeros((d2, d2));
        for (p, u) in &self.items {
            let term = kron(u, &u.mapv(|z| z.conj()));
            m = m + term.mapv(|z| z * *p);
        }
        Superoperator {
            dim: self.dim,
            matrix: m,
        }
    }

    /// Φⁿ(ρ(0)) by repeated application; n = 0 returns the input.
    ///
    /// Stepping the channel directly (m·d³ per step) keeps better
    /// numerical hygiene than powering the superoperator matrix.
    pub fn iterate(&self, rho0: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
        if rho0.dim() != self.dim {
            return Err(Error::Shape(format!(
                "state dimension {} does not match ensemble dimension {}",
                rho0.dim(),
                self.dim
            )));
        }
        if n == 0 {
            return Ok(rho0.clone());
        }
        let mut rho = rho0.matrix().clone();
        for _ in 0..n {
            rho = self.apply(&rho)?;
        }
        DensityMatrix::new(rho)
    }

    fn check_operand(&self, a: &Array2<Complex64>) -> Result<()> {
        if a.nrows() != self.dim || a.ncols() != self.dim {
            return Err(Error::Shape(format!(
                "operand is {}x{}, ensemble dimension is {}",
                a.nrows(),
                a.ncols(),
                self.dim
            )));
        }
        Ok(())
    }
}

/// A quantum state: hermitian, unit trace, positive semidefinite
/// (all within [`DENSITY_TOL`]).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: Array2<Complex64>,
}

impl DensityMatrix {
    pub fn new(matrix: Array2<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Density(format!(
                "not square: {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !all_finite(&matrix) {
            return Err(Error::Density("contains non-finite entries".into()));
        }
        let herm_defect = fro_norm(&(&matrix - &adjoint(&matrix)));
        if herm_defect > DENSITY_TOL {
            return Err(Error::Density(format!(
                "not hermitian: ‖ρ − ρ†‖ = {herm_defect:.3e}"
            )));
        }
        let trace: Complex64 = matrix.diag().sum();
        if (trace - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(Error::Density(format!("trace is {trace}, expected 1")));
        }
        let min_eig = hermitian_eigenvalues(&matrix)?
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -DENSITY_TOL {
            return Err(Error::Density(format!(
                "not positive semidefinite: min eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(DensityMatrix { matrix })
    }

    /// The maximally mixed state I/d.
    pub fn maximally_mixed(d: usize) -> Self {
        let m = identity(d).mapv(|z| z / d as f64);
        DensityMatrix { matrix: m }
    }

    /// Pure computational basis state |k⟩⟨k|.
    pub fn basis_state(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::Parameter(format!(
                "basis index {k} out of range for dimension {d}"
            )));
        }
        let mut m = Array2::<Complex64>::zeros((d, d));
        m[(k, k)] = Complex64::new(1.0, 0.0);
        Ok(DensityMatrix { matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<Complex64> {
        self.matrix
    }
}

/// The d²×d² matrix of a linear map on operators, acting on row-major
/// vectorizations. For a random unitary operation it is unital
/// (S·vec(I) = vec(I)) and a contraction in Hilbert–Schmidt norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: Array2<Complex64>,
}

impl Superoperator {
    /// Wrap a raw d²×d² matrix. No invariant is enforced here; use
    /// [`Superoperator::validate`] to audit unitality and the norm bound.
    pub fn from_matrix(matrix: Array2<Complex64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::Shape(format!(
                "superoperator must be square, got {}x{}",
                n,
                matrix.ncols()
            )));
        }
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::Shape(format!(
                "superoperator side {n} is not a perfect square"
            )));
        }
        Ok(Superoperator { dim: d, matrix })
    }

    /// Hilbert space dimension d (the matrix is d²×d²).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    /// Apply to an operator: unvec(S·vec(A)).
    pub fn apply_mat(&self, a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        let v = vec(a)?;
        if v.len() != self.matrix.ncols() {
            return Err(Error::Shape(format!(
                "operand vectorizes to length {}, superoperator side is {}",
                v.len(),
                self.matrix.ncols()
            )));
        }
        unvec(&self.matrix.dot(&v))
    }

    /// Apply to an already vectorized operator.
    pub fn apply_vec(&self, v: &Array1<Complex64>) -> Result<Array1<Complex64>> {
        if v.len() != self.matrix.ncols() {
            return Err(Error::Shape(format!(
                "vector length {} does not match superoperator side {}",
                v.len(),
                self.matrix.ncols()
            )));
        }
        Ok(self.matrix.dot(v))
    }

    /// Sⁿ by repeated squaring; n = 0 gives the identity superoperator.
    pub fn matrix_power(&self, n: u32) -> Superoperator {
        let side = self.matrix.nrows();
        let mut result = Array2::<Complex64>::eye(side);
        let mut base = self.matrix.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.dot(&base);
            }
            base = base.dot(&base);
            k >>= 1;
        }
        Superoperator {
            dim: self.dim,
            matrix: result,
        }
    }

    /// Unitality residual ‖S·vec(I) − vec(I)‖ and induced-norm excess
    /// max(σ_max − 1, 0). Both are ≤ 1e-10 for a genuine random unitary
    /// operation.
    pub fn validate(&self) -> Result<(f64, f64)> {
        use ndarray_linalg::SVD;
        let vid = vec(&identity(self.dim))?;
        let unitality = crate::linalg::vec_norm(&(&self.matrix.dot(&vid) - &vid));
        let (_, sigma, _) = self.matrix.svd(false, false)?;
        let sigma_max = sigma.iter().cloned().fold(0.0f64, f64::max);
        Ok((unitality, (sigma_max - 1.0).max(0.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::builtins;
    use crate::linalg::{hs_inner, hs_norm};
    use crate::sample;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cnot_ensemble(p1: f64) -> UnitaryEnsemble {
        builtins::cnot_pair(p1)
            .to_ensemble(&Tolerances::default())
            .unwrap()
    }

    #[test]
    fn accepts_cnot_pair() {
        let e = cnot_ensemble(0.5);
        assert_eq!(e.dim(), 4);
        assert_eq!(e.len(), 2);
    }

    #[test]
    fn accepts_trivial_identity_ensemble() {
        let e = UnitaryEnsemble::new(std::vec![(1.0, identity(3))]).unwrap();
        assert_eq!(e.dim(), 3);
    }

    #[test]
    fn rejects_scaled_unitary() {
        let e = cnot_ensemble(0.5);
        let (p1, u1) = (e.items()[0].0, e.items()[0].1.clone());
        let (p2, u2) = (e.items()[1].0, e.items()[1].1.clone());
        let bad = UnitaryEnsemble::new(std::vec![(p1, u1), (p2, u2.mapv(|z| z * 2.0))]);
        match bad {
            Err(Error::Validation(v)) => {
                assert!(v.iter().any(|s| s.contains("not unitary")), "{v:?}")
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_probability_sum_without_renormalizing() {
        let bad = UnitaryEnsemble::new(std::vec![
            (0.5, identity(2)),
            (0.6, identity(2)),
        ]);
        match bad {
            Err(Error::Validation(v)) => {
                assert!(v.iter().any(|s| s.contains("sum to 1.1")), "{v:?}")
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_zero_probability_and_collects_all_violations() {
        let bad = UnitaryEnsemble::new(std::vec![
            (0.0, identity(2)),
            (0.6, identity(3)),
        ]);
        match bad {
            Err(Error::Validation(v)) => {
                assert!(v.len() >= 3, "expected several violations, got {v:?}");
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn apply_preserves_identity() {
        let e = cnot_ensemble(0.3);
        let out = e.apply(&identity(4)).unwrap();
        assert!(fro_norm(&(&out - &identity(4))) < 1e-14);
    }

    #[test]
    fn cnot_fixes_00_projector() {
        let e = cnot_ensemble(0.5);
        let rho = DensityMatrix::basis_state(4, 0).unwrap();
        let out = e.apply(rho.matrix()).unwrap();
        assert!(fro_norm(&(&out - rho.matrix())) < 1e-14);
    }

    #[test]
    fn cnot_splits_01_projector() {
        // C₁ fixes |01⟩; C₂ sends |01⟩ to |11⟩, so
        // Φ(|01⟩⟨01|) = p₁|01⟩⟨01| + (1−p₁)|11⟩⟨11|.
        let e = cnot_ensemble(0.5);
        let rho = DensityMatrix::basis_state(4, 1).unwrap();
        let out = e.apply(rho.matrix()).unwrap();
        let mut expect = Array2::<Complex64>::zeros((4, 4));
        expect[(1, 1)] = c(0.5, 0.0);
        expect[(3, 3)] = c(0.5, 0.0);
        assert!(fro_norm(&(&out - &expect)) < 1e-14);
    }

    #[test]
    fn adjoint_is_unital_and_inverts_single_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = sample::haar_unitary(3, &mut rng);
        let e = UnitaryEnsemble::new(std::vec![(1.0, u)]).unwrap();
        assert!(fro_norm(&(&e.apply_adjoint(&identity(3)).unwrap() - &identity(3))) < 1e-12);
        let a = sample::random_matrix(3, &mut rng);
        let round = e.apply_adjoint(&e.apply(&a).unwrap()).unwrap();
        assert!(fro_norm(&(&round - &a)) < 1e-12);
    }

    #[test]
    fn adjointness_inner_product_identity() {
        // (B, Φ(A)) = (Φ†(B), A) on 20 random pairs
        let e = cnot_ensemble(0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let a = sample::random_matrix(4, &mut rng);
            let b = sample::random_matrix(4, &mut rng);
            let lhs = hs_inner(&b, &e.apply(&a).unwrap()).unwrap();
            let rhs = hs_inner(&e.apply_adjoint(&b).unwrap(), &a).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn superoperator_of_identity_channel() {
        let e = UnitaryEnsemble::new(std::vec![(1.0, identity(2))]).unwrap();
        let s = e.superoperator();
        assert!(fro_norm(&(s.matrix() - &identity(4))) < 1e-15);
    }

    #[test]
    fn superoperator_action_matches_apply() {
        let e = cnot_ensemble(0.5);
        let s = e.superoperator();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let a = sample::random_matrix(4, &mut rng);
            let via_matrix = s.apply_mat(&a).unwrap();
            let direct = e.apply(&a).unwrap();
            assert!(fro_norm(&(&via_matrix - &direct)) < 1e-12);
        }
    }

    #[test]
    fn superoperator_is_unital() {
        let e = cnot_ensemble(0.25);
        let (unitality, norm_excess) = e.superoperator().validate().unwrap();
        assert!(unitality <= 1e-10, "unitality residual {unitality}");
        assert!(norm_excess <= 1e-10, "norm excess {norm_excess}");
    }

    #[test]
    fn eigenvalue_moduli_bounded_by_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for d in [2usize, 3, 4] {
            let e = sample::random_ensemble(d, 2, &mut rng);
            for (lam, _) in crate::linalg::eig(e.superoperator().matrix()).unwrap() {
                assert!(lam.norm() <= 1.0 + 1e-10, "modulus {} at d={d}", lam.norm());
            }
        }
    }

    #[test]
    fn trace_preservation_and_contraction() {
        let e = cnot_ensemble(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let a = sample::random_matrix(4, &mut rng);
            let out = e.apply(&a).unwrap();
            let tr_in: Complex64 = a.diag().sum();
            let tr_out: Complex64 = out.diag().sum();
            assert!((tr_in - tr_out).norm() < 1e-12);
            assert!(hs_norm(&out).unwrap() <= hs_norm(&a).unwrap() + 1e-12);
        }
    }

    #[test]
    fn iterate_zero_steps_returns_input() {
        let e = cnot_ensemble(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rho = sample::random_density(4, &mut rng);
        let out = e.iterate(&rho, 0).unwrap();
        assert_eq!(out.matrix(), rho.matrix());
    }

    #[test]
    fn iterate_keeps_maximally_mixed_fixed() {
        let e = cnot_ensemble(0.5);
        let mixed = DensityMatrix::maximally_mixed(4);
        for k in [1usize, 7, 40] {
            let out = e.iterate(&mixed, k).unwrap();
            assert!(fro_norm(&(out.matrix() - mixed.matrix())) < 1e-12);
        }
    }

    #[test]
    fn iterate_preserves_positivity() {
        let e = cnot_ensemble(0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let rho = sample::random_density(4, &mut rng);
        let out = e.iterate(&rho, 50).unwrap();
        let min_eig = hermitian_eigenvalues(out.matrix())
            .unwrap()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(min_eig >= -1e-10);
    }

    #[test]
    fn density_matrix_rejects_bad_inputs() {
        // trace 2
        let bad = DensityMatrix::new(identity(2));
        assert!(matches!(bad, Err(Error::Density(_))));
        // non-hermitian
        let m = array![[c(0.5, 0.0), c(0.3, 0.1)], [c(0.1, 0.0), c(0.5, 0.0)]];
        assert!(matches!(DensityMatrix::new(m), Err(Error::Density(_))));
        // negative eigenvalue
        let m = array![[c(1.5, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-0.5, 0.0)]];
        assert!(matches!(DensityMatrix::new(m), Err(Error::Density(_))));
    }

    #[test]
    fn matrix_power_matches_repeated_multiplication() {
        let e = cnot_ensemble(0.5);
        let s = e.superoperator();
        let direct = s.matrix().dot(s.matrix()).dot(s.matrix());
        let powered = s.matrix_power(3);
        assert!(fro_norm(&(&direct - powered.matrix())) < 1e-12);
        assert!(fro_norm(&(s.matrix_power(0).matrix() - &identity(16))) < 1e-15);
    }
}
