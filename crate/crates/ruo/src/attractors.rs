//! Attractor spaces of random unitary operations.
//!
//! For unit-modulus eigenvalues λ of Φ, the eigenspace Ker(Φ − λI)
//! coincides with the solution set of the generalized commutation
//! relations
//!
//!   D_λ = { X : Uᵢ X = λ X Uᵢ for every i },
//!
//! and eigenspaces to different unit-modulus eigenvalues are mutually
//! orthogonal in the Hilbert–Schmidt inner product. This module extracts
//! the unit spectrum σ_|1|, solves the commutation relations per λ
//! (the authoritative construction), independently solves the kernels of
//! S − λI on the superoperator side, and refuses to hand back a space in
//! which the two constructions disagree. It also carries the theorem
//! audits: tracelessness for λ ≠ 1, absence of unit-circle Jordan
//! chains, cross-block orthogonality, product/adjoint closure, and the
//! unitality resolution Σᵢ Tr(X_{1,i}†) X_{1,i} = I.

use ndarray::Array2;
use num_complex::Complex64;

use crate::channel::{Superoperator, UnitaryEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{
    adjoint, eig, fro_norm, gram_schmidt_hs, hs_inner, identity, kron, nullspace, phase_key,
    principal_angles, rank, unvec,
};
use crate::Tolerances;

/// Rank cutoff (relative to σ_max) for the attractor solves: kernel
/// bases, commutant bases, and the Jordan-chain rank comparison. Sits
/// well above eigenvalue scatter and well below genuine spectral gaps.
pub const ATTRACTOR_RANK_TOL: f64 = 1e-9;

/// |Tr X| bound for attractors with λ ≠ 1.
pub const TRACE_TOL: f64 = 1e-8;

/// Cross-block orthogonality bound.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Residual bound for product/adjoint closure and the unitality
/// resolution.
pub const CLOSURE_TOL: f64 = 1e-8;

/// A root of unity e^{2πi·p/q} in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RootOfUnity {
    pub numerator: u32,
    pub denominator: u32,
}

impl RootOfUnity {
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(
            1.0,
            std::f64::consts::TAU * self.numerator as f64 / self.denominator as f64,
        )
    }
}

/// One clustered unit-modulus eigenvalue.
#[derive(Debug, Clone)]
pub struct SpectralPoint {
    /// Cluster centroid projected to exact modulus 1 (phase preserved).
    pub value: Complex64,
    /// Geometric multiplicity dim Ker(S − λI).
    pub multiplicity: usize,
    /// The unclustered eigenvalues merged into this point.
    pub raw: Vec<Complex64>,
    /// Nearby exact root of unity, reported for the periodicity
    /// classification; never substituted into computations.
    pub nearest_root: Option<RootOfUnity>,
}

/// The set σ_|1| of eigenvalues with |λ| = 1, sorted by phase.
#[derive(Debug, Clone)]
pub struct UnitSpectrum {
    pub points: Vec<SpectralPoint>,
}

impl UnitSpectrum {
    pub fn values(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum()
    }
}

/// Orthonormal attractor basis for one eigenvalue.
#[derive(Debug, Clone)]
pub struct AttractorBlock {
    pub lambda: Complex64,
    pub basis: Vec<Array2<Complex64>>,
}

/// Atr(Φ) = ⊕_{λ∈σ_|1|} Ker(Φ − λI), with an HS-orthonormal basis per
/// block and blocks ordered by eigenvalue phase.
#[derive(Debug, Clone)]
pub struct AttractorSpace {
    dim: usize,
    blocks: Vec<AttractorBlock>,
}

impl AttractorSpace {
    /// Assemble from existing blocks (used when re-ingesting reports).
    pub fn from_parts(dim: usize, blocks: Vec<AttractorBlock>) -> Result<Self> {
        for b in &blocks {
            for x in &b.basis {
                if x.nrows() != dim || x.ncols() != dim {
                    return Err(Error::Shape(format!(
                        "attractor element is {}x{}, expected {dim}x{dim}",
                        x.nrows(),
                        x.ncols()
                    )));
                }
            }
        }
        Ok(AttractorSpace { dim, blocks })
    }

    /// Hilbert space dimension d.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[AttractorBlock] {
        &self.blocks
    }

    /// Σ_λ dim Ker(Φ − λI).
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.basis.len()).sum()
    }

    /// All (λ, X) pairs in deterministic order.
    pub fn elements(&self) -> impl Iterator<Item = (Complex64, &Array2<Complex64>)> {
        self.blocks
            .iter()
            .flat_map(|b| b.basis.iter().map(move |x| (b.lambda, x)))
    }

    /// The block whose eigenvalue is closest to `lambda`, if within
    /// `tol`.
    pub fn block_near(&self, lambda: Complex64, tol: f64) -> Option<&AttractorBlock> {
        self.blocks
            .iter()
            .map(|b| (b, (b.lambda - lambda).norm()))
            .filter(|(_, d)| *d <= tol)
            .min_by(|(_, x), (_, y)| x.total_cmp(y))
            .map(|(b, _)| b)
    }

    /// Largest commutation-relation residual max_i ‖UᵢX − λXUᵢ‖ over
    /// every basis element.
    pub fn structure_residual(&self, ensemble: &UnitaryEnsemble) -> Result<f64> {
        let mut worst = 0.0f64;
        for (lambda, x) in self.elements() {
            for (_, u) in ensemble.items() {
                let lhs = u.dot(x);
                let rhs = x.dot(u).mapv(|z| z * lambda);
                worst = worst.max(fro_norm(&(&lhs - &rhs)));
            }
        }
        Ok(worst)
    }
}

/// Extract σ_|1|: eigenvalues of S with 1 − |λ| ≤ `tols.unit_circle`,
/// clustered within `tols.cluster_radius`, centroids projected to exact
/// modulus 1. Geometric multiplicities come from independent null-space
/// solves, not from counting clustered values.
pub fn unit_spectrum(s: &Superoperator, tols: &Tolerances) -> Result<UnitSpectrum> {
    let pairs = eig(s.matrix())?;
    let candidates: Vec<Complex64> = pairs
        .iter()
        .map(|(l, _)| *l)
        .filter(|l| 1.0 - l.norm() <= tols.unit_circle)
        .collect();

    let clusters = cluster_on_circle(&candidates, tols.cluster_radius);
    let rank_tol = tols.nullspace.unwrap_or(ATTRACTOR_RANK_TOL);
    let side = s.matrix().nrows();

    let mut points = Vec::with_capacity(clusters.len());
    for raw in clusters {
        let centroid: Complex64 =
            raw.iter().sum::<Complex64>() / Complex64::new(raw.len() as f64, 0.0);
        let value = centroid / centroid.norm();
        let shifted = s.matrix() - &(identity(side).mapv(|z| z * value));
        let multiplicity = nullspace(&shifted, Some(rank_tol))?.len();
        points.push(SpectralPoint {
            value,
            multiplicity,
            raw,
            nearest_root: nearest_root_of_unity(value, tols.max_period, tols.root_snap),
        });
    }
    points.sort_by(|a, b| phase_key(a.value).total_cmp(&phase_key(b.value)));
    Ok(UnitSpectrum { points })
}

/// Greedy clustering of points on (or near) the unit circle, with a
/// final wrap-around merge so clusters straddling phase 0 stay whole.
fn cluster_on_circle(values: &[Complex64], radius: f64) -> Vec<Vec<Complex64>> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| {
        phase_key(*a)
            .total_cmp(&phase_key(*b))
            .then(a.re.total_cmp(&b.re))
            .then(a.im.total_cmp(&b.im))
    });
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for z in sorted {
        match clusters.last_mut() {
            Some(current) => {
                let centroid = current.iter().sum::<Complex64>()
                    / Complex64::new(current.len() as f64, 0.0);
                if (z - centroid).norm() <= radius {
                    current.push(z);
                } else {
                    clusters.push(std::vec![z]);
                }
            }
            None => clusters.push(std::vec![z]),
        }
    }
    if clusters.len() > 1 {
        let first_centroid = clusters[0].iter().sum::<Complex64>()
            / Complex64::new(clusters[0].len() as f64, 0.0);
        let last = clusters.last().unwrap();
        let last_centroid =
            last.iter().sum::<Complex64>() / Complex64::new(last.len() as f64, 0.0);
        if (first_centroid - last_centroid).norm() <= radius {
            let tail = clusters.pop().unwrap();
            clusters[0].extend(tail);
        }
    }
    clusters
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Smallest-order root of unity e^{2πi·p/q} with q ≤ `max_order` within
/// `tol` of `z`, if any. Only lowest-terms fractions are scanned, so the
/// first hit has minimal order.
pub fn nearest_root_of_unity(z: Complex64, max_order: u32, tol: f64) -> Option<RootOfUnity> {
    for q in 1..=max_order {
        for p in 0..q {
            let coprime = if p == 0 { q == 1 } else { gcd(p, q) == 1 };
            if !coprime {
                continue;
            }
            let root = RootOfUnity {
                numerator: p,
                denominator: q,
            };
            if (z - root.value()).norm() <= tol {
                return Some(root);
            }
        }
    }
    None
}

/// Orthonormal basis of D_λ = {X : UᵢX = λXUᵢ ∀i}: the joint null space
/// of the m stacked operators Uᵢ ⊗ I − λ·I ⊗ Uᵢᵀ acting on vec(X).
/// Empty when λ is not in σ_|1|.
pub fn commutant_basis(
    e: &UnitaryEnsemble,
    lambda: Complex64,
    tols: &Tolerances,
) -> Result<Vec<Array2<Complex64>>> {
    check_unit_modulus(lambda, tols)?;
    let d = e.dim();
    let d2 = d * d;
    let m = e.len();
    let id = identity(d);
    let mut stacked = Array2::<Complex64>::zeros((m * d2, d2));
    for (k, (_, u)) in e.items().iter().enumerate() {
        let block = &kron(u, &id) - &kron(&id, &u.t().to_owned()).mapv(|z| z * lambda);
        stacked
            .slice_mut(ndarray::s![k * d2..(k + 1) * d2, ..])
            .assign(&block);
    }
    let rank_tol = tols.nullspace.unwrap_or(ATTRACTOR_RANK_TOL);
    let vectors = nullspace(&stacked, Some(rank_tol))?;
    vectors.iter().map(unvec).collect()
}

/// Orthonormal basis of Ker(S − λI), unvectorized. The independent
/// cross-check for [`commutant_basis`].
pub fn kernel_basis(
    s: &Superoperator,
    lambda: Complex64,
    tols: &Tolerances,
) -> Result<Vec<Array2<Complex64>>> {
    check_unit_modulus(lambda, tols)?;
    let side = s.matrix().nrows();
    let shifted = s.matrix() - &(identity(side).mapv(|z| z * lambda));
    let rank_tol = tols.nullspace.unwrap_or(ATTRACTOR_RANK_TOL);
    let vectors = nullspace(&shifted, Some(rank_tol))?;
    vectors.iter().map(unvec).collect()
}

fn check_unit_modulus(lambda: Complex64, tols: &Tolerances) -> Result<()> {
    // generous slack: clustered values sit on the circle exactly, but
    // hand-entered eigenvalues may carry rounding
    let slack = tols.cluster_radius.max(tols.unit_circle) * 10.0;
    if (lambda.norm() - 1.0).abs() > slack {
        return Err(Error::Parameter(format!(
            "eigenvalue {lambda} is not on the unit circle (|λ| = {})",
            lambda.norm()
        )));
    }
    Ok(())
}

/// Build the full attractor space of an ensemble.
///
/// The commutation-relation solve is authoritative; the kernel solve of
/// S − λI is recomputed independently per λ and the two spans must agree
/// (all principal angles ≤ `tols.structure_mismatch`), otherwise the
/// build aborts with a consistency error. Blocks are ordered by phase
/// and each block is re-orthonormalized with the toolkit sign
/// convention.
pub fn build_attractor_space(e: &UnitaryEnsemble, tols: &Tolerances) -> Result<AttractorSpace> {
    let s = e.superoperator();
    let spectrum = unit_spectrum(&s, tols)?;
    let mut blocks = Vec::with_capacity(spectrum.points.len());
    for point in &spectrum.points {
        let lambda = point.value;
        let from_commutant = commutant_basis(e, lambda, tols)?;
        let from_kernel = kernel_basis(&s, lambda, tols)?;
        if from_commutant.len() != from_kernel.len() {
            return Err(Error::Consistency(format!(
                "attractor dimension mismatch at λ = {lambda}: commutation relations give {}, \
                 kernel gives {}",
                from_commutant.len(),
                from_kernel.len()
            )));
        }
        let angles = principal_angles(&from_commutant, &from_kernel)?;
        if let Some(&worst) = angles.last() {
            if worst > tols.structure_mismatch {
                return Err(Error::Consistency(format!(
                    "attractor spans disagree at λ = {lambda}: largest principal angle {worst:.3e}"
                )));
            }
        }
        let basis = gram_schmidt_hs(&from_commutant)?;
        if basis.len() != from_commutant.len() {
            return Err(Error::Consistency(format!(
                "orthonormalization dropped attractor directions at λ = {lambda}"
            )));
        }
        blocks.push(AttractorBlock { lambda, basis });
    }
    Ok(AttractorSpace {
        dim: e.dim(),
        blocks,
    })
}

/// Verdict of one theorem audit, with the measured residual.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub pass: bool,
    pub residual: f64,
    pub threshold: f64,
    pub violations: Vec<String>,
}

impl CheckReport {
    fn from_residual(residual: f64, threshold: f64, violations: Vec<String>) -> Self {
        CheckReport {
            pass: residual <= threshold && violations.is_empty(),
            residual,
            threshold,
            violations,
        }
    }
}

/// λ ≠ 1 attractors are traceless (λ = 1 or Tr X = 0).
pub fn check_trace_property(space: &AttractorSpace) -> CheckReport {
    let mut worst = 0.0f64;
    let mut violations = Vec::new();
    for block in space.blocks() {
        if (block.lambda - Complex64::new(1.0, 0.0)).norm() <= 1e-8 {
            continue;
        }
        for (i, x) in block.basis.iter().enumerate() {
            let tr = x.diag().sum().norm();
            worst = worst.max(tr);
            if tr > TRACE_TOL {
                violations.push(format!(
                    "|Tr X| = {tr:.3e} for basis element {i} at λ = {}",
                    block.lambda
                ));
            }
        }
    }
    CheckReport::from_residual(worst, TRACE_TOL, violations)
}

/// Per-λ rank comparison of the Jordan-chain test.
#[derive(Debug, Clone)]
pub struct RankPair {
    pub lambda: Complex64,
    pub rank_first: usize,
    pub rank_second: usize,
}

/// No Jordan chains on the unit circle: for every λ ∈ σ_|1| the rank of
/// S − λI equals the rank of (S − λI)², i.e. Ker ∩ Ran = {0}.
pub fn check_diagonalizability(
    s: &Superoperator,
    spectrum: &UnitSpectrum,
    tols: &Tolerances,
) -> Result<(CheckReport, Vec<RankPair>)> {
    let side = s.matrix().nrows();
    let rank_tol = tols.nullspace.unwrap_or(ATTRACTOR_RANK_TOL);
    let mut pairs = Vec::new();
    let mut violations = Vec::new();
    for point in &spectrum.points {
        let shifted = s.matrix() - &(identity(side).mapv(|z| z * point.value));
        let squared = shifted.dot(&shifted);
        let r1 = rank(&shifted, Some(rank_tol))?;
        let r2 = rank(&squared, Some(rank_tol))?;
        if r1 != r2 {
            violations.push(format!(
                "Jordan chain at λ = {}: rank(S−λI) = {r1}, rank((S−λI)²) = {r2}",
                point.value
            ));
        }
        pairs.push(RankPair {
            lambda: point.value,
            rank_first: r1,
            rank_second: r2,
        });
    }
    let residual = if violations.is_empty() { 0.0 } else { 1.0 };
    Ok((CheckReport::from_residual(residual, 0.5, violations), pairs))
}

/// Pairwise HS-orthonormality of the full basis across all blocks.
pub fn check_orthonormality(space: &AttractorSpace) -> Result<CheckReport> {
    let elements: Vec<(Complex64, &Array2<Complex64>)> = space.elements().collect();
    let mut worst = 0.0f64;
    let mut violations = Vec::new();
    for (i, (_, x)) in elements.iter().enumerate() {
        for (j, (_, y)) in elements.iter().enumerate() {
            let g = hs_inner(x, y)?;
            let expect = if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            let dev = (g - expect).norm();
            worst = worst.max(dev);
            if dev > ORTHONORMALITY_TOL {
                violations.push(format!("Gram deviation {dev:.3e} at pair ({i},{j})"));
            }
        }
    }
    Ok(CheckReport::from_residual(
        worst,
        ORTHONORMALITY_TOL,
        violations,
    ))
}

/// Unitality resolution: Σᵢ Tr(X_{1,i}†)·X_{1,i} = I.
pub fn check_unitality_resolution(space: &AttractorSpace) -> Result<CheckReport> {
    let d = space.dim();
    let mut sum = Array2::<Complex64>::zeros((d, d));
    for block in space.blocks() {
        if (block.lambda - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
            continue;
        }
        for x in &block.basis {
            let coeff = adjoint(x).diag().sum();
            sum = &sum + &x.mapv(|z| z * coeff);
        }
    }
    let residual = fro_norm(&(&sum - &identity(d)));
    Ok(CheckReport::from_residual(residual, CLOSURE_TOL, Vec::new()))
}

/// Product and adjoint closure: X_{λ₁}X_{λ₂} lies in the λ₁λ₂ block's
/// span (or vanishes), and X_λ† lies in the λ* block's span.
pub fn check_closure(space: &AttractorSpace) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut violations = Vec::new();
    let elements: Vec<(Complex64, &Array2<Complex64>)> = space.elements().collect();
    for (l1, x1) in &elements {
        for (l2, x2) in &elements {
            let product = x1.dot(*x2);
            let r = residual_outside_block(space, *l1 * *l2, &product)?;
            worst = worst.max(r);
            if r > CLOSURE_TOL {
                violations.push(format!(
                    "product at (λ₁, λ₂) = ({l1}, {l2}) leaves the λ₁λ₂ block by {r:.3e}"
                ));
            }
        }
    }
    for (l, x) in &elements {
        let dag = adjoint(x);
        let r = residual_outside_block(space, l.conj(), &dag)?;
        worst = worst.max(r);
        if r > CLOSURE_TOL {
            violations.push(format!("adjoint at λ = {l} leaves the λ* block by {r:.3e}"));
        }
    }
    Ok(CheckReport::from_residual(worst, CLOSURE_TOL, violations))
}

/// Distance from `op` to the span of the block at `lambda` (the full
/// norm when no such block exists, since the operator must then vanish).
fn residual_outside_block(
    space: &AttractorSpace,
    lambda: Complex64,
    op: &Array2<Complex64>,
) -> Result<f64> {
    let mut remainder = op.clone();
    if let Some(block) = space.block_near(lambda, 1e-6) {
        for x in &block.basis {
            let c = hs_inner(x, &remainder)?;
            remainder = &remainder - &x.mapv(|z| z * c);
        }
    }
    Ok(fro_norm(&remainder))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::io::builtins;
    use crate::sample;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn cnot_ensemble(p1: f64) -> UnitaryEnsemble {
        builtins::cnot_pair(p1).to_ensemble(&tols()).unwrap()
    }

    /// The six explicit attractor matrices of the two-CNOT system in the
    /// computational basis: five for λ = 1, one for λ = −1.
    pub(crate) fn cnot_reference_basis() -> (Vec<Array2<Complex64>>, Vec<Array2<Complex64>>) {
        let s3 = 3f64.sqrt();
        let s6 = 6f64.sqrt();
        let x11 = array![
            [c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)],
            [c(0., 0.), c(0., 0.), c(0., 0.), c(0., 0.)],
            [c(0., 0.), c(0., 0.), c(0., 0.), c(0., 0.)],
            [c(0., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]
        ];
        let x12 = array![
            [c(0., 0.), c(0., 0.), c(0., 0.), c(0., 0.)],
            [c(0., 0.), c(0., 0.), c(1. / s6, 0.), c(1. / s6, 0.)],
            [c(0., 0.), c(1. / s6, 0.), c(0., 0.), c(1. / s6, 0.)],
            [c(0., 0.), c(1. / s6, 0.), c(1. / s6, 0.), c(0., 0.)]
        ];
        let x13 = array![
            [c(0., 0.), c(1. / s3, 0.), c(1. / s3, 0.), c(1. / s3, 0.)],
            [c(0., 0.), c(0., 0.), c(0., 0.), c(0., 0.)],
            [c(0., 0.), c(0., 0.), c(0., 0.), c(0., 0.)],
            [c(0., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]
        ];
        let x14 = array![
            [c(0., 0.), c(0., 0.), c(0., 0.), c(0., 0.)],
            [c(1. / s3, 0.), c(0., 0.), c(0., 0.), c(0., 0.)],
            [c(1. / s3, 0.), c(0., 0.), c(0., 0.), c(0., 0.)],
            [c(1. / s3, 0.), c(0., 0.), c(0., 0.), c(0., 0.)]
        ];
        let x15 = array![
            [c(0., 0.), c(0., 0.), c(0., 0.), c(0., 0.)],
            [c(0., 0.), c(1. / s3, 0.), c(0., 0.), c(0., 0.)],
            [c(0., 0.), c(0., 0.), c(1. / s3, 0.), c(0., 0.)],
            [c(0., 0.), c(0., 0.), c(0., 0.), c(1. / s3, 0.)]
        ];
        let xm1 = array![
            [c(0., 0.), c(0., 0.), c(0., 0.), c(0., 0.)],
            [c(0., 0.), c(0., 0.), c(-1. / s6, 0.), c(1. / s6, 0.)],
            [c(0., 0.), c(1. / s6, 0.), c(0., 0.), c(-1. / s6, 0.)],
            [c(0., 0.), c(-1. / s6, 0.), c(1. / s6, 0.), c(0., 0.)]
        ];
        (std::vec![x11, x12, x13, x14, x15], std::vec![xm1])
    }

    #[test]
    fn reference_basis_is_orthonormal() {
        let (plus, minus) = cnot_reference_basis();
        let all: Vec<_> = plus.iter().chain(minus.iter()).cloned().collect();
        for (i, x) in all.iter().enumerate() {
            for (j, y) in all.iter().enumerate() {
                let g = hs_inner(x, y).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g - c(expect, 0.0)).norm() < 1e-14, "pair ({i},{j})");
            }
        }
    }

    #[test]
    fn cnot_unit_spectrum_is_one_and_minus_one() {
        let s = cnot_ensemble(0.5).superoperator();
        let spec = unit_spectrum(&s, &tols()).unwrap();
        assert_eq!(spec.points.len(), 2);
        assert!((spec.points[0].value - c(1., 0.)).norm() < 1e-12);
        assert_eq!(spec.points[0].multiplicity, 5);
        assert!((spec.points[1].value - c(-1., 0.)).norm() < 1e-12);
        assert_eq!(spec.points[1].multiplicity, 1);
    }

    #[test]
    fn identity_channel_unit_spectrum() {
        let e = UnitaryEnsemble::new(std::vec![(1.0, identity(3))]).unwrap();
        let spec = unit_spectrum(&e.superoperator(), &tols()).unwrap();
        assert_eq!(spec.points.len(), 1);
        assert_eq!(spec.points[0].multiplicity, 9);
        assert_eq!(
            spec.points[0].nearest_root,
            Some(RootOfUnity {
                numerator: 0,
                denominator: 1
            })
        );
    }

    #[test]
    fn pauli_x_unit_spectrum() {
        // σx ⊗ σx has eigenvalues {1, 1, −1, −1}
        let e = builtins::single_unitary_pauli_x()
            .to_ensemble(&tols())
            .unwrap();
        let spec = unit_spectrum(&e.superoperator(), &tols()).unwrap();
        assert_eq!(spec.points.len(), 2);
        assert_eq!(spec.points[0].multiplicity, 2);
        assert_eq!(spec.points[1].multiplicity, 2);
    }

    #[test]
    fn commutant_cnot_lambda_one_matches_reference() {
        let e = cnot_ensemble(0.5);
        let basis = commutant_basis(&e, c(1., 0.), &tols()).unwrap();
        assert_eq!(basis.len(), 5);
        let (reference, _) = cnot_reference_basis();
        let angles = principal_angles(&basis, &reference).unwrap();
        assert!(angles.iter().all(|&t| t <= 1e-7), "{angles:?}");
    }

    #[test]
    fn commutant_cnot_lambda_minus_one_matches_reference() {
        let e = cnot_ensemble(0.5);
        let basis = commutant_basis(&e, c(-1., 0.), &tols()).unwrap();
        assert_eq!(basis.len(), 1);
        let (_, reference) = cnot_reference_basis();
        let angles = principal_angles(&basis, &reference).unwrap();
        assert!(angles[0] <= 1e-7, "{angles:?}");
    }

    #[test]
    fn commutant_lambda_one_always_contains_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let e = sample::random_ensemble(3, 2, &mut rng);
        let basis = commutant_basis(&e, c(1., 0.), &tols()).unwrap();
        // project I onto the span; nothing may remain
        let mut remainder = identity(3);
        for x in &basis {
            let coeff = hs_inner(x, &remainder).unwrap();
            remainder = &remainder - &x.mapv(|z| z * coeff);
        }
        assert!(fro_norm(&remainder) < 1e-9);
    }

    #[test]
    fn kernel_cnot_dimension_five() {
        let e = cnot_ensemble(0.5);
        let basis = kernel_basis(&e.superoperator(), c(1., 0.), &tols()).unwrap();
        assert_eq!(basis.len(), 5);
    }

    #[test]
    fn kernel_identity_channel_off_eigenvalue_is_empty() {
        let e = UnitaryEnsemble::new(std::vec![(1.0, identity(2))]).unwrap();
        let basis = kernel_basis(&e.superoperator(), c(-1., 0.), &tols()).unwrap();
        assert!(basis.is_empty());
    }

    #[test]
    fn kernel_and_commutant_spans_agree_for_cnot() {
        let e = cnot_ensemble(0.5);
        let s = e.superoperator();
        for lambda in [c(1., 0.), c(-1., 0.)] {
            let kb = kernel_basis(&s, lambda, &tols()).unwrap();
            let cb = commutant_basis(&e, lambda, &tols()).unwrap();
            assert_eq!(kb.len(), cb.len());
            let angles = principal_angles(&kb, &cb).unwrap();
            assert!(angles.iter().all(|&t| t <= 1e-7), "λ={lambda}: {angles:?}");
        }
    }

    #[test]
    fn build_cnot_space_has_dimension_six() {
        let e = cnot_ensemble(0.5);
        let space = build_attractor_space(&e, &tols()).unwrap();
        assert_eq!(space.total_dim(), 6);
        assert_eq!(space.blocks()[0].basis.len(), 5);
        assert_eq!(space.blocks()[1].basis.len(), 1);
        assert!(space.structure_residual(&e).unwrap() < 1e-8);
    }

    #[test]
    fn build_identity_channel_space_is_full() {
        let e = UnitaryEnsemble::new(std::vec![(1.0, identity(2))]).unwrap();
        let space = build_attractor_space(&e, &tols()).unwrap();
        assert_eq!(space.total_dim(), 4);
        assert_eq!(space.blocks().len(), 1);
    }

    #[test]
    fn attractor_space_independent_of_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let u = sample::haar_unitary(3, &mut rng);
        let v = sample::haar_unitary(3, &mut rng);
        let mut spaces = Vec::new();
        for p in [0.1, 0.5, 0.9] {
            let e =
                UnitaryEnsemble::new(std::vec![(p, u.clone()), (1.0 - p, v.clone())]).unwrap();
            spaces.push(build_attractor_space(&e, &tols()).unwrap());
        }
        for w in spaces.windows(2) {
            let a: Vec<_> = w[0].elements().map(|(_, x)| x.clone()).collect();
            let b: Vec<_> = w[1].elements().map(|(_, x)| x.clone()).collect();
            assert_eq!(a.len(), b.len());
            let angles = principal_angles(&a, &b).unwrap();
            assert!(angles.iter().all(|&t| t <= 1e-7), "{angles:?}");
        }
    }

    #[test]
    fn ensemble_containing_identity_has_stationary_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let u = sample::haar_unitary(3, &mut rng);
        let e = UnitaryEnsemble::new(std::vec![(0.5, identity(3)), (0.5, u)]).unwrap();
        let spec = unit_spectrum(&e.superoperator(), &tols()).unwrap();
        assert_eq!(spec.points.len(), 1);
        assert!((spec.points[0].value - c(1., 0.)).norm() < 1e-10);
    }

    #[test]
    fn trace_property_on_cnot_and_pauli_x() {
        let space = build_attractor_space(&cnot_ensemble(0.5), &tols()).unwrap();
        let report = check_trace_property(&space);
        assert!(report.pass, "residual {}", report.residual);

        // λ = −1 basis of the bit-flip channel is {σz, σy}/√2: traceless
        let e = builtins::single_unitary_pauli_x()
            .to_ensemble(&tols())
            .unwrap();
        let space = build_attractor_space(&e, &tols()).unwrap();
        let report = check_trace_property(&space);
        assert!(report.pass);
        let minus_block = space.block_near(c(-1., 0.), 1e-8).unwrap();
        assert_eq!(minus_block.basis.len(), 2);
        for x in &minus_block.basis {
            assert!(x.diag().sum().norm() < 1e-12);
        }
    }

    #[test]
    fn trace_property_vacuous_for_identity_channel() {
        let e = UnitaryEnsemble::new(std::vec![(1.0, identity(2))]).unwrap();
        let space = build_attractor_space(&e, &tols()).unwrap();
        let report = check_trace_property(&space);
        assert!(report.pass);
        assert_eq!(report.residual, 0.0);
    }

    #[test]
    fn diagonalizability_ranks_for_cnot() {
        let e = cnot_ensemble(0.5);
        let s = e.superoperator();
        let spec = unit_spectrum(&s, &tols()).unwrap();
        let (report, pairs) = check_diagonalizability(&s, &spec, &tols()).unwrap();
        assert!(report.pass);
        // 16 − 5 = 11 at λ = 1, 16 − 1 = 15 at λ = −1
        assert_eq!(pairs[0].rank_first, 11);
        assert_eq!(pairs[0].rank_second, 11);
        assert_eq!(pairs[1].rank_first, 15);
        assert_eq!(pairs[1].rank_second, 15);
    }

    #[test]
    fn diagonalizability_single_unitary_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let u = sample::haar_unitary(3, &mut rng);
        let e = UnitaryEnsemble::new(std::vec![(1.0, u)]).unwrap();
        let s = e.superoperator();
        let spec = unit_spectrum(&s, &tols()).unwrap();
        let (report, _) = check_diagonalizability(&s, &spec, &tols()).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn orthonormality_across_blocks() {
        let space = build_attractor_space(&cnot_ensemble(0.5), &tols()).unwrap();
        let report = check_orthonormality(&space).unwrap();
        assert!(report.pass, "residual {}", report.residual);
    }

    #[test]
    fn unitality_resolution_for_cnot() {
        let space = build_attractor_space(&cnot_ensemble(0.5), &tols()).unwrap();
        let report = check_unitality_resolution(&space).unwrap();
        assert!(report.pass, "residual {}", report.residual);
    }

    #[test]
    fn closure_for_cnot_space() {
        let space = build_attractor_space(&cnot_ensemble(0.5), &tols()).unwrap();
        let report = check_closure(&space).unwrap();
        assert!(
            report.pass,
            "residual {}: {:?}",
            report.residual, report.violations
        );

        // spot checks from the reference basis: X₋₁·X₋₁ lands in λ = 1,
        // and the hermitian diagonal element is its own adjoint
        let (plus, minus) = cnot_reference_basis();
        let sq = minus[0].dot(&minus[0]);
        let r = residual_outside_block(&space, c(1., 0.), &sq).unwrap();
        assert!(r < 1e-10, "X₋₁² residual {r}");
        let dag = adjoint(&plus[4]);
        let r = residual_outside_block(&space, c(1., 0.), &dag).unwrap();
        assert!(r < 1e-10, "X_{{1,5}}† residual {r}");
    }

    #[test]
    fn closure_trivial_for_identity_channel() {
        let e = UnitaryEnsemble::new(std::vec![(1.0, identity(2))]).unwrap();
        let space = build_attractor_space(&e, &tols()).unwrap();
        assert!(check_closure(&space).unwrap().pass);
    }

    #[test]
    fn group_generated_spectrum_consists_of_roots_of_unity() {
        // the two CNOTs generate a finite group of order 6
        let s = cnot_ensemble(0.3).superoperator();
        let spec = unit_spectrum(&s, &tols()).unwrap();
        for p in &spec.points {
            let root = p.nearest_root.expect("every λ must be near a root");
            assert!(root.denominator <= 6);
            assert!((p.value - root.value()).norm() <= 1e-8);
        }
    }

    #[test]
    fn irrational_phase_has_no_nearby_root() {
        let e = builtins::diag_irrational_phase()
            .to_ensemble(&tols())
            .unwrap();
        let spec = unit_spectrum(&e.superoperator(), &tols()).unwrap();
        let off_axis: Vec<_> = spec
            .points
            .iter()
            .filter(|p| p.nearest_root.is_none())
            .collect();
        assert_eq!(off_axis.len(), 2, "e^{{±iπ√2}} are not low-order roots");
    }

    #[test]
    fn commutant_rejects_interior_eigenvalue() {
        let e = cnot_ensemble(0.5);
        let err = commutant_basis(&e, c(0.5, 0.0), &tols()).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
    }
}
