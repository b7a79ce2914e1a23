//! Dense complex matrix primitives: Hilbert–Schmidt geometry, row-major
//! vectorization, Kronecker products, numerical null spaces, and
//! eigendecomposition of general (non-normal) matrices.
//!
//! Everything here is a pure function over `ndarray` arrays of
//! `Complex64`. Operators on a d-dimensional Hilbert space are d×d
//! matrices; superoperators act on their row-major vectorizations, so
//! the identity vec(ABC) = (A ⊗ Cᵀ)·vec(B) holds verbatim in this
//! ordering.
//!
//! All returned bases follow one sign convention: each vector is rotated
//! by a global phase so that its largest-modulus entry is real and
//! positive. This keeps outputs deterministic across runs.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, SVD, UPLO};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance below which an eigenvalue of a hermitian input may carry
/// imaginary rounding residue.
pub const HERMITIAN_IMAG_TOL: f64 = 1e-10;

/// Gram–Schmidt drop threshold relative to the input vector norm.
pub const GS_DROP_TOL: f64 = 1e-10;

/// d×d complex identity.
pub fn identity(d: usize) -> Array2<Complex64> {
    Array2::eye(d)
}

/// Conjugate transpose A†.
pub fn adjoint(a: &Array2<Complex64>) -> Array2<Complex64> {
    a.t().mapv(|z| z.conj())
}

/// True when every entry is finite (no NaN or ±Inf in either component).
pub fn all_finite(a: &Array2<Complex64>) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn require_square(a: &Array2<Complex64>, what: &str) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

/// Hilbert–Schmidt inner product (A,B) = Tr(A†B).
///
/// Conjugate-symmetric: `hs_inner(a, b) = conj(hs_inner(b, a))`.
pub fn hs_inner(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Result<Complex64> {
    let da = require_square(a, "hs_inner operand")?;
    let db = require_square(b, "hs_inner operand")?;
    if da != db {
        return Err(Error::Shape(format!(
            "hs_inner dimension mismatch: {da} vs {db}"
        )));
    }
    // Tr(A†B) = Σ_ij conj(A_ij)·B_ij, no product needed.
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Hilbert–Schmidt norm ‖A‖ = √Tr(A†A); unitarily invariant.
pub fn hs_norm(a: &Array2<Complex64>) -> Result<f64> {
    require_square(a, "hs_norm operand")?;
    Ok(a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}

/// Frobenius norm for matrices of any shape (used for residuals).
pub fn fro_norm(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(v: &Array1<Complex64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Row-major vectorization: A ↦ (A₁₁, A₁₂, …, A₁d, A₂₁, …, A_dd).
pub fn vec(a: &Array2<Complex64>) -> Result<Array1<Complex64>> {
    require_square(a, "vec operand")?;
    Ok(Array1::from_iter(a.iter().cloned()))
}

/// Inverse of [`vec`]: reshapes a length-d² vector back to a d×d matrix.
///
/// Round trip `unvec(vec(A)) = A` is exact at the bit level.
pub fn unvec(v: &Array1<Complex64>) -> Result<Array2<Complex64>> {
    let n = v.len();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n {
        return Err(Error::Shape(format!(
            "unvec needs a perfect-square length, got {n}"
        )));
    }
    Array2::from_shape_vec((d, d), v.to_vec())
        .map_err(|e| Error::Shape(format!("unvec reshape failed: {e}")))
}

/// Kronecker product A ⊗ B, consistent with the row-major [`vec`]
/// ordering (so vec(ABC) = (A ⊗ Cᵀ)·vec(B)).
pub fn kron(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    ndarray::linalg::kron(a, b)
}

/// Rotate `v` by a global phase so its largest-modulus entry is real
/// and positive. Ties resolve to the first maximal entry.
pub fn fix_phase(v: &mut Array1<Complex64>) {
    let mut best = 0usize;
    let mut best_mod = 0.0f64;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_mod {
            best_mod = m;
            best = i;
        }
    }
    if best_mod == 0.0 {
        return;
    }
    let phase = v[best] / best_mod;
    let rot = phase.conj();
    v.mapv_inplace(|z| z * rot);
}

/// Same convention as [`fix_phase`], applied to a matrix through its
/// row-major entries.
pub fn fix_phase_mat(a: &mut Array2<Complex64>) {
    let mut best_mod = 0.0f64;
    let mut best = Complex64::new(0.0, 0.0);
    for z in a.iter() {
        let m = z.norm();
        if m > best_mod {
            best_mod = m;
            best = *z;
        }
    }
    if best_mod == 0.0 {
        return;
    }
    let rot = (best / best_mod).conj();
    a.mapv_inplace(|z| z * rot);
}

/// Default rank cutoff for an r×c matrix: max(r, c)·ε_machine.
pub fn default_nullspace_tol(rows: usize, cols: usize) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON
}

/// Orthonormal basis of the numerical null space of `m`.
///
/// Singular directions with σ ≤ tol·σ_max count as null. Vectors come
/// back ordered by ascending singular value with the [`fix_phase`] sign
/// convention, so the output is deterministic. Full-rank inputs yield an
/// empty list.
pub fn nullspace(m: &Array2<Complex64>, tol: Option<f64>) -> Result<Vec<Array1<Complex64>>> {
    let (rows, cols) = (m.nrows(), m.ncols());
    let tol = match tol {
        Some(t) if t < 0.0 => {
            return Err(Error::Parameter(format!(
                "nullspace tolerance must be nonnegative, got {t}"
            )))
        }
        Some(t) => t,
        None => default_nullspace_tol(rows, cols),
    };
    if rows == 0 || cols == 0 {
        return Ok(Vec::new());
    }
    let (_, sigma, vt) = m.svd(false, true)?;
    let vt = vt.ok_or_else(|| Error::Numeric("SVD returned no right singular vectors".into()))?;
    let sigma_max = sigma.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = tol * sigma_max;

    // LAPACK returns σ in descending order; rows of V† beyond min(rows,
    // cols) span directions annihilated exactly. Walking the rows from
    // the bottom up therefore yields ascending σ.
    let mut basis = Vec::new();
    for i in (0..cols).rev() {
        let null = i >= sigma.len() || sigma_max == 0.0 || sigma[i] <= cutoff;
        if !null {
            break;
        }
        let mut v = vt.row(i).mapv(|z| z.conj());
        fix_phase(&mut v);
        basis.push(v);
    }
    Ok(basis)
}

/// Numerical rank of `m`: the number of singular values above tol·σ_max.
pub fn rank(m: &Array2<Complex64>, tol: Option<f64>) -> Result<usize> {
    let tol = match tol {
        Some(t) if t < 0.0 => {
            return Err(Error::Parameter(format!(
                "rank tolerance must be nonnegative, got {t}"
            )))
        }
        Some(t) => t,
        None => default_nullspace_tol(m.nrows(), m.ncols()),
    };
    let (_, sigma, _) = m.svd(false, false)?;
    let sigma_max = sigma.iter().cloned().fold(0.0f64, f64::max);
    if sigma_max == 0.0 {
        return Ok(0);
    }
    Ok(sigma.iter().filter(|&&s| s > tol * sigma_max).count())
}

/// All eigenpairs of a general square complex matrix.
///
/// Eigenvalues are sorted by phase in [0, 2π), ties by modulus
/// descending; each eigenvector is unit-norm with the [`fix_phase`]
/// convention. Solver non-convergence surfaces as a numeric error.
pub fn eig(m: &Array2<Complex64>) -> Result<Vec<(Complex64, Array1<Complex64>)>> {
    let d = require_square(m, "eig operand")?;
    let (values, vectors) = m
        .eig()
        .map_err(|e| Error::Numeric(format!("eigensolver failed on {d}x{d} matrix: {e}")))?;
    let mut pairs: Vec<(Complex64, Array1<Complex64>)> = values
        .iter()
        .enumerate()
        .map(|(j, &lam)| {
            let mut v = vectors.column(j).to_owned();
            let n = vec_norm(&v);
            if n > 0.0 {
                v.mapv_inplace(|z| z / n);
            }
            fix_phase(&mut v);
            (lam, v)
        })
        .collect();
    pairs.sort_by(|(a, _), (b, _)| {
        phase_key(*a)
            .total_cmp(&phase_key(*b))
            .then(b.norm().total_cmp(&a.norm()))
            .then(a.re.total_cmp(&b.re))
            .then(a.im.total_cmp(&b.im))
    });
    Ok(pairs)
}

/// Phase of z folded into [0, 2π).
pub fn phase_key(z: Complex64) -> f64 {
    let mut p = z.arg();
    if p < 0.0 {
        p += std::f64::consts::TAU;
    }
    // arg of a barely-negative imaginary part folds to just under 2π;
    // treat phases within machine precision of 2π as 0.
    if std::f64::consts::TAU - p < 1e-15 {
        p = 0.0;
    }
    p
}

/// Eigenvalues of the hermitian part (M + M†)/2, ascending.
pub fn hermitian_eigenvalues(m: &Array2<Complex64>) -> Result<Array1<f64>> {
    require_square(m, "hermitian_eigenvalues operand")?;
    let herm = (m + &adjoint(m)).mapv(|z| z * 0.5);
    let (values, _) = herm.eigh(UPLO::Lower)?;
    Ok(values)
}

/// Modified Gram–Schmidt under the Hilbert–Schmidt inner product.
///
/// Linearly dependent inputs are dropped once their residual falls to
/// [`GS_DROP_TOL`] of the original norm; survivors are re-orthogonalized
/// in a second pass, normalized, and phase-fixed. Empty input is fine.
pub fn gram_schmidt_hs(ops: &[Array2<Complex64>]) -> Result<Vec<Array2<Complex64>>> {
    if ops.is_empty() {
        return Ok(Vec::new());
    }
    let d = require_square(&ops[0], "gram_schmidt_hs operand")?;
    for op in ops {
        if require_square(op, "gram_schmidt_hs operand")? != d {
            return Err(Error::Shape(
                "gram_schmidt_hs inputs must share one dimension".into(),
            ));
        }
    }
    let mut basis: Vec<Array2<Complex64>> = Vec::new();
    for op in ops {
        let original_norm = hs_norm(op)?;
        if original_norm == 0.0 {
            continue;
        }
        let mut w = op.clone();
        // Two MGS sweeps keep the output orthonormal to ~1e-15 even for
        // nearly dependent inputs.
        for _ in 0..2 {
            for q in &basis {
                let c = hs_inner(q, &w)?;
                w = &w - &q.mapv(|z| z * c);
            }
        }
        let residual = hs_norm(&w)?;
        if residual <= GS_DROP_TOL * original_norm {
            continue;
        }
        w.mapv_inplace(|z| z / residual);
        fix_phase_mat(&mut w);
        basis.push(w);
    }
    Ok(basis)
}

/// Principal angles (radians, ascending) between the spans of two
/// HS-orthonormal operator families.
///
/// Small angles come from the sine formulation (SVD of B − A·A†B) rather
/// than acos of overlap singular values, which bottoms out at √ε.
pub fn principal_angles(a: &[Array2<Complex64>], b: &[Array2<Complex64>]) -> Result<Vec<f64>> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let d2 = a[0].len();
    for x in a.iter().chain(b.iter()) {
        if x.len() != d2 {
            return Err(Error::Shape("principal_angles dimension mismatch".into()));
        }
    }
    // columns = vectorized basis elements
    let pack = |fam: &[Array2<Complex64>]| -> Array2<Complex64> {
        let mut q = Array2::<Complex64>::zeros((d2, fam.len()));
        for (j, x) in fam.iter().enumerate() {
            for (i, z) in x.iter().enumerate() {
                q[(i, j)] = *z;
            }
        }
        q
    };
    let qa = pack(a);
    let qb = pack(b);
    let overlap = qa.t().mapv(|z| z.conj()).dot(&qb);
    let (_, sigma, _) = overlap.svd(false, false)?;
    let mut cos_angles: Vec<f64> = sigma.iter().map(|s| s.min(1.0).acos()).collect();
    cos_angles.sort_by(f64::total_cmp);

    let residual = &qb - &qa.dot(&overlap);
    let (_, sin_sigma, _) = residual.svd(false, false)?;
    let mut sin_angles: Vec<f64> = sin_sigma.iter().map(|s| s.min(1.0).asin()).collect();
    sin_angles.sort_by(f64::total_cmp);

    let n = cos_angles.len().min(sin_angles.len());
    let angles = (0..n)
        .map(|i| {
            if cos_angles[i] < std::f64::consts::FRAC_PI_4 {
                sin_angles[i]
            } else {
                cos_angles[i]
            }
        })
        .collect();
    Ok(angles)
}

/// True when two orthonormal families span the same subspace: equal
/// cardinality and every principal angle at most `angle_tol`.
pub fn same_span(
    a: &[Array2<Complex64>],
    b: &[Array2<Complex64>],
    angle_tol: f64,
) -> Result<bool> {
    if a.len() != b.len() {
        return Ok(false);
    }
    let angles = principal_angles(a, b)?;
    Ok(angles.iter().all(|&t| t <= angle_tol))
}
