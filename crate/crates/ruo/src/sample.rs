//! Random test material: Haar unitaries, Ginibre matrices, random density
//! matrices, and random unitary ensembles.
//!
//! All generators take an explicit RNG so callers control seeding;
//! examples and the verification suite use seeded `ChaCha8Rng` streams to
//! keep their output reproducible.

use ndarray::Array2;
use ndarray_linalg::QR;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{DensityMatrix, UnitaryEnsemble};
use crate::linalg::adjoint;

/// Ginibre matrix: iid standard complex Gaussian entries.
pub fn random_matrix<R: Rng>(d: usize, rng: &mut R) -> Array2<Complex64> {
    Array2::from_shape_fn((d, d), |_| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed d×d unitary (QR of a Ginibre matrix with the R
/// diagonal phases absorbed, Mezzadri's recipe).
pub fn haar_unitary<R: Rng>(d: usize, rng: &mut R) -> Array2<Complex64> {
    let g = random_matrix(d, rng);
    let (mut q, r) = g.qr().expect("QR of a Ginibre matrix");
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col.mapv_inplace(|z| z * phase);
    }
    q
}

/// Random full-rank density matrix GG†/Tr(GG†).
pub fn random_density<R: Rng>(d: usize, rng: &mut R) -> DensityMatrix {
    let g = random_matrix(d, rng);
    let mut rho = g.dot(&adjoint(&g));
    let tr: Complex64 = (0..d).map(|i| rho[(i, i)]).sum();
    rho.mapv_inplace(|z| z / tr.re);
    DensityMatrix::new(rho).expect("GG†/Tr is a valid density matrix")
}

/// Random ensemble of `m` Haar unitaries with strictly positive
/// probabilities summing to one.
pub fn random_ensemble<R: Rng>(d: usize, m: usize, rng: &mut R) -> UnitaryEnsemble {
    let mut weights: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    // compensate rounding so the sum is exactly 1 in floating point
    let drift: f64 = weights.iter().sum::<f64>() - 1.0;
    weights[0] -= drift;
    let items = weights
        .into_iter()
        .map(|p| (p, haar_unitary(d, rng)))
        .collect();
    UnitaryEnsemble::new(items).expect("random ensemble is valid by construction")
}
