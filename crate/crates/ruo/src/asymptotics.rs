//! Asymptotic dynamics: the diagonal propagator on the attractor space,
//! closed-form trajectories, convergence measurement, and regime
//! classification.
//!
//! With an orthonormal attractor basis {X_{λ,i}} the asymptotic
//! propagator and trajectory are exactly diagonal,
//!
//!   Φ_assⁿ(·) = Σ λⁿ Tr{(·) X_{λ,i}†} X_{λ,i},
//!   ρ∞(n)     = Σ λⁿ Tr{ρ(0) X_{λ,i}†} X_{λ,i},
//!
//! valid for any integer n, negative included (every λ has modulus 1).
//! Iterating the channel converges to this closed form; the distance
//! ‖ρ(n) − ρ∞(n)‖ decays with the subdominant eigenvalue modulus.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::attractors::{AttractorSpace, RootOfUnity};
use crate::channel::{DensityMatrix, Superoperator, UnitaryEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{eig, hs_inner, vec, vec_norm};
use crate::Tolerances;

/// λⁿ for unit-modulus λ and any integer n, including negative.
fn unit_power(lambda: Complex64, n: i64) -> Complex64 {
    Complex64::from_polar(1.0, n as f64 * lambda.arg())
}

fn outer_accumulate(acc: &mut Array2<Complex64>, scale: Complex64, v: &Array1<Complex64>) {
    let n = v.len();
    for i in 0..n {
        let left = scale * v[i];
        for j in 0..n {
            acc[(i, j)] += left * v[j].conj();
        }
    }
}

/// The projector 𝒫(·) = Σ Tr{X_{λ,i}†(·)} X_{λ,i} onto the attractor
/// space, in superoperator form: idempotent, hermitian, rank equal to
/// the total attractor dimension.
pub fn attractor_projector(space: &AttractorSpace) -> Result<Superoperator> {
    asymptotic_propagator(space, 0)
}

/// The closed-form power Φ_assⁿ = Σ λⁿ vec(X)·vec(X)† for any n ∈ ℤ;
/// n = 0 gives the projector 𝒫.
pub fn asymptotic_propagator(space: &AttractorSpace, n: i64) -> Result<Superoperator> {
    let d2 = space.dim() * space.dim();
    let mut m = Array2::<Complex64>::zeros((d2, d2));
    for (lambda, x) in space.elements() {
        let v = vec(x)?;
        outer_accumulate(&mut m, unit_power(lambda, n), &v);
    }
    Superoperator::from_matrix(m)
}

/// Closed-form trajectory ρ∞(n) = Σ λⁿ Tr{ρ(0) X_{λ,i}†} X_{λ,i}.
///
/// Hermitian and unit-trace for every valid input: the attractor set is
/// closed under adjoints with conjugated eigenvalue, so the sum pairs up
/// into hermitian combinations.
pub fn asymptotic_state(
    space: &AttractorSpace,
    rho0: &DensityMatrix,
    n: i64,
) -> Result<Array2<Complex64>> {
    if rho0.dim() != space.dim() {
        return Err(Error::Shape(format!(
            "state dimension {} does not match attractor space dimension {}",
            rho0.dim(),
            space.dim()
        )));
    }
    let d = space.dim();
    let mut out = Array2::<Complex64>::zeros((d, d));
    for (lambda, x) in space.elements() {
        // Tr{ρ(0) X†} = (X, ρ(0))_HS
        let coeff = hs_inner(x, rho0.matrix())?;
        let scale = unit_power(lambda, n) * coeff;
        out = &out + &x.mapv(|z| z * scale);
    }
    Ok(out)
}

/// Asymptotic regime of the propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// σ_|1| = {1}: every attractor is a fixed point.
    Stationary,
    /// Every λ is a T-th root of unity; T is minimal.
    Periodic { period: u32 },
    /// Some λ is not near any root of unity of bounded order.
    Aperiodic,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::Stationary => write!(f, "STATIONARY"),
            Classification::Periodic { period } => write!(f, "PERIODIC(T={period})"),
            Classification::Aperiodic => write!(f, "APERIODIC"),
        }
    }
}

/// Classify the asymptotic propagator: stationary when σ_|1| = {1},
/// periodic with minimal T ≤ `tols.max_period` when every λ is within
/// `tols.root_snap` of a T-th root of unity, aperiodic otherwise.
pub fn classify_asymptotics(space: &AttractorSpace, tols: &Tolerances) -> Classification {
    let lambdas: Vec<Complex64> = space.blocks().iter().map(|b| b.lambda).collect();
    let one = Complex64::new(1.0, 0.0);
    if lambdas.iter().all(|l| (l - one).norm() <= tols.root_snap) {
        return Classification::Stationary;
    }
    for period in 1..=tols.max_period {
        let all_roots = lambdas
            .iter()
            .all(|l| (unit_power(*l, period as i64) - one).norm() <= tols.root_snap);
        if all_roots {
            return Classification::Periodic { period };
        }
    }
    Classification::Aperiodic
}

/// Snap-to-root report for the spectrum of a space: (λ, nearest root).
pub fn root_report(
    space: &AttractorSpace,
    tols: &Tolerances,
) -> Vec<(Complex64, Option<RootOfUnity>)> {
    space
        .blocks()
        .iter()
        .map(|b| {
            (
                b.lambda,
                crate::attractors::nearest_root_of_unity(b.lambda, tols.max_period, tols.root_snap),
            )
        })
        .collect()
}

/// Distance record of an iterated state against the closed form.
#[derive(Debug, Clone)]
pub struct ConvergenceTrace {
    /// (n, ‖ρ(n) − ρ∞(n)‖_HS) for n = 0..=n_max.
    pub distances: Vec<(usize, f64)>,
    /// Exponential rate μ from a least-squares fit of log distances over
    /// the final two-thirds of the decaying segment; present only when
    /// the tail is log-linear (R² ≥ 0.99).
    pub fitted_rate: Option<f64>,
    /// R² of the fit behind `fitted_rate` (present whenever a fit was
    /// attempted, even a rejected one).
    pub fit_r_squared: Option<f64>,
    /// max{|λ| : λ ∈ spec(S), |λ| < 1 − tol} — the decay-rate proxy.
    pub subdominant_modulus: f64,
    /// The convergence threshold the trace was held to.
    pub threshold: f64,
    /// Whether the final distance is below the threshold.
    pub converged: bool,
}

/// Iterate Φ against the closed form and record distances.
pub fn convergence_trace(
    e: &UnitaryEnsemble,
    rho0: &DensityMatrix,
    n_max: usize,
    tols: &Tolerances,
) -> Result<ConvergenceTrace> {
    if n_max < 1 {
        return Err(Error::Parameter("n_max must be at least 1".into()));
    }
    let space = crate::attractors::build_attractor_space(e, tols)?;
    let s = e.superoperator();
    let subdominant = eig(s.matrix())?
        .iter()
        .map(|(l, _)| l.norm())
        .filter(|m| *m < 1.0 - tols.unit_circle)
        .fold(0.0f64, f64::max);

    let mut distances = Vec::with_capacity(n_max + 1);
    let mut rho = rho0.matrix().clone();
    for n in 0..=n_max {
        if n > 0 {
            rho = e.apply(&rho)?;
        }
        let closed = asymptotic_state(&space, rho0, n as i64)?;
        let diff = &rho - &closed;
        distances.push((n, vec_norm(&vec(&diff)?)));
    }

    let (fitted_rate, fit_r_squared) = fit_tail_rate(&distances);
    let converged = distances.last().map(|(_, d)| *d <= tols.convergence) == Some(true);
    Ok(ConvergenceTrace {
        distances,
        fitted_rate,
        fit_r_squared,
        subdominant_modulus: subdominant,
        threshold: tols.convergence,
        converged,
    })
}

/// Least-squares fit of log d(n) over the final two-thirds of the
/// decaying segment (entries below the rounding floor are excluded).
/// Returns a rate only when the tail is log-linear with R² ≥ 0.99.
fn fit_tail_rate(distances: &[(usize, f64)]) -> (Option<f64>, Option<f64>) {
    const FLOOR: f64 = 1e-14;
    let decaying: Vec<(f64, f64)> = distances
        .iter()
        .take_while(|(n, d)| *n == 0 || *d > FLOOR)
        .filter(|(_, d)| *d > FLOOR)
        .map(|(n, d)| (*n as f64, d.ln()))
        .collect();
    if decaying.len() < 4 {
        return (None, None);
    }
    let tail = &decaying[decaying.len() / 3..];
    let n = tail.len() as f64;
    let sx: f64 = tail.iter().map(|(x, _)| x).sum();
    let sy: f64 = tail.iter().map(|(_, y)| y).sum();
    let sxx: f64 = tail.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = tail.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return (None, None);
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = tail.iter().map(|(_, y)| (y - mean_y).powi(2)).sum();
    let ss_res: f64 = tail
        .iter()
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    if ss_tot <= 0.0 {
        return (None, None);
    }
    let r2 = 1.0 - ss_res / ss_tot;
    if r2 >= 0.99 {
        (Some(slope.exp()), Some(r2))
    } else {
        (None, Some(r2))
    }
}
