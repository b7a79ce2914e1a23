//! The `verify` pipeline: run every theorem audit and cross-module
//! oracle against one ensemble and collect the verdicts.
//!
//! Randomized probes (contraction, trace preservation, the positivity
//! functional, the convergence witness state) draw from a fixed-seed
//! ChaCha stream, so identical input documents produce byte-identical
//! reports.

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::{
    asymptotic_propagator, attractor_projector, classify_asymptotics, convergence_trace,
    root_report,
};
use crate::attractors::{
    build_attractor_space, check_closure, check_diagonalizability, check_orthonormality,
    check_trace_property, check_unitality_resolution, commutant_basis, kernel_basis,
    unit_spectrum,
};
use crate::choi::{audit, choi_of_asymptotic, positivity_functional, reshuffle};
use crate::error::{Error, Result};
use crate::io::report::{
    attractor_report, choi_entry, classification_report, convergence_report, spectrum_entries,
    AnalysisReport, CheckResult, ChoiEntry, EnsembleHeader,
};
use crate::io::EnsembleDocument;
use crate::linalg::{adjoint, eig, fro_norm, hs_norm, principal_angles};
use crate::sample;
use crate::Tolerances;

/// Fixed seed for the randomized probes (determinism contract).
const VERIFY_SEED: u64 = 0x52554f;

/// Every check name `verify` can run or skip.
pub const CHECK_NAMES: [&str; 21] = [
    "superoperator-unitality",
    "superoperator-norm-bound",
    "eigenvalue-modulus-bound",
    "contraction",
    "trace-preservation",
    "structure-theorem",
    "structure-residual",
    "trace-property",
    "diagonalizability",
    "orthonormality",
    "unitality-resolution",
    "probability-independence",
    "projector-idempotent",
    "projector-hermitian",
    "projector-commutes",
    "propagator-semigroup",
    "propagator-inverse",
    "closure",
    "positivity-inequality",
    "choi-audit",
    "convergence",
];

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Convergence-trace length.
    pub steps: usize,
    /// Check names to skip (reported as SKIPPED, never silently absent).
    pub skip: Vec<String>,
    /// Embed the attractor basis matrices in the report.
    pub full: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            steps: 500,
            skip: Vec::new(),
            full: false,
        }
    }
}

struct Runner {
    skip: Vec<String>,
    checks: Vec<CheckResult>,
}

impl Runner {
    fn run(&mut self, name: &str, f: impl FnOnce() -> Result<CheckResult>) -> Result<()> {
        if self.skip.iter().any(|s| s == name) {
            self.checks
                .push(CheckResult::skipped(name, "skipped by flag"));
            return Ok(());
        }
        self.checks.push(f()?);
        Ok(())
    }
}

/// Run the full verification suite on one ensemble document.
pub fn verify_document(
    doc: &EnsembleDocument,
    base: &Tolerances,
    opts: &VerifyOptions,
) -> Result<AnalysisReport> {
    for name in &opts.skip {
        if !CHECK_NAMES.contains(&name.as_str()) {
            return Err(Error::Parameter(format!(
                "unknown check `{name}`; valid names: {}",
                CHECK_NAMES.join(", ")
            )));
        }
    }
    let tols = doc.effective_tolerances(base);
    let e = doc.to_ensemble(base)?;
    let s = e.superoperator();
    let spectrum = unit_spectrum(&s, &tols)?;
    let space = build_attractor_space(&e, &tols)?;
    let d = e.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(VERIFY_SEED);

    let mut runner = Runner {
        skip: opts.skip.clone(),
        checks: Vec::new(),
    };

    runner.run("superoperator-unitality", || {
        let (unitality, _) = s.validate()?;
        Ok(CheckResult::from_residual(
            "superoperator-unitality",
            unitality,
            1e-10,
        ))
    })?;

    runner.run("superoperator-norm-bound", || {
        let (_, excess) = s.validate()?;
        Ok(CheckResult::from_residual(
            "superoperator-norm-bound",
            excess,
            1e-10,
        ))
    })?;

    runner.run("eigenvalue-modulus-bound", || {
        let worst = eig(s.matrix())?
            .iter()
            .map(|(l, _)| l.norm() - 1.0)
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0);
        Ok(CheckResult::from_residual(
            "eigenvalue-modulus-bound",
            worst,
            1e-10,
        ))
    })?;

    runner.run("contraction", || {
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let a = sample::random_matrix(d, &mut rng);
            let excess = hs_norm(&e.apply(&a)?)? - hs_norm(&a)?;
            worst = worst.max(excess);
        }
        Ok(CheckResult::from_residual("contraction", worst, 1e-12))
    })?;

    runner.run("trace-preservation", || {
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let a = sample::random_matrix(d, &mut rng);
            let tr_in: Complex64 = a.diag().sum();
            let tr_out: Complex64 = e.apply(&a)?.diag().sum();
            worst = worst.max((tr_in - tr_out).norm());
        }
        Ok(CheckResult::from_residual("trace-preservation", worst, 1e-12))
    })?;

    runner.run("structure-theorem", || {
        let mut worst = 0.0f64;
        let mut detail = Vec::new();
        for point in &spectrum.points {
            let kb = kernel_basis(&s, point.value, &tols)?;
            let cb = commutant_basis(&e, point.value, &tols)?;
            if kb.len() != cb.len() {
                return Ok(CheckResult::from_residual("structure-theorem", 1.0, 1e-7)
                    .with_detail(format!(
                        "dimension mismatch at λ = {}: kernel {}, commutant {}",
                        point.value,
                        kb.len(),
                        cb.len()
                    )));
            }
            let angle = principal_angles(&kb, &cb)?
                .last()
                .copied()
                .unwrap_or(0.0);
            worst = worst.max(angle);
            detail.push(format!("λ = {}: angle {angle:.3e}", point.value));
        }
        Ok(CheckResult::from_residual("structure-theorem", worst, 1e-7)
            .with_detail(detail.join("; ")))
    })?;

    runner.run("structure-residual", || {
        Ok(CheckResult::from_residual(
            "structure-residual",
            space.structure_residual(&e)?,
            1e-8,
        ))
    })?;

    runner.run("trace-property", || {
        let r = check_trace_property(&space);
        Ok(CheckResult::from_residual(
            "trace-property",
            r.residual,
            r.threshold,
        ))
    })?;

    runner.run("diagonalizability", || {
        let (r, pairs) = check_diagonalizability(&s, &spectrum, &tols)?;
        let detail = pairs
            .iter()
            .map(|p| {
                format!(
                    "λ = {}: rank(S−λI) = {}, rank((S−λI)²) = {}",
                    p.lambda, p.rank_first, p.rank_second
                )
            })
            .collect::<Vec<_>>()
            .join("; ");
        let worst_diff = pairs
            .iter()
            .map(|p| p.rank_second.abs_diff(p.rank_first) as f64)
            .fold(0.0f64, f64::max);
        let mut check = CheckResult::from_residual("diagonalizability", worst_diff, 0.0);
        check.detail = Some(detail);
        if !r.pass {
            check.status = super::report::CheckStatus::Fail;
        }
        Ok(check)
    })?;

    runner.run("orthonormality", || {
        let r = check_orthonormality(&space)?;
        Ok(CheckResult::from_residual(
            "orthonormality",
            r.residual,
            r.threshold,
        ))
    })?;

    runner.run("unitality-resolution", || {
        let r = check_unitality_resolution(&space)?;
        Ok(CheckResult::from_residual(
            "unitality-resolution",
            r.residual,
            r.threshold,
        ))
    })?;

    runner.run("probability-independence", || {
        if e.len() < 2 {
            return Ok(CheckResult::pass("probability-independence", 0.0, 1e-7)
                .with_detail("single-member ensemble: nothing to vary".into()));
        }
        let uniform = std::vec![1.0 / e.len() as f64; e.len()];
        let mut skewed: Vec<f64> = (1..=e.len()).map(|k| k as f64).collect();
        let total: f64 = skewed.iter().sum();
        for w in &mut skewed {
            *w /= total;
        }
        let mut worst = 0.0f64;
        let reference: Vec<Array2<Complex64>> =
            space.elements().map(|(_, x)| x.clone()).collect();
        for probs in [uniform, skewed] {
            let other = build_attractor_space(&e.with_probabilities(&probs)?, &tols)?;
            let basis: Vec<Array2<Complex64>> =
                other.elements().map(|(_, x)| x.clone()).collect();
            if basis.len() != reference.len() {
                return Ok(CheckResult::from_residual(
                    "probability-independence",
                    1.0,
                    1e-7,
                )
                .with_detail(format!(
                    "dimension changed: {} vs {}",
                    reference.len(),
                    basis.len()
                )));
            }
            let angle = principal_angles(&reference, &basis)?
                .last()
                .copied()
                .unwrap_or(0.0);
            worst = worst.max(angle);
        }
        Ok(CheckResult::from_residual(
            "probability-independence",
            worst,
            1e-7,
        ))
    })?;

    let projector = attractor_projector(&space)?;

    runner.run("projector-idempotent", || {
        let p2 = projector.matrix().dot(projector.matrix());
        Ok(CheckResult::from_residual(
            "projector-idempotent",
            fro_norm(&(&p2 - projector.matrix())),
            1e-10,
        ))
    })?;

    runner.run("projector-hermitian", || {
        Ok(CheckResult::from_residual(
            "projector-hermitian",
            fro_norm(&(projector.matrix() - &adjoint(projector.matrix()))),
            1e-10,
        ))
    })?;

    runner.run("projector-commutes", || {
        let sp = s.matrix().dot(projector.matrix());
        let ps = projector.matrix().dot(s.matrix());
        Ok(CheckResult::from_residual(
            "projector-commutes",
            fro_norm(&(&sp - &ps)),
            1e-10,
        ))
    })?;

    runner.run("propagator-semigroup", || {
        let mut worst = 0.0f64;
        for (a, b) in [(-2i64, 1i64), (0, 2), (1, 1), (3, -1)] {
            let lhs = asymptotic_propagator(&space, a)?
                .matrix()
                .dot(asymptotic_propagator(&space, b)?.matrix());
            let rhs = asymptotic_propagator(&space, a + b)?;
            worst = worst.max(fro_norm(&(&lhs - rhs.matrix())));
        }
        Ok(CheckResult::from_residual(
            "propagator-semigroup",
            worst,
            1e-10,
        ))
    })?;

    runner.run("propagator-inverse", || {
        let fwd = asymptotic_propagator(&space, 1)?;
        let back = asymptotic_propagator(&space, -1)?;
        let composed = back.matrix().dot(fwd.matrix());
        Ok(CheckResult::from_residual(
            "propagator-inverse",
            fro_norm(&(&composed - projector.matrix())),
            1e-10,
        ))
    })?;

    runner.run("closure", || {
        let r = check_closure(&space)?;
        Ok(CheckResult::from_residual("closure", r.residual, r.threshold))
    })?;

    runner.run("positivity-inequality", || {
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let a = sample::random_matrix(d, &mut rng);
            let val = positivity_functional(&space, &a)?;
            worst = worst.max((-val.re).max(val.im.abs()));
        }
        Ok(CheckResult::from_residual(
            "positivity-inequality",
            worst.max(0.0),
            1e-9,
        ))
    })?;

    // audited dynamical matrices: Φ, Φ⁵, Φ_assⁿ for n ∈ {−2,…,2}, and the
    // dual-route agreement between the two Φ_ass constructions
    let mut choi_entries: Vec<ChoiEntry> = Vec::new();
    let mut choi_ok = true;
    let mut dual_route_worst = 0.0f64;
    if !opts.skip.iter().any(|s| s == "choi-audit") {
        for (source, sup) in [
            ("phi".to_string(), s.clone()),
            ("phi^5".to_string(), s.matrix_power(5)),
        ] {
            let a = audit(&reshuffle(&sup))?;
            choi_ok &= a.passes();
            choi_entries.push(choi_entry(source, &a));
        }
        // every Φ_assⁿ, the n = 0 projector included, is unital,
        // trace-preserving, and completely positive
        for n in [-2i64, -1, 0, 1, 2] {
            let direct = choi_of_asymptotic(&space, n)?;
            let via = reshuffle(&asymptotic_propagator(&space, n)?);
            dual_route_worst =
                dual_route_worst.max(fro_norm(&(direct.matrix() - via.matrix())));
            let a = audit(&direct)?;
            choi_ok &= a.passes();
            choi_entries.push(choi_entry(format!("phi_ass^{n}"), &a));
        }
    }

    runner.run("choi-audit", || {
        let mut check = CheckResult::from_residual("choi-audit", dual_route_worst, 1e-10);
        if !choi_ok {
            check.status = super::report::CheckStatus::Fail;
        }
        check.detail = Some(format!(
            "{} dynamical matrices audited; dual-route residual {dual_route_worst:.3e}",
            choi_entries.len()
        ));
        Ok(check)
    })?;

    let mut convergence = None;
    runner.run("convergence", || {
        let rho0 = sample::random_density(d, &mut rng);
        let trace = convergence_trace(&e, &rho0, opts.steps, &tols)?;
        let last = trace.distances.last().map(|(_, v)| *v).unwrap_or(f64::NAN);
        let check = CheckResult::from_residual("convergence", last, tols.convergence)
            .with_detail(format!(
                "subdominant modulus {:.6}; {} steps",
                trace.subdominant_modulus, opts.steps
            ));
        convergence = Some(convergence_report(&trace));
        Ok(check)
    })?;

    let classification = classify_asymptotics(&space, &tols);
    let roots = root_report(&space, &tols);
    let structure_residual = space.structure_residual(&e)?;
    let all_checks_passed = runner.checks.iter().all(|c| c.passed());

    Ok(AnalysisReport {
        ensemble: EnsembleHeader::of(doc),
        unit_spectrum: spectrum_entries(&spectrum),
        attractors: attractor_report(&space, structure_residual, opts.full),
        classification: classification_report(classification, &roots),
        checks: runner.checks,
        convergence,
        choi: choi_entries,
        all_checks_passed,
    })
}

/// Exit status implied by a verify report: 0 when everything passed,
/// 4 when any check failed or was skipped without `allow_skip`.
pub fn verify_exit_code(report: &AnalysisReport, allow_skip: bool) -> i32 {
    let failed = report
        .checks
        .iter()
        .any(|c| !c.passed() && !c.is_skipped());
    let skipped = report.checks.iter().any(|c| c.is_skipped());
    if failed || (skipped && !allow_skip) {
        4
    } else {
        0
    }
}
