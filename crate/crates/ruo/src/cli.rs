//! Command-line driver: a thin dispatcher over the library.
//!
//! Reports go to standard output, diagnostics to standard error.
//! Exit codes: 0 success, 1 usage, 2 parse/validation, 3 numeric
//! failure, 4 theorem-check or consistency failure.

use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::asymptotics::{asymptotic_state, classify_asymptotics, convergence_trace, root_report};
use crate::attractors::{build_attractor_space, unit_spectrum};
use crate::channel::DensityMatrix;
use crate::choi::{audit, choi_of_asymptotic, reshuffle};
use crate::error::{Error, Result};
use crate::io::report::{
    self, attractor_report, choi_entry, classification_report, convergence_report,
    spectrum_entries, AsymptoteDoc, AttractorsDoc, ChoiDoc, EnsembleHeader, EvolveDoc,
    SpectrumDoc,
};
use crate::io::verify::{verify_document, verify_exit_code, VerifyOptions};
use crate::io::{self, builtins, matrix_to_rows, EnsembleDocument};
use crate::Tolerances;

#[derive(Parser)]
#[command(
    name = "ruo",
    version,
    about = "Exact asymptotic analysis of random unitary operations",
    long_about = "Computes unit spectra, attractor spaces, asymptotic propagators, and \
                  dynamical-matrix audits for channels of the form Φ(ρ) = Σᵢ pᵢ Uᵢ ρ Uᵢ†."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    tolerances: ToleranceFlags,
}

/// Numerical thresholds, overriding both the defaults and any
/// per-document `tolerances` section.
#[derive(Args, Debug, Default)]
struct ToleranceFlags {
    /// Unit-circle membership: λ counts as |λ| = 1 when 1 − |λ| ≤ this [default 1e-9]
    #[arg(long, global = true, value_name = "TOL")]
    unit_circle_tol: Option<f64>,
    /// Clustering radius for repeated unit-modulus eigenvalues [default 1e-8]
    #[arg(long, global = true, value_name = "TOL")]
    cluster_radius: Option<f64>,
    /// Relative SVD rank cutoff for null-space solves [default: max(m,n)·ε for the toolkit, 1e-9 for attractor solves]
    #[arg(long, global = true, value_name = "TOL")]
    nullspace_tol: Option<f64>,
    /// Abort threshold on kernel-vs-commutant principal angles [default 1e-6]
    #[arg(long, global = true, value_name = "TOL")]
    structure_mismatch_tol: Option<f64>,
    /// HS-distance below which an iterated state counts as converged [default 1e-8]
    #[arg(long, global = true, value_name = "TOL")]
    convergence_threshold: Option<f64>,
    /// Largest root-of-unity order probed by the classifier [default 24]
    #[arg(long, global = true, value_name = "N")]
    max_period: Option<u32>,
    /// Snap radius for reporting eigenvalues as exact roots of unity [default 1e-8]
    #[arg(long, global = true, value_name = "TOL")]
    root_snap_tol: Option<f64>,
    /// Cap on the Hilbert space dimension d [default 64]
    #[arg(long, global = true, value_name = "D")]
    max_dim: Option<usize>,
}

impl ToleranceFlags {
    fn apply(&self, mut t: Tolerances) -> Tolerances {
        if let Some(v) = self.unit_circle_tol {
            t.unit_circle = v;
        }
        if let Some(v) = self.cluster_radius {
            t.cluster_radius = v;
        }
        if let Some(v) = self.nullspace_tol {
            t.nullspace = Some(v);
        }
        if let Some(v) = self.structure_mismatch_tol {
            t.structure_mismatch = v;
        }
        if let Some(v) = self.convergence_threshold {
            t.convergence = v;
        }
        if let Some(v) = self.max_period {
            t.max_period = v;
        }
        if let Some(v) = self.root_snap_tol {
            t.root_snap = v;
        }
        if let Some(v) = self.max_dim {
            t.max_dim = v;
        }
        t
    }
}

#[derive(Subcommand)]
enum Command {
    /// Unit spectrum σ_|1| with geometric multiplicities
    Spectrum {
        /// Ensemble JSON document
        file: PathBuf,
    },
    /// Attractor space: dimensions per eigenvalue (basis matrices with --full)
    Attractors {
        file: PathBuf,
        /// Embed the orthonormal basis matrices in the report
        #[arg(long)]
        full: bool,
    },
    /// Iterate the channel n steps and trace convergence to the closed form
    Evolve {
        file: PathBuf,
        /// Density-matrix JSON document
        #[arg(long)]
        state: PathBuf,
        /// Number of iterations
        #[arg(long)]
        steps: usize,
    },
    /// Closed-form asymptotic state ρ∞(n) (n may be negative)
    Asymptote {
        file: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        steps: i64,
    },
    /// Dynamical-matrix audit of Φ, Φⁿ (--power), or Φ_assⁿ (--asymptotic)
    Choi {
        file: PathBuf,
        /// Audit the reshuffling of Φⁿ
        #[arg(long, conflicts_with = "asymptotic")]
        power: Option<u32>,
        /// Audit the direct Σ λⁿ X ⊗ X* assembly of Φ_assⁿ
        #[arg(long, allow_hyphen_values = true)]
        asymptotic: Option<i64>,
    },
    /// Run every theorem check; exit 0 iff all pass
    Verify {
        file: PathBuf,
        /// Convergence-trace length
        #[arg(long, default_value_t = 500)]
        steps: usize,
        /// Skip a named check (reported as SKIPPED; forces exit 4 unless --allow-skip)
        #[arg(long, value_name = "CHECK")]
        skip: Vec<String>,
        /// Let skipped checks pass the exit-status gate
        #[arg(long)]
        allow_skip: bool,
        /// Embed the attractor basis matrices in the report
        #[arg(long)]
        full: bool,
    },
    /// Emit a builtin ensemble document (cnot_pair, identity,
    /// single_unitary_pauli_x, diag_irrational_phase)
    Builtin {
        name: String,
        /// Probability of the first CNOT for cnot_pair
        #[arg(long)]
        p1: Option<f64>,
        /// Hilbert space dimension for identity
        #[arg(long)]
        dim: Option<usize>,
    },
}

/// Entry point used by the binary: argv from the environment, streams
/// to the process stdout/stderr.
pub fn run_from_env() -> i32 {
    let args: Vec<String> = std::env::args().collect();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    run(&args, &mut out, &mut err)
}

/// Parse argv, dispatch, and return the process exit code.
pub fn run<W: Write, E: Write>(argv: &[String], out: &mut W, err: &mut E) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    let tols = cli.tolerances.apply(Tolerances::default());
    match dispatch(cli.command, &tols, out) {
        Ok(code) => code,
        // writing into a closed pipe (e.g. `ruo ... | head`) is not an error
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Parameter(_) => 1,
        Error::Parse(_)
        | Error::Validation(_)
        | Error::Density(_)
        | Error::UnknownBuiltin(_)
        | Error::Shape(_)
        | Error::Io(_) => 2,
        Error::Numeric(_) => 3,
        Error::Consistency(_) => 4,
    }
}

fn load_ensemble(path: &PathBuf) -> Result<EnsembleDocument> {
    let text = std::fs::read_to_string(path)?;
    io::parse_ensemble(&text)
}

fn load_state(path: &PathBuf) -> Result<DensityMatrix> {
    let text = std::fs::read_to_string(path)?;
    io::parse_state(&text)?.to_density()
}

fn emit<W: Write, T: serde::Serialize>(out: &mut W, value: &T) -> Result<i32> {
    let text = report::to_json_string(value)?;
    writeln!(out, "{text}")?;
    Ok(0)
}

fn dispatch<W: Write>(command: Command, base: &Tolerances, out: &mut W) -> Result<i32> {
    match command {
        Command::Spectrum { file } => {
            let doc = load_ensemble(&file)?;
            let tols = doc.effective_tolerances(base);
            let e = doc.to_ensemble(base)?;
            let spectrum = unit_spectrum(&e.superoperator(), &tols)?;
            emit(
                out,
                &SpectrumDoc {
                    ensemble: EnsembleHeader::of(&doc),
                    unit_spectrum: spectrum_entries(&spectrum),
                },
            )
        }
        Command::Attractors { file, full } => {
            let doc = load_ensemble(&file)?;
            let tols = doc.effective_tolerances(base);
            let e = doc.to_ensemble(base)?;
            let space = build_attractor_space(&e, &tols)?;
            let residual = space.structure_residual(&e)?;
            let classification = classify_asymptotics(&space, &tols);
            let roots = root_report(&space, &tols);
            emit(
                out,
                &AttractorsDoc {
                    ensemble: EnsembleHeader::of(&doc),
                    dim: e.dim(),
                    classification: classification_report(classification, &roots),
                    attractors: attractor_report(&space, residual, full),
                },
            )
        }
        Command::Evolve { file, state, steps } => {
            let doc = load_ensemble(&file)?;
            let tols = doc.effective_tolerances(base);
            let e = doc.to_ensemble(base)?;
            let rho0 = load_state(&state)?;
            let trace = convergence_trace(&e, &rho0, steps.max(1), &tols)?;
            let rho_n = e.iterate(&rho0, steps)?;
            emit(
                out,
                &EvolveDoc {
                    ensemble: EnsembleHeader::of(&doc),
                    steps,
                    state: matrix_to_rows(rho_n.matrix()),
                    convergence: convergence_report(&trace),
                },
            )
        }
        Command::Asymptote { file, state, steps } => {
            let doc = load_ensemble(&file)?;
            let tols = doc.effective_tolerances(base);
            let e = doc.to_ensemble(base)?;
            let rho0 = load_state(&state)?;
            let space = build_attractor_space(&e, &tols)?;
            let rho_inf = asymptotic_state(&space, &rho0, steps)?;
            emit(
                out,
                &AsymptoteDoc {
                    ensemble: EnsembleHeader::of(&doc),
                    steps,
                    state: matrix_to_rows(&rho_inf),
                },
            )
        }
        Command::Choi {
            file,
            power,
            asymptotic,
        } => {
            let doc = load_ensemble(&file)?;
            let tols = doc.effective_tolerances(base);
            let e = doc.to_ensemble(base)?;
            let (source, dm) = match (power, asymptotic) {
                (_, Some(n)) => {
                    let space = build_attractor_space(&e, &tols)?;
                    (format!("phi_ass^{n}"), choi_of_asymptotic(&space, n)?)
                }
                (Some(n), None) => (
                    format!("phi^{n}"),
                    reshuffle(&e.superoperator().matrix_power(n)),
                ),
                (None, None) => ("phi".to_string(), reshuffle(&e.superoperator())),
            };
            let a = audit(&dm)?;
            emit(
                out,
                &ChoiDoc {
                    ensemble: EnsembleHeader::of(&doc),
                    audits: std::vec![choi_entry(source, &a)],
                },
            )
        }
        Command::Verify {
            file,
            steps,
            skip,
            allow_skip,
            full,
        } => {
            let doc = load_ensemble(&file)?;
            let opts = VerifyOptions { steps, skip, full };
            let report = verify_document(&doc, base, &opts)?;
            emit(out, &report)?;
            Ok(verify_exit_code(&report, allow_skip))
        }
        Command::Builtin { name, p1, dim } => {
            let doc = builtins::builtin(&name, p1, dim)?;
            emit(out, &doc)
        }
    }
}
