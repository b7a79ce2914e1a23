//! Unit spectrum of a random unitary operation.
//!
//! Builds the two-CNOT channel, forms its 16×16 superoperator, and
//! extracts σ_|1| = {λ : |λ| = 1} with geometric multiplicities.
//!
//! ```bash
//! cargo run -p ruo --example spectrum
//! ```

use ruo::attractors::unit_spectrum;
use ruo::io::builtins;
use ruo::linalg::eig;
use ruo::Tolerances;

fn main() -> Result<(), ruo::Error> {
    let tols = Tolerances::default();
    let ensemble = builtins::cnot_pair(0.5).to_ensemble(&tols)?;
    let superop = ensemble.superoperator();

    println!("two-CNOT channel, d = {}, superoperator side = {}", ensemble.dim(), 16);
    println!();

    println!("full spectrum of S = Σ pᵢ Uᵢ ⊗ Uᵢ*:");
    for (lambda, _) in eig(superop.matrix())? {
        println!("  λ = {:+.6} {:+.6}i   |λ| = {:.6}", lambda.re, lambda.im, lambda.norm());
    }
    println!();

    let spectrum = unit_spectrum(&superop, &tols)?;
    println!("σ_|1| (clustered, with geometric multiplicities):");
    for point in &spectrum.points {
        let root = match point.nearest_root {
            Some(r) => format!("= exp(2πi·{}/{})", r.numerator, r.denominator),
            None => "not near a low-order root of unity".to_string(),
        };
        println!(
            "  λ = {:+.3} {:+.3}i   multiplicity {}   {}",
            point.value.re, point.value.im, point.multiplicity, root
        );
    }
    println!();
    println!(
        "attractor space dimension: {}",
        spectrum.total_multiplicity()
    );
    Ok(())
}
