//! Evaluates the Branin and Park benchmarks at both fidelities and shows
//! how the bias parameter α moves the low-fidelity surface.

use mfbo::problems::{branin, park, SyntheticFamily, SyntheticProblem, Problem};
use mfbo::space::Fidelity;

fn main() -> mfbo::Result<()> {
    let x = [std::f64::consts::PI, 2.275];
    println!("Branin HF at (π, 2.275): {:.5}", branin(&x, Fidelity::High, 1.0)?);
    for alpha in [0.0, 0.5, 1.0] {
        println!("Branin LF, α = {alpha}: {:.5}", branin(&x, Fidelity::Low, alpha)?);
    }

    let y = [0.5, 0.5, 0.5, 0.5];
    println!("Park HF at 0.5·1: {:.5}", park(&y, Fidelity::High, 1.0)?);
    for alpha in [0.0, 0.5, 1.0] {
        println!("Park LF, α = {alpha}: {:.5}", park(&y, Fidelity::Low, alpha)?);
    }

    // The problem wrappers negate so the toolkit always maximizes.
    for family in [SyntheticFamily::Branin2D, SyntheticFamily::Park4D] {
        let p = SyntheticProblem::new(family, 0.5, 0.1)?;
        println!("{}: optimum (maximization) {:.5}, LF cost {}", p.name(), p.optimum(), p.fidelity_model().cost(Fidelity::Low));
    }
    Ok(())
}
