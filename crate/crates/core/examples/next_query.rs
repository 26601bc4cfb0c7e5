//! Proposes the next (x, fidelity) with each acquisition family, in single-
//! and multi-fidelity mode, from the same surrogate.

use mfbo::acquisition::{next_query, AcquisitionFamily, AcquisitionSpec, FidelityMode};
use mfbo::problems::{Problem, SyntheticFamily, SyntheticProblem};
use mfbo::rng::RngStream;
use mfbo::space::{latin_hypercube, Fidelity, Observation};
use mfbo::surrogate::{fit, TrainingData};

fn main() -> mfbo::Result<()> {
    let problem = SyntheticProblem::new(SyntheticFamily::Branin2D, 0.8, 0.1)?;
    let space = problem.space();
    let model = problem.fidelity_model();
    let mut rng = RngStream::new(7);
    let mut data = TrainingData::empty();
    let mut observations = Vec::new();
    for (n, fidelity) in [(4, Fidelity::High), (15, Fidelity::Low)] {
        for x in latin_hypercube(space, n, &mut rng)? {
            let y = problem.evaluate(&x, fidelity)?;
            data.push(space.features(&x)?, fidelity.value(), y)?;
            observations.push(Observation {
                x,
                fidelity,
                y,
                cost: model.cost(fidelity),
            });
        }
    }
    let state = fit(&data, 8, &mut rng)?;

    for mode in [FidelityMode::SingleFidelity, FidelityMode::MultiFidelity] {
        for family in [AcquisitionFamily::Ei, AcquisitionFamily::Mes] {
            let spec = AcquisitionSpec::new(family, mode);
            let d = next_query(&state, space, model, &spec, &observations, &Fidelity::ALL, &mut RngStream::new(0))?;
            println!(
                "{mode:?} {family}: x = {:?}, fidelity {:?}, raw {:.4}, per cost {:.4}",
                d.x, d.fidelity, d.raw_value, d.acquisition_value
            );
        }
    }
    Ok(())
}
