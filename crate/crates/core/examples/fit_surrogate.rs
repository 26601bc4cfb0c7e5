//! Fits the multi-fidelity GP to a handful of Branin observations and
//! prints the learned hyperparameters and a few posterior predictions.

use mfbo::problems::{Problem, SyntheticFamily, SyntheticProblem};
use mfbo::rng::RngStream;
use mfbo::space::{latin_hypercube, Fidelity};
use mfbo::surrogate::{fit, TrainingData};

fn main() -> mfbo::Result<()> {
    let problem = SyntheticProblem::new(SyntheticFamily::Branin2D, 0.8, 0.1)?;
    let space = problem.space();
    let mut rng = RngStream::new(1);
    let mut data = TrainingData::empty();
    for (n, fidelity) in [(6, Fidelity::High), (20, Fidelity::Low)] {
        for x in latin_hypercube(space, n, &mut rng)? {
            data.push(space.features(&x)?, fidelity.value(), problem.evaluate(&x, fidelity)?)?;
        }
    }

    let state = fit(&data, 8, &mut rng)?;
    let p = state.params();
    println!("length scales     {:?}", p.length_scales);
    println!("fidelity offset   {:.4}", p.fidelity_offset);
    println!("fidelity exponent {:.4}", p.fidelity_exponent);
    println!("signal variance   {:.4}", p.signal_variance);
    println!("noise variance    {:.2e}", p.noise_variance);
    println!("log marginal lik. {:.3}", state.log_marginal_likelihood());

    let probes = [vec![0.1, 0.9], vec![0.5, 0.5], vec![0.96, 0.15]];
    for (u, pair) in probes.iter().zip(state.predict_pairs(&probes)?) {
        println!(
            "u = {u:?}: HF {:.2} ± {:.2}, LF {:.2} ± {:.2}, corr {:.3}",
            pair.high.mean,
            pair.high.std(),
            pair.low.mean,
            pair.low.std(),
            pair.correlation()
        );
    }
    Ok(())
}
