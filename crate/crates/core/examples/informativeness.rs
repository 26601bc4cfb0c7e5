//! Estimates the LF informativeness R² for a range of biases, the quantity
//! the advisor compares with its threshold.

use mfbo::problems::{estimate_informativeness, r_squared_from_pairs, SyntheticFamily, SyntheticProblem};
use mfbo::rng::RngStream;

fn main() -> mfbo::Result<()> {
    for family in [SyntheticFamily::Branin2D, SyntheticFamily::Park4D] {
        for alpha in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
            let p = SyntheticProblem::new(family, alpha, 0.1)?;
            let r = estimate_informativeness(&p, 1000, &mut RngStream::new(0))?;
            println!("{family:?} α = {alpha:.1}: R² = {:.3} (slope {:.3})", r.r_squared, r.slope);
        }
    }
    let hf = [1.0, 2.0, 3.0, 4.0];
    let lf = [0.9, 2.2, 2.8, 4.1];
    println!("paired samples: R² = {:.4}", r_squared_from_pairs(&hf, &lf)?.r_squared);
    Ok(())
}
