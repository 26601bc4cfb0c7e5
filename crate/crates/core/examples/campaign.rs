//! Runs one SFBO and one MFBO campaign on Branin and prints their traces'
//! headline numbers.

use mfbo::acquisition::AcquisitionFamily;
use mfbo::campaign::{run_campaign, CampaignConfig, Mode};
use mfbo::problems::{Problem, SyntheticFamily, SyntheticProblem};

fn main() -> mfbo::Result<()> {
    let problem = SyntheticProblem::new(SyntheticFamily::Branin2D, 0.8, 0.1)?;
    for mode in [Mode::Sfbo, Mode::Mfbo] {
        let config = CampaignConfig::new(mode, AcquisitionFamily::Ei, 20.0);
        let r = run_campaign(&problem, &config, 0)?;
        println!(
            "{mode}: {} queries ({} initial), cost {:.1}, best {:.4}, regret {:.4}, HF share {:?}",
            r.trace.len(),
            r.trace.initial_count(),
            r.total_cost_spent,
            r.best_hf_value,
            problem.optimum() - r.best_hf_value,
            r.hf_query_fraction()
        );
    }
    Ok(())
}
