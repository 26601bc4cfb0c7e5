//! Loads the bundled 200-row candidate table and runs MFBO on it.
//!
//! cargo run --example tabular -- data/synthetic_200.csv

use mfbo::acquisition::AcquisitionFamily;
use mfbo::campaign::{run_campaign, CampaignConfig, Mode};
use mfbo::problems::{load_tabular, Problem, TabularOptions};
use mfbo::space::{DesignPoint, Fidelity, SearchSpace};

fn main() -> mfbo::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "data/synthetic_200.csv".into());
    let table = load_tabular(&path, &TabularOptions::default(), 0.1)?;
    println!("{} candidates, optimum {:.4} at row {}", table.len(), table.optimum(), table.argmax());

    let config = CampaignConfig::new(Mode::Mfbo, AcquisitionFamily::Ei, 30.0);
    let r = run_campaign(&table, &config, 0)?;
    let best = r
        .trace
        .observations()
        .iter()
        .filter(|o| o.fidelity == Fidelity::High)
        .max_by(|a, b| a.y.total_cmp(&b.y))
        .and_then(|o| match (&o.x, table.space()) {
            (DesignPoint::Candidate(i), SearchSpace::Discrete(s)) => Some(s.candidates()[*i].id.clone()),
            _ => None,
        });
    println!("best {:.4} ({best:?}), HF share {:?}", r.best_hf_value, r.hf_query_fraction());
    Ok(())
}
