//! Seed-paired SFBO vs MFBO on Branin with the per-seed discount Δ and the
//! aligned regret curve.

use mfbo::acquisition::AcquisitionFamily;
use mfbo::campaign::{CampaignConfig, Mode};
use mfbo::experiments::run_scenario;
use mfbo::metrics::regret_curve;
use mfbo::problems::{SyntheticFamily, SyntheticProblem};

fn main() -> mfbo::Result<()> {
    let problem = SyntheticProblem::new(SyntheticFamily::Branin2D, 0.8, 0.1)?;
    let base = CampaignConfig::new(Mode::Mfbo, AcquisitionFamily::Ei, 25.0);
    let outcomes = run_scenario(&problem, &base, &[AcquisitionFamily::Ei], &[0, 1, 2], 2.0)?;
    for o in &outcomes {
        for (seed, c) in o.seeds.iter().zip(&o.comparisons) {
            let r = &c.report;
            println!("seed {seed}: delta {:+.3} (b_sf {:?}, b_mf {:.1}, target {:.4})", r.delta, r.b_sf, r.b_mf, r.r_star_corrected);
        }
        println!("{}: mean delta {:+.3} ± {:.3}", o.family, o.delta.mean, o.delta.std);
        for row in regret_curve(&o.comparisons)?.iter().step_by(5) {
            println!("  cost {:>5.1}: SF {:.4}  MF {:.4}", row.sf_cost, row.regret_sf_mean, row.regret_mf_mean);
        }
    }
    Ok(())
}
