//! A small ρ × α sweep on Branin, printed as a Δ table with the trend
//! correlations.

use mfbo::acquisition::AcquisitionFamily;
use mfbo::campaign::{CampaignConfig, Mode};
use mfbo::experiments::{run_sweep, SweepSpec};
use mfbo::problems::SyntheticFamily;

fn main() -> mfbo::Result<()> {
    let spec = SweepSpec {
        family: SyntheticFamily::Branin2D,
        rho_values: vec![0.05, 0.5],
        alpha_values: vec![0.0, 1.0],
        families: vec![AcquisitionFamily::Ei],
        seeds: vec![0, 1],
        campaign: CampaignConfig::new(Mode::Mfbo, AcquisitionFamily::Ei, 20.0),
        r2_samples: 500,
        master_seed: 0,
        tau: 2.0,
    };
    let grid = run_sweep(&spec)?;
    for c in &grid.cells {
        println!("rho {:<5} alpha {:<4} R2 {:.3}: delta {:+.3} ({:?})", c.rho, c.alpha, c.r_squared, c.delta_mean(), c.status);
    }
    let (vs_rho, vs_r2) = grid.trend(AcquisitionFamily::Ei);
    println!("spearman vs rho {vs_rho:?}, vs R2 {vs_r2:?}");
    Ok(())
}
