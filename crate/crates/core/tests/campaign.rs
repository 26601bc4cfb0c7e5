use mfbo::acquisition::AcquisitionFamily;
use mfbo::campaign::{initial_counts, run_campaign, run_suite, CampaignConfig, Mode, TerminationReason};
use mfbo::experiments::{run_sweep, CellStatus, SweepSpec};
use mfbo::io::{read_heatmap, read_trace, write_heatmap, write_trace, HeatmapRow};
use mfbo::problems::{SyntheticFamily, SyntheticProblem, TabularProblem};
use mfbo::space::{Candidate, Fidelity, COST_EPS};
use mfbo::Error;

fn small(mode: Mode, family: AcquisitionFamily, budget: f64) -> CampaignConfig {
    CampaignConfig {
        restarts: 2,
        candidate_grid_size: 256,
        mes_max_samples: 8,
        ..CampaignConfig::new(mode, family, budget)
    }
}

fn three_candidates() -> TabularProblem {
    let candidates = ["a", "b", "c"]
        .iter()
        .zip([0.0, 0.5, 1.0])
        .map(|(id, f)| Candidate {
            id: id.to_string(),
            features: vec![f],
        })
        .collect();
    TabularProblem::new("three", candidates, vec![0.1, 0.9, 0.4], vec![0.2, 0.7, 0.3], 0.1).unwrap()
}

#[test]
fn initial_design_matches_the_budget_split() {
    let sf = CampaignConfig::new(Mode::Sfbo, AcquisitionFamily::Ei, 50.0);
    assert_eq!(initial_counts(&sf, 0.1), (5, 0));
    let mf = CampaignConfig::new(Mode::Mfbo, AcquisitionFamily::Ei, 50.0);
    assert_eq!(initial_counts(&mf, 0.1), (2, 25));
    assert_eq!(initial_counts(&mf, 0.5), (2, 5));
}

#[test]
fn sfbo_spends_the_whole_budget_on_high_fidelity() {
    let problem = SyntheticProblem::new(SyntheticFamily::Branin2D, 0.8, 0.1).unwrap();
    let r = run_campaign(&problem, &small(Mode::Sfbo, AcquisitionFamily::Ei, 12.0), 3).unwrap();
    assert_eq!(r.trace.len(), 12);
    assert_eq!(r.trace.initial_count(), 2);
    assert!(r.trace.observations().iter().all(|o| o.fidelity == Fidelity::High));
    assert_eq!(r.terminated_reason, TerminationReason::BudgetExhausted);
    assert!((r.total_cost_spent - 12.0).abs() < 1e-9);
}

#[test]
fn mfbo_never_overspends() {
    let problem = SyntheticProblem::new(SyntheticFamily::Branin2D, 0.8, 0.3).unwrap();
    for family in [AcquisitionFamily::Ei, AcquisitionFamily::Mes] {
        for seed in 0..3 {
            let r = run_campaign(&problem, &small(Mode::Mfbo, family, 10.0), seed).unwrap();
            assert!(r.total_cost_spent <= 10.0 + COST_EPS, "{family} seed {seed}: {}", r.total_cost_spent);
            // Stops only once not even a low-fidelity query fits.
            assert!(10.0 - r.total_cost_spent < 0.3 + COST_EPS);
            let costs = r.trace.cumulative_costs();
            assert!(costs.windows(2).all(|w| w[1] > w[0]));
        }
    }
}

#[test]
fn discrete_space_exhausts_before_the_budget() {
    let problem = three_candidates();
    let mut config = small(Mode::Sfbo, AcquisitionFamily::Ei, 10.0);
    config.init_fraction = 0.2;
    let r = run_campaign(&problem, &config, 0).unwrap();
    assert_eq!(r.trace.len(), 3);
    assert_eq!(r.terminated_reason, TerminationReason::SpaceExhausted);
    assert!((r.best_hf_value - 0.9).abs() < 1e-12);
}

#[test]
fn budget_smaller_than_initial_design_is_a_config_error() {
    let problem = SyntheticProblem::new(SyntheticFamily::Branin2D, 0.8, 0.1).unwrap();
    let config = small(Mode::Sfbo, AcquisitionFamily::Ei, 1.0);
    match run_campaign(&problem, &config, 0) {
        Err(Error::InvalidConfig { field, .. }) => assert_eq!(field, "total_budget"),
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn suite_runs_every_seed_and_rejects_an_empty_list() {
    let problem = three_candidates();
    let mut config = small(Mode::Sfbo, AcquisitionFamily::Ei, 10.0);
    config.init_fraction = 0.2;
    assert!(run_suite(&problem, &config, &[]).is_err());
    let seeds: Vec<u64> = (0..20).collect();
    let results = run_suite(&problem, &config, &seeds).unwrap();
    assert_eq!(results.len(), 20);
    for (r, &seed) in results.iter().zip(&seeds) {
        assert_eq!(r.as_ref().unwrap().trace.seed(), seed);
    }
}

fn tiny_sweep(rho: Vec<f64>, alpha: Vec<f64>) -> SweepSpec {
    SweepSpec {
        family: SyntheticFamily::Branin2D,
        rho_values: rho,
        alpha_values: alpha,
        families: vec![AcquisitionFamily::Ei],
        seeds: vec![0, 1],
        campaign: small(Mode::Mfbo, AcquisitionFamily::Ei, 10.0),
        r2_samples: 200,
        master_seed: 0,
        tau: 2.0,
    }
}

#[test]
fn sweep_flags_an_invalid_cell_and_completes_the_rest() {
    let grid = run_sweep(&tiny_sweep(vec![0.2, 1.5], vec![0.5])).unwrap();
    assert_eq!(grid.cells.len(), 2);
    let ok = grid.cells.iter().find(|c| c.rho == 0.2).unwrap();
    assert_eq!(ok.status, CellStatus::Ok);
    assert_eq!(ok.deltas.len(), 2);
    let bad = grid.cells.iter().find(|c| c.rho == 1.5).unwrap();
    assert!(matches!(bad.status, CellStatus::Failed(_)));
}

#[test]
fn sweep_grid_shape_and_determinism() {
    let spec = tiny_sweep(vec![0.1, 0.3], vec![0.2, 0.8]);
    let a = run_sweep(&spec).unwrap();
    assert_eq!(a.cells.len(), 4);
    assert!(a.cells.iter().all(|c| c.deltas.len() == 2 && c.status == CellStatus::Ok));
    let b = run_sweep(&spec).unwrap();
    let rows = |g: &mfbo::experiments::SweepGrid| g.cells.iter().map(HeatmapRow::from).collect::<Vec<_>>();
    assert_eq!(rows(&a), rows(&b));
}

#[test]
fn trace_csv_round_trips() {
    let problem = SyntheticProblem::new(SyntheticFamily::Branin2D, 0.8, 0.1).unwrap();
    let r = run_campaign(&problem, &small(Mode::Mfbo, AcquisitionFamily::Ei, 6.0), 11).unwrap();
    let mut buf = Vec::new();
    write_trace(&mut buf, &r.trace).unwrap();
    let back = read_trace(buf.as_slice(), 11).unwrap();
    assert_eq!(back, r.trace);

    let table = three_candidates();
    let mut config = small(Mode::Mfbo, AcquisitionFamily::Ei, 3.0);
    config.init_fraction = 0.5;
    let r = run_campaign(&table, &config, 2).unwrap();
    let mut buf = Vec::new();
    write_trace(&mut buf, &r.trace).unwrap();
    assert_eq!(read_trace(buf.as_slice(), 2).unwrap(), r.trace);
}

#[test]
fn tampered_cumulative_cost_is_rejected() {
    let problem = three_candidates();
    let mut config = small(Mode::Sfbo, AcquisitionFamily::Ei, 10.0);
    config.init_fraction = 0.2;
    let r = run_campaign(&problem, &config, 0).unwrap();
    let mut buf = Vec::new();
    write_trace(&mut buf, &r.trace).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let header: Vec<&str> = lines[0].split(',').collect();
    let col = header.iter().position(|h| *h == "cumulative_cost").unwrap();
    let mut fields: Vec<String> = lines[2].split(',').map(String::from).collect();
    fields[col] = "99".into();
    lines[2] = fields.join(",");
    assert!(read_trace(lines.join("\n").as_bytes(), 0).is_err());
}

#[test]
fn heatmap_csv_round_trips() {
    let rows = vec![
        HeatmapRow {
            rho: 0.1,
            alpha: 0.8,
            r_squared: 0.93,
            acqf_family: "ei".into(),
            delta_mean: 0.4,
            delta_std: 0.1,
            n_seeds: 10,
            status: "ok".into(),
        },
        HeatmapRow {
            rho: 1.5,
            alpha: 0.0,
            r_squared: 0.1,
            acqf_family: "mes".into(),
            delta_mean: f64::NAN,
            delta_std: f64::NAN,
            n_seeds: 0,
            status: "failed: rho".into(),
        },
    ];
    let mut buf = Vec::new();
    write_heatmap(&mut buf, &rows).unwrap();
    let back = read_heatmap(buf.as_slice()).unwrap();
    assert_eq!(back[0], rows[0]);
    assert!(back[1].delta_mean.is_nan() && back[1].status == rows[1].status);
}
