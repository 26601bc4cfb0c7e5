use std::path::Path;
use std::process::{Command, Output};

fn mfbo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfbo")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_sfbo_writes_one_trace_per_seed_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sf.toml",
        r#"
seeds = 20
[problem]
kind = "branin"
rho = 0.1
[campaign]
mode = "sfbo"
acquisition = "ei"
total_budget = 4
init_fraction = 0.5
restarts = 1
candidate_grid_size = 128
"#,
    );
    let out = dir.path().join("out");
    let o = mfbo(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--workers", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let traces = std::fs::read_dir(out.join("traces")).unwrap().count();
    assert_eq!(traces, 20);
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"].as_array().unwrap().len(), 20);
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seeds"].as_array().unwrap().len(), 20);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn seeds_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let table = write(dir.path(), "t.csv", "id,x,hf,lf\na,0,1,1\nb,0.5,3,2\nc,1,2,2\nd,0.2,0,0\n");
    let cfg = write(
        dir.path(),
        "t.toml",
        &format!(
            "seeds = 20\n[problem]\nkind = \"tabular\"\npath = \"{}\"\nrho = 0.2\n[campaign]\nmode = \"compare\"\nacquisition = \"ei\"\ntotal_budget = 3\ninit_fraction = 0.5\nrestarts = 1\n",
            table.replace('\\', "/")
        ),
    );
    let out = dir.path().join("out");
    let o = mfbo(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--seeds", "3,5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("traces/sfbo_ei_seed3.csv").exists());
    assert!(out.join("traces/mfbo_ei_seed5.csv").exists());
    assert!(out.join("discount.json").exists());
    assert!(out.join("regret_ei.csv").exists());
    assert!(stdout(&o).contains("delta"));
}

#[test]
fn invalid_init_fraction_exits_with_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "[problem]\nkind = \"branin\"\nrho = 0.1\n[campaign]\nmode = \"sfbo\"\nacquisition = \"ei\"\ntotal_budget = 10\ninit_fraction = 1.5\n",
    );
    let o = mfbo(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("init_fraction"), "{}", stderr(&o));
}

#[test]
fn missing_table_exits_with_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.toml",
        "[problem]\nkind = \"tabular\"\npath = \"nowhere.csv\"\nrho = 0.1\n[campaign]\nmode = \"sfbo\"\nacquisition = \"ei\"\ntotal_budget = 10\n",
    );
    let o = mfbo(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("nowhere.csv"));
}

#[test]
fn advise_verdicts() {
    let o = mfbo(&["advise", "--rho", "0.065", "--r2", "0.98"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("run_MFBO"), "{}", stdout(&o));
    let o = mfbo(&["advise", "--rho", "0.5", "--r2", "0.49"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("run_SFBO"), "{}", stdout(&o));
    let o = mfbo(&["advise", "--rho", "0.1", "--r2", "0.9", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "run_MFBO");
}

#[test]
fn advise_from_pairs_and_malformed_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "p.csv", "hf,lf\n1,1.1\n2,2.05\n3,2.9\n4,4.2\n5,4.9\n");
    let o = mfbo(&["advise", "--rho", "0.1", "--pairs", &good]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("run_MFBO"));
    let o = mfbo(&["estimate-r2", "--pairs", &good]);
    assert!(o.status.success(), "{}", stderr(&o));

    let bad = write(dir.path(), "bad.csv", "hf,lf\n1,1\n2,oops\n3,3\n");
    let o = mfbo(&["advise", "--rho", "0.1", "--pairs", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("oops") || stderr(&o).contains("row"), "{}", stderr(&o));
}

#[test]
fn advise_rejects_out_of_range_inputs() {
    let o = mfbo(&["advise", "--rho", "0", "--r2", "0.9"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let o = mfbo(&["advise", "--rho", "0.1", "--r2", "NaN"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn sweep_writes_a_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        r#"
seeds = 1
[problem]
kind = "branin"
rho = 0.2
[campaign]
mode = "compare"
acquisition = "ei"
total_budget = 6
init_fraction = 0.5
restarts = 1
candidate_grid_size = 128
[sweep]
rho_values = [0.2]
alpha_values = [0.0, 1.0]
r2_samples = 100
"#,
    );
    let out = dir.path().join("out");
    let o = mfbo(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--rho", "0.2,0.4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("heatmap.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 4);
    assert!(out.join("manifest.json").exists());
}
