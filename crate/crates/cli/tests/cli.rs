//! Command-line contract and runner properties.

use std::path::Path;
use std::process::{Command, Output};

use relaysel_cli::config::Algorithm;
use relaysel_cli::experiment::{run_experiment, ExperimentKind, RunOptions};
use relaysel_cli::{load_config, ScenarioConfig};

fn relaysel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaysel")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn successful_run_prints_csv() {
    let out = relaysel(&["run", "rate_vs_m", "--trials", "2000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("kind,algorithm,m,snr_db,k,beta_relay,p1,p2,ci95_p1,ci95_p2,rate_nats,rate_bits,trials,seed\n"));
    assert_eq!(text.lines().count(), 1 + 4 * 6);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[coding]\nbeta = 1.5\n");
    let out = relaysel(&["run", "rate_vs_m", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("coding.beta") && err.contains("line 2"), "{err}");

    let unknown = write(dir.path(), "unknown.toml", "[experiment]\nsneed = 3\n");
    let out = relaysel(&["place", "--config", &unknown]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sneed"));

    assert_eq!(relaysel(&["run", "nonsense"]).status.code(), Some(2));
    assert_eq!(relaysel(&["run", "place", "--config", "/nonexistent.toml"]).status.code(), Some(2));
    assert_eq!(relaysel(&["bogus-subcommand"]).status.code(), Some(2));
    assert_eq!(relaysel(&["run", "rate_vs_m", "--trials", "0"]).status.code(), Some(2));
    // Per-draw selectors have no closed form.
    assert_eq!(relaysel(&["run", "rate_vs_m", "--closed-form"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_3() {
    let out = relaysel(&["place", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn help_exits_0() {
    assert_eq!(relaysel(&["--help"]).status.code(), Some(0));
}

#[test]
fn output_and_plot_files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let dat = dir.path().join(format!("{tag}.dat"));
        let out = relaysel(&[
            "run",
            "snr_beta_split",
            "--trials",
            "5000",
            "--seed",
            "9",
            "--out",
            csv.to_str().unwrap(),
            "--plot",
            dat.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        (std::fs::read(csv).unwrap(), std::fs::read(dat).unwrap())
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    let dat = String::from_utf8(a.1).unwrap();
    assert!(dat.starts_with("# kind algorithm m snr_db"));
    assert_eq!(dat.lines().count(), 1 + 9);
}

#[test]
fn rate_bits_is_rate_nats_over_ln2() {
    let out = relaysel(&["run", "power_alloc", "--trials", "2000"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut n = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let nats: f64 = rec[10].parse().unwrap();
        let bits: f64 = rec[11].parse().unwrap();
        assert_eq!(bits, nats / std::f64::consts::LN_2);
        n += 1;
    }
    assert_eq!(n, 4 * 6);
}

#[test]
fn full_selection_makes_fan_out_and_random_agree() {
    let cfg = load_config(
        "[topology]\nlayout = \"explicit\"\nrelay_x = [20.0, 40.0, 60.0, 80.0]\nrelay_y = [5.0, -5.0, 3.0, 0.0]\n\
         [experiment]\nm = [4]\ntrials = 200000\n",
    )
    .unwrap();
    let out = run_experiment(ExperimentKind::RateVsM, &cfg, RunOptions::default()).unwrap();
    let rows = out.table.rates();
    let get = |a: Algorithm| rows.iter().find(|r| r.algorithm == a.label()).unwrap();
    let (s, f, r) = (get(Algorithm::SingleFanOut), get(Algorithm::MultipleFanOut), get(Algorithm::Random));
    // Same set, same powers, same seed.
    assert_eq!(s.rate_nats, f.rate_nats);
    let ci = s.ci95_rate.unwrap().hypot(r.ci95_rate.unwrap());
    assert!((s.rate_nats - r.rate_nats).abs() <= 2.0 * ci, "{} vs {}", s.rate_nats, r.rate_nats);
}

#[test]
fn best_gains_not_below_random() {
    let mut cfg = ScenarioConfig::default();
    cfg.experiment.algorithms = vec![Algorithm::BestGains, Algorithm::Random];
    cfg.experiment.trials = 50_000;
    let out = run_experiment(ExperimentKind::RateVsM, &cfg, RunOptions::default()).unwrap();
    let rows = out.table.rates();
    for m in 1..=6 {
        let at = |a: Algorithm| rows.iter().find(|r| r.algorithm == a.label() && r.m == m).unwrap();
        let (b, r) = (at(Algorithm::BestGains), at(Algorithm::Random));
        let ci = b.ci95_rate.unwrap().hypot(r.ci95_rate.unwrap());
        assert!(b.rate_nats >= r.rate_nats - ci, "m={m}");
    }
}

#[test]
fn closed_form_diversity_slopes() {
    let mut cfg = ScenarioConfig::default();
    cfg.experiment.snr_db = vec![120.0, 140.0];
    let out = run_experiment(ExperimentKind::Diversity, &cfg, RunOptions { closed_form: true }).unwrap();
    assert_eq!(out.diversity.len(), 3);
    for r in &out.diversity {
        let want = r.m as f64 + 1.0;
        assert!((r.measured_slope_1.unwrap() - want).abs() < 0.05);
        assert!((r.measured_slope_2.unwrap() - want).abs() < 0.05);
    }
    assert!(out.table.rates().iter().all(|r| r.trials.is_none() && r.k == Some(1.0)));
}

#[test]
fn place_reports_line_and_general_optima() {
    let mut cfg = ScenarioConfig::default();
    cfg.experiment.m = vec![1, 2];
    let out = run_experiment(ExperimentKind::Place, &cfg, RunOptions::default()).unwrap();
    assert_eq!(out.table.len(), 1 + 1 + 2);
    assert!(out.summary[0].contains("45.354575"));
}

#[test]
fn oversized_m_is_a_usage_error() {
    let mut cfg = ScenarioConfig::default();
    cfg.experiment.m = vec![21];
    let err = run_experiment(ExperimentKind::RateVsM, &cfg, RunOptions::default()).unwrap_err();
    assert!(matches!(err, relaysel_cli::RunError::Usage(_)));
}
