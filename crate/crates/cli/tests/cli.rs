use std::path::Path;
use std::process::Command;

use israte::cumulant::{CgeRates, CgfCurves, TruncationWindow};
use israte::spectrum::{NSchedule, ShrinkSchedule};
use israte::verify::{Expectation, Verdict, VerificationReport};
use israte::{ExtReal, Gaussian, RateCurve, SourceSpec, UniformGrid};
use israte_cli::{cmd_cgf, cmd_rate, cmd_verify, ExperimentConfig, GammaSpec, RunOptions};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_israte"))
}

fn small(source: SourceSpec) -> ExperimentConfig {
    ExperimentConfig {
        source: Some(source),
        r_grid: UniformGrid::new(-2.0, 2.0, 0.05).unwrap(),
        theta_grid: UniformGrid::new(-2.0, 2.0, 0.05).unwrap(),
        schedule: ShrinkSchedule::new(1, 4, NSchedule::geometric(500, 4000, 8, 5).unwrap()).unwrap(),
        windows: vec![TruncationWindow::interval(-2.0, 2.0).unwrap()],
        gamma_sets: GammaSpec::Generate { seed: 7, count: 4, lo: -2.0, hi: 2.0 },
        ..ExperimentConfig::default()
    }
}

fn mixed() -> SourceSpec {
    SourceSpec::mixed(Gaussian::new(-1.0, 1.0).unwrap(), Gaussian::new(1.0, 1.0).unwrap(), [0.5, 0.5]).unwrap()
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> std::path::PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, cfg.to_json()).unwrap();
    p
}

#[test]
fn config_round_trips_json() {
    for cfg in [ExperimentConfig::default(), small(mixed())] {
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_json(), cfg.to_json());
    }
    let explicit = ExperimentConfig {
        gamma_sets: GammaSpec::Explicit(vec!["(0.5, 1.5)".parse().unwrap(), "{1} U [2, 3]".parse().unwrap()]),
        locality: None,
        ..small(SourceSpec::divergent())
    };
    assert_eq!(ExperimentConfig::from_json(&explicit.to_json()).unwrap(), explicit);
}

#[test]
fn partial_configs_fill_in_defaults() {
    let cfg = ExperimentConfig::from_json(r#"{"source": {"kind": "divergent_pm"}}"#).unwrap();
    assert_eq!(cfg.sources(), vec![SourceSpec::divergent()]);
    assert_eq!(cfg.r_grid, ExperimentConfig::default().r_grid);
    assert_eq!(ExperimentConfig::from_json("{}").unwrap().sources().len(), 4);
}

#[test]
fn rate_csv_for_mixed_source_matches_min_parabola() {
    let dir = tempfile::tempdir().unwrap();
    cmd_rate(&small(mixed()), &RunOptions::new(dir.path())).unwrap();
    let curve = RateCurve::read_csv(std::fs::File::open(dir.path().join("rate_curve.csv")).unwrap()).unwrap();
    for (j, r) in curve.grid.points().into_iter().enumerate() {
        let oracle = ((r - 1.0).powi(2) / 2.0).min((r + 1.0).powi(2) / 2.0);
        assert!((curve.lower[j].to_f64() - oracle).abs() <= 0.05, "R = {r}");
    }
    let svg = std::fs::read_to_string(dir.path().join("rate_curve.svg")).unwrap();
    assert!(svg.contains("oracle lower"));
}

#[test]
fn divergent_rate_csv_is_all_infinite() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions { out: dir.path().to_path_buf(), plot: false };
    cmd_rate(&small(SourceSpec::divergent()), &opts).unwrap();
    let text = std::fs::read_to_string(dir.path().join("rate_curve.csv")).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!((f[1], f[2]), ("inf", "inf"));
    }
    assert!(!dir.path().join("rate_curve.svg").exists());
}

#[test]
fn interleaved_cgf_columns_differ_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let src = SourceSpec::interleaved(Gaussian::new(-1.0, 1.0).unwrap(), Gaussian::new(1.0, 1.0).unwrap()).unwrap();
    let cfg = small(src);
    cmd_cgf(&cfg, &RunOptions::new(dir.path())).unwrap();
    let file = std::fs::File::open(dir.path().join("cgf_curves.csv")).unwrap();
    let curves = CgfCurves::read_csv(file, TruncationWindow::Full, cfg.schedule.n.clone()).unwrap();
    let j = curves.theta_grid.nearest(1.0);
    assert!((curves.lower[j].to_f64() + 0.5).abs() < 1e-9);
    assert!((curves.upper[j].to_f64() - 1.5).abs() < 1e-9);
    assert!(dir.path().join("cgf_interval_-2_2.csv").exists());
    let (lo, hi) = CgeRates::read_csv(std::fs::File::open(dir.path().join("cge_rates.csv")).unwrap()).unwrap();
    assert_eq!(lo.grid, cfg.r_grid);
    assert!(lo.values.iter().zip(&hi.values).all(|(a, b)| a <= b));
}

#[test]
fn verify_flags_only_the_divergent_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { source: None, sources: Some(SourceSpec::bundled()), ..small(mixed()) };
    let outcome = cmd_verify(&cfg, &RunOptions::new(dir.path())).unwrap();
    let t = outcome.tally();
    assert_eq!((t.violated, t.missed_violation, t.expected_violated), (0, 0, 1));
    assert_eq!(outcome.exit_code(false), 0);
    for slug in ["gaussian_iid", "mixed", "interleaved", "divergent_pm"] {
        let text = std::fs::read_to_string(dir.path().join(slug).join("reports.json")).unwrap();
        let reports: Vec<VerificationReport> = serde_json::from_str(&text).unwrap();
        assert!(!reports.is_empty());
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.md")).unwrap();
    assert!(summary.contains("VIOLATED (expected)"));
    let expected: Vec<_> = outcome.reports.iter().filter(|r| r.expected == Expectation::Violated).collect();
    assert_eq!(expected.len(), 1);
    assert_eq!((expected[0].source.as_str(), expected[0].verdict), ("divergent_pm", Verdict::Violated));
}

#[test]
fn repeated_sources_get_distinct_directories() {
    let dir = tempfile::tempdir().unwrap();
    let g = SourceSpec::gaussian(0.0, 1.0).unwrap();
    let cfg = ExperimentConfig { source: None, sources: Some(vec![g.clone(), g]), ..small(mixed()) };
    cmd_rate(&cfg, &RunOptions::new(dir.path())).unwrap();
    assert!(dir.path().join("gaussian_iid/rate_curve.csv").exists());
    assert!(dir.path().join("gaussian_iid_2/rate_curve.csv").exists());
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(mixed());
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let mut bad = serde_json::to_value(&cfg).unwrap();
    bad["R_grid"]["step"] = serde_json::json!(0.0);
    let bad_path = dir.path().join("bad.json");
    std::fs::write(&bad_path, bad.to_string()).unwrap();
    let out = bin().arg("rate").arg("--config").arg(&bad_path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid grid"));

    cfg.source = Some(SourceSpec::divergent());
    let path = write_config(dir.path(), &cfg);
    let out_dir = dir.path().join("out");
    let out =
        bin().arg("verify").arg("--config").arg(&path).arg("--out").arg(&out_dir).arg("--strict").output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("summary.md").exists());
}

#[test]
fn threads_flag_does_not_change_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &small(mixed()));
    let run = |threads: &str, out: &str| {
        let o = dir.path().join(out);
        let status = bin()
            .args(["rate", "--no-plot", "--threads", threads])
            .arg("--config")
            .arg(&path)
            .arg("--out")
            .arg(&o)
            .status();
        assert!(status.unwrap().success());
        std::fs::read(o.join("rate_curve.csv")).unwrap()
    };
    assert_eq!(run("1", "a"), run("4", "b"));
}

#[test]
fn seed_flag_changes_the_generated_suite() {
    let cfg = small(mixed());
    let a = cfg.gamma_sets.sets();
    let b = cfg.clone().with_seed(8).gamma_sets.sets();
    assert_ne!(a, b);
    assert_eq!(b, cfg.with_seed(8).gamma_sets.sets());
}

#[test]
fn emitted_tables_keep_infinities() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions { out: dir.path().to_path_buf(), plot: false };
    cmd_cgf(&small(SourceSpec::divergent()), &opts).unwrap();
    let cfg = small(SourceSpec::divergent());
    let file = std::fs::File::open(dir.path().join("cgf_interval_-2_2.csv")).unwrap();
    let w = TruncationWindow::interval(-2.0, 2.0).unwrap();
    let curves = CgfCurves::read_csv(file, w, cfg.schedule.n.clone()).unwrap();
    // Z_n = +-n leaves [-2, 2] for good once n > 2
    assert!(curves.lower.iter().all(|v| *v == ExtReal::NegInf));
}
