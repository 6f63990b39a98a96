use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use israte_cli::{cmd_cgf, cmd_rate, cmd_report, cmd_verify, ExperimentConfig, Outcome, RunOptions};

#[derive(Parser, Debug)]
#[command(name = "israte", version, about = "Information-spectrum rate estimators and theorem checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config; the bundled defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's `output`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for generated sets and Monte Carlo draws.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for grid evaluation.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Skip the SVG plots.
    #[arg(long, global = true)]
    no_plot: bool,
    /// Also fail on INCONCLUSIVE reports.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Lower and upper information-spectrum rate curves.
    Rate,
    /// Cumulant curves and the rate functions conjugate to them.
    Cgf,
    /// Theorem checks per source.
    Verify,
    /// Every artifact plus one bundled report.
    Report,
}

fn load(cli: &Cli) -> anyhow::Result<(ExperimentConfig, RunOptions)> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let out = cli.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("israte-out"));
    Ok((cfg, RunOptions { out, plot: !cli.no_plot }))
}

fn execute(cli: &Cli, cfg: &ExperimentConfig, opts: &RunOptions) -> anyhow::Result<Option<Outcome>> {
    Ok(match cli.command {
        Command::Rate => cmd_rate(cfg, opts).map(|_| None)?,
        Command::Cgf => cmd_cgf(cfg, opts).map(|_| None)?,
        Command::Verify => Some(cmd_verify(cfg, opts)?),
        Command::Report => Some(cmd_report(cfg, opts)?),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, opts) = match load(&cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli, &cfg, &opts)),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => execute(&cli, &cfg, &opts),
    };
    match result {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(outcome)) => {
            let t = outcome.tally();
            eprintln!(
                "{} reports: {} HOLDS, {} VIOLATED, {} expected VIOLATED, {} missed, {} INCONCLUSIVE",
                outcome.reports.len(),
                t.holds,
                t.violated,
                t.expected_violated,
                t.missed_violation,
                t.inconclusive
            );
            ExitCode::from(outcome.exit_code(cli.strict) as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
