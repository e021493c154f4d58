use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::{PossibleValue, PossibleValuesParser};
use clap::{Parser, ValueEnum};
use qha_cli::{experiments, run_suite, CliError, CliResult, Config, Experiment};

const SUITE: &str = "suite";

fn subcommands() -> Vec<PossibleValue> {
    let mut v: Vec<PossibleValue> =
        Experiment::ALL.iter().map(|e| e.to_possible_value().expect("no skipped variants")).collect();
    v.push(PossibleValue::new(SUITE).help("all experiments, grouped into numbered criteria"));
    v
}

#[derive(Parser)]
#[command(name = "qha", version, about = "Quantum harmonic analysis experiments on a truncated Fock space")]
struct Cli {
    /// Experiment to run, or `suite` for all of them.
    #[arg(value_parser = PossibleValuesParser::new(subcommands()))]
    subcommand: String,
    /// TOML config; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for JSON and CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Cli {
    fn load(&self) -> CliResult<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<bool> {
    let cfg = cli.load()?;
    if cli.subcommand == SUITE {
        let suite = run_suite(&cfg)?;
        print!("{}", suite.summary());
        println!("wall time {:.1} s", suite.wall_time_s);
        if let Some(dir) = &cli.out {
            suite.write_files(dir)?;
        }
        return Ok(suite.passed());
    }
    let exp = Experiment::from_str(&cli.subcommand, false).expect("restricted by the value parser");
    let report = experiments::run(exp, &cfg)?;
    for v in &report.verdicts {
        let detail = if v.detail.is_empty() { String::new() } else { format!("  ({})", v.detail) };
        println!(
            "{} {}  value {:.3e} tol {:.1e}{detail}",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.value,
            v.tolerance
        );
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    if let Some(dir) = &cli.out {
        report
            .write_files(dir)
            .map_err(|e| CliError::Experiment { experiment: report.experiment.clone(), source: e })?;
    }
    Ok(report.passed())
}
