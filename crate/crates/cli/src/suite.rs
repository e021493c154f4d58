//! Runs every experiment and groups the verdicts into numbered criteria.

use std::path::Path;
use std::time::Instant;

use qha_core::report::{ExperimentReport, Verdict};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::experiments::{self, Experiment};

/// Criterion number, short title and the experiments whose verdicts decide it.
pub const CRITERIA: [(u32, &str, &[Experiment]); 15] = [
    (1, "Weyl relation on truncated blocks", &[Experiment::CcrCheck]),
    (2, "parity intertwines W_z and W_{−z}", &[Experiment::ParityCheck]),
    (3, "Toeplitz operator of z/|z| is a weighted shift", &[Experiment::ToeplitzShift]),
    (4, "Fredholm index of T_{z/|z|}", &[Experiment::Index]),
    (5, "even/odd calculus and block indices", &[Experiment::EvenOdd, Experiment::IndexParity]),
    (6, "index congruence modulo k", &[Experiment::Congruence]),
    (7, "parity is modulation continuous, not shift continuous", &[Experiment::ModulationScan]),
    (8, "Berezin localization profiles", &[Experiment::LocalizationScan]),
    (9, "intersection decay in the product space", &[Experiment::IntersectionProbe]),
    (10, "Fourier-Weyl round trip", &[Experiment::FourierRoundtrip]),
    (11, "operator Fourier transform and convention audit", &[Experiment::FopIdentity, Experiment::ConventionAudit]),
    (12, "twisted convolution intertwines products", &[Experiment::TwistedConv]),
    (13, "quantized delta approximates parity", &[Experiment::DeltaParity]),
    (14, "parity conjugation reflects symbols", &[Experiment::ParityConjugation]),
    (15, "ideal membership of quantized symbols", &[Experiment::IdealSuite]),
];

pub const RUNTIME_CRITERION: u32 = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: String,
    pub experiments: Vec<String>,
    pub passed: bool,
    /// Names of failed verdicts, prefixed by their experiment.
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
    pub reports: Vec<ExperimentReport>,
    pub wall_time_s: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn failed_ids(&self) -> Vec<u32> {
        self.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect()
    }

    pub fn criterion(&self, id: u32) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.id == id)
    }

    pub fn report(&self, exp: Experiment) -> Option<&ExperimentReport> {
        let name = exp.name();
        self.reports.iter().find(|r| r.experiment == name)
    }

    /// One line per criterion.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("criterion {:>2} {status}  {}", c.id, c.title));
            if !c.failures.is_empty() {
                out.push_str(&format!("  [{}]", c.failures.join("; ")));
            }
            out.push('\n');
        }
        out
    }

    /// Writes `suite.json` plus every experiment's files into `dir`.
    pub fn write_files(&self, dir: &Path) -> CliResult<()> {
        let io = |e: std::io::Error| CliError::Io(dir.display().to_string(), e);
        std::fs::create_dir_all(dir).map_err(io)?;
        for r in &self.reports {
            r.write_files(dir).map_err(|e| CliError::Experiment { experiment: r.experiment.clone(), source: e })?;
        }
        let json = serde_json::to_string_pretty(self).expect("suite report serializes");
        std::fs::write(dir.join("suite.json"), json).map_err(io)
    }
}

/// Report standing in for an experiment that returned an error.
fn errored(exp: Experiment, err: &CliError) -> ExperimentReport {
    let mut r = ExperimentReport::new(exp.name());
    r.verdict(Verdict::holds("experiment completed", false).with_detail(err.to_string()));
    r
}

/// Runs the experiments in the rayon pool; the ordered collect keeps the
/// report order fixed whatever the completion order.
pub fn run_suite(cfg: &Config) -> CliResult<SuiteReport> {
    cfg.convention.resolve()?;
    let start = Instant::now();
    let reports: Vec<ExperimentReport> =
        Experiment::ALL.par_iter().map(|&e| experiments::run(e, cfg).unwrap_or_else(|err| errored(e, &err))).collect();
    let wall = start.elapsed().as_secs_f64();

    let mut criteria: Vec<CriterionResult> = CRITERIA
        .iter()
        .map(|(id, title, exps)| {
            let names: Vec<String> = exps.iter().map(|e| e.name()).collect();
            let failures: Vec<String> = reports
                .iter()
                .filter(|r| names.contains(&r.experiment))
                .flat_map(|r| r.failed_verdicts().into_iter().map(move |v| format!("{}: {}", r.experiment, v.name)))
                .collect();
            CriterionResult {
                id: *id,
                title: title.to_string(),
                experiments: names,
                passed: failures.is_empty(),
                failures,
            }
        })
        .collect();
    let runtime = Verdict::below("suite runtime (s)", wall, cfg.suite.time_budget_s);
    criteria.push(CriterionResult {
        id: RUNTIME_CRITERION,
        title: format!("full suite within {} s", cfg.suite.time_budget_s),
        experiments: Experiment::ALL.iter().map(|e| e.name()).collect(),
        passed: runtime.passed,
        failures: if runtime.passed { vec![] } else { vec![format!("{} = {wall:.1}", runtime.name)] },
    });
    Ok(SuiteReport { seed: cfg.seed, criteria, reports, wall_time_s: wall })
}
