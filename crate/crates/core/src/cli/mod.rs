//! Scenario runner: loads JSON configs, runs the verifiers and writes
//! `<outdir>/<name>/report.json` plus any CSV tables.

pub mod config;
pub mod report;
mod scenarios;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Parser};

pub use config::ScenarioConfig;
pub use report::{format_float, Relation, RunReport, SuiteEntry, SuiteReport, Table, Verdict};
pub use scenarios::{GLOBAL_ORTHOGONALITY, ORTHOGONAL_DISTINGUISHABILITY, OVERLAP_DISTINGUISHABILITY};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    VerdictFailure = 1,
    ConfigError = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "recordlab", version, about = "Run record and measurement scenarios")]
#[command(group(ArgGroup::new("input").required(true).args(["config", "suite"])))]
pub struct Args {
    /// Scenario config (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory of scenario configs.
    #[arg(long)]
    pub suite: Option<PathBuf>,
    #[arg(long, default_value = "./out")]
    pub outdir: PathBuf,
    /// Overrides the seed of every scenario.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub outdir: PathBuf,
    pub seed: Option<u64>,
}

/// A config that could not be loaded or run, with its path.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub path: PathBuf,
    pub error: Error,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path.display(), self.error)
    }
}

impl std::error::Error for ScenarioError {}

fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut config = ScenarioConfig::load(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

/// Runs a parsed scenario and writes its report under `outdir/<name>/`.
pub fn run_config(config: ScenarioConfig, outdir: &Path) -> Result<RunReport> {
    let start = Instant::now();
    let outcome = scenarios::execute(&config)?;
    let dir = outdir.join(&config.name);
    std::fs::create_dir_all(&dir)?;
    let mut artifacts = Vec::with_capacity(outcome.tables.len());
    for t in &outcome.tables {
        t.write(&dir)?;
        artifacts.push(t.file_name.clone());
    }
    let passed = outcome.verdicts.iter().all(|v| v.pass);
    let report = RunReport {
        scenario: config,
        passed,
        verdicts: outcome.verdicts,
        details: outcome.details,
        artifacts,
        wall_time: start.elapsed().as_secs_f64(),
    };
    report::write_json(&dir.join("report.json"), &report)?;
    Ok(report)
}

/// Loads, runs and reports one config file.
pub fn run(config_path: &Path, options: &RunOptions) -> std::result::Result<RunReport, ScenarioError> {
    let wrap = |error| ScenarioError {
        path: config_path.to_path_buf(),
        error,
    };
    let config = load(config_path, options.seed).map_err(wrap)?;
    run_config(config, &options.outdir).map_err(wrap)
}

/// JSON files of a directory, sorted by name.
pub fn suite_configs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Validates every config of `dir` before running any of them, then runs
/// them in order. A config that fails to load aborts the suite; a scenario
/// that fails while running is recorded and the suite carries on.
pub fn run_suite(dir: &Path, options: &RunOptions) -> std::result::Result<SuiteReport, ScenarioError> {
    let start = Instant::now();
    let wrap = |path: &Path, error| ScenarioError {
        path: path.to_path_buf(),
        error,
    };
    let paths = suite_configs(dir).map_err(|e| wrap(dir, e))?;
    let mut configs = Vec::with_capacity(paths.len());
    for path in &paths {
        let config = load(path, options.seed).map_err(|e| wrap(path, e))?;
        if let Some((other, _)) = configs
            .iter()
            .find(|(_, c): &&(PathBuf, ScenarioConfig)| c.name == config.name)
        {
            let error = Error::InvalidConfig {
                field: "name".into(),
                message: format!("`{}` already used by {}", config.name, other.display()),
            };
            return Err(wrap(path, error));
        }
        configs.push((path.clone(), config));
    }
    let mut scenarios = Vec::with_capacity(configs.len());
    for (path, config) in configs {
        let name = config.name.clone();
        let entry = match run_config(config, &options.outdir) {
            Ok(r) => SuiteEntry {
                name,
                config: path.display().to_string(),
                passed: r.passed,
                error: None,
                failed_verdicts: r.failed_verdicts().map(|v| v.name.clone()).collect(),
            },
            Err(e) => SuiteEntry {
                name,
                config: path.display().to_string(),
                passed: false,
                error: Some(e.to_string()),
                failed_verdicts: Vec::new(),
            },
        };
        scenarios.push(entry);
    }
    let report = SuiteReport {
        passed: scenarios.iter().all(|s| s.passed),
        scenarios,
        wall_time: start.elapsed().as_secs_f64(),
    };
    std::fs::create_dir_all(&options.outdir).map_err(|e| wrap(&options.outdir, e.into()))?;
    report::write_json(&options.outdir.join("suite.json"), &report)
        .map_err(|e| wrap(&options.outdir, e))?;
    Ok(report)
}

fn print_report(r: &RunReport) {
    let status = if r.passed { "PASS" } else { "FAIL" };
    println!("{status} {} ({:.1} s)", r.scenario.name, r.wall_time);
    for v in &r.verdicts {
        let mark = if v.pass { "ok  " } else { "FAIL" };
        let rel = match v.relation {
            Relation::Below => "<",
            Relation::Above => ">",
        };
        println!("  {mark} {:<32} {:.3e} {rel} {:.1e}", v.name, v.value, v.threshold);
    }
}

/// Entry point behind the binary.
pub fn execute(args: &Args) -> ExitStatus {
    let options = RunOptions {
        outdir: args.outdir.clone(),
        seed: args.seed,
    };
    if let Some(path) = &args.config {
        match run(path, &options) {
            Ok(r) => {
                if !args.quiet {
                    print_report(&r);
                }
                if r.passed {
                    ExitStatus::Pass
                } else {
                    ExitStatus::VerdictFailure
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitStatus::ConfigError
            }
        }
    } else if let Some(dir) = &args.suite {
        match run_suite(dir, &options) {
            Ok(r) => {
                for s in &r.scenarios {
                    if let Some(e) = &s.error {
                        eprintln!("error: {}: {e}", s.config);
                    } else if !args.quiet {
                        let status = if s.passed { "PASS" } else { "FAIL" };
                        println!("{status} {}", s.name);
                    }
                }
                if !args.quiet {
                    let passed = r.scenarios.iter().filter(|s| s.passed).count();
                    println!("{passed}/{} scenarios passed", r.scenarios.len());
                }
                if r.has_errors() {
                    ExitStatus::ConfigError
                } else if r.passed {
                    ExitStatus::Pass
                } else {
                    ExitStatus::VerdictFailure
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitStatus::ConfigError
            }
        }
    } else {
        eprintln!("error: one of --config or --suite is required");
        ExitStatus::ConfigError
    }
}
