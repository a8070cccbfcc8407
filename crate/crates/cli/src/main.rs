//! `wperturb`: runs perturbation-bound experiments from a config file and
//! the built-in verification suites.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid config, 3 a theorem's
//! hypotheses do not hold, 4 a bound is violated.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wperturb_core::suites::{run_suite, Suite};

use crate::config::ExperimentConfig;
use crate::output::RunOutcome;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Schema(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<wperturb_core::Error> for CliError {
    fn from(e: wperturb_core::Error) -> Self {
        if e.is_hypothesis_failure() {
            CliError::Hypothesis(e.to_string())
        } else {
            CliError::Schema(e.to_string())
        }
    }
}

const EXIT_IO: u8 = 1;
const EXIT_SCHEMA: u8 = 2;
const EXIT_HYPOTHESIS: u8 = 3;
const EXIT_VIOLATION: u8 = 4;

#[derive(Parser)]
#[command(name = "wperturb", version, about = "Perturbation bounds for Markov chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in property suite over random instances.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    Suite::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, seed, out } => run_command(config, seed, out),
        Command::Verify { suite, cases, seed } => verify_command(suite, cases, seed),
    }
}

fn run_command(path: PathBuf, seed: Option<u64>, out: Option<PathBuf>) -> ExitCode {
    let mut cfg = match ExperimentConfig::load(&path) {
        Ok(cfg) => cfg,
        Err(e) => return fail(e),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.out = o;
    }
    let outcome = match run::run(&cfg) {
        Ok(outcome) => outcome,
        Err(CliError::Hypothesis(msg)) => {
            // Still leave a summary saying why nothing was produced.
            let outcome = RunOutcome {
                inapplicable: vec![(0, msg)],
                ..RunOutcome::default()
            };
            if let Err(e) = output::write_all(&cfg.out, &outcome, &outcome.summary(cfg.kind, cfg.seed)) {
                return fail(e.into());
            }
            return report(&outcome, &cfg);
        }
        Err(e) => return fail(e),
    };
    if let Err(e) = output::write_all(&cfg.out, &outcome, &outcome.summary(cfg.kind, cfg.seed)) {
        return fail(e.into());
    }
    report(&outcome, &cfg)
}

fn report(outcome: &RunOutcome, cfg: &ExperimentConfig) -> ExitCode {
    eprintln!(
        "{}: {} report(s) in {}, status {}",
        cfg.kind.name(),
        outcome.files.len(),
        cfg.out.display(),
        outcome.status()
    );
    for (_, msg) in &outcome.inapplicable {
        eprintln!("inapplicable: {msg}");
    }
    if !outcome.inapplicable.is_empty() {
        ExitCode::from(EXIT_HYPOTHESIS)
    } else if outcome.violated() {
        ExitCode::from(EXIT_VIOLATION)
    } else {
        ExitCode::SUCCESS
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(match e {
        CliError::Schema(_) => EXIT_SCHEMA,
        CliError::Hypothesis(_) => EXIT_HYPOTHESIS,
        CliError::Io(_) => EXIT_IO,
    })
}

fn verify_command(suite: Suite, cases: usize, seed: u64) -> ExitCode {
    let checks = run_suite(suite, cases, seed);
    let mut ok = true;
    for c in &checks {
        ok &= c.passed();
        println!(
            "[{}] {}: {} cases, {} failed, worst {}",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.cases,
            c.failures,
            c.worst
        );
        if let Some(e) = &c.first_error {
            println!("    first error: {e}");
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VIOLATION)
    }
}
