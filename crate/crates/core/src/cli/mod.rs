//! The `pel` command line: one subcommand per pipeline step, driven by a TOML
//! config with flag overrides.
//!
//! Every report embeds the resolved config. Errors are printed to stderr as
//! `{"error": {"kind": ..., "message": ...}}` with a nonzero exit code.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{
    EvalConfig, GenConfig, HttpConfig, MockConfig, NgramConfig, Paths, ProviderKind, RunConfig,
    SimulateConfig, TestKind, CACHE_DIR_ENV,
};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "pel", version, about = "Distributional entailment lab")]
pub struct Cli {
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML run config; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (also caps concurrent HTTP requests).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub provider: Option<ProviderKind>,
    /// Base URL of the scoring service.
    #[arg(long, global = true, value_name = "URL")]
    pub endpoint: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub test: Option<TestKind>,
    /// Premise repetitions for the repeated and pause tests.
    #[arg(long, global = true, value_name = "N")]
    pub n_reps: Option<usize>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "FLOAT")]
    pub tolerance: Option<f64>,
    /// connectives, quantifiers, numbers, passives, datives, targeted (all five),
    /// distractors, world_pairs or external.
    #[arg(long, global = true, value_name = "NAME")]
    pub phenomenon: Option<String>,
    /// Fit the learned test on all data and report training AUC.
    #[arg(long, global = true)]
    pub no_holdout: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Check the score identities, repetition decay and separation on seeded random models.
    Verify,
    /// Sample a corpus from a speaker over a world model.
    Simulate {
        /// World model JSON (overrides paths.world_model).
        input: Option<PathBuf>,
    },
    /// Fit a sentence n-gram on a sampled corpus.
    TrainNgram {
        /// Corpus JSONL (overrides paths.corpus).
        input: Option<PathBuf>,
    },
    /// Generate labelled instances.
    Gen,
    /// Compute the four test features for every instance.
    Score {
        /// Instances JSONL (overrides paths.instances).
        input: Option<PathBuf>,
    },
    /// ROC-AUC, baseline and plots for scored instances.
    Eval {
        /// Scored JSONL (overrides paths.scored).
        input: Option<PathBuf>,
    },
    /// Fit the learned linear test on scored instances.
    Fit {
        /// Scored JSONL (overrides paths.scored).
        input: Option<PathBuf>,
    },
    /// Bits per byte of texts under the selected provider.
    Bpb {
        /// Texts JSONL (overrides paths.texts).
        input: Option<PathBuf>,
    },
    /// Serve the deterministic mock scoring model until killed.
    MockServer,
}

/// Loads the config file (if any) and applies flag overrides.
pub fn resolve_config(flags: &Flags) -> Result<RunConfig> {
    let mut cfg = match &flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = flags.seed {
        cfg.seed = v;
    }
    if let Some(v) = flags.jobs {
        cfg.jobs = Some(v);
    }
    if let Some(v) = flags.provider {
        cfg.provider = v;
    }
    if let Some(v) = &flags.endpoint {
        cfg.http.endpoint = Some(v.clone());
    }
    if let Some(v) = flags.test {
        cfg.test = v;
    }
    if let Some(v) = flags.n_reps {
        cfg.n_reps = v;
    }
    if let Some(v) = &flags.out {
        cfg.out = v.clone();
    }
    if let Some(v) = flags.tolerance {
        cfg.tolerance = v;
    }
    if let Some(v) = &flags.phenomenon {
        cfg.phenomenon = Some(v.clone());
    }
    if flags.no_holdout {
        cfg.no_holdout = true;
    }
    cfg.resolve()
}

/// What a finished command reports back.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// `false` when a check ran to completion but did not pass.
    pub passed: bool,
    /// One-line JSON summary printed on stdout.
    pub summary: serde_json::Value,
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = resolve_config(&cli.flags)?;
    match cfg.jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            pool.install(|| commands::dispatch(&cli.command, &cfg))
        }
        None => commands::dispatch(&cli.command, &cfg),
    }
}

fn error_json(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": { "kind": kind, "message": message } }).to_string()
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code: 0 on success, 1 on errors or failed checks, 2 on usage errors.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprintln!("{}", error_json("usage", e.to_string().trim()));
            return 2;
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string()));
            1
        }
    }
}

pub fn main() -> i32 {
    run_from(std::env::args_os())
}
