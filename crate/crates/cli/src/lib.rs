//! The `bioprep` command line: one binary, one subcommand per pipeline step.
//!
//! Exit codes: 0 on success, 1 when inputs fail validation or scoring, 2 on
//! usage errors (bad flags, unreadable or invalid config file). Diagnostics
//! go to stderr; data goes to the files named by flags or to stdout.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod config;

pub use config::RunConfig;

/// Bioacoustic instruction data construction and benchmark scoring.
#[derive(Debug, Parser)]
#[command(name = "bioprep", version)]
pub struct Cli {
    /// TOML run configuration; flags given on the command line win [default: none]
    #[arg(long, global = true, help_heading = "Global options", value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed; each task derives its own stream from it
    #[arg(long, global = true, help_heading = "Global options", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads, 0 for one per core
    #[arg(long, global = true, help_heading = "Global options", default_value_t = 0)]
    pub jobs: usize,
    /// Reject unknown manifest keys instead of preserving them [default: off]
    #[arg(long, global = true, help_heading = "Global options")]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a taxonomy backbone, print a summary and resolve names
    Taxonomy(commands::taxonomy::TaxonomyArgs),
    /// Check a clip or instance manifest and list every violation
    Validate(commands::validate::ValidateArgs),
    /// Generate instruction instances from a clip manifest
    Generate(commands::generate::GenerateArgs),
    /// Cut soundscape clips into labelled detection windows
    Window(commands::window::WindowArgs),
    /// Mix animal stems of separated bundles and gate them with PCEN
    Augment(commands::augment::AugmentArgs),
    /// Split a manifest into train and unseen-species holdout sets
    Holdout(commands::holdout::HoldoutArgs),
    /// Score predictions against generated instances
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Write a deterministic synthetic taxonomy and manifests
    Synth(commands::synth::SynthArgs),
}

/// Bad flags or configuration; maps to exit code 2.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Which arguments were given on the command line rather than defaulted.
pub struct Explicit<'a> {
    top: &'a ArgMatches,
    sub: &'a ArgMatches,
}

impl<'a> Explicit<'a> {
    pub fn has(&self, id: &str) -> bool {
        let given = |m: &ArgMatches| {
            m.try_get_raw(id).ok().flatten().is_some() && m.value_source(id) == Some(ValueSource::CommandLine)
        };
        given(self.sub) || given(self.top)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    match dispatch(&matches) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(matches: &ArgMatches) -> anyhow::Result<()> {
    let cli = Cli::from_arg_matches(matches).map_err(|e| usage(e.to_string()))?;
    let sub = matches.subcommand().map(|(_, m)| m).expect("subcommand is required");
    let x = Explicit { top: matches, sub };

    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if x.has("seed") {
        cfg.seed = cli.seed;
    }
    if x.has("jobs") {
        cfg.jobs = cli.jobs;
    }
    if x.has("strict") {
        cfg.strict = cli.strict;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| usage(format!("--jobs {}: {e}", cfg.jobs)))?;
    pool.install(|| match &cli.command {
        Command::Taxonomy(a) => commands::taxonomy::run(a, &cfg),
        Command::Validate(a) => commands::validate::run(a, &cfg),
        Command::Generate(a) => commands::generate::run(a, cfg, &x),
        Command::Window(a) => commands::window::run(a, cfg, &x),
        Command::Augment(a) => commands::augment::run(a, cfg, &x),
        Command::Holdout(a) => commands::holdout::run(a, cfg, &x),
        Command::Evaluate(a) => commands::evaluate::run(a, cfg, &x),
        Command::Synth(a) => commands::synth::run(a, &cfg),
    })
}
