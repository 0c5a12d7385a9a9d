use std::path::PathBuf;

use anyhow::Context;
use bioprep_core::eval::{evaluate, per_label_csv, read_spice, EvalOptions, DEFAULT_OVERLAP_THRESHOLD};
use bioprep_core::manifest::{read_instances, read_predictions};
use clap::Args;

use super::{pretty, write_file};
use crate::{usage, Explicit, RunConfig};

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Reference instances (JSONL, as written by `bioprep generate`)
    #[arg(long, visible_alias = "manifest", value_name = "PATH")]
    pub instances: PathBuf,
    /// Predictions (JSONL lines of {"instance_id", "text"})
    #[arg(long, value_name = "PATH")]
    pub predictions: PathBuf,
    /// Report output (JSON array, one entry per task)
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Per-label scores output (CSV) [default: none]
    #[arg(long, value_name = "PATH")]
    pub per_label: Option<PathBuf>,
    /// SPICE scores (JSONL lines of {"instance_id", "spice"}); captioning then reports SPIDEr [default: none]
    #[arg(long, value_name = "PATH")]
    pub spice_file: Option<PathBuf>,
    /// Minimum character similarity for a detection fragment to count
    #[arg(long, default_value_t = DEFAULT_OVERLAP_THRESHOLD)]
    pub overlap_threshold: f64,
}

/// Writes the reports and prints `task<TAB>metric<TAB>score` per task.
pub fn run(args: &EvaluateArgs, mut cfg: RunConfig, x: &Explicit) -> anyhow::Result<()> {
    if x.has("overlap_threshold") {
        cfg.eval.overlap_threshold = args.overlap_threshold;
    }
    let t = cfg.eval.overlap_threshold;
    if !(0.0..=1.0).contains(&t) {
        return Err(usage(format!("overlap threshold {t} outside [0, 1]")));
    }
    let instances = read_instances(&args.instances).with_context(|| format!("instances {}", args.instances.display()))?;
    let predictions =
        read_predictions(&args.predictions).with_context(|| format!("predictions {}", args.predictions.display()))?;
    let spice = args
        .spice_file
        .as_ref()
        .map(|p| read_spice(p).with_context(|| format!("spice {}", p.display())))
        .transpose()?;
    let opts = EvalOptions {
        overlap_threshold: t,
        spice,
    };
    let reports = evaluate(&instances, &predictions, &opts)?;
    write_file(&args.out, pretty(&reports))?;
    if let Some(p) = &args.per_label {
        write_file(p, per_label_csv(&reports))?;
    }
    for r in &reports {
        println!("{}\t{}\t{:.6}", r.task, r.metric, r.primary_score);
    }
    Ok(())
}
