use std::path::PathBuf;

use anyhow::Context;
use bioprep_core::manifest::{clip_stats, instance_stats, parse_jsonl, to_jsonl, StatsReport};
use bioprep_core::promptgen::{generate, GenConfig, NameKindMode};
use bioprep_core::{Stage, Task, TemplateRegistry, WindowRecord};
use clap::Args;

use super::{load_clips, load_table, pretty, write_file};
use crate::{usage, Explicit, RunConfig};

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Clip manifest (JSONL)
    #[arg(long, value_name = "PATH")]
    pub manifest: PathBuf,
    /// Backbone CSV
    #[arg(long, value_name = "PATH")]
    pub taxonomy: PathBuf,
    /// Window manifest from `bioprep window`; detection uses it for the clips it covers [default: none]
    #[arg(long, value_name = "PATH")]
    pub windows: Option<PathBuf>,
    /// Instances output (JSONL, sorted by instance id)
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Comma-separated task families, or "all"
    #[arg(long, default_value = "all")]
    pub tasks: String,
    /// Curriculum stage; stage1 keeps classification only
    #[arg(long, default_value = "stage2", value_parser = ["stage1", "stage2"])]
    pub stage: String,
    /// Options per multiple-choice prompt, answer included
    #[arg(long, default_value_t = GenConfig::default().n_options)]
    pub n_options: usize,
    /// Fraction of detection prompts whose answer is "None"
    #[arg(long, default_value_t = GenConfig::default().detection_none_rate)]
    pub none_rate: f64,
    /// Species name form in prompts and targets
    #[arg(long, default_value = "scientific", value_parser = ["scientific", "common", "mixed"])]
    pub name_kind: String,
    /// Template registry JSON; groups it names replace the built-in ones [default: none]
    #[arg(long, value_name = "PATH")]
    pub templates: Option<PathBuf>,
}

pub fn parse_tasks(spec: &str) -> anyhow::Result<Vec<Task>> {
    if spec.trim() == "all" {
        return Ok(Task::ALL.to_vec());
    }
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| Task::parse(s).ok_or_else(|| usage(format!("unknown task {:?}", s.trim()))))
        .collect()
}

fn parse_stage(s: &str) -> Stage {
    if s == "stage1" {
        Stage::Stage1
    } else {
        Stage::Stage2
    }
}

fn parse_name_kind(s: &str) -> NameKindMode {
    match s {
        "common" => NameKindMode::Common,
        "mixed" => NameKindMode::Mixed,
        _ => NameKindMode::Scientific,
    }
}

/// Folds the command-line flags into `cfg`.
pub fn apply(args: &GenerateArgs, cfg: &mut RunConfig, x: &Explicit) -> anyhow::Result<Vec<Task>> {
    let g = &mut cfg.generate;
    if x.has("stage") {
        g.stage = parse_stage(&args.stage);
    }
    if x.has("n_options") {
        g.n_options = args.n_options;
    }
    if x.has("none_rate") {
        g.detection_none_rate = args.none_rate;
    }
    if x.has("name_kind") {
        g.name_kind = parse_name_kind(&args.name_kind);
    }
    g.seed = cfg.seed;
    if x.has("tasks") || cfg.tasks.is_empty() {
        cfg.tasks = parse_tasks(&args.tasks)?;
    }
    cfg.generate.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg.tasks.clone())
}

/// Writes the instances file and prints clip and instance statistics as
/// JSON on stdout.
pub fn run(args: &GenerateArgs, mut cfg: RunConfig, x: &Explicit) -> anyhow::Result<()> {
    let tasks = apply(args, &mut cfg, x)?;
    let registry = match &args.templates {
        Some(p) => TemplateRegistry::builtin_with_overrides(p)?,
        None => TemplateRegistry::builtin(),
    };
    let table = load_table(&args.taxonomy)?;
    let clips = load_clips(&args.manifest, &cfg, Some(&table))?;
    let windows: Vec<WindowRecord> = match &args.windows {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_jsonl(&text)
                .into_iter()
                .map(|(_, r)| r)
                .collect::<Result<_, _>>()
                .with_context(|| format!("windows {}", p.display()))?
        }
        None => Vec::new(),
    };

    let out = generate(&clips, &windows, &table, &cfg.generate, &registry, &tasks)?;
    write_file(&args.out, to_jsonl(&out.instances))?;
    for ((task, kind), n) in out.skip_counts() {
        eprintln!("skipped {n} clip(s) for {task}: {kind}");
    }
    eprintln!("wrote {} instances to {}", out.instances.len(), args.out.display());
    let report = StatsReport {
        clips: Some(clip_stats(&clips)),
        instances: Some(instance_stats(&out.instances)),
    };
    print!("{}", pretty(&report));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_lists() {
        assert_eq!(parse_tasks("all").unwrap(), Task::ALL);
        assert_eq!(parse_tasks("detection, classification").unwrap(), [Task::Detection, Task::Classification]);
        let err = parse_tasks("classification,birds").unwrap_err();
        assert!(err.downcast_ref::<crate::UsageError>().is_some());
    }
}
