use std::collections::{HashMap, HashSet};
use std::path::PathBuf;

use anyhow::Context;
use bioprep_core::manifest::{check_manifest, parse_jsonl, to_jsonl, validate_instance, ManifestError};
use bioprep_core::Instance;
use clap::{Args, ValueEnum};
use serde::Serialize;

use super::{key_mode, load_clips, load_table};
use crate::RunConfig;

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Manifest to check (JSONL)
    #[arg(long, value_name = "PATH")]
    pub manifest: PathBuf,
    /// What the manifest holds
    #[arg(long, value_enum, default_value_t = ManifestKind::Clips)]
    pub kind: ManifestKind,
    /// Backbone CSV; taxon ids in clip manifests must resolve against it [default: none]
    #[arg(long, value_name = "PATH")]
    pub taxonomy: Option<PathBuf>,
    /// Clip manifest whose durations bound instance windows [default: none]
    #[arg(long, value_name = "PATH")]
    pub clips: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ManifestKind {
    Clips,
    Instances,
}

/// One violation, printed as a JSON line on stdout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Problem {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
}

impl From<&ManifestError> for Problem {
    fn from(e: &ManifestError) -> Self {
        let base = Problem {
            kind: "",
            line: None,
            id: None,
            field: None,
            message: e.to_string(),
        };
        match e {
            ManifestError::Parse { line, message } => Problem {
                kind: "parse",
                line: Some(*line),
                message: message.clone(),
                ..base
            },
            ManifestError::UnknownKey { line, key } => Problem {
                kind: "unknown_key",
                line: Some(*line),
                field: Some(key.clone()),
                ..base
            },
            ManifestError::InvariantViolation { id, field, message } => Problem {
                kind: "invariant",
                id: Some(id.clone()),
                field: Some(field.clone()),
                message: message.clone(),
                ..base
            },
            _ => Problem { kind: "other", ..base },
        }
    }
}

pub fn problems(args: &ValidateArgs, cfg: &RunConfig) -> anyhow::Result<Vec<Problem>> {
    let table = args.taxonomy.as_deref().map(load_table).transpose()?;
    match args.kind {
        ManifestKind::Clips => {
            let check = check_manifest(&args.manifest, key_mode(cfg), table.as_ref())
                .with_context(|| format!("reading {}", args.manifest.display()))?;
            Ok(check.errors.iter().map(Problem::from).collect())
        }
        ManifestKind::Instances => {
            let durations: Option<HashMap<String, f64>> = match &args.clips {
                Some(p) => Some(
                    load_clips(p, cfg, table.as_ref())?
                        .into_iter()
                        .map(|c| (c.clip_id, c.duration_s))
                        .collect(),
                ),
                None => None,
            };
            let text = std::fs::read_to_string(&args.manifest)
                .with_context(|| format!("reading {}", args.manifest.display()))?;
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for (line, parsed) in parse_jsonl::<Instance>(&text) {
                match parsed {
                    Err(e) => out.push(Problem::from(&e)),
                    Ok(inst) => {
                        for e in validate_instance(&inst, durations.as_ref()) {
                            out.push(Problem {
                                line: Some(line),
                                ..Problem::from(&e)
                            });
                        }
                        if !seen.insert(inst.instance_id.clone()) {
                            out.push(Problem {
                                kind: "invariant",
                                line: Some(line),
                                id: Some(inst.instance_id),
                                field: Some("instance_id".into()),
                                message: "duplicate instance_id".into(),
                            });
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Lists every violation as JSONL on stdout and fails if there is any.
pub fn run(args: &ValidateArgs, cfg: &RunConfig) -> anyhow::Result<()> {
    let found = problems(args, cfg)?;
    print!("{}", to_jsonl(&found));
    if !found.is_empty() {
        anyhow::bail!("{}: {} violation(s)", args.manifest.display(), found.len());
    }
    eprintln!("{}: ok", args.manifest.display());
    Ok(())
}
