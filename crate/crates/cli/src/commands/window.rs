use std::path::PathBuf;

use bioprep_core::audiodsp::{window_manifest, DEFAULT_HOP_S, DEFAULT_MIN_COUNT, DEFAULT_WIN_S, OTHER_LABEL};
use bioprep_core::manifest::to_jsonl;
use clap::Args;

use super::{load_clips, pretty, write_file};
use crate::{usage, Explicit, RunConfig};

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Clip manifest with timestamped events (JSONL)
    #[arg(long, value_name = "PATH")]
    pub manifest: PathBuf,
    /// Window manifest output (JSONL)
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Window length in seconds
    #[arg(long, default_value_t = DEFAULT_WIN_S)]
    pub win_s: f64,
    /// Hop between window starts in seconds
    #[arg(long, default_value_t = DEFAULT_HOP_S)]
    pub hop_s: f64,
    /// Labels need strictly more events than this to stay; the rest become "other"
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
    pub min_count: usize,
    /// An event labels a window only if it overlaps it by more than this
    #[arg(long, default_value_t = 0.0)]
    pub min_overlap_s: f64,
    /// Label set output (JSON): kept targets and per-label event counts [default: none]
    #[arg(long, value_name = "PATH")]
    pub labels_out: Option<PathBuf>,
}

pub fn run(args: &WindowArgs, mut cfg: RunConfig, x: &Explicit) -> anyhow::Result<()> {
    let w = &mut cfg.window;
    if x.has("win_s") {
        w.win_s = args.win_s;
    }
    if x.has("hop_s") {
        w.hop_s = args.hop_s;
    }
    if x.has("min_count") {
        w.min_count = args.min_count;
    }
    if x.has("min_overlap_s") {
        w.min_overlap_s = args.min_overlap_s;
    }
    let w = cfg.window;
    if !(w.win_s > 0.0 && w.hop_s > 0.0 && w.hop_s <= w.win_s) {
        return Err(usage(format!("need 0 < hop_s <= win_s, got win_s {} hop_s {}", w.win_s, w.hop_s)));
    }
    let clips = load_clips(&args.manifest, &cfg, None)?;
    let (labels, rows) = window_manifest(&clips, w.win_s, w.hop_s, w.min_count, w.min_overlap_s)?;
    write_file(&args.out, to_jsonl(&rows))?;
    if let Some(p) = &args.labels_out {
        write_file(p, pretty(&labels))?;
    }
    let other = rows.iter().filter(|r| r.labels.iter().any(|l| l == OTHER_LABEL)).count();
    eprintln!(
        "{} clips -> {} windows, {} target labels, {} windows with \"{OTHER_LABEL}\"",
        clips.len(),
        rows.len(),
        labels.targets.len(),
        other
    );
    Ok(())
}
