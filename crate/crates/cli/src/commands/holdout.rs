use std::path::PathBuf;

use bioprep_core::manifest::{holdout_unseen_species, to_jsonl, HeldSpecies};
use clap::Args;
use serde::Serialize;

use super::{load_clips, load_table, pretty, write_file};
use crate::config::HoldoutConfig;
use crate::{Explicit, RunConfig};

#[derive(Debug, Args)]
pub struct HoldoutArgs {
    /// Clip manifest (JSONL)
    #[arg(long, value_name = "PATH")]
    pub manifest: PathBuf,
    /// Backbone CSV
    #[arg(long, value_name = "PATH")]
    pub taxonomy: PathBuf,
    /// Output directory for train.jsonl, holdout.jsonl and species.json
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Species to hold out
    #[arg(long, default_value_t = HoldoutConfig::default().n_species)]
    pub n_species: usize,
    /// Clips the genus must keep without the held-out species
    #[arg(long, default_value_t = HoldoutConfig::default().min_genus_recordings)]
    pub min_genus_recordings: usize,
}

#[derive(Serialize)]
struct SpeciesList<'a> {
    sampling: &'static str,
    seed: u64,
    n_species: usize,
    min_genus_recordings: usize,
    eligible: usize,
    train_clips: usize,
    holdout_clips: usize,
    species: &'a [HeldSpecies],
}

pub fn run(args: &HoldoutArgs, mut cfg: RunConfig, x: &Explicit) -> anyhow::Result<()> {
    if x.has("n_species") {
        cfg.holdout.n_species = args.n_species;
    }
    if x.has("min_genus_recordings") {
        cfg.holdout.min_genus_recordings = args.min_genus_recordings;
    }
    let h = cfg.holdout;
    let table = load_table(&args.taxonomy)?;
    let clips = load_clips(&args.manifest, &cfg, Some(&table))?;
    let split = holdout_unseen_species(&clips, &table, h.n_species, h.min_genus_recordings, cfg.seed)?;
    write_file(&args.out.join("train.jsonl"), to_jsonl(&split.train))?;
    write_file(&args.out.join("holdout.jsonl"), to_jsonl(&split.holdout))?;
    let list = SpeciesList {
        sampling: "uniform",
        seed: cfg.seed,
        n_species: h.n_species,
        min_genus_recordings: h.min_genus_recordings,
        eligible: split.eligible,
        train_clips: split.train.len(),
        holdout_clips: split.holdout.len(),
        species: &split.species,
    };
    write_file(&args.out.join("species.json"), pretty(&list))?;
    eprintln!(
        "held out {} species ({} eligible): {} train clips, {} holdout clips",
        split.species.len(),
        split.eligible,
        split.train.len(),
        split.holdout.len()
    );
    Ok(())
}
