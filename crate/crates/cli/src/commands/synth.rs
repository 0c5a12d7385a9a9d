use std::path::PathBuf;

use bioprep_core::manifest::to_jsonl;
use bioprep_core::synth;
use bioprep_core::taxonomy::write_backbone;
use clap::Args;

use super::write_file;
use crate::RunConfig;

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory for taxonomy.csv, clips.jsonl and soundscapes.jsonl
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Species in the backbone
    #[arg(long, default_value_t = 200)]
    pub species: usize,
    /// Focal clips
    #[arg(long, default_value_t = 1000)]
    pub clips: usize,
    /// Soundscape clips with timestamped events
    #[arg(long, default_value_t = 60)]
    pub soundscapes: usize,
    /// Length of each soundscape in seconds
    #[arg(long, default_value_t = 60.0)]
    pub soundscape_s: f64,
    /// Distinct species heard across soundscapes
    #[arg(long, default_value_t = 12)]
    pub soundscape_species: usize,
    /// Events per soundscape
    #[arg(long, default_value_t = 30)]
    pub events: usize,
}

pub fn run(args: &SynthArgs, cfg: &RunConfig) -> anyhow::Result<()> {
    if args.species == 0 || !(args.soundscape_s > 0.0) {
        return Err(crate::usage("--species and --soundscape-s must be positive"));
    }
    let table = synth::taxonomy(args.species, cfg.seed);
    let mut csv = Vec::new();
    write_backbone(&table, &mut csv)?;
    write_file(&args.out.join("taxonomy.csv"), csv)?;
    let clips = synth::focal_clips(&table, args.clips, cfg.seed);
    write_file(&args.out.join("clips.jsonl"), to_jsonl(&clips))?;
    let scapes: Vec<_> = (0..args.soundscapes)
        .map(|i| {
            synth::soundscape(
                &format!("sc{i:05}"),
                args.soundscape_s,
                &table,
                args.soundscape_species,
                args.events,
                cfg.seed,
            )
        })
        .collect();
    write_file(&args.out.join("soundscapes.jsonl"), to_jsonl(&scapes))?;
    eprintln!(
        "wrote {} species, {} clips and {} soundscapes to {}",
        table.len(),
        clips.len(),
        scapes.len(),
        args.out.display()
    );
    Ok(())
}
