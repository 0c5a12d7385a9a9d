//! Whole-manifest generation, parallel over clips.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;

use super::tasks::{
    gen_calltype, gen_caption, gen_classification, gen_count, gen_detection, gen_lifestage,
    gen_mixture_names, gen_music, CountKind, DetectionSubject,
};
use super::templates::TemplateRegistry;
use super::{GenConfig, GenError, Skip};
use crate::audiodsp::WindowRecord;
use crate::manifest::{ClipRecord, Instance, Task};
use crate::taxonomy::TaxonomyTable;

#[derive(Debug, Default)]
pub struct GenOutput {
    /// Sorted by instance id.
    pub instances: Vec<Instance>,
    pub skipped: Vec<Skip>,
}

impl GenOutput {
    pub fn skip_counts(&self) -> BTreeMap<(Task, &'static str), usize> {
        let mut out = BTreeMap::new();
        for s in &self.skipped {
            *out.entry((s.task, s.reason.kind())).or_default() += 1;
        }
        out
    }
}

/// Runs every requested task the configured stage admits over `clips`.
/// Detection uses `windows` for clips that have them and falls back to
/// clip-level labels otherwise. Output order is independent of thread count.
pub fn generate(
    clips: &[ClipRecord],
    windows: &[WindowRecord],
    table: &TaxonomyTable,
    cfg: &GenConfig,
    registry: &TemplateRegistry,
    tasks: &[Task],
) -> Result<GenOutput, GenError> {
    cfg.validate()?;
    let tasks: BTreeSet<Task> = tasks.iter().copied().filter(|t| cfg.stage.admits(*t)).collect();

    let windowed: HashSet<&str> = windows.iter().map(|w| w.clip_id.as_str()).collect();
    let per_clip: Vec<(Vec<Instance>, Vec<Skip>)> = clips
        .par_iter()
        .map(|clip| {
            let mut inst = Vec::new();
            let mut skips = Vec::new();
            for &task in &tasks {
                clip_task(clip, task, table, cfg, registry, &windowed, &mut inst, &mut skips);
            }
            (inst, skips)
        })
        .collect();

    let mut out = GenOutput::default();
    for (i, s) in per_clip {
        out.instances.extend(i);
        out.skipped.extend(s);
    }

    if tasks.contains(&Task::Detection) {
        let mut seen: HashMap<(&str, &str), usize> = HashMap::new();
        let numbered: Vec<(usize, &WindowRecord)> = windows
            .iter()
            .map(|w| {
                let n = seen.entry((&w.dataset, &w.clip_id)).or_default();
                *n += 1;
                (*n - 1, w)
            })
            .collect();
        let det: Vec<Instance> = numbered
            .par_iter()
            .map(|&(counter, w)| gen_detection(&DetectionSubject::from_window(w, counter, table), table, cfg, registry))
            .collect();
        out.instances.extend(det);
    }

    out.instances.par_sort_unstable_by(|a, b| a.instance_id.cmp(&b.instance_id));
    if let Some(pair) = out.instances.windows(2).find(|p| p[0].instance_id == p[1].instance_id) {
        return Err(GenError::DuplicateInstance(pair[0].instance_id.clone()));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn clip_task(
    clip: &ClipRecord,
    task: Task,
    table: &TaxonomyTable,
    cfg: &GenConfig,
    registry: &TemplateRegistry,
    windowed: &HashSet<&str>,
    inst: &mut Vec<Instance>,
    skips: &mut Vec<Skip>,
) {
    let mut one = |r: Result<Instance, Skip>| match r {
        Ok(i) => inst.push(i),
        Err(s) => skips.push(s),
    };
    match task {
        Task::Classification => match gen_classification(clip, table, cfg, registry) {
            Ok(v) => inst.extend(v),
            Err(s) => skips.push(s),
        },
        Task::Detection => {
            if !windowed.contains(clip.clip_id.as_str()) {
                one(DetectionSubject::from_clip(clip, table).map(|s| gen_detection(&s, table, cfg, registry)));
            }
        }
        Task::Captioning => match gen_caption(clip, cfg, registry) {
            Ok(v) => inst.extend(v),
            Err(s) => skips.push(s),
        },
        Task::Calltype => one(gen_calltype(clip, cfg, registry)),
        Task::Lifestage => one(gen_lifestage(clip, cfg, registry)),
        Task::Count => {
            let speakers = gen_count(clip, CountKind::Speakers, cfg, registry);
            let individuals = gen_count(clip, CountKind::Individuals, cfg, registry);
            // a clip carries at most one of the two counts; report a skip
            // only when both are absent
            match (speakers, individuals) {
                (Err(s), Err(_)) => skips.push(s),
                (a, b) => {
                    inst.extend(a.ok());
                    inst.extend(b.ok());
                }
            }
        }
        Task::MixtureCount => one(gen_count(clip, CountKind::Instruments, cfg, registry)),
        Task::MixtureNames => one(gen_mixture_names(clip, cfg, registry)),
        Task::Pitch | Task::Instrument | Task::Velocity | Task::Quality => {
            // gen_music covers all four; emit only the requested one
            let m = gen_music(clip, cfg, registry);
            inst.extend(m.instances.into_iter().filter(|i| i.task == task));
            skips.extend(m.skipped.into_iter().filter(|s| s.task == task));
        }
    }
}
