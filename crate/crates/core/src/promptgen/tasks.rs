//! Per-task instance generators.

use std::collections::{BTreeMap, BTreeSet};

use super::options::{choose_kind, draw_distractors, label, levels_meta};
use super::templates::{render, RenderCtx, TemplateRegistry};
use super::{GenConfig, Skip, SkipReason};
use crate::audiodsp::{WindowRecord, OTHER_LABEL};
use crate::manifest::{instance_id, ClipRecord, Instance, Task, LABEL_JOIN, NONE_TARGET};
use crate::rng::DetRng;
use crate::taxonomy::{LookupKind, TaxonRecord, TaxonomyTable};
use crate::text::format_number;

pub const CALLTYPE_LABELS: [&str; 2] = ["call", "song"];
pub const LIFESTAGE_LABELS: [&str; 3] = ["adult", "juvenile", "nestling"];

const LLM_CAPTION_PREFIX: &str = "llm_caption";

struct Draft {
    task: Task,
    counter: usize,
    window: Option<(f64, f64)>,
    instruction: String,
    target: String,
    options: Option<Vec<String>>,
    meta: BTreeMap<String, String>,
}

impl Draft {
    fn new(task: Task, counter: usize, instruction: String, target: String) -> Self {
        Self {
            task,
            counter,
            window: None,
            instruction,
            target,
            options: None,
            meta: BTreeMap::new(),
        }
    }

    fn meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    fn finish(self, dataset: &str, clip_id: &str, cfg: &GenConfig) -> Instance {
        Instance {
            instance_id: instance_id(dataset, clip_id, self.task, self.counter),
            clip_id: clip_id.to_string(),
            window: self.window,
            task: self.task,
            stage: cfg.stage,
            instruction: self.instruction,
            target: self.target,
            options: self.options,
            meta: self.meta,
        }
    }
}

fn rng_for(cfg: &GenConfig, task: &str, dataset: &str, clip_id: &str, variant: &str) -> DetRng {
    DetRng::derived(cfg.seed, &[task, dataset, clip_id, variant])
}

fn skip(clip: &ClipRecord, task: Task, reason: SkipReason) -> Skip {
    Skip {
        clip_id: clip.clip_id.clone(),
        task,
        reason,
    }
}

fn resolve_taxa<'a>(clip: &ClipRecord, table: &'a TaxonomyTable, task: Task) -> Result<Vec<&'a TaxonRecord>, Skip> {
    let ids = clip.taxa();
    if ids.is_empty() {
        return Err(skip(clip, task, SkipReason::NoTaxa));
    }
    ids.into_iter()
        .map(|id| {
            table
                .by_id(id)
                .ok_or_else(|| skip(clip, task, SkipReason::UnknownTaxon(id.to_string())))
        })
        .collect()
}

fn sorted_join<'s>(names: impl IntoIterator<Item = &'s str>) -> String {
    let set: BTreeSet<&str> = names.into_iter().collect();
    set.into_iter().collect::<Vec<_>>().join(LABEL_JOIN)
}

/// Focal open-ended, focal with options, and (when the clip lists more than
/// one species or has no focal) an all-species open-ended variant.
pub fn gen_classification(
    clip: &ClipRecord,
    table: &TaxonomyTable,
    cfg: &GenConfig,
    registry: &TemplateRegistry,
) -> Result<Vec<Instance>, Skip> {
    let task = Task::Classification;
    let taxa = resolve_taxa(clip, table, task)?;
    let (ds, id) = (clip.dataset.as_str(), clip.clip_id.as_str());
    let mut out = Vec::new();
    let mut counter = 0;

    if let Some(focal_id) = &clip.focal_taxon {
        let focal = taxa[0];
        debug_assert_eq!(&focal.taxon_id, focal_id);

        let mut rng = rng_for(cfg, task.as_str(), ds, id, "focal_open");
        let (kind, fallback) = choose_kind(cfg, &mut rng, &[focal]);
        let tpl = registry.pick("classification", &mut rng);
        let instruction = render(&tpl.pattern, &RenderCtx { options: None, name_kind: Some(kind) });
        let mut d = Draft::new(task, counter, instruction, label(focal, kind).to_string())
            .meta("variant", "focal_open")
            .meta("template_id", tpl.template_id.clone())
            .meta("name_kind", kind.as_str());
        if fallback {
            d = d.meta("name_kind_fallback", "true");
        }
        out.push(d.finish(ds, id, cfg));
        counter += 1;

        let mut rng = rng_for(cfg, task.as_str(), ds, id, "focal_options");
        let (kind, fallback) = choose_kind(cfg, &mut rng, &[focal]);
        let exclude: Vec<&str> = taxa.iter().map(|r| r.taxon_id.as_str()).collect();
        let n = cfg.options_for(task);
        let dis = draw_distractors(table, &[focal], &exclude, n - 1, kind, cfg, &mut rng);
        let mut options: Vec<String> = std::iter::once(focal)
            .chain(dis.records.iter().copied())
            .map(|r| label(r, kind).to_string())
            .collect();
        rng.shuffle(&mut options);
        let tpl = registry.pick("classification_options", &mut rng);
        let instruction = render(&tpl.pattern, &RenderCtx { options: Some(&options), name_kind: Some(kind) });
        let mut d = Draft::new(task, counter, instruction, label(focal, kind).to_string())
            .meta("variant", "focal_options")
            .meta("template_id", tpl.template_id.clone())
            .meta("name_kind", kind.as_str())
            .meta("negatives", levels_meta(&dis.levels));
        if dis.escalated > 0 {
            d = d.meta("negatives_escalated", dis.escalated.to_string());
        }
        if fallback {
            d = d.meta("name_kind_fallback", "true");
        }
        d.options = Some(options);
        out.push(d.finish(ds, id, cfg));
        counter += 1;
    }

    if taxa.len() > 1 || clip.focal_taxon.is_none() {
        let mut rng = rng_for(cfg, task.as_str(), ds, id, "all_species");
        let (kind, fallback) = choose_kind(cfg, &mut rng, &taxa);
        let tpl = registry.pick("classification_all", &mut rng);
        let instruction = render(&tpl.pattern, &RenderCtx { options: None, name_kind: Some(kind) });
        let target = sorted_join(taxa.iter().map(|r| label(r, kind)));
        let mut d = Draft::new(task, counter, instruction, target)
            .meta("variant", "all_species")
            .meta("template_id", tpl.template_id.clone())
            .meta("name_kind", kind.as_str());
        if fallback {
            d = d.meta("name_kind_fallback", "true");
        }
        out.push(d.finish(ds, id, cfg));
    }
    Ok(out)
}

/// True labels of a clip or soundscape window, resolved against the backbone.
#[derive(Debug, Clone)]
pub struct DetectionSubject<'a> {
    pub dataset: String,
    pub clip_id: String,
    pub window: Option<(f64, f64)>,
    pub counter: usize,
    pub present: Vec<&'a TaxonRecord>,
    /// Species heard but not targeted (mapped to "other"); kept out of the
    /// options so that "None" stays correct.
    pub hidden: Vec<&'a TaxonRecord>,
    /// Labels that did not resolve to a taxon, including "other".
    pub unresolved: Vec<String>,
}

fn resolve_label<'a>(table: &'a TaxonomyTable, label: &str) -> Option<&'a TaxonRecord> {
    table.by_id(label).or_else(|| table.resolve(label, LookupKind::Any).ok())
}

impl<'a> DetectionSubject<'a> {
    pub fn from_clip(clip: &ClipRecord, table: &'a TaxonomyTable) -> Result<Self, Skip> {
        Ok(Self {
            dataset: clip.dataset.clone(),
            clip_id: clip.clip_id.clone(),
            window: None,
            counter: 0,
            present: resolve_taxa(clip, table, Task::Detection)?,
            hidden: Vec::new(),
            unresolved: Vec::new(),
        })
    }

    /// `counter` is the window's position within its clip.
    pub fn from_window(w: &WindowRecord, counter: usize, table: &'a TaxonomyTable) -> Self {
        let mut present = Vec::new();
        let mut unresolved = Vec::new();
        for l in &w.labels {
            match (l.as_str() != OTHER_LABEL).then(|| resolve_label(table, l)).flatten() {
                Some(r) if !present.iter().any(|p: &&TaxonRecord| p.taxon_id == r.taxon_id) => present.push(r),
                Some(_) => {}
                None => unresolved.push(l.clone()),
            }
        }
        let hidden = w
            .raw_labels
            .iter()
            .filter_map(|l| resolve_label(table, l))
            .filter(|r| !present.iter().any(|p| p.taxon_id == r.taxon_id))
            .collect();
        Self {
            dataset: w.dataset.clone(),
            clip_id: w.clip_id.clone(),
            window: Some((w.start_s, w.end_s)),
            counter,
            present,
            hidden,
            unresolved,
        }
    }
}

/// With probability `detection_none_rate` (or always, when nothing is
/// present) every option is a non-present species and the target is
/// "None". Otherwise between 1 and `min(|present|, n - 1)` present species
/// are included and the target lists exactly those, sorted.
pub fn gen_detection(
    subject: &DetectionSubject<'_>,
    table: &TaxonomyTable,
    cfg: &GenConfig,
    registry: &TemplateRegistry,
) -> Instance {
    let task = Task::Detection;
    let counter = subject.counter.to_string();
    let mut rng = rng_for(cfg, task.as_str(), &subject.dataset, &subject.clip_id, &counter);
    let none_draw = rng.bernoulli(cfg.detection_none_rate);
    let (kind, fallback) = choose_kind(cfg, &mut rng, &subject.present);
    let n = cfg.options_for(task);
    let exclude: Vec<&str> = subject
        .present
        .iter()
        .chain(&subject.hidden)
        .map(|r| r.taxon_id.as_str())
        .collect();

    let none_branch = none_draw || subject.present.is_empty();
    let included: Vec<&TaxonRecord> = if none_branch {
        Vec::new()
    } else {
        let m = 1 + rng.below(subject.present.len().min(n - 1));
        let mut idx = rng.sample_indices(subject.present.len(), m);
        idx.sort_unstable();
        idx.into_iter().map(|i| subject.present[i]).collect()
    };
    let dis = draw_distractors(table, &subject.present, &exclude, n - included.len(), kind, cfg, &mut rng);
    let mut options: Vec<String> = included
        .iter()
        .chain(&dis.records)
        .map(|r| label(r, kind).to_string())
        .collect();
    rng.shuffle(&mut options);
    let target = if included.is_empty() {
        NONE_TARGET.to_string()
    } else {
        sorted_join(included.iter().map(|r| label(r, kind)))
    };

    let tpl = registry.pick("detection", &mut rng);
    let instruction = render(&tpl.pattern, &RenderCtx { options: Some(&options), name_kind: Some(kind) });
    let mut d = Draft::new(task, subject.counter, instruction, target)
        .meta("branch", if none_branch { "none" } else { "present" })
        .meta("template_id", tpl.template_id.clone())
        .meta("name_kind", kind.as_str())
        .meta("negatives", levels_meta(&dis.levels));
    if dis.escalated > 0 {
        d = d.meta("negatives_escalated", dis.escalated.to_string());
    }
    if fallback {
        d = d.meta("name_kind_fallback", "true");
    }
    if !subject.unresolved.is_empty() {
        d = d.meta("unresolved_labels", subject.unresolved.join(LABEL_JOIN));
    }
    d.window = subject.window;
    d.options = Some(options);
    d.finish(&subject.dataset, &subject.clip_id, cfg)
}

fn closed_set(
    clip: &ClipRecord,
    cfg: &GenConfig,
    registry: &TemplateRegistry,
    task: Task,
    key: &'static str,
    labels: &[&str],
) -> Result<Instance, Skip> {
    let raw = clip.attrs.get(key).ok_or_else(|| skip(clip, task, SkipReason::MissingAttr(key)))?;
    let value = raw.trim().to_lowercase();
    if !labels.contains(&value.as_str()) {
        return Err(skip(clip, task, SkipReason::BadValue { key, value: raw.clone() }));
    }
    let mut rng = rng_for(cfg, task.as_str(), &clip.dataset, &clip.clip_id, "0");
    let mut options: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
    rng.shuffle(&mut options);
    let tpl = registry.pick(task.as_str(), &mut rng);
    let instruction = render(&tpl.pattern, &RenderCtx { options: Some(&options), name_kind: None });
    let mut d = Draft::new(task, 0, instruction, value).meta("template_id", tpl.template_id.clone());
    d.options = Some(options);
    Ok(d.finish(&clip.dataset, &clip.clip_id, cfg))
}

pub fn gen_calltype(clip: &ClipRecord, cfg: &GenConfig, registry: &TemplateRegistry) -> Result<Instance, Skip> {
    closed_set(clip, cfg, registry, Task::Calltype, "vocalization_kind", &CALLTYPE_LABELS)
}

pub fn gen_lifestage(clip: &ClipRecord, cfg: &GenConfig, registry: &TemplateRegistry) -> Result<Instance, Skip> {
    closed_set(clip, cfg, registry, Task::Lifestage, "lifestage", &LIFESTAGE_LABELS)
}

/// One instance per caption: the original first, then every attrs key
/// starting with `llm_caption` in key order.
pub fn gen_caption(clip: &ClipRecord, cfg: &GenConfig, registry: &TemplateRegistry) -> Result<Vec<Instance>, Skip> {
    let task = Task::Captioning;
    let captions: Vec<(&str, &str)> = clip
        .caption
        .iter()
        .map(|c| ("original", c.as_str()))
        .chain(
            clip.attrs
                .iter()
                .filter(|(k, _)| k.starts_with(LLM_CAPTION_PREFIX))
                .map(|(k, v)| (k.as_str(), v.as_str())),
        )
        .filter(|(_, c)| !c.trim().is_empty())
        .collect();
    if captions.is_empty() {
        return Err(skip(clip, task, SkipReason::NoCaption));
    }
    Ok(captions
        .into_iter()
        .enumerate()
        .map(|(i, (source, caption))| {
            let mut rng = rng_for(cfg, task.as_str(), &clip.dataset, &clip.clip_id, &i.to_string());
            let tpl = registry.pick("captioning", &mut rng);
            Draft::new(task, i, render(&tpl.pattern, &RenderCtx::default()), caption.to_string())
                .meta("template_id", tpl.template_id.clone())
                .meta("caption_source", source)
                .finish(&clip.dataset, &clip.clip_id, cfg)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountKind {
    Speakers,
    Individuals,
    Instruments,
}

impl CountKind {
    fn attr(self) -> &'static str {
        match self {
            CountKind::Speakers => "n_speakers",
            CountKind::Individuals => "n_individuals",
            CountKind::Instruments => "n_instruments",
        }
    }

    /// Instrument counts belong to the mixture task family.
    pub fn task(self) -> Task {
        match self {
            CountKind::Instruments => Task::MixtureCount,
            _ => Task::Count,
        }
    }

    fn group(self) -> &'static str {
        match self {
            CountKind::Speakers => "count_speakers",
            CountKind::Individuals => "count_individuals",
            CountKind::Instruments => "mixture_count",
        }
    }
}

/// Speaker and individual counts share the `count` task, so their instance
/// counters differ to keep ids unique.
pub fn gen_count(
    clip: &ClipRecord,
    kind: CountKind,
    cfg: &GenConfig,
    registry: &TemplateRegistry,
) -> Result<Instance, Skip> {
    let task = kind.task();
    let key = kind.attr();
    let raw = clip.attrs.get(key).ok_or_else(|| skip(clip, task, SkipReason::MissingAttr(key)))?;
    let n: u64 = match raw.trim().parse() {
        Ok(n) if n >= 1 => n,
        _ => return Err(skip(clip, task, SkipReason::BadValue { key, value: raw.clone() })),
    };
    let counter = match kind {
        CountKind::Individuals => 1,
        _ => 0,
    };
    let mut rng = rng_for(cfg, task.as_str(), &clip.dataset, &clip.clip_id, key);
    let tpl = registry.pick(kind.group(), &mut rng);
    Ok(Draft::new(task, counter, render(&tpl.pattern, &RenderCtx::default()), n.to_string())
        .meta("template_id", tpl.template_id.clone())
        .meta("count_kind", key)
        .finish(&clip.dataset, &clip.clip_id, cfg))
}

const QUALITIES: [(&str, &[&str], &str); 10] = [
    ("bright", &[], "This sound is bright."),
    ("dark", &[], "This sound is dark."),
    ("distortion", &["distorted"], "This sound is distorted."),
    ("fast_decay", &[], "This sound decays quickly."),
    ("long_release", &[], "This sound has a long release."),
    ("multiphonic", &[], "This sound is multiphonic."),
    ("nonlinear_env", &["nonlinear_envelope"], "This sound has an irregular envelope."),
    ("percussive", &[], "This sound is percussive."),
    ("reverb", &["reverberant"], "This sound is reverberant."),
    ("tempo_synced", &[], "This sound is synced to a tempo."),
];

/// Fixed description for a quality tag; hyphens, spaces and case are ignored.
pub fn quality_description(quality: &str) -> Option<&'static str> {
    let key = quality.trim().to_lowercase().replace(['-', ' '], "_");
    QUALITIES
        .iter()
        .find(|(name, aliases, _)| *name == key || aliases.contains(&key.as_str()))
        .map(|(_, _, d)| *d)
}

/// Accepts a JSON string array or a comma-separated list.
fn parse_list(raw: &str) -> Option<Vec<String>> {
    let raw = raw.trim();
    let items: Vec<String> = if raw.starts_with('[') {
        serde_json::from_str::<Vec<String>>(raw).ok()?
    } else {
        raw.split(',').map(String::from).collect()
    };
    let items: Vec<String> = items
        .into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    (!items.is_empty()).then_some(items)
}

#[derive(Debug, Default)]
pub struct MusicOutput {
    pub instances: Vec<Instance>,
    pub skipped: Vec<Skip>,
}

/// Pitch, instrument, velocity and quality instances from note attributes;
/// each missing or malformed field skips only its own sub-task.
pub fn gen_music(clip: &ClipRecord, cfg: &GenConfig, registry: &TemplateRegistry) -> MusicOutput {
    let mut out = MusicOutput::default();
    let mut emit = |task: Task, key: &'static str, parsed: Result<String, SkipReason>| match parsed {
        Ok(target) => {
            let mut rng = rng_for(cfg, task.as_str(), &clip.dataset, &clip.clip_id, "0");
            let tpl = registry.pick(task.as_str(), &mut rng);
            out.instances.push(
                Draft::new(task, 0, render(&tpl.pattern, &RenderCtx::default()), target)
                    .meta("template_id", tpl.template_id.clone())
                    .meta("source_attr", key)
                    .finish(&clip.dataset, &clip.clip_id, cfg),
            );
        }
        Err(reason) => out.skipped.push(skip(clip, task, reason)),
    };
    let field = |key: &'static str| clip.attrs.get(key).ok_or(SkipReason::MissingAttr(key));
    let bad = |key: &'static str, v: &str| SkipReason::BadValue { key, value: v.to_string() };

    emit(
        Task::Pitch,
        "pitch_hz",
        field("pitch_hz").and_then(|v| match v.trim().parse::<f64>() {
            Ok(hz) if hz.is_finite() && hz > 0.0 => Ok(format_number(hz)),
            _ => Err(bad("pitch_hz", v)),
        }),
    );
    emit(
        Task::Instrument,
        "instrument",
        field("instrument").and_then(|v| {
            let v2 = v.trim();
            if v2.is_empty() {
                Err(bad("instrument", v))
            } else {
                Ok(v2.to_string())
            }
        }),
    );
    emit(
        Task::Velocity,
        "velocity",
        field("velocity").and_then(|v| match v.trim().parse::<f64>() {
            Ok(x) if (0.0..=1.0).contains(&x) => Ok(format_number(x)),
            _ => Err(bad("velocity", v)),
        }),
    );
    emit(
        Task::Quality,
        "qualities",
        field("qualities").and_then(|v| {
            let items = parse_list(v).ok_or_else(|| bad("qualities", v))?;
            let descs: Option<Vec<&str>> = items.iter().map(|q| quality_description(q)).collect();
            let mut descs = descs.ok_or_else(|| bad("qualities", v))?;
            descs.dedup();
            Ok(descs.join(" "))
        }),
    );
    out
}

/// Sorted instrument names of a mixture from `attrs.instruments`.
pub fn gen_mixture_names(clip: &ClipRecord, cfg: &GenConfig, registry: &TemplateRegistry) -> Result<Instance, Skip> {
    let task = Task::MixtureNames;
    let key = "instruments";
    let raw = clip.attrs.get(key).ok_or_else(|| skip(clip, task, SkipReason::MissingAttr(key)))?;
    let names = parse_list(raw).ok_or_else(|| skip(clip, task, SkipReason::BadValue { key, value: raw.clone() }))?;
    let mut rng = rng_for(cfg, task.as_str(), &clip.dataset, &clip.clip_id, "0");
    let tpl = registry.pick("mixture_names", &mut rng);
    Ok(
        Draft::new(task, 0, render(&tpl.pattern, &RenderCtx::default()), sorted_join(names.iter().map(String::as_str)))
            .meta("template_id", tpl.template_id.clone())
            .finish(&clip.dataset, &clip.clip_id, cfg),
    )
}
