//! End-to-end scoring of a predictions file against generated instances.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::Deserialize;

use super::cider::{cider_d, spider, DEFAULT_MAX_N, DEFAULT_SIGMA};
use super::metrics::{accuracy, detection_f1, index_predictions, MetricReport};
use super::snap::{parse_detections, LabelSet, DEFAULT_OVERLAP_THRESHOLD};
use super::EvalError;
use crate::manifest::{split_target, Instance, PredictionRecord, Task};

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub overlap_threshold: f64,
    /// SPICE per captioning instance id, in [0, 1].
    pub spice: Option<HashMap<String, f64>>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            overlap_threshold: DEFAULT_OVERLAP_THRESHOLD,
            spice: None,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpiceRow {
    instance_id: String,
    spice: f64,
}

/// Reads `{"instance_id": ..., "spice": ...}` lines.
pub fn read_spice(path: impl AsRef<Path>) -> Result<HashMap<String, f64>, EvalError> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: SpiceRow = serde_json::from_str(line).map_err(|e| EvalError::Parse {
            line: i as u64 + 1,
            message: e.to_string(),
        })?;
        if out.insert(row.instance_id.clone(), row.spice).is_some() {
            return Err(EvalError::DuplicatePrediction(row.instance_id));
        }
    }
    Ok(out)
}

/// One report per task present in `instances`, in task order. Detection is
/// scored with macro-F1, captioning with CIDEr-D (SPIDEr when SPICE is
/// supplied) and every other task with accuracy after snapping. Items with
/// options snap onto their own options; the rest onto every target and
/// option seen for the task.
pub fn evaluate(
    instances: &[Instance],
    predictions: &[PredictionRecord],
    opts: &EvalOptions,
) -> Result<Vec<MetricReport>, EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::EmptyInput("predictions"));
    }
    let preds = index_predictions(predictions.iter().map(|p| (p.instance_id.as_str(), p.text.as_str())))?;
    let known: BTreeSet<&str> = instances.iter().map(|i| i.instance_id.as_str()).collect();
    if known.len() != instances.len() {
        return Err(EvalError::DuplicateInstance);
    }
    let unknown: Vec<String> = preds.keys().filter(|k| !known.contains(k.as_str())).cloned().collect();
    if !unknown.is_empty() {
        return Err(EvalError::UnknownInstance(unknown));
    }
    let missing: Vec<String> = known.iter().filter(|k| !preds.contains_key(**k)).map(|k| k.to_string()).collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingPrediction(missing));
    }

    let mut by_task: BTreeMap<Task, Vec<&Instance>> = BTreeMap::new();
    for inst in instances {
        by_task.entry(inst.task).or_default().push(inst);
    }
    let mut reports = Vec::new();
    for (task, items) in by_task {
        let report = match task {
            Task::Detection => eval_detection(&items, &preds, opts.overlap_threshold)?,
            Task::Captioning => eval_captioning(&items, &preds, opts.spice.as_ref())?,
            _ => eval_accuracy(task, &items, &preds)?,
        };
        reports.push(report);
    }
    Ok(reports)
}

fn task_universe<'a>(items: &[&'a Instance], split: bool) -> Vec<&'a str> {
    let mut all: BTreeSet<&str> = BTreeSet::new();
    for inst in items {
        if split {
            all.extend(split_target(&inst.target));
        } else {
            all.insert(&inst.target);
        }
        if let Some(o) = &inst.options {
            all.extend(o.iter().map(String::as_str));
        }
    }
    all.into_iter().collect()
}

fn eval_accuracy(task: Task, items: &[&Instance], preds: &BTreeMap<String, &str>) -> Result<MetricReport, EvalError> {
    let universe = LabelSet::from_unsorted(task_universe(items, false))?;
    let own: Vec<Option<LabelSet>> = items
        .iter()
        .map(|i| i.options.as_ref().map(|o| LabelSet::from_unsorted(o.iter().map(String::as_str))).transpose())
        .collect::<Result<_, _>>()?;
    let refs: BTreeMap<String, (&str, Option<&LabelSet>)> = items
        .iter()
        .zip(&own)
        .map(|(i, o)| (i.instance_id.clone(), (i.target.as_str(), o.as_ref())))
        .collect();
    let task_preds: BTreeMap<String, &str> = refs.keys().map(|k| (k.clone(), preds[k])).collect();
    accuracy(task.as_str(), &task_preds, &refs, &universe)
}

fn eval_detection(items: &[&Instance], preds: &BTreeMap<String, &str>, threshold: f64) -> Result<MetricReport, EvalError> {
    let universe: Vec<String> = task_universe(items, true).into_iter().map(String::from).collect();
    let global = LabelSet::new(universe.iter().cloned())?;
    let mut p_sets = BTreeMap::new();
    let mut r_sets = BTreeMap::new();
    let (mut discarded, mut none_frags) = (0, 0);
    for inst in items {
        let own = inst
            .options
            .as_ref()
            .filter(|o| !o.is_empty())
            .map(|o| LabelSet::from_unsorted(o.iter().map(String::as_str)))
            .transpose()?;
        let set = own.as_ref().unwrap_or(&global);
        let parsed = parse_detections(preds[&inst.instance_id], set, threshold);
        discarded += parsed.discarded;
        none_frags += parsed.none_fragments;
        p_sets.insert(inst.instance_id.clone(), parsed.names(set).into_iter().map(String::from).collect());
        r_sets.insert(
            inst.instance_id.clone(),
            split_target(&inst.target).into_iter().map(String::from).collect::<BTreeSet<String>>(),
        );
    }
    let mut report = detection_f1(Task::Detection.as_str(), &p_sets, &r_sets, &universe)?;
    report.diagnostics.discarded_fragments = discarded;
    report.diagnostics.exact = none_frags;
    Ok(report)
}

fn eval_captioning(
    items: &[&Instance],
    preds: &BTreeMap<String, &str>,
    spice: Option<&HashMap<String, f64>>,
) -> Result<MetricReport, EvalError> {
    // every caption of the same clip (and window) is a reference for each
    // of that clip's instances
    let mut groups: BTreeMap<(&str, Option<(u64, u64)>), Vec<&str>> = BTreeMap::new();
    fn key(i: &Instance) -> (&str, Option<(u64, u64)>) {
        (i.clip_id.as_str(), i.window.map(|(a, b)| (a.to_bits(), b.to_bits())))
    }
    for inst in items {
        groups.entry(key(inst)).or_default().push(&inst.target);
    }
    let mut sorted: Vec<&&Instance> = items.iter().collect();
    sorted.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    let cands: Vec<&str> = sorted.iter().map(|i| preds[&i.instance_id]).collect();
    let refs: Vec<Vec<&str>> = sorted.iter().map(|i| groups[&key(i)].clone()).collect();
    let cider = cider_d(&cands, &refs, DEFAULT_MAX_N, DEFAULT_SIGMA)?;

    let spice_scores: Option<Vec<f64>> = match spice {
        None => None,
        Some(map) => {
            let ids: BTreeSet<&str> = sorted.iter().map(|i| i.instance_id.as_str()).collect();
            let extra: Vec<&String> = map.keys().filter(|k| !ids.contains(k.as_str())).collect();
            let missing: Vec<&&str> = ids.iter().filter(|k| !map.contains_key(**k)).collect();
            if !extra.is_empty() || !missing.is_empty() {
                return Err(EvalError::IdMismatch(format!(
                    "SPICE file: {} unknown ids, {} captioning ids without a score",
                    extra.len(),
                    missing.len()
                )));
            }
            Some(sorted.iter().map(|i| map[&i.instance_id]).collect())
        }
    };
    let sp = spider(&cider.per_item, spice_scores.as_deref())?;
    let (metric, score) = if sp.spice_missing {
        ("cider_d", cider.mean)
    } else {
        ("spider", sp.mean)
    };
    let mut report = MetricReport {
        task: Task::Captioning.as_str().to_string(),
        metric: metric.to_string(),
        primary_score: score,
        per_label: BTreeMap::new(),
        diagnostics: Default::default(),
        flags: Vec::new(),
    };
    if sp.spice_missing {
        report.flags.push("spice_missing".into());
    }
    report.diagnostics.items = items.len();
    report.diagnostics.none_predictions = cands.iter().filter(|c| c.trim().is_empty()).count();
    Ok(report)
}
