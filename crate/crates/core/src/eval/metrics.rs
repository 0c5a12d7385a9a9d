//! Accuracy, detection macro-F1, the CLAP template rule and the report type.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::snap::LabelSet;
use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub items: usize,
    pub exact: usize,
    pub snapped: usize,
    pub discarded_fragments: usize,
    pub none_predictions: usize,
    /// Labels left out of the macro mean: no support and never predicted.
    pub excluded_labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub task: String,
    pub metric: String,
    pub primary_score: f64,
    pub per_label: BTreeMap<String, LabelScore>,
    pub diagnostics: Diagnostics,
    pub flags: Vec<String>,
}

impl MetricReport {
    fn new(task: &str, metric: &str, primary_score: f64) -> Self {
        Self {
            task: task.to_string(),
            metric: metric.to_string(),
            primary_score,
            per_label: BTreeMap::new(),
            diagnostics: Diagnostics::default(),
            flags: Vec::new(),
        }
    }
}

/// `task,label,precision,recall,f1,support` rows for every report.
pub fn per_label_csv(reports: &[MetricReport]) -> String {
    let mut out = String::from("task,label,precision,recall,f1,support\n");
    for r in reports {
        for (label, s) in &r.per_label {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                csv_field(&r.task),
                csv_field(label),
                s.precision,
                s.recall,
                s.f1,
                s.support
            );
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Confusion {
    tp: usize,
    fp: usize,
    fn_: usize,
}

impl Confusion {
    fn score(self) -> LabelScore {
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        LabelScore {
            precision,
            recall,
            f1,
            support: self.tp + self.fn_,
        }
    }
}

fn check_ids<'a, P, R>(preds: &'a BTreeMap<String, P>, refs: &'a BTreeMap<String, R>) -> Result<(), EvalError> {
    let missing: Vec<String> = refs.keys().filter(|k| !preds.contains_key(*k)).cloned().collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingPrediction(missing));
    }
    let extra: Vec<String> = preds.keys().filter(|k| !refs.contains_key(*k)).cloned().collect();
    if !extra.is_empty() {
        return Err(EvalError::UnknownInstance(extra));
    }
    Ok(())
}

/// Pairs prediction texts by id, rejecting duplicate ids.
pub fn index_predictions<'a>(
    preds: impl IntoIterator<Item = (&'a str, &'a str)>,
) -> Result<BTreeMap<String, &'a str>, EvalError> {
    let mut out = BTreeMap::new();
    for (id, text) in preds {
        if out.insert(id.to_string(), text).is_some() {
            return Err(EvalError::DuplicatePrediction(id.to_string()));
        }
    }
    Ok(out)
}

/// Fraction of items whose prediction snaps to the reference label. Each item
/// may carry its own label set (its options); `None` uses `labels`.
pub fn accuracy(
    task: &str,
    predictions: &BTreeMap<String, &str>,
    references: &BTreeMap<String, (&str, Option<&LabelSet>)>,
    labels: &LabelSet,
) -> Result<MetricReport, EvalError> {
    check_ids(predictions, references)?;
    if references.is_empty() {
        return Err(EvalError::EmptyInput("accuracy"));
    }
    let mut diag = Diagnostics::default();
    let mut correct = 0usize;
    let mut confusion: BTreeMap<String, Confusion> = BTreeMap::new();
    for (id, (reference, own)) in references {
        let set = own.unwrap_or(labels);
        let (i, d) = set.nearest(predictions[id]);
        let predicted = set.get(i);
        if d == 0 {
            diag.exact += 1;
        } else {
            diag.snapped += 1;
        }
        let hit = set.position(reference) == Some(i);
        if hit {
            correct += 1;
            confusion.entry(reference.to_string()).or_default().tp += 1;
        } else {
            confusion.entry(reference.to_string()).or_default().fn_ += 1;
            confusion.entry(predicted.to_string()).or_default().fp += 1;
        }
    }
    diag.items = references.len();
    let mut report = MetricReport::new(task, "accuracy", correct as f64 / references.len() as f64);
    report.per_label = confusion.into_iter().map(|(l, c)| (l, c.score())).collect();
    report.diagnostics = diag;
    Ok(report)
}

/// Macro-F1 over `universe`. Labels with zero support that are never
/// predicted are left out of the mean; if that leaves nothing (every chunk
/// empty and predicted empty) the agreement is perfect and the score is 1.
pub fn detection_f1(
    task: &str,
    predictions: &BTreeMap<String, BTreeSet<String>>,
    references: &BTreeMap<String, BTreeSet<String>>,
    universe: &[String],
) -> Result<MetricReport, EvalError> {
    if predictions.keys().ne(references.keys()) {
        let p: BTreeSet<&String> = predictions.keys().collect();
        let r: BTreeSet<&String> = references.keys().collect();
        let diff: Vec<String> = p.symmetric_difference(&r).map(|s| s.to_string()).collect();
        return Err(EvalError::ChunkMismatch(diff));
    }
    if references.is_empty() {
        return Err(EvalError::EmptyInput("detection"));
    }
    let mut conf: BTreeMap<&str, Confusion> = universe.iter().map(|l| (l.as_str(), Confusion::default())).collect();
    for (id, truth) in references {
        let pred = &predictions[id];
        for l in pred.iter().chain(truth) {
            if !conf.contains_key(l.as_str()) {
                return Err(EvalError::UnknownLabel(l.clone()));
            }
        }
        for l in pred.union(truth) {
            let c = conf.get_mut(l.as_str()).expect("checked above");
            match (pred.contains(l), truth.contains(l)) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => {}
            }
        }
    }
    let mut report = MetricReport::new(task, "macro_f1", 0.0);
    let mut sum = 0.0;
    let mut active = 0usize;
    for (label, c) in conf {
        let s = c.score();
        if c.tp + c.fp + c.fn_ == 0 {
            report.diagnostics.excluded_labels.push(label.to_string());
        } else {
            sum += s.f1;
            active += 1;
        }
        report.per_label.insert(label.to_string(), s);
    }
    report.primary_score = if active == 0 {
        report.flags.push("no_active_labels".into());
        1.0
    } else {
        sum / active as f64
    };
    report.diagnostics.items = references.len();
    report.diagnostics.none_predictions = predictions.values().filter(|p| p.is_empty()).count();
    Ok(report)
}

fn cosine(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(EvalError::ZeroVector);
    }
    Ok(a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb))
}

/// Positive when the audio embedding is strictly closer (cosine) to the
/// label than to the negative template.
pub fn clap_detect(audio: &[f64], label: &[f64], template: &[f64]) -> Result<bool, EvalError> {
    if audio.len() != label.len() || audio.len() != template.len() {
        return Err(EvalError::DimensionMismatch {
            audio: audio.len(),
            label: label.len(),
            template: template.len(),
        });
    }
    if audio.iter().chain(label).chain(template).any(|x| !x.is_finite()) {
        return Err(EvalError::InvalidScore("non-finite embedding value".into()));
    }
    Ok(cosine(audio, label)? > cosine(audio, template)?)
}
