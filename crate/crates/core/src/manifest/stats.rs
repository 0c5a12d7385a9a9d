//! Aggregate statistics over clip manifests and instance files.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{ClipRecord, Instance, Task, NONE_TARGET};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DatasetStats {
    pub clips: usize,
    pub hours: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ClipStats {
    pub clips: usize,
    pub hours: f64,
    pub per_dataset: BTreeMap<String, DatasetStats>,
    /// clips per taxon_id (focal or background)
    pub taxa: BTreeMap<String, usize>,
    pub events: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TaskStats {
    pub instances: usize,
    pub with_options: usize,
    pub targets: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InstanceStats {
    pub instances: usize,
    pub per_dataset: BTreeMap<String, usize>,
    pub per_task: BTreeMap<String, TaskStats>,
    pub detection_instances: usize,
    pub detection_none_rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StatsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clips: Option<ClipStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instances: Option<InstanceStats>,
}

/// Seconds to hours, rounded to one decimal.
pub fn round_hours(seconds: f64) -> f64 {
    (seconds / 3600.0 * 10.0).round() / 10.0
}

pub fn clip_stats(clips: &[ClipRecord]) -> ClipStats {
    let mut seconds: BTreeMap<String, (usize, f64)> = BTreeMap::new();
    let mut stats = ClipStats::default();
    let mut total = 0.0;
    for c in clips {
        let e = seconds.entry(c.dataset.clone()).or_default();
        e.0 += 1;
        e.1 += c.duration_s;
        total += c.duration_s;
        for t in c.taxa() {
            *stats.taxa.entry(t.to_string()).or_default() += 1;
        }
        stats.events += c.events.len();
    }
    stats.clips = clips.len();
    stats.hours = round_hours(total);
    stats.per_dataset = seconds
        .into_iter()
        .map(|(k, (n, s))| {
            (
                k,
                DatasetStats {
                    clips: n,
                    hours: round_hours(s),
                },
            )
        })
        .collect();
    stats
}

pub fn instance_stats(instances: &[Instance]) -> InstanceStats {
    let mut stats = InstanceStats::default();
    let mut none = 0usize;
    for inst in instances {
        let dataset = inst.instance_id.split('/').next().unwrap_or_default();
        *stats.per_dataset.entry(dataset.to_string()).or_default() += 1;
        let t = stats.per_task.entry(inst.task.as_str().to_string()).or_default();
        t.instances += 1;
        t.with_options += usize::from(inst.options.is_some());
        *t.targets.entry(inst.target.clone()).or_default() += 1;
        if inst.task == Task::Detection {
            stats.detection_instances += 1;
            none += usize::from(inst.target == NONE_TARGET);
        }
    }
    stats.instances = instances.len();
    if stats.detection_instances > 0 {
        stats.detection_none_rate = none as f64 / stats.detection_instances as f64;
    }
    stats
}
