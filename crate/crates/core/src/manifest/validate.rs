use std::collections::HashMap;

use super::{split_target, ClipRecord, Instance, ManifestError, Task, NONE_TARGET};
use crate::taxonomy::TaxonomyTable;

/// Every invariant violation of one clip; empty when the clip is valid.
pub fn validate_clip(clip: &ClipRecord, table: Option<&TaxonomyTable>) -> Vec<ManifestError> {
    let id = clip.clip_id.as_str();
    let mut errs = Vec::new();
    let mut bad = |field: &str, msg: String| errs.push(ManifestError::invariant(id, field, msg));

    if clip.clip_id.is_empty() {
        bad("clip_id", "empty".into());
    }
    if clip.sample_rate_hz == 0 {
        bad("sample_rate_hz", "must be positive".into());
    }
    if !(clip.duration_s.is_finite() && clip.duration_s > 0.0) {
        bad("duration_s", format!("must be positive and finite, got {}", clip.duration_s));
    }
    for (i, ev) in clip.events.iter().enumerate() {
        let field = format!("events[{i}]");
        if !(ev.onset_s.is_finite() && ev.offset_s.is_finite()) {
            bad(&field, "non-finite bound".into());
        } else if ev.onset_s < 0.0 {
            bad(&field, format!("onset_s {} < 0", ev.onset_s));
        } else if ev.offset_s <= ev.onset_s {
            bad(&field, format!("offset_s {} <= onset_s {}", ev.offset_s, ev.onset_s));
        } else if ev.offset_s > clip.duration_s {
            bad(&field, format!("offset_s {} beyond duration {}", ev.offset_s, clip.duration_s));
        }
    }
    if let Some(table) = table {
        if let Some(f) = &clip.focal_taxon {
            if table.by_id(f).is_none() {
                bad("focal_taxon", format!("unknown taxon_id {f:?}"));
            }
        }
        for t in &clip.all_taxa {
            if table.by_id(t).is_none() {
                bad("all_taxa", format!("unknown taxon_id {t:?}"));
            }
        }
    }
    errs
}

/// Validates a batch, including clip_id uniqueness.
pub fn validate_clips(clips: &[ClipRecord], table: Option<&TaxonomyTable>) -> Vec<ManifestError> {
    let mut errs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for c in clips {
        errs.extend(validate_clip(c, table));
        if !seen.insert(c.clip_id.as_str()) {
            errs.push(ManifestError::invariant(&c.clip_id, "clip_id", "duplicate clip_id"));
        }
    }
    errs
}

/// Checks option membership and, when the clip durations are known, the
/// window bounds.
pub fn validate_instance(inst: &Instance, durations: Option<&HashMap<String, f64>>) -> Vec<ManifestError> {
    let id = inst.instance_id.as_str();
    let mut errs = Vec::new();
    if let Some(opts) = &inst.options {
        let mut sorted: Vec<&String> = opts.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            errs.push(ManifestError::invariant(id, "options", "duplicate option"));
        }
        let ok = if inst.target == NONE_TARGET {
            true
        } else if inst.task == Task::Detection {
            split_target(&inst.target).iter().all(|t| opts.iter().any(|o| o == t))
        } else {
            opts.contains(&inst.target)
        };
        if !ok {
            errs.push(ManifestError::invariant(id, "target", format!("{:?} not among options", inst.target)));
        }
    }
    if let Some((start, end)) = inst.window {
        let dur = durations.and_then(|d| d.get(&inst.clip_id)).copied();
        let in_clip = dur.is_none_or(|d| end <= d + 1e-9);
        if !(start >= 0.0 && start < end && in_clip) {
            errs.push(ManifestError::invariant(id, "window", format!("({start}, {end}) outside clip")));
        }
    }
    errs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::Stage;

    fn inst(task: Task, target: &str, options: Option<&[&str]>) -> Instance {
        Instance {
            instance_id: "d/c/x/0000".into(),
            clip_id: "c".into(),
            window: None,
            task,
            stage: Stage::Stage2,
            instruction: "?".into(),
            target: target.into(),
            options: options.map(|o| o.iter().map(|s| s.to_string()).collect()),
            meta: Default::default(),
        }
    }

    #[test]
    fn target_must_be_an_option() {
        assert!(validate_instance(&inst(Task::Classification, "a", Some(&["a", "b"])), None).is_empty());
        assert_eq!(validate_instance(&inst(Task::Classification, "z", Some(&["a", "b"])), None).len(), 1);
        assert!(validate_instance(&inst(Task::Detection, "None", Some(&["a", "b"])), None).is_empty());
        assert!(validate_instance(&inst(Task::Detection, "a, b", Some(&["a", "b", "c"])), None).is_empty());
        assert_eq!(validate_instance(&inst(Task::Classification, "a", Some(&["a", "a"])), None).len(), 1);
    }

    #[test]
    fn window_within_clip() {
        let mut i = inst(Task::Detection, "None", None);
        i.window = Some((55.0, 60.0));
        let d: HashMap<String, f64> = [("c".to_string(), 60.0)].into();
        assert!(validate_instance(&i, Some(&d)).is_empty());
        i.window = Some((55.0, 61.0));
        assert_eq!(validate_instance(&i, Some(&d)).len(), 1);
        i.window = Some((5.0, 5.0));
        assert_eq!(validate_instance(&i, None).len(), 1);
    }
}
