//! Soundscape chunking into overlapping windows with multi-label targets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{DspError, Result};
use crate::manifest::{ClipRecord, Event};

pub const DEFAULT_WIN_S: f64 = 10.0;
pub const DEFAULT_HOP_S: f64 = 5.0;
/// A label needs strictly more events than this to become a target.
pub const DEFAULT_MIN_COUNT: usize = 100;
pub const OTHER_LABEL: &str = "other";

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub start_s: f64,
    pub end_s: f64,
    pub labels: Vec<String>,
}

/// A clip no longer than `win_s` is a single window. Longer clips get
/// windows starting at `k * hop_s` while `start < duration_s`, each ending at
/// `min(start + win_s, duration_s)`; tail windows shorter than `hop_s` are
/// dropped.
pub fn window_clip(duration_s: f64, win_s: f64, hop_s: f64) -> Result<Vec<WindowSpec>> {
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(DspError::InvalidParams(format!("duration_s = {duration_s}")));
    }
    if !(hop_s.is_finite() && win_s.is_finite() && hop_s > 0.0 && hop_s <= win_s) {
        return Err(DspError::InvalidParams(format!("need 0 < hop_s <= win_s, got hop {hop_s}, win {win_s}")));
    }
    if duration_s <= win_s + EPS {
        return Ok(vec![WindowSpec {
            start_s: 0.0,
            end_s: duration_s,
            labels: Vec::new(),
        }]);
    }
    let mut out = Vec::new();
    for k in 0usize.. {
        let start = k as f64 * hop_s;
        if start + EPS >= duration_s {
            break;
        }
        let end = (start + win_s).min(duration_s);
        if end - start + EPS < hop_s {
            break;
        }
        out.push(WindowSpec {
            start_s: start,
            end_s: end,
            labels: Vec::new(),
        });
    }
    Ok(out)
}

/// Raw-label to target-label mapping; anything not mapped becomes "other".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelMap {
    pub targets: Vec<String>,
    pub counts: BTreeMap<String, usize>,
    pub min_count: usize,
}

impl LabelMap {
    pub fn from_targets(targets: impl IntoIterator<Item = impl Into<String>>) -> Self {
        let set: BTreeSet<String> = targets.into_iter().map(Into::into).collect();
        Self {
            targets: set.into_iter().collect(),
            ..Default::default()
        }
    }

    pub fn map<'a>(&'a self, raw: &'a str) -> &'a str {
        match self.targets.binary_search_by(|t| t.as_str().cmp(raw)) {
            Ok(i) => &self.targets[i],
            Err(_) => OTHER_LABEL,
        }
    }
}

/// Labels with more than `min_count` events become targets; the rest map to
/// "other". Counts are per event, not per clip.
pub fn build_label_set<'a>(events: impl IntoIterator<Item = &'a Event>, min_count: usize) -> LabelMap {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for ev in events {
        *counts.entry(ev.label.clone()).or_default() += 1;
    }
    let targets = counts
        .iter()
        .filter(|(_, &n)| n > min_count)
        .map(|(l, _)| l.clone())
        .collect();
    LabelMap {
        targets,
        counts,
        min_count,
    }
}

/// Mapped labels of every event overlapping `[start_s, end_s)` by strictly
/// more than `min_overlap_s`; sorted and deduplicated.
pub fn assign_window_labels(
    events: &[Event],
    start_s: f64,
    end_s: f64,
    labels: &LabelMap,
    min_overlap_s: f64,
) -> Vec<String> {
    let set: BTreeSet<&str> = overlapping(events, start_s, end_s, min_overlap_s)
        .map(|ev| labels.map(&ev.label))
        .collect();
    set.into_iter().map(String::from).collect()
}

/// Unmapped labels of the same overlapping events, sorted and deduplicated.
pub fn raw_window_labels(events: &[Event], start_s: f64, end_s: f64, min_overlap_s: f64) -> Vec<String> {
    let set: BTreeSet<&str> = overlapping(events, start_s, end_s, min_overlap_s)
        .map(|ev| ev.label.as_str())
        .collect();
    set.into_iter().map(String::from).collect()
}

fn overlapping(events: &[Event], start_s: f64, end_s: f64, min_overlap_s: f64) -> impl Iterator<Item = &Event> {
    events
        .iter()
        .filter(move |ev| ev.offset_s.min(end_s) - ev.onset_s.max(start_s) > min_overlap_s)
}

/// One row of a windowed detection manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowRecord {
    pub clip_id: String,
    pub dataset: String,
    pub audio_uri: String,
    pub start_s: f64,
    pub end_s: f64,
    pub labels: Vec<String>,
    /// Labels before mapping, so consumers can tell which species hide
    /// behind "other".
    #[serde(default)]
    pub raw_labels: Vec<String>,
}

/// Builds the label set over all clips' events, then windows and labels
/// every clip. Output is sorted by clip id, then start time.
pub fn window_manifest(
    clips: &[ClipRecord],
    win_s: f64,
    hop_s: f64,
    min_count: usize,
    min_overlap_s: f64,
) -> Result<(LabelMap, Vec<WindowRecord>)> {
    let labels = build_label_set(clips.iter().flat_map(|c| &c.events), min_count);
    let mut sorted: Vec<&ClipRecord> = clips.iter().collect();
    sorted.sort_by(|a, b| a.clip_id.cmp(&b.clip_id));
    let mut rows = Vec::new();
    for clip in sorted {
        for w in window_clip(clip.duration_s, win_s, hop_s)? {
            rows.push(WindowRecord {
                clip_id: clip.clip_id.clone(),
                dataset: clip.dataset.clone(),
                audio_uri: clip.audio_uri.clone(),
                labels: assign_window_labels(&clip.events, w.start_s, w.end_s, &labels, min_overlap_s),
                raw_labels: raw_window_labels(&clip.events, w.start_s, w.end_s, min_overlap_s),
                start_s: w.start_s,
                end_s: w.end_s,
            });
        }
    }
    Ok((labels, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bounds(ws: &[WindowSpec]) -> Vec<(f64, f64)> {
        ws.iter().map(|w| (w.start_s, w.end_s)).collect()
    }

    #[test]
    fn ten_seconds_is_one_window() {
        assert_eq!(bounds(&window_clip(10.0, 10.0, 5.0).unwrap()), [(0.0, 10.0)]);
    }

    #[test]
    fn sixty_seconds() {
        let w = window_clip(60.0, 10.0, 5.0).unwrap();
        assert_eq!(w.len(), 12);
        let starts: Vec<f64> = w.iter().map(|w| w.start_s).collect();
        let expected: Vec<f64> = (0..12).map(|k| 5.0 * k as f64).collect();
        assert_eq!(starts, expected);
        assert_eq!((w[11].start_s, w[11].end_s), (55.0, 60.0));
    }

    #[test]
    fn short_tail_dropped() {
        assert_eq!(bounds(&window_clip(12.0, 10.0, 5.0).unwrap()), [(0.0, 10.0), (5.0, 12.0)]);
    }

    #[test]
    fn short_clip_is_one_window() {
        assert_eq!(bounds(&window_clip(3.0, 10.0, 5.0).unwrap()), [(0.0, 3.0)]);
        assert_eq!(bounds(&window_clip(7.5, 10.0, 5.0).unwrap()), [(0.0, 7.5)]);
    }

    #[test]
    fn one_hour_is_720_windows() {
        let w = window_clip(3600.0, 10.0, 5.0).unwrap();
        assert_eq!(w.len(), 720);
        assert_eq!((w[719].start_s, w[719].end_s), (3595.0, 3600.0));
    }

    #[test]
    fn invalid_params() {
        assert!(window_clip(0.0, 10.0, 5.0).is_err());
        assert!(window_clip(10.0, 5.0, 10.0).is_err());
        assert!(window_clip(10.0, 10.0, 0.0).is_err());
    }

    #[test]
    fn label_assignment() {
        let map = LabelMap::from_targets(["A"]);
        assert_eq!(assign_window_labels(&[Event::new(3.0, 7.0, "A")], 0.0, 10.0, &map, 0.0), ["A"]);
        assert_eq!(assign_window_labels(&[Event::new(9.9, 15.0, "A")], 0.0, 10.0, &map, 0.0), ["A"]);
        assert!(assign_window_labels(&[Event::new(10.0, 15.0, "A")], 0.0, 10.0, &map, 0.0).is_empty());
        assert!(assign_window_labels(&[], 0.0, 10.0, &map, 0.0).is_empty());
        assert_eq!(
            assign_window_labels(&[Event::new(1.0, 2.0, "B"), Event::new(1.0, 2.0, "A"), Event::new(3.0, 4.0, "C")], 0.0, 10.0, &map, 0.0),
            ["A", "other"]
        );
        assert!(assign_window_labels(&[Event::new(9.9, 15.0, "A")], 0.0, 10.0, &map, 0.5).is_empty());
        assert_eq!(
            raw_window_labels(&[Event::new(1.0, 2.0, "B"), Event::new(1.0, 2.0, "A"), Event::new(30.0, 40.0, "C")], 0.0, 10.0, 0.0),
            ["A", "B"]
        );
    }

    #[test]
    fn label_set_boundary() {
        let mut events = Vec::new();
        events.extend((0..101).map(|_| Event::new(0.0, 1.0, "A")));
        events.extend((0..100).map(|_| Event::new(0.0, 1.0, "B")));
        let map = build_label_set(&events, 100);
        assert_eq!(map.targets, ["A"]);
        assert_eq!(map.map("A"), "A");
        assert_eq!(map.map("B"), OTHER_LABEL);
        assert!(build_label_set(&[], 100).targets.is_empty());
    }

    proptest! {
        #[test]
        fn windows_cover_clip(duration in 0.1f64..500.0, hop in 0.5f64..10.0, extra in 0.0f64..10.0) {
            // full coverage needs the dropped tail (< hop) to fit in the
            // previous window's overhang, i.e. win >= 2 hop
            let win = 2.0 * hop + extra;
            let ws = window_clip(duration, win, hop).unwrap();
            prop_assert!(!ws.is_empty());
            prop_assert_eq!(ws[0].start_s, 0.0);
            let mut reach = 0.0f64;
            for pair in ws.windows(2) {
                prop_assert!(pair[0].start_s < pair[1].start_s);
                prop_assert!(pair[1].start_s <= pair[0].end_s + 1e-9);
            }
            for w in &ws {
                prop_assert!(w.end_s > w.start_s && w.end_s - w.start_s <= win + 1e-9);
                reach = reach.max(w.end_s);
            }
            prop_assert!((reach - duration).abs() < 1e-9);
            for pair in ws.windows(2) {
                if pair[1].end_s < duration {
                    prop_assert!((pair[0].end_s - pair[1].start_s - (win - hop)).abs() < 1e-6);
                }
            }
        }

        #[test]
        fn enlarging_event_keeps_labels(on in 0.0f64..50.0, len in 0.01f64..20.0, grow_l in 0.0f64..5.0, grow_r in 0.0f64..5.0,
                                        ws in 0.0f64..50.0, wl in 1.0f64..10.0, min_ov in 0.0f64..1.0) {
            let map = LabelMap::from_targets(["A"]);
            let small = [Event::new(on, on + len, "A")];
            let big = [Event::new((on - grow_l).max(0.0), on + len + grow_r, "A")];
            let a = assign_window_labels(&small, ws, ws + wl, &map, min_ov);
            let b = assign_window_labels(&big, ws, ws + wl, &map, min_ov);
            prop_assert!(a.iter().all(|l| b.contains(l)));
        }
    }
}
