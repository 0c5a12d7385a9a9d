//! Distractor sampling and name-kind selection shared by the option tasks.

use super::{GenConfig, NameKindMode};
use crate::rng::DetRng;
use crate::taxonomy::{NameKind, NegativeLevel, TaxonRecord, TaxonomyTable};

const HARD_LEVELS: [NegativeLevel; 3] = [NegativeLevel::Genus, NegativeLevel::Family, NegativeLevel::Order];

/// Picks the name kind for one instance. A common-name request falls back
/// to scientific names when any label lacks a common name; the flag reports
/// the fallback.
pub(crate) fn choose_kind(cfg: &GenConfig, rng: &mut DetRng, labels: &[&TaxonRecord]) -> (NameKind, bool) {
    let wanted = match cfg.name_kind {
        NameKindMode::Common => NameKind::Common,
        NameKindMode::Scientific => NameKind::Scientific,
        NameKindMode::Mixed => {
            if rng.bernoulli(0.5) {
                NameKind::Common
            } else {
                NameKind::Scientific
            }
        }
    };
    if wanted == NameKind::Common && labels.iter().any(|r| r.common_name.is_none()) {
        (NameKind::Scientific, true)
    } else {
        (wanted, false)
    }
}

pub(crate) fn label(r: &TaxonRecord, kind: NameKind) -> &str {
    r.name(kind).unwrap_or(&r.scientific_name)
}

pub(crate) struct Distractors<'a> {
    pub records: Vec<&'a TaxonRecord>,
    /// Level actually used for each record, after escalation.
    pub levels: Vec<NegativeLevel>,
    pub escalated: usize,
}

/// Draws up to `count` distinct distractors. Each slot is a hard negative of
/// a randomly chosen anchor with probability `negative_mix` (rank drawn by
/// `hard_level_weights`), otherwise uniform random. Without anchors every
/// slot is random. Records in `exclude` and records lacking a name of `kind`
/// never appear.
pub(crate) fn draw_distractors<'a>(
    table: &'a TaxonomyTable,
    anchors: &[&TaxonRecord],
    exclude: &[&str],
    count: usize,
    kind: NameKind,
    cfg: &GenConfig,
    rng: &mut DetRng,
) -> Distractors<'a> {
    let mut out = Distractors {
        records: Vec::with_capacity(count),
        levels: Vec::with_capacity(count),
        escalated: 0,
    };
    let Some(fallback_anchor) = table.records().first() else {
        return out;
    };
    let weights = cfg.hard_level_weights.as_array();
    let mut excluded: Vec<&str> = exclude.to_vec();
    for _ in 0..count {
        let hard = rng.bernoulli(cfg.negative_mix);
        let (anchor, level) = match (anchors.is_empty(), hard) {
            (false, true) => {
                let level = rng.weighted_index(&weights).map_or(NegativeLevel::Random, |i| HARD_LEVELS[i]);
                (anchors[rng.below(anchors.len())], level)
            }
            _ => (fallback_anchor, NegativeLevel::Random),
        };
        let eligible = |r: &TaxonRecord| kind == NameKind::Scientific || r.common_name.is_some();
        match table.sample_negatives_with(anchor, &excluded, level, 1, rng, eligible) {
            Ok(draw) => {
                let Some(&rec) = draw.records.first() else { break };
                if draw.escalated() {
                    out.escalated += 1;
                }
                out.levels.push(draw.used);
                excluded.push(&rec.taxon_id);
                out.records.push(rec);
            }
            Err(_) => break,
        }
    }
    out
}

pub(crate) fn levels_meta(levels: &[NegativeLevel]) -> String {
    levels.iter().map(|l| l.as_str()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::tests::{rec, tits};

    #[test]
    fn distractors_distinct_and_exclude() {
        let t = tits();
        let target = t.by_id("1").unwrap();
        let cfg = GenConfig::default();
        for seed in 0..50 {
            let mut rng = DetRng::new(seed);
            let d = draw_distractors(&t, &[target], &["1"], 4, NameKind::Scientific, &cfg, &mut rng);
            assert_eq!(d.records.len(), 4);
            let mut ids: Vec<&str> = d.records.iter().map(|r| r.taxon_id.as_str()).collect();
            assert!(!ids.contains(&"1"));
            ids.sort();
            ids.dedup();
            assert_eq!(ids.len(), 4);
            assert_eq!(d.levels.len(), 4);
        }
    }

    #[test]
    fn pool_smaller_than_request() {
        let t = tits();
        let target = t.by_id("1").unwrap();
        let mut rng = DetRng::new(3);
        let d = draw_distractors(&t, &[target], &["1"], 10, NameKind::Scientific, &GenConfig::default(), &mut rng);
        assert_eq!(d.records.len(), 6);
    }

    #[test]
    fn all_hard_genus_prefers_congeners() {
        let t = tits();
        let target = t.by_id("1").unwrap();
        let cfg = GenConfig {
            negative_mix: 1.0,
            hard_level_weights: crate::promptgen::HardLevelWeights { genus: 1.0, family: 0.0, order: 0.0 },
            ..Default::default()
        };
        let mut rng = DetRng::new(9);
        let d = draw_distractors(&t, &[target], &["1"], 2, NameKind::Scientific, &cfg, &mut rng);
        assert!(d.records.iter().all(|r| r.genus == "Parus"));
        assert_eq!(d.escalated, 0);
        // the third slot has no congener left and escalates
        let mut rng = DetRng::new(9);
        let d = draw_distractors(&t, &[target], &["1"], 3, NameKind::Scientific, &cfg, &mut rng);
        assert_eq!(d.escalated, 1);
        assert_eq!(d.levels[2], NegativeLevel::Family);
    }

    #[test]
    fn common_kind_skips_records_without_common_name() {
        let t = TaxonomyTable::from_records(
            vec![
                rec("1", "A a", Some("Aye"), "A", "F", "O"),
                rec("2", "A b", None, "A", "F", "O"),
                rec("3", "A c", Some("Cee"), "A", "F", "O"),
            ],
            None,
        )
        .unwrap();
        let target = t.by_id("1").unwrap();
        for seed in 0..20 {
            let mut rng = DetRng::new(seed);
            let d = draw_distractors(&t, &[target], &["1"], 2, NameKind::Common, &GenConfig::default(), &mut rng);
            assert_eq!(d.records.len(), 1);
            assert_eq!(d.records[0].taxon_id, "3");
        }
    }

    #[test]
    fn fallback_to_scientific() {
        let t = TaxonomyTable::from_records(vec![rec("1", "A a", None, "A", "F", "O")], None).unwrap();
        let cfg = GenConfig {
            name_kind: NameKindMode::Common,
            ..Default::default()
        };
        let mut rng = DetRng::new(0);
        assert_eq!(choose_kind(&cfg, &mut rng, &[t.by_id("1").unwrap()]), (NameKind::Scientific, true));
    }
}
