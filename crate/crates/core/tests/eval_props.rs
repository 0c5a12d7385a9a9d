//! Properties of label snapping and detection scoring.

use std::collections::{BTreeMap, BTreeSet};

use bioprep_core::eval::{detection_f1, snap_label, LabelSet};
use bioprep_core::rng::DetRng;
use bioprep_core::synth;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exact_match_never_moves(seed in any::<u64>(), pick in 0usize..40) {
        let names = synth::name_set(40, 1, seed);
        let set = LabelSet::new(names.clone()).unwrap();
        prop_assert_eq!(snap_label(&names[pick], &set), (names[pick].as_str(), 0));
    }

    #[test]
    fn corruptions_below_half_distance_snap_back(seed in any::<u64>(), pick in 0usize..50) {
        // min distance 5 tolerates 2 edits
        let names = synth::name_set(50, 5, seed);
        let set = LabelSet::new(names.clone()).unwrap();
        let mut rng = DetRng::new(seed);
        let twice = synth::corrupt(&synth::corrupt(&names[pick], &mut rng), &mut rng);
        prop_assert_eq!(snap_label(&twice, &set).0, names[pick].as_str());
    }

    #[test]
    fn f1_permutation_invariant(seed in any::<u64>()) {
        let mut rng = DetRng::new(seed);
        let labels: Vec<String> = (0..6).map(|i| format!("L{i}")).collect();
        let mut refs = BTreeMap::new();
        let mut preds = BTreeMap::new();
        for c in 0..30 {
            let draw = |rng: &mut DetRng| -> BTreeSet<String> {
                labels.iter().filter(|_| rng.bernoulli(0.3)).cloned().collect()
            };
            refs.insert(format!("c{c:02}"), draw(&mut rng));
            preds.insert(format!("c{c:02}"), draw(&mut rng));
        }
        let base = detection_f1("d", &preds, &refs, &labels).unwrap();

        // relabel chunk ids by a random permutation and reverse label order
        let mut perm: Vec<usize> = (0..30).collect();
        rng.shuffle(&mut perm);
        let rename = |m: &BTreeMap<String, BTreeSet<String>>| -> BTreeMap<String, BTreeSet<String>> {
            m.iter().enumerate().map(|(i, (_, v))| (format!("x{:02}", perm[i]), v.clone())).collect()
        };
        let mut rev = labels.clone();
        rev.reverse();
        let moved = detection_f1("d", &rename(&preds), &rename(&refs), &rev).unwrap();
        prop_assert!((base.primary_score - moved.primary_score).abs() < 1e-12);
    }
}
