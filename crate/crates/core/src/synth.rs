//! Deterministic synthetic fixtures: taxonomies, name sets, manifests and
//! soundscapes for tests, benchmarks and the CLI's demo data.

use crate::eval::levenshtein;
use crate::manifest::{ClipRecord, Event};
use crate::rng::DetRng;
use crate::taxonomy::{TaxonRecord, TaxonomyTable};

const ONSETS: [&str; 18] = ["b", "c", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr"];
const VOWELS: [&str; 6] = ["a", "e", "i", "o", "u", "y"];
const CODAS: [&str; 8] = ["", "", "n", "r", "s", "l", "x", "m"];
const ADJECTIVES: [&str; 24] = [
    "Dusky", "Spotted", "Crested", "Rufous", "Pale", "Golden", "Ashy", "Olive", "Barred", "Sooty", "Tawny",
    "Striped", "Lesser", "Greater", "Little", "Common", "Northern", "Southern", "Eastern", "Western", "Scaly",
    "Plain", "Black-capped", "White-throated",
];
const NOUNS: [&str; 20] = [
    "Warbler", "Thrush", "Finch", "Owl", "Wren", "Tit", "Sparrow", "Dove", "Swift", "Flycatcher", "Babbler",
    "Tanager", "Vireo", "Shrike", "Lark", "Pipit", "Bunting", "Robin", "Kingfisher", "Nightjar",
];

fn syllables(rng: &mut DetRng, n: usize) -> String {
    (0..n)
        .map(|_| {
            format!(
                "{}{}{}",
                rng.choose(&ONSETS).unwrap(),
                rng.choose(&VOWELS).unwrap(),
                rng.choose(&CODAS).unwrap()
            )
        })
        .collect()
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

/// `n` binomial-style names whose lowercase forms are pairwise at least
/// `min_distance` edits apart.
pub fn name_set(n: usize, min_distance: usize, seed: u64) -> Vec<String> {
    let mut rng = DetRng::derived(seed, &["name_set"]);
    let mut names: Vec<String> = Vec::with_capacity(n);
    let mut lower: Vec<String> = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while names.len() < n {
        attempts += 1;
        assert!(attempts < 1000 * n.max(1), "cannot place {n} names {min_distance} edits apart");
        let (g, e) = (2 + rng.below(2), 2 + rng.below(2));
        let genus = syllables(&mut rng, g);
        let epithet = syllables(&mut rng, e);
        let name = format!("{} {}", capitalize(&genus), epithet);
        let key = name.to_lowercase();
        if lower.iter().all(|o| levenshtein(o, &key) >= min_distance) {
            names.push(name);
            lower.push(key);
        }
    }
    names
}

/// Applies one random insertion, deletion or substitution of a lowercase
/// ASCII letter, always changing the lowercase form.
pub fn corrupt(label: &str, rng: &mut DetRng) -> String {
    let mut chars: Vec<char> = label.chars().collect();
    let letter = |rng: &mut DetRng| (b'a' + rng.below(26) as u8) as char;
    loop {
        let op = if chars.len() <= 1 { 0 } else { rng.below(3) };
        let mut out = chars.clone();
        match op {
            0 => out.insert(rng.below(chars.len() + 1), letter(rng)),
            1 => {
                out.remove(rng.below(chars.len()));
            }
            _ => {
                let i = rng.below(chars.len());
                out[i] = letter(rng);
            }
        }
        let s: String = out.iter().collect();
        if s.to_lowercase() != label.to_lowercase() {
            return s;
        }
        chars = label.chars().collect();
    }
}

/// A backbone with `n_species` species in genera of 1 to 6, families of 1 to
/// 4 genera and orders of 1 to 5 families. Roughly one in ten species has no
/// common name.
pub fn taxonomy(n_species: usize, seed: u64) -> TaxonomyTable {
    let mut rng = DetRng::derived(seed, &["taxonomy"]);
    let mut records = Vec::with_capacity(n_species);
    let mut sci_seen = std::collections::HashSet::new();
    let mut common_seen = std::collections::HashSet::new();
    let (mut genus, mut family, mut order) = (String::new(), String::new(), String::new());
    let (mut left_g, mut left_f, mut left_o) = (0usize, 0usize, 0usize);
    let mut g_idx = 0usize;
    while records.len() < n_species {
        if left_g == 0 {
            if left_f == 0 {
                if left_o == 0 {
                    order = format!("{}iformes", capitalize(&syllables(&mut rng, 2)));
                    left_o = 1 + rng.below(5);
                }
                family = format!("{}idae", capitalize(&syllables(&mut rng, 2)));
                left_o -= 1;
                left_f = 1 + rng.below(4);
            }
            // the index suffix keeps genus names unique across families
            genus = format!("{}{}", capitalize(&syllables(&mut rng, 2)), letter_suffix(g_idx));
            g_idx += 1;
            left_f -= 1;
            left_g = 1 + rng.below(6);
        }
        let e = 2 + rng.below(2);
        let epithet = syllables(&mut rng, e);
        let sci = format!("{genus} {epithet}");
        if !sci_seen.insert(sci.to_lowercase()) {
            continue;
        }
        let common = if rng.bernoulli(0.1) {
            None
        } else {
            let c = format!("{} {}", rng.choose(&ADJECTIVES).unwrap(), rng.choose(&NOUNS).unwrap());
            let c = if common_seen.contains(&c.to_lowercase()) {
                format!("{c} {}", capitalize(&syllables(&mut rng, 1)))
            } else {
                c
            };
            common_seen.insert(c.to_lowercase()).then_some(c)
        };
        left_g -= 1;
        records.push(TaxonRecord {
            taxon_id: format!("t{:05}", records.len() + 1),
            scientific_name: sci,
            common_name: common,
            genus: genus.clone(),
            family: family.clone(),
            order: order.clone(),
            class_name: "Aves".into(),
            synonyms: Vec::new(),
        });
    }
    TaxonomyTable::from_records(records, None).expect("synthetic taxonomy is consistent")
}

fn letter_suffix(i: usize) -> String {
    // base-26 letters, lowercase, appended to syllable stems
    let mut n = i;
    let mut s = String::new();
    loop {
        s.insert(0, (b'a' + (n % 26) as u8) as char);
        n /= 26;
        if n == 0 {
            break s;
        }
        n -= 1;
    }
}

/// Focal recordings over random species. Some clips also list background
/// species, a call type, a life stage or a caption.
pub fn focal_clips(table: &TaxonomyTable, n: usize, seed: u64) -> Vec<ClipRecord> {
    let mut rng = DetRng::derived(seed, &["focal_clips"]);
    let recs = table.records();
    (0..n)
        .map(|i| {
            let mut c = ClipRecord::new(format!("fc{i:06}"), "synth_focal", 5.0 + rng.below(56) as f64);
            let focal = &recs[rng.below(recs.len())];
            c.focal_taxon = Some(focal.taxon_id.clone());
            if rng.bernoulli(0.3) {
                let other = &recs[rng.below(recs.len())];
                if other.taxon_id != focal.taxon_id {
                    c.all_taxa = vec![focal.taxon_id.clone(), other.taxon_id.clone()];
                }
            }
            if rng.bernoulli(0.4) {
                let k = if rng.bernoulli(0.5) { "call" } else { "song" };
                c.attrs.insert("vocalization_kind".into(), k.into());
            }
            if rng.bernoulli(0.2) {
                let s = ["adult", "juvenile", "nestling"][rng.below(3)];
                c.attrs.insert("lifestage".into(), s.into());
            }
            if rng.bernoulli(0.2) {
                c.caption = Some(format!("A {} is heard over light wind.", focal.common_name.as_deref().unwrap_or("bird").to_lowercase()));
            }
            c
        })
        .collect()
}

/// A soundscape recording with events drawn uniformly over the clip from the
/// first `n_labels` species (by scientific name).
pub fn soundscape(
    clip_id: &str,
    duration_s: f64,
    table: &TaxonomyTable,
    n_labels: usize,
    n_events: usize,
    seed: u64,
) -> ClipRecord {
    let mut rng = DetRng::derived(seed, &["soundscape", clip_id]);
    let labels: Vec<&str> = table.records().iter().take(n_labels.max(1)).map(|r| r.scientific_name.as_str()).collect();
    let mut c = ClipRecord::new(clip_id, "synth_scape", duration_s);
    for _ in 0..n_events {
        let on = rng.unit() * (duration_s - 0.5).max(0.0);
        let len = 0.2 + rng.unit() * 3.0;
        c.events.push(Event::new(on, (on + len).min(duration_s), *rng.choose(&labels).unwrap()));
    }
    c.events.sort_by(|a, b| a.onset_s.total_cmp(&b.onset_s));
    c
}
