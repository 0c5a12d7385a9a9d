//! Snapping free text onto a closed label set.

use std::collections::{BTreeSet, HashMap};

use super::levenshtein::{bounded_levenshtein, BitPattern};
use super::EvalError;
use crate::manifest::NONE_TARGET;
use crate::text::normalize_label;

pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.5;

/// Ordered labels with their normalized forms precomputed. Order decides
/// ties.
#[derive(Debug, Clone)]
pub struct LabelSet {
    labels: Vec<String>,
    normalized: Vec<Vec<char>>,
    patterns: Vec<Option<BitPattern>>,
    exact: HashMap<String, usize>,
}

impl LabelSet {
    /// Fails on an empty set or on two labels with the same normalized form.
    pub fn new(labels: impl IntoIterator<Item = impl Into<String>>) -> Result<Self, EvalError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(EvalError::EmptyLabelSet);
        }
        let mut exact: HashMap<String, usize> = HashMap::with_capacity(labels.len());
        let mut normalized = Vec::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            let n = normalize_label(l);
            if let Some(&j) = exact.get(&n) {
                return Err(EvalError::DuplicateLabel {
                    first: labels[j].clone(),
                    second: l.clone(),
                });
            }
            normalized.push(n.chars().collect());
            exact.insert(n, i);
        }
        let patterns = normalized.iter().map(|n: &Vec<char>| BitPattern::new(n)).collect();
        Ok(Self {
            labels,
            normalized,
            patterns,
            exact,
        })
    }

    /// Deduplicates by normalized form, keeping the first spelling, in
    /// sorted order.
    pub fn from_unsorted<'a>(labels: impl IntoIterator<Item = &'a str>) -> Result<Self, EvalError> {
        let sorted: BTreeSet<&str> = labels.into_iter().collect();
        let mut seen = BTreeSet::new();
        let unique: Vec<&str> = sorted.into_iter().filter(|l| seen.insert(normalize_label(l))).collect();
        Self::new(unique)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize) -> &str {
        &self.labels[i]
    }

    /// Index of the label with this exact normalized form.
    pub fn position(&self, text: &str) -> Option<usize> {
        self.exact.get(&normalize_label(text)).copied()
    }

    /// Index and distance of the nearest label; first label wins ties.
    pub fn nearest(&self, text: &str) -> (usize, usize) {
        let key = normalize_label(text);
        if let Some(&i) = self.exact.get(&key) {
            return (i, 0);
        }
        let chars: Vec<char> = key.chars().collect();
        let mut best = (0, usize::MAX);
        for (i, cand) in self.normalized.iter().enumerate() {
            // strictly better only, so earlier labels keep ties
            if cand.len().abs_diff(chars.len()) >= best.1 {
                continue;
            }
            let d = match &self.patterns[i] {
                Some(p) => Some(p.distance(&chars)).filter(|&d| d < best.1),
                None => bounded_levenshtein(&chars, cand, best.1 - 1),
            };
            if let Some(d) = d {
                best = (i, d);
                if d == 1 {
                    // exact matches returned above, so 1 cannot be beaten
                    break;
                }
            }
        }
        best
    }
}

/// Nearest label by Levenshtein distance on normalized text.
pub fn snap_label<'a>(text: &str, labels: &'a LabelSet) -> (&'a str, usize) {
    let (i, d) = labels.nearest(text);
    (labels.get(i), d)
}

/// `1 - dist / max(len)` over normalized characters; 1 for two empty strings.
pub fn similarity(a: &[char], b: &[char]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    let d = bounded_levenshtein(a, b, usize::MAX).expect("unbounded");
    1.0 - d as f64 / longest as f64
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedDetections {
    /// Indices into the label set, sorted and unique.
    pub labels: Vec<usize>,
    pub fragments: usize,
    pub discarded: usize,
    /// Fragments that matched "None" best.
    pub none_fragments: usize,
}

impl ParsedDetections {
    pub fn names<'a>(&self, set: &'a LabelSet) -> BTreeSet<&'a str> {
        self.labels.iter().map(|&i| set.get(i)).collect()
    }
}

fn fragments(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for piece in text.split([',', '\n', ';']) {
        let mut cur: Vec<&str> = Vec::new();
        for word in piece.split_whitespace() {
            if word.eq_ignore_ascii_case("and") {
                out.push(cur.join(" "));
                cur.clear();
            } else {
                cur.push(word);
            }
        }
        out.push(cur.join(" "));
    }
    out.retain(|f| !normalize_label(f).is_empty());
    out
}

/// Splits a free-text detection answer on commas, newlines and the word
/// "and", maps each fragment to its most similar label, and drops fragments
/// whose similarity is below `threshold`. "None" competes as an extra
/// candidate after all labels; fragments closest to it contribute nothing.
pub fn parse_detections(text: &str, labels: &LabelSet, threshold: f64) -> ParsedDetections {
    let none: Vec<char> = normalize_label(NONE_TARGET).chars().collect();
    let mut out = ParsedDetections::default();
    let mut found = BTreeSet::new();
    for frag in fragments(text) {
        out.fragments += 1;
        let key: Vec<char> = normalize_label(&frag).chars().collect();
        let mut best: Option<(usize, f64)> = None;
        for (i, cand) in labels.normalized.iter().enumerate() {
            let s = similarity(&key, cand);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        let none_sim = similarity(&key, &none);
        match best {
            Some((_, s)) if none_sim > s => {
                if none_sim >= threshold {
                    out.none_fragments += 1;
                } else {
                    out.discarded += 1;
                }
            }
            Some((i, s)) if s >= threshold => {
                found.insert(i);
            }
            _ => out.discarded += 1,
        }
    }
    out.labels = found.into_iter().collect();
    out
}
