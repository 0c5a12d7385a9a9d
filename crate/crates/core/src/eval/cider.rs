//! CIDEr-D and SPIDEr.
//!
//! Follows the widely used COCO caption scorer: per-item document frequency
//! over the set of reference n-grams, `idf = log N - log max(1, df)`,
//! clipped dot products against each reference, a Gaussian length penalty on
//! the bigram-count difference, and `10 * mean_n * mean_refs`.

use std::collections::{HashMap, HashSet};

use rust_stemmers::{Algorithm, Stemmer};

use super::EvalError;

pub const DEFAULT_MAX_N: usize = 4;
pub const DEFAULT_SIGMA: f64 = 6.0;
/// SPICE in [0, 1] is multiplied by this before averaging with CIDEr-D.
pub const SPICE_SCALE: f64 = 10.0;

/// Lowercase, drop apostrophes, turn other punctuation into spaces, split on
/// whitespace, Porter2-stem each token.
pub fn tokenize(text: &str) -> Vec<String> {
    let stemmer = Stemmer::create(Algorithm::English);
    tokenize_with(text, &stemmer)
}

fn tokenize_with(text: &str, stemmer: &Stemmer) -> Vec<String> {
    let cleaned: String = text
        .to_lowercase()
        .chars()
        .filter(|c| !matches!(c, '\'' | '\u{2019}'))
        .map(|c| if c.is_alphanumeric() || c.is_whitespace() { c } else { ' ' })
        .collect();
    cleaned
        .split_whitespace()
        .map(|t| stemmer.stem(t).into_owned())
        .collect()
}

type Ngram = Vec<String>;

struct Counts {
    // indexed by n - 1
    grams: Vec<HashMap<Ngram, f64>>,
    // number of bigrams, the reference scorer's length measure
    length: f64,
}

fn count(tokens: &[String], max_n: usize) -> Counts {
    let grams = (1..=max_n)
        .map(|n| {
            let mut m: HashMap<Ngram, f64> = HashMap::new();
            for w in tokens.windows(n) {
                *m.entry(w.to_vec()).or_default() += 1.0;
            }
            m
        })
        .collect();
    Counts {
        grams,
        length: tokens.len().saturating_sub(1) as f64,
    }
}

struct TfIdf {
    vecs: Vec<HashMap<Ngram, f64>>,
    norms: Vec<f64>,
    length: f64,
}

fn weigh(c: &Counts, df: &HashMap<&Ngram, f64>, log_n: f64) -> TfIdf {
    let mut vecs = Vec::with_capacity(c.grams.len());
    let mut norms = Vec::with_capacity(c.grams.len());
    for grams in &c.grams {
        let mut v = HashMap::with_capacity(grams.len());
        let mut sq = 0.0;
        for (g, &tf) in grams {
            let d = df.get(g).copied().unwrap_or(0.0).max(1.0).ln();
            let w = tf * (log_n - d);
            sq += w * w;
            v.insert(g.clone(), w);
        }
        vecs.push(v);
        norms.push(sq.sqrt());
    }
    TfIdf {
        vecs,
        norms,
        length: c.length,
    }
}

fn sim(h: &TfIdf, r: &TfIdf, sigma: f64) -> f64 {
    let delta = h.length - r.length;
    let penalty = (-(delta * delta) / (2.0 * sigma * sigma)).exp();
    let n = h.vecs.len();
    let mut total = 0.0;
    for k in 0..n {
        let mut val = 0.0;
        for (g, &hv) in &h.vecs[k] {
            if let Some(&rv) = r.vecs[k].get(g) {
                val += hv.min(rv) * rv;
            }
        }
        if h.norms[k] != 0.0 && r.norms[k] != 0.0 {
            val /= h.norms[k] * r.norms[k];
        }
        total += val * penalty;
    }
    total / n as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct CiderScores {
    pub per_item: Vec<f64>,
    pub mean: f64,
}

/// Scores each candidate against its own references; idf comes from the
/// reference sets of the whole corpus.
pub fn cider_d(
    candidates: &[&str],
    references: &[Vec<&str>],
    max_n: usize,
    sigma: f64,
) -> Result<CiderScores, EvalError> {
    if candidates.len() != references.len() {
        return Err(EvalError::IdMismatch(format!(
            "{} candidates, {} reference sets",
            candidates.len(),
            references.len()
        )));
    }
    if candidates.is_empty() {
        return Err(EvalError::EmptyInput("captioning"));
    }
    if let Some(i) = references.iter().position(Vec::is_empty) {
        return Err(EvalError::NoReferences(i));
    }
    let stemmer = Stemmer::create(Algorithm::English);
    let cand: Vec<Counts> = candidates
        .iter()
        .map(|c| count(&tokenize_with(c, &stemmer), max_n))
        .collect();
    let refs: Vec<Vec<Counts>> = references
        .iter()
        .map(|rs| rs.iter().map(|r| count(&tokenize_with(r, &stemmer), max_n)).collect())
        .collect();

    let mut df: HashMap<&Ngram, f64> = HashMap::new();
    for rs in &refs {
        let set: HashSet<&Ngram> = rs.iter().flat_map(|r| r.grams.iter().flat_map(|m| m.keys())).collect();
        for g in set {
            *df.entry(g).or_default() += 1.0;
        }
    }
    let log_n = (refs.len() as f64).ln();

    let per_item: Vec<f64> = cand
        .iter()
        .zip(&refs)
        .map(|(c, rs)| {
            let h = weigh(c, &df, log_n);
            let total: f64 = rs.iter().map(|r| sim(&h, &weigh(r, &df, log_n), sigma)).sum();
            10.0 * total / rs.len() as f64
        })
        .collect();
    let mean = per_item.iter().sum::<f64>() / per_item.len() as f64;
    Ok(CiderScores { per_item, mean })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpiderScores {
    pub per_item: Vec<f64>,
    pub mean: f64,
    pub spice_missing: bool,
}

/// `(CIDEr-D + 10 * SPICE) / 2` per item, then the mean. Without SPICE the
/// CIDEr-D scores are returned unchanged and `spice_missing` is set.
pub fn spider(cider: &[f64], spice: Option<&[f64]>) -> Result<SpiderScores, EvalError> {
    if cider.is_empty() {
        return Err(EvalError::EmptyInput("captioning"));
    }
    let (per_item, spice_missing) = match spice {
        None => (cider.to_vec(), true),
        Some(s) if s.len() != cider.len() => {
            return Err(EvalError::IdMismatch(format!(
                "{} CIDEr-D scores, {} SPICE scores",
                cider.len(),
                s.len()
            )))
        }
        Some(s) => {
            if let Some(bad) = s.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(EvalError::InvalidScore(format!("SPICE {bad} outside [0, 1]")));
            }
            (
                cider.iter().zip(s).map(|(c, s)| (c + SPICE_SCALE * s) / 2.0).collect(),
                false,
            )
        }
    };
    let mean = per_item.iter().sum::<f64>() / per_item.len() as f64;
    Ok(SpiderScores {
        per_item,
        mean,
        spice_missing,
    })
}
