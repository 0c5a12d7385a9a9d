use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use super::validate::validate_clip;
use super::{ClipRecord, Instance, ManifestError, PredictionRecord, Result};
use crate::taxonomy::TaxonomyTable;

/// How unknown top-level keys in a clip manifest are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KeyMode {
    #[default]
    Strict,
    Permissive,
}

/// Parses JSONL text into `(line number, value)` pairs. Blank lines are
/// skipped. Lines are parsed in parallel; the result keeps file order.
pub fn parse_jsonl<T>(text: &str) -> Vec<(u64, Result<T>)>
where
    T: DeserializeOwned + Send,
{
    let lines: Vec<(u64, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i as u64 + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    lines
        .into_par_iter()
        .map(|(n, l)| {
            let parsed = serde_json::from_str::<T>(l).map_err(|e| ManifestError::Parse {
                line: n,
                message: e.to_string(),
            });
            (n, parsed)
        })
        .collect()
}

fn parse_clips(text: &str, mode: KeyMode) -> Vec<(u64, Result<ClipRecord>)> {
    let mut parsed = parse_jsonl::<ClipRecord>(text);
    if mode == KeyMode::Strict {
        for (line, rec) in parsed.iter_mut() {
            if let Ok(r) = rec {
                if let Some(key) = r.extra.keys().next() {
                    *rec = Err(ManifestError::UnknownKey {
                        line: *line,
                        key: key.clone(),
                    });
                }
            }
        }
    }
    parsed
}

/// Reads and validates a clip manifest, failing on the first problem.
pub fn read_manifest(
    path: impl AsRef<Path>,
    mode: KeyMode,
    table: Option<&TaxonomyTable>,
) -> Result<Vec<ClipRecord>> {
    let text = fs::read_to_string(path)?;
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (_, rec) in parse_clips(&text, mode) {
        let rec = rec?;
        if let Some(v) = validate_clip(&rec, table).into_iter().next() {
            return Err(v);
        }
        if !seen.insert(rec.clip_id.clone()) {
            return Err(ManifestError::invariant(&rec.clip_id, "clip_id", "duplicate clip_id"));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Outcome of total validation: every record that passed, and every error.
#[derive(Debug, Default)]
pub struct ManifestCheck {
    pub records: Vec<ClipRecord>,
    pub errors: Vec<ManifestError>,
}

impl ManifestCheck {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Validates every line of a manifest and collects all errors instead of
/// stopping at the first one.
pub fn check_manifest(
    path: impl AsRef<Path>,
    mode: KeyMode,
    table: Option<&TaxonomyTable>,
) -> std::io::Result<ManifestCheck> {
    let text = fs::read_to_string(path)?;
    let mut check = ManifestCheck::default();
    let mut seen = std::collections::HashSet::new();
    for (_, rec) in parse_clips(&text, mode) {
        match rec {
            Err(e) => check.errors.push(e),
            Ok(rec) => {
                let mut errs = validate_clip(&rec, table);
                if !seen.insert(rec.clip_id.clone()) {
                    errs.push(ManifestError::invariant(&rec.clip_id, "clip_id", "duplicate clip_id"));
                }
                if errs.is_empty() {
                    check.records.push(rec);
                } else {
                    check.errors.extend(errs);
                }
            }
        }
    }
    Ok(check)
}

fn read_all<T: DeserializeOwned + Send>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path)?;
    parse_jsonl::<T>(&text).into_iter().map(|(_, r)| r).collect()
}

pub fn read_instances(path: impl AsRef<Path>) -> Result<Vec<Instance>> {
    read_all(path.as_ref())
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRecord>> {
    read_all(path.as_ref())
}

/// Serializes items as JSONL, one line each, in the given order.
pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        // serialization of these plain structs cannot fail
        out.push_str(&serde_json::to_string(item).expect("serializable"));
        out.push('\n');
    }
    out
}

pub fn write_jsonl<T: Serialize>(items: &[T], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}
