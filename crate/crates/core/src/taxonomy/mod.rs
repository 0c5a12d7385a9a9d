//! Canonical species backbone.
//!
//! A [`TaxonomyTable`] is loaded once from the backbone CSV and is immutable
//! afterwards. All dataset joins go through [`TaxonomyTable::resolve`], which
//! performs exact matching on normalized names only; near-misses are the
//! caller's problem (quarantine), not ours.

mod backbone;
mod sample;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use backbone::{load_backbone, read_backbone, write_backbone, BACKBONE_COLUMNS};
pub use sample::{NegativeDraw, NegativeLevel};

use crate::text::normalize_name;

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: duplicate name {name:?} (already used by taxon {existing})")]
    DuplicateName {
        line: u64,
        name: String,
        existing: String,
    },
    #[error("line {line}: duplicate taxon_id {taxon_id:?}")]
    DuplicateId { line: u64, taxon_id: String },
    #[error("line {line}: empty scientific_name")]
    EmptyName { line: u64 },
    #[error("line {line}: missing {rank} for {scientific_name:?}")]
    MissingLineage {
        line: u64,
        rank: Rank,
        scientific_name: String,
    },
    #[error(
        "line {line}: inconsistent lineage: {rank} {value:?} maps to {parent_rank} {found:?}, earlier rows say {expected:?}"
    )]
    InconsistentLineage {
        line: u64,
        rank: Rank,
        value: String,
        parent_rank: Rank,
        expected: String,
        found: String,
    },
    #[error("name not found: {0:?}")]
    NotFound(String),
    #[error("no candidate negatives for taxon {0:?}")]
    EmptyPool(String),
}

pub type Result<T> = std::result::Result<T, TaxonomyError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rank {
    Genus,
    Family,
    Order,
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rank::Genus => "genus",
            Rank::Family => "family",
            Rank::Order => "order",
        })
    }
}

/// Which name column an emitted label uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NameKind {
    Scientific,
    Common,
}

impl NameKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NameKind::Scientific => "scientific",
            NameKind::Common => "common",
        }
    }
}

/// Which index [`TaxonomyTable::resolve`] searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LookupKind {
    Scientific,
    Common,
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonRecord {
    pub taxon_id: String,
    pub scientific_name: String,
    pub common_name: Option<String>,
    pub genus: String,
    pub family: String,
    pub order: String,
    pub class_name: String,
    pub synonyms: Vec<String>,
}

impl TaxonRecord {
    pub fn rank_value(&self, rank: Rank) -> &str {
        match rank {
            Rank::Genus => &self.genus,
            Rank::Family => &self.family,
            Rank::Order => &self.order,
        }
    }

    /// Canonical name of the requested kind; `None` for a missing common name.
    pub fn name(&self, kind: NameKind) -> Option<&str> {
        match kind {
            NameKind::Scientific => Some(&self.scientific_name),
            NameKind::Common => self.common_name.as_deref(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct TaxonomyTable {
    records: Vec<TaxonRecord>,
    id_index: HashMap<String, usize>,
    /// normalized scientific names and synonyms
    scientific_index: HashMap<String, usize>,
    common_index: HashMap<String, usize>,
    rank_index: BTreeMap<(Rank, String), Vec<usize>>,
}

impl TaxonomyTable {
    /// Builds and validates a table. `lines[i]` is the source line of
    /// `records[i]` used in error messages; pass `None` to number from 1.
    pub fn from_records(records: Vec<TaxonRecord>, lines: Option<&[u64]>) -> Result<Self> {
        let line_of = |i: usize| lines.map_or(i as u64 + 1, |l| l[i]);
        let mut table = TaxonomyTable::default();
        let mut genus_parent: HashMap<&str, (&str, u64)> = HashMap::new();
        let mut family_parent: HashMap<&str, (&str, u64)> = HashMap::new();

        for (i, rec) in records.iter().enumerate() {
            let line = line_of(i);
            if normalize_name(&rec.scientific_name).is_empty() {
                return Err(TaxonomyError::EmptyName { line });
            }
            for rank in [Rank::Genus, Rank::Family, Rank::Order] {
                if rec.rank_value(rank).trim().is_empty() {
                    return Err(TaxonomyError::MissingLineage {
                        line,
                        rank,
                        scientific_name: rec.scientific_name.clone(),
                    });
                }
            }
            check_parent(&mut genus_parent, Rank::Genus, &rec.genus, Rank::Family, &rec.family, line)?;
            check_parent(&mut family_parent, Rank::Family, &rec.family, Rank::Order, &rec.order, line)?;
        }

        for (i, rec) in records.iter().enumerate() {
            let line = line_of(i);
            if table.id_index.insert(rec.taxon_id.clone(), i).is_some() {
                return Err(TaxonomyError::DuplicateId {
                    line,
                    taxon_id: rec.taxon_id.clone(),
                });
            }
        }
        // canonical names first so a synonym colliding with a later
        // record's scientific name is reported against the synonym row
        for (i, rec) in records.iter().enumerate() {
            insert_name(&mut table.scientific_index, &records, &rec.scientific_name, i, line_of(i))?;
        }
        for (i, rec) in records.iter().enumerate() {
            for syn in rec.synonyms.iter().filter(|s| !s.trim().is_empty()) {
                insert_name(&mut table.scientific_index, &records, syn, i, line_of(i))?;
            }
            if let Some(common) = rec.common_name.as_deref().filter(|c| !c.trim().is_empty()) {
                insert_name(&mut table.common_index, &records, common, i, line_of(i))?;
            }
            for rank in [Rank::Genus, Rank::Family, Rank::Order] {
                table
                    .rank_index
                    .entry((rank, rec.rank_value(rank).to_string()))
                    .or_default()
                    .push(i);
            }
        }
        table.records = records;
        Ok(table)
    }

    pub fn records(&self) -> &[TaxonRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn by_id(&self, taxon_id: &str) -> Option<&TaxonRecord> {
        self.id_index.get(taxon_id).map(|&i| &self.records[i])
    }

    pub(crate) fn index_of(&self, taxon_id: &str) -> Option<usize> {
        self.id_index.get(taxon_id).copied()
    }

    /// Record indices sharing `value` at `rank`, in table order.
    pub fn members(&self, rank: Rank, value: &str) -> &[usize] {
        self.rank_index
            .get(&(rank, value.to_string()))
            .map_or(&[], Vec::as_slice)
    }

    /// Number of distinct values at a rank.
    pub fn rank_cardinality(&self, rank: Rank) -> usize {
        self.rank_index.keys().filter(|(r, _)| *r == rank).count()
    }

    /// Exact lookup after normalization. Synonyms resolve to their canonical
    /// record. `Any` tries scientific names first.
    pub fn resolve(&self, name: &str, kind: LookupKind) -> Result<&TaxonRecord> {
        let key = normalize_name(name);
        let hit = match kind {
            LookupKind::Scientific => self.scientific_index.get(&key),
            LookupKind::Common => self.common_index.get(&key),
            LookupKind::Any => self
                .scientific_index
                .get(&key)
                .or_else(|| self.common_index.get(&key)),
        };
        hit.map(|&i| &self.records[i])
            .ok_or_else(|| TaxonomyError::NotFound(name.to_string()))
    }
}

fn check_parent<'a>(
    seen: &mut HashMap<&'a str, (&'a str, u64)>,
    rank: Rank,
    value: &'a str,
    parent_rank: Rank,
    parent: &'a str,
    line: u64,
) -> Result<()> {
    match seen.get(value) {
        Some(&(expected, _)) if expected != parent => Err(TaxonomyError::InconsistentLineage {
            line,
            rank,
            value: value.to_string(),
            parent_rank,
            expected: expected.to_string(),
            found: parent.to_string(),
        }),
        Some(_) => Ok(()),
        None => {
            seen.insert(value, (parent, line));
            Ok(())
        }
    }
}

fn insert_name(
    index: &mut HashMap<String, usize>,
    records: &[TaxonRecord],
    name: &str,
    i: usize,
    line: u64,
) -> Result<()> {
    let key = normalize_name(name);
    match index.get(&key) {
        // a synonym repeating its own record's name is harmless
        Some(&j) if j == i => Ok(()),
        Some(&j) => Err(TaxonomyError::DuplicateName {
            line,
            name: name.to_string(),
            existing: records[j].taxon_id.clone(),
        }),
        None => {
            index.insert(key, i);
            Ok(())
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn rec(id: &str, sci: &str, common: Option<&str>, genus: &str, family: &str, order: &str) -> TaxonRecord {
        TaxonRecord {
            taxon_id: id.into(),
            scientific_name: sci.into(),
            common_name: common.map(Into::into),
            genus: genus.into(),
            family: family.into(),
            order: order.into(),
            class_name: "Aves".into(),
            synonyms: vec![],
        }
    }

    pub fn tits() -> TaxonomyTable {
        let mut major = rec("1", "Parus major", Some("Great Tit"), "Parus", "Paridae", "Passeriformes");
        major.synonyms = vec!["Parus major major".into()];
        TaxonomyTable::from_records(
            vec![
                major,
                rec("2", "Parus minor", Some("Japanese Tit"), "Parus", "Paridae", "Passeriformes"),
                rec("3", "Parus monticolus", Some("Green-backed Tit"), "Parus", "Paridae", "Passeriformes"),
                rec("4", "Cyanistes caeruleus", Some("Blue Tit"), "Cyanistes", "Paridae", "Passeriformes"),
                rec("5", "Turdus merula", Some("Common Blackbird"), "Turdus", "Turdidae", "Passeriformes"),
                rec("6", "Corvus corax", Some("Common Raven"), "Corvus", "Corvidae", "Passeriformes"),
                rec("7", "Strix aluco", Some("Tawny Owl"), "Strix", "Strigidae", "Strigiformes"),
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn resolve_scientific_case_insensitive() {
        let t = tits();
        assert_eq!(t.resolve("parus major", LookupKind::Scientific).unwrap().taxon_id, "1");
        assert_eq!(t.resolve("  PARUS   Major. ", LookupKind::Any).unwrap().taxon_id, "1");
    }

    #[test]
    fn resolve_common() {
        let t = tits();
        let r = t.resolve("Great Tit", LookupKind::Common).unwrap();
        assert_eq!(r.common_name.as_deref(), Some("Great Tit"));
        assert!(t.resolve("Great Tit", LookupKind::Scientific).is_err());
    }

    #[test]
    fn no_fuzzy_resolution() {
        let t = tits();
        assert!(matches!(
            t.resolve("Parus majr", LookupKind::Scientific),
            Err(TaxonomyError::NotFound(_))
        ));
    }

    #[test]
    fn synonym_resolves_to_canonical() {
        let t = tits();
        let r = t.resolve("Parus major major", LookupKind::Scientific).unwrap();
        assert_eq!(r.scientific_name, "Parus major");
    }

    #[test]
    fn resolve_is_idempotent() {
        let t = tits();
        for r in t.records() {
            for name in std::iter::once(&r.scientific_name).chain(&r.synonyms) {
                let first = t.resolve(name, LookupKind::Any).unwrap();
                let again = t.resolve(&first.scientific_name, LookupKind::Any).unwrap();
                assert_eq!(first, again);
            }
        }
    }

    #[test]
    fn rank_index_is_inverse_of_lineage() {
        let t = tits();
        for (i, r) in t.records().iter().enumerate() {
            for rank in [Rank::Genus, Rank::Family, Rank::Order] {
                assert!(t.members(rank, r.rank_value(rank)).contains(&i));
            }
        }
        for rank in [Rank::Genus, Rank::Family, Rank::Order] {
            let total: usize = t
                .rank_index
                .iter()
                .filter(|((rk, _), _)| *rk == rank)
                .map(|(_, v)| v.len())
                .sum();
            assert_eq!(total, t.len());
        }
    }

    #[test]
    fn synonym_colliding_with_other_species_rejected() {
        let mut a = rec("1", "Parus major", None, "Parus", "Paridae", "P");
        a.synonyms = vec!["Parus minor".into()];
        let b = rec("2", "Parus minor", None, "Parus", "Paridae", "P");
        assert!(matches!(
            TaxonomyTable::from_records(vec![a, b], None),
            Err(TaxonomyError::DuplicateName { .. })
        ));
    }
}
