use std::collections::BTreeSet;
use std::path::PathBuf;

use bioprep_core::taxonomy::{LookupKind, Rank};
use clap::{Args, ValueEnum};
use serde::Serialize;

use super::{load_table, pretty};
use crate::RunConfig;

#[derive(Debug, Args)]
pub struct TaxonomyArgs {
    /// Backbone CSV: taxon_id,scientific_name,common_name,genus,family,order,class,synonyms
    #[arg(long, value_name = "PATH")]
    pub taxonomy: PathBuf,
    /// Name to resolve to a taxon; repeatable [default: none]
    #[arg(long, value_name = "NAME")]
    pub resolve: Vec<String>,
    /// Which names --resolve matches against
    #[arg(long, value_enum, default_value_t = Lookup::Any)]
    pub lookup: Lookup,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Lookup {
    Scientific,
    Common,
    Any,
}

impl From<Lookup> for LookupKind {
    fn from(l: Lookup) -> Self {
        match l {
            Lookup::Scientific => LookupKind::Scientific,
            Lookup::Common => LookupKind::Common,
            Lookup::Any => LookupKind::Any,
        }
    }
}

#[derive(Debug, Serialize)]
struct Summary {
    species: usize,
    genera: usize,
    families: usize,
    orders: usize,
    classes: usize,
    without_common_name: usize,
    synonyms: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    resolved: Vec<Resolution>,
}

#[derive(Debug, Serialize)]
struct Resolution {
    query: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    taxon_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scientific_name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// Prints the summary as JSON. Fails when any requested name is unresolved
/// so scripts can quarantine the affected clips.
pub fn run(args: &TaxonomyArgs, _cfg: &RunConfig) -> anyhow::Result<()> {
    let table = load_table(&args.taxonomy)?;
    let recs = table.records();
    let resolved: Vec<Resolution> = args
        .resolve
        .iter()
        .map(|q| match table.resolve(q, args.lookup.into()) {
            Ok(r) => Resolution {
                query: q.clone(),
                taxon_id: Some(r.taxon_id.clone()),
                scientific_name: Some(r.scientific_name.clone()),
                error: None,
            },
            Err(e) => Resolution {
                query: q.clone(),
                taxon_id: None,
                scientific_name: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let failed = resolved.iter().filter(|r| r.error.is_some()).count();
    let summary = Summary {
        species: table.len(),
        genera: table.rank_cardinality(Rank::Genus),
        families: table.rank_cardinality(Rank::Family),
        orders: table.rank_cardinality(Rank::Order),
        classes: recs.iter().map(|r| r.class_name.as_str()).collect::<BTreeSet<_>>().len(),
        without_common_name: recs.iter().filter(|r| r.common_name.is_none()).count(),
        synonyms: recs.iter().map(|r| r.synonyms.len()).sum(),
        resolved,
    };
    print!("{}", pretty(&summary));
    if failed > 0 {
        anyhow::bail!("{failed} of {} names could not be resolved", args.resolve.len());
    }
    Ok(())
}
