//! Random and taxonomy-aware ("hard") negative sampling.

use serde::{Deserialize, Serialize};

use super::{Rank, Result, TaxonRecord, TaxonomyError, TaxonomyTable};
use crate::rng::DetRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeLevel {
    Random,
    Genus,
    Family,
    Order,
}

impl NegativeLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            NegativeLevel::Random => "random",
            NegativeLevel::Genus => "genus",
            NegativeLevel::Family => "family",
            NegativeLevel::Order => "order",
        }
    }

    fn rank(self) -> Option<Rank> {
        match self {
            NegativeLevel::Random => None,
            NegativeLevel::Genus => Some(Rank::Genus),
            NegativeLevel::Family => Some(Rank::Family),
            NegativeLevel::Order => Some(Rank::Order),
        }
    }

    /// Next coarser level tried when this one has an empty pool.
    fn escalate(self) -> Option<NegativeLevel> {
        match self {
            NegativeLevel::Genus => Some(NegativeLevel::Family),
            NegativeLevel::Family => Some(NegativeLevel::Order),
            NegativeLevel::Order => Some(NegativeLevel::Random),
            NegativeLevel::Random => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NegativeDraw<'a> {
    pub records: Vec<&'a TaxonRecord>,
    pub requested: NegativeLevel,
    /// Differs from `requested` when the pool was empty and sampling
    /// escalated to a coarser rank.
    pub used: NegativeLevel,
}

impl NegativeDraw<'_> {
    pub fn escalated(&self) -> bool {
        self.requested != self.used
    }
}

// rejection draws tried before enumerating the random pool explicitly
const REJECTION_BUDGET: usize = 64;

impl TaxonomyTable {
    /// Draws `min(k, pool)` distinct negatives for `target`, uniformly and
    /// without replacement. Genus/family/order pools that are empty escalate
    /// to the next coarser rank, ending at `Random`.
    pub fn sample_negatives(
        &self,
        target: &TaxonRecord,
        level: NegativeLevel,
        k: usize,
        seed: u64,
    ) -> Result<NegativeDraw<'_>> {
        let mut rng = DetRng::new(seed);
        self.sample_negatives_with(target, &[target.taxon_id.as_str()], level, k, &mut rng, |_| true)
    }

    /// General form used by prompt generation: the pool is anchored on
    /// `anchor`'s lineage, excludes every id in `exclude`, and keeps only
    /// records accepted by `eligible`.
    pub fn sample_negatives_with<'a>(
        &'a self,
        anchor: &TaxonRecord,
        exclude: &[&str],
        level: NegativeLevel,
        k: usize,
        rng: &mut DetRng,
        eligible: impl Fn(&TaxonRecord) -> bool,
    ) -> Result<NegativeDraw<'a>> {
        let excluded: Vec<usize> = exclude.iter().filter_map(|id| self.index_of(id)).collect();
        let keep = |i: usize| !excluded.contains(&i) && eligible(&self.records[i]);

        let mut current = level;
        loop {
            let picked = match current.rank() {
                Some(rank) => {
                    let pool: Vec<usize> = self
                        .members(rank, anchor.rank_value(rank))
                        .iter()
                        .copied()
                        .filter(|&i| keep(i))
                        .collect();
                    (!pool.is_empty()).then(|| {
                        rng.sample_indices(pool.len(), k)
                            .into_iter()
                            .map(|j| pool[j])
                            .collect::<Vec<_>>()
                    })
                }
                None => self.sample_random(k, rng, &keep),
            };
            match picked {
                Some(idx) => {
                    return Ok(NegativeDraw {
                        records: idx.into_iter().map(|i| &self.records[i]).collect(),
                        requested: level,
                        used: current,
                    })
                }
                None => match current.escalate() {
                    Some(next) => current = next,
                    None => return Err(TaxonomyError::EmptyPool(anchor.taxon_id.clone())),
                },
            }
        }
    }

    fn sample_random(
        &self,
        k: usize,
        rng: &mut DetRng,
        keep: &impl Fn(usize) -> bool,
    ) -> Option<Vec<usize>> {
        let n = self.records.len();
        if n == 0 {
            return None;
        }
        // Sequential uniform draws with rejection of excluded and repeated
        // records give a uniform ordered sample without replacement.
        let mut out: Vec<usize> = Vec::with_capacity(k);
        let mut tries = 0;
        while out.len() < k && tries < REJECTION_BUDGET * k.max(1) {
            tries += 1;
            let i = rng.below(n);
            if keep(i) && !out.contains(&i) {
                out.push(i);
            }
        }
        if out.len() == k {
            return Some(out);
        }
        let pool: Vec<usize> = (0..n).filter(|&i| keep(i) && !out.contains(&i)).collect();
        if pool.is_empty() && out.is_empty() {
            return None;
        }
        let need = k - out.len();
        out.extend(rng.sample_indices(pool.len(), need).into_iter().map(|j| pool[j]));
        Some(out)
    }
}
