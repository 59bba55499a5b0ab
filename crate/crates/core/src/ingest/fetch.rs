use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::claims::{attach_labels, label_ids, parse_entity, ParsedEntity};
use super::filter::{filter_statements, PropertyFilter};
use super::model::{EntityId, EntityRecord};
use super::source::{Labels, WikidataSource};
use super::IngestError;
use crate::predicates::HUMAN;

#[derive(Debug, Clone)]
pub struct FetchOptions {
    /// Maximum in-flight requests.
    pub concurrency: usize,
    /// Candidate draws allowed per requested entity before giving up.
    pub draws_per_entity: usize,
}

impl Default for FetchOptions {
    fn default() -> Self {
        FetchOptions {
            concurrency: 4,
            draws_per_entity: 20,
        }
    }
}

/// Lazy Fisher-Yates shuffle of `0..len`: yields distinct offsets in a
/// seed-determined order without materializing the whole range.
pub(crate) struct SparsePermutation {
    remaining: u64,
    swapped: HashMap<u64, u64>,
    rng: ChaCha8Rng,
}

impl SparsePermutation {
    pub(crate) fn new(len: u64, seed: u64) -> Self {
        SparsePermutation {
            remaining: len,
            swapped: HashMap::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Iterator for SparsePermutation {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.remaining == 0 {
            return None;
        }
        let j = self.rng.random_range(0..self.remaining);
        let last = self.remaining - 1;
        let at_j = *self.swapped.get(&j).unwrap_or(&j);
        let at_last = *self.swapped.get(&last).unwrap_or(&last);
        self.swapped.insert(j, at_last);
        self.remaining -= 1;
        Some(at_j)
    }
}

type Fetched = Option<(EntityId, ParsedEntity, Labels)>;

fn fetch_one(source: &dyn WikidataSource, offset: u64) -> Result<Fetched, IngestError> {
    let Some(id) = source.human_candidate(offset)? else {
        return Ok(None);
    };
    let payload = source.entity_payload(&id)?;
    let parsed = parse_entity(&payload);
    let labels = if parsed.is_instance_of(HUMAN) {
        source.labels(&label_ids(&parsed.claims))?
    } else {
        Labels::new()
    };
    Ok(Some((id, parsed, labels)))
}

/// Draw `count` distinct Human entities at seeded random offsets.
///
/// Requests run on at most `opts.concurrency` threads; results are consumed
/// in draw order, so the output depends only on `(count, seed)` and the
/// source's contents.
pub fn fetch_entities(
    count: usize,
    seed: u64,
    source: &dyn WikidataSource,
    filter: &PropertyFilter,
    opts: &FetchOptions,
) -> Result<Vec<EntityRecord>, IngestError> {
    if count == 0 {
        return Err(IngestError::InvalidCount);
    }
    let concurrency = opts.concurrency.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(concurrency)
        .build()
        .map_err(|e| IngestError::Snapshot(e.to_string()))?;
    let mut offsets = SparsePermutation::new(source.pool_size()?, seed);
    let max_draws = count.saturating_mul(opts.draws_per_entity.max(1)).saturating_add(100);
    let mut draws = 0usize;
    let mut seen = HashSet::new();
    let mut records = Vec::with_capacity(count);

    while records.len() < count {
        let want = (count - records.len()).min(concurrency);
        let batch: Vec<u64> = offsets.by_ref().take(want).collect();
        draws += batch.len();
        if batch.is_empty() || draws > max_draws {
            return Err(IngestError::PoolExhausted {
                wanted: count,
                found: records.len(),
            });
        }
        let fetched: Vec<Result<Fetched, IngestError>> =
            pool.install(|| batch.par_iter().map(|&off| fetch_one(source, off)).collect());
        for result in fetched {
            let Some((id, mut parsed, labels)) = result? else {
                continue;
            };
            if !seen.insert(id.clone()) {
                continue;
            }
            if !parsed.is_instance_of(HUMAN) {
                log::info!("skipping {id}: not an instance of {HUMAN}");
                continue;
            }
            attach_labels(&mut parsed.claims, &labels);
            let triples = filter_statements(&parsed.claims, filter);
            if triples.is_empty() {
                log::info!("skipping {id}: no biographical statements survive filtering");
                continue;
            }
            let label = parsed.label.clone().unwrap_or_else(|| id.to_string());
            records.push(EntityRecord::new(id, label, triples));
            if records.len() == count {
                break;
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_covers_range_once() {
        let mut seen: Vec<u64> = SparsePermutation::new(50, 3).collect();
        seen.sort();
        assert_eq!(seen, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn permutation_is_seeded() {
        let a: Vec<u64> = SparsePermutation::new(1000, 1).take(10).collect();
        let b: Vec<u64> = SparsePermutation::new(1000, 1).take(10).collect();
        let c: Vec<u64> = SparsePermutation::new(1000, 2).take(10).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
