use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ClassificationExample, ExperimentError, ExperimentMode};
use crate::digest::derive_seed;
use crate::qa::Condition;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntitySplit {
    pub train: BTreeSet<String>,
    pub test: BTreeSet<String>,
}

/// Entity-level split stratified by label. Each label gets
/// `floor(n * ratio)` training entities, clamped so both sides keep at
/// least one; the leftover entities up to `round(N * ratio)` go to the
/// labels with the largest fractional remainders.
pub fn split_entities(examples: &[ClassificationExample], ratio: f64, seed: u64) -> Result<EntitySplit, ExperimentError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(ExperimentError::InvalidRatio(ratio));
    }
    let mut by_label: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for e in examples {
        by_label.entry(&e.label).or_default().insert(&e.entity_id);
    }
    let total: usize = by_label.values().map(BTreeSet::len).sum();
    let mut quota: Vec<(&str, usize, usize, f64)> = Vec::new();
    for (label, ids) in &by_label {
        let n = ids.len();
        if n < 2 {
            return Err(ExperimentError::SplitTooSmall {
                label: label.to_string(),
                entities: n,
            });
        }
        let exact = n as f64 * ratio;
        let take = (exact.floor() as usize).clamp(1, n - 1);
        quota.push((label, n, take, exact - exact.floor()));
    }
    let target = (total as f64 * ratio).round() as usize;
    let mut assigned: usize = quota.iter().map(|q| q.2).sum();
    let mut order: Vec<usize> = (0..quota.len()).collect();
    order.sort_by(|&a, &b| quota[b].3.total_cmp(&quota[a].3));
    for i in order {
        if assigned >= target {
            break;
        }
        if quota[i].2 < quota[i].1 - 1 {
            quota[i].2 += 1;
            assigned += 1;
        }
    }
    let mut split = EntitySplit {
        train: BTreeSet::new(),
        test: BTreeSet::new(),
    };
    for (label, _, take, _) in quota {
        let mut ids: Vec<&str> = by_label[label].iter().copied().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("split/{label}")));
        ids.shuffle(&mut rng);
        split.train.extend(ids[..take].iter().map(|s| s.to_string()));
        split.test.extend(ids[take..].iter().map(|s| s.to_string()));
    }
    Ok(split)
}

/// Train and test examples for one cell, in input order. The entity split
/// depends only on the examples, ratio and seed, so every cell of a matrix
/// sees the same entities on each side.
pub fn build_splits(
    examples: &[ClassificationExample],
    mode: ExperimentMode,
    ratio: f64,
    seed: u64,
) -> Result<(Vec<ClassificationExample>, Vec<ClassificationExample>), ExperimentError> {
    for c in Condition::BOTH {
        if !examples.iter().any(|e| e.condition == c) {
            return Err(ExperimentError::MissingCondition(c));
        }
    }
    let split = split_entities(examples, ratio, seed)?;
    let train = examples
        .iter()
        .filter(|e| split.train.contains(&e.entity_id) && mode.train_conditions().contains(&e.condition))
        .cloned()
        .collect();
    let test = examples
        .iter()
        .filter(|e| split.test.contains(&e.entity_id) && e.condition == mode.test_condition())
        .cloned()
        .collect();
    Ok((train, test))
}
