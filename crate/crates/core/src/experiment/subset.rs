use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::digest::canonical_json_digest;
use crate::qa::Condition;
use crate::synthesis::PairedDescription;

/// Wikidata property id of "occupation".
pub const OCCUPATION: &str = "P106";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    pub labels: Vec<String>,
}

impl LabelSet {
    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationExample {
    pub entity_id: String,
    pub text: String,
    pub label: String,
    pub condition: Condition,
}

/// Top-k occupations by frequency (ties in lexicographic order) and two
/// examples per retained pair, explicit first.
pub fn build_subset(pairs: &[PairedDescription], k: usize) -> Result<(LabelSet, Vec<ClassificationExample>), ExperimentError> {
    if k < 2 {
        return Err(ExperimentError::InvalidK(k));
    }
    let occupation: Vec<&PairedDescription> = pairs
        .iter()
        .filter(|p| p.hidden_triple.predicate_id.as_str() == OCCUPATION)
        .collect();
    if occupation.is_empty() {
        return Err(ExperimentError::NoOccupationPairs);
    }
    let mut freq: BTreeMap<String, usize> = BTreeMap::new();
    for p in &occupation {
        *freq.entry(p.hidden_triple.object_label()).or_default() += 1;
    }
    if freq.len() < k {
        return Err(ExperimentError::NotEnoughLabels {
            wanted: k,
            found: freq.len(),
        });
    }
    let mut ranked: Vec<(String, usize)> = freq.into_iter().collect();
    // BTreeMap order is lexicographic, and the sort is stable
    ranked.sort_by_key(|(_, n)| std::cmp::Reverse(*n));
    let labels = LabelSet {
        labels: ranked.into_iter().take(k).map(|(l, _)| l).collect(),
    };
    let examples = occupation
        .into_iter()
        .filter_map(|p| {
            let label = p.hidden_triple.object_label();
            labels.contains(&label).then(|| {
                Condition::BOTH.map(|c| ClassificationExample {
                    entity_id: p.entity_id.to_string(),
                    text: p.text(c == Condition::Explicit).to_string(),
                    label: label.clone(),
                    condition: c,
                })
            })
        })
        .flatten()
        .collect();
    Ok((labels, examples))
}

/// Classification examples plus the digest of the corpus they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub labels: LabelSet,
    pub examples: Vec<ClassificationExample>,
    pub corpus_digest: String,
}

impl Dataset {
    pub fn from_pairs(pairs: &[PairedDescription], k: usize) -> Result<Self, ExperimentError> {
        let (labels, examples) = build_subset(pairs, k)?;
        Ok(Dataset {
            labels,
            examples,
            corpus_digest: canonical_json_digest(&pairs),
        })
    }
}
