use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{generate_pair, GenerationOptions};
use super::pair::{PairedDescription, Violation};
use super::strategy::RhetoricalStrategy;
use super::task::{default_few_shot, GenerationTask};
use super::SynthesisError;
use crate::ingest::EntityRecord;
use crate::llm::CompletionBackend;

#[derive(Debug, Clone)]
pub struct CorpusOptions {
    pub generation: GenerationOptions,
    /// Requests in flight at once.
    pub concurrency: usize,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            generation: GenerationOptions::default(),
            concurrency: 4,
        }
    }
}

/// An entity that produced no stored pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisFailure {
    pub entity_id: String,
    pub reason: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<Violation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_candidate: Option<PairedDescription>,
}

#[derive(Debug, Clone, Default)]
pub struct SynthesisOutcome {
    pub pairs: Vec<PairedDescription>,
    pub failures: Vec<SynthesisFailure>,
}

/// Generate pairs for every entity, strategies assigned round-robin by
/// input position. Output keeps input order whatever the concurrency.
///
/// Entities whose pair never validates are reported as failures; backend
/// errors abort the run.
pub fn synthesize_corpus(
    entities: &[EntityRecord],
    backend: &dyn CompletionBackend,
    opts: &CorpusOptions,
) -> Result<SynthesisOutcome, SynthesisError> {
    let few_shot = default_few_shot();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.concurrency.max(1))
        .build()
        .expect("thread pool");
    let results: Vec<Result<PairedDescription, SynthesisError>> = pool.install(|| {
        entities
            .par_iter()
            .enumerate()
            .map(|(i, e)| {
                let task = GenerationTask::with_examples(e.clone(), RhetoricalStrategy::round_robin(i), few_shot.clone())?;
                generate_pair(&task, backend, &opts.generation)
            })
            .collect()
    });
    let mut out = SynthesisOutcome::default();
    for (e, r) in entities.iter().zip(results) {
        match r {
            Ok(p) => out.pairs.push(p),
            Err(SynthesisError::UnvalidatablePair {
                violations,
                last_candidate,
                ..
            }) => out.failures.push(SynthesisFailure {
                entity_id: e.entity_id.to_string(),
                reason: "unvalidatable-pair".into(),
                violations,
                last_candidate: Some(*last_candidate),
            }),
            Err(err @ (SynthesisError::MissingHidden(_) | SynthesisError::InvalidTask(_))) => {
                out.failures.push(SynthesisFailure {
                    entity_id: e.entity_id.to_string(),
                    reason: err.to_string(),
                    violations: Vec::new(),
                    last_candidate: None,
                })
            }
            Err(err) => return Err(err),
        }
    }
    Ok(out)
}
