//! Paired explicit/implicit descriptions: prompt construction, the
//! generation backends and the contrast check every stored pair must pass.

mod corpus;
mod generate;
mod mock;
mod pair;
mod prompt;
mod strategy;
mod task;

pub use corpus::{synthesize_corpus, CorpusOptions, SynthesisFailure, SynthesisOutcome};
pub use generate::{generate_pair, parse_response, GenerationOptions, ReplayGenerator};
pub use mock::{mock_generate, mock_occupation_corpus, occupation_cues, MockGenerator, MOCK_OCCUPATIONS};
pub use pair::{validate_pair, PairedDescription, Verdict, Violation, PAIR_SCHEMA};
pub use prompt::{build_prompt, PROMPT_TEMPLATE, TEMPLATE_ID};
pub use strategy::RhetoricalStrategy;
pub use task::{default_few_shot, FewShotExample, GenerationTask, FEW_SHOT_COUNT};

use crate::llm::BackendError;

#[derive(Debug, thiserror::Error)]
pub enum SynthesisError {
    #[error("invalid generation task: {0}")]
    InvalidTask(String),
    #[error("entity {0} has no hidden triple")]
    MissingHidden(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("pair for {entity_id} still invalid after {attempts} attempt(s): {}", tags(.violations))]
    UnvalidatablePair {
        entity_id: String,
        attempts: u32,
        violations: Vec<Violation>,
        last_candidate: Box<PairedDescription>,
    },
}

fn tags(v: &[Violation]) -> String {
    v.iter().map(|x| x.tag()).collect::<Vec<_>>().join(", ")
}

impl SynthesisError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, SynthesisError::Backend(e) if e.is_retryable())
    }
}
