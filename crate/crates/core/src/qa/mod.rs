//! Question answering over the paired texts: questions from hidden triples,
//! answer normalization and scoring with hypernym credit, failure
//! accounting and the per-entity score distributions.

mod backend;
mod evaluate;
mod hypernyms;
mod item;
mod metric;
mod normalize;
mod report;
mod score;

pub use backend::{qa_prompt, MockQa, QaBackend, RemoteQa, ReplayQa, REFUSAL};
pub use evaluate::{evaluate_pairs, extract_answer, AnswerRecord, EvalContext, EvalOptions, ANSWER_SCHEMA};
pub use hypernyms::{HypernymRegistry, HYPERNYM_CREDIT};
pub use item::{build_question, items_for_pair, Condition, ExpectedAnswer, QAItem, Question};
pub use metric::{resolve_metric, semantic_distance, AdapterMetric, SemanticMetric, TokenF1};
pub use normalize::{find_date, is_refusal, normalize_answer, AnswerVocabulary, LemmaTable, Normalizer, Vocabulary};
pub use report::{compute_failure_rate, FailurePolicy, FailureRate, PairedRow, ScoreDistribution, ScoreField};
pub use score::{is_failure, score_answer};

use crate::llm::BackendError;

#[derive(Debug, thiserror::Error)]
pub enum QaError {
    #[error("predicate {0} has no question template")]
    NoQuestionTemplate(String),
    #[error("triple {0} is not marked hidden")]
    NotHidden(String),
    #[error("no {0} records to aggregate")]
    EmptyInput(String),
    #[error("semantic metric {name:?} unavailable: {reason}; use the baseline metric instead")]
    MetricUnavailable { name: String, reason: String },
    #[error("malformed QA input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

impl QaError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, QaError::Backend(e) if e.is_retryable())
    }
}
