use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::backend::QaBackend;
use super::hypernyms::HypernymRegistry;
use super::item::{items_for_pair, Condition, QAItem};
use super::metric::{semantic_distance, SemanticMetric, TokenF1};
use super::normalize::{normalize_answer, AnswerVocabulary, Vocabulary};
use super::score::{is_failure, score_answer};
use super::QaError;
use crate::predicates::{self, AnswerKind};
use crate::synthesis::PairedDescription;

pub const ANSWER_SCHEMA: &str = "answer/1";

fn answer_schema() -> String {
    ANSWER_SCHEMA.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRecord {
    #[serde(default = "answer_schema")]
    pub schema: String,
    pub entity_id: String,
    pub condition: Condition,
    pub predicate_id: String,
    pub question_text: String,
    /// Model output verbatim; absent when it was empty.
    pub raw_answer: Option<String>,
    pub normalized_answer: Option<String>,
    pub score: f64,
    pub is_failure: bool,
    /// Similarity of the normalized answer to the most specific expected
    /// label under the run's metric; absent for failures.
    pub semantic_distance: Option<f64>,
}

/// What scoring needs besides the item itself.
pub struct EvalContext {
    pub hypernyms: HypernymRegistry,
    pub metric: Box<dyn SemanticMetric>,
    vocabularies: BTreeMap<String, Vocabulary>,
}

impl EvalContext {
    pub fn new(vocabulary: &AnswerVocabulary, hypernyms: HypernymRegistry, metric: Box<dyn SemanticMetric>) -> Self {
        let vocabularies = vocabulary
            .by_predicate
            .keys()
            .map(|pid| (pid.clone(), vocabulary.vocabulary(pid)))
            .collect();
        EvalContext {
            hypernyms,
            metric,
            vocabularies,
        }
    }

    /// Context over a pair corpus with the committed hypernyms and the
    /// baseline metric.
    pub fn for_pairs(pairs: &[PairedDescription]) -> Self {
        let hypernyms = HypernymRegistry::default();
        EvalContext::new(&AnswerVocabulary::from_pairs(pairs, &hypernyms), hypernyms, Box::new(TokenF1))
    }

    pub fn vocabulary(&self, predicate_id: &str) -> Option<&Vocabulary> {
        self.vocabularies.get(predicate_id)
    }
}

/// Ask one question and score the reply. Model-level failures are data in
/// the record; only backend errors are returned as `Err`.
pub fn extract_answer(item: &QAItem, backend: &dyn QaBackend, ctx: &EvalContext) -> Result<AnswerRecord, QaError> {
    if item.expected_answers.is_empty() {
        return Err(QaError::Invalid(format!("{}: no expected answers", item.entity_id)));
    }
    let reply = backend.answer(&item.question_text, &item.source_text)?;
    let raw_answer = (!reply.trim().is_empty()).then_some(reply);
    let empty = Vocabulary::empty();
    let vocabulary = ctx.vocabulary(&item.predicate_id).unwrap_or(&empty);
    let normalized = raw_answer.as_deref().and_then(|r| normalize_answer(r, vocabulary));
    let kind = predicates::lookup(&item.predicate_id).map_or(AnswerKind::Text, |p| p.answer_kind);
    let failure = is_failure(normalized.as_deref(), kind, &vocabulary.tokens());
    let (normalized_answer, score, distance) = match normalized {
        Some(n) if !failure => {
            let score = score_answer(Some(&n), &item.expected_answers);
            let d = semantic_distance(&n, &item.expected_answers[0].label, ctx.metric.as_ref())?;
            (Some(n), score, Some(d))
        }
        _ => (None, 0.0, None),
    };
    Ok(AnswerRecord {
        schema: answer_schema(),
        entity_id: item.entity_id.clone(),
        condition: item.condition,
        predicate_id: item.predicate_id.clone(),
        question_text: item.question_text.clone(),
        raw_answer,
        normalized_answer,
        score,
        is_failure: failure,
        semantic_distance: distance,
    })
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub concurrency: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { concurrency: 4 }
    }
}

/// Explicit then implicit record for every pair, in pair order.
pub fn evaluate_pairs(
    pairs: &[PairedDescription],
    backend: &dyn QaBackend,
    ctx: &EvalContext,
    opts: &EvalOptions,
) -> Result<Vec<AnswerRecord>, QaError> {
    let mut items = Vec::with_capacity(pairs.len() * 2);
    for p in pairs {
        items.extend(items_for_pair(p, &ctx.hypernyms)?);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.concurrency.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| items.par_iter().map(|item| extract_answer(item, backend, ctx)).collect())
}
