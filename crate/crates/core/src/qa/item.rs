use serde::{Deserialize, Serialize};

use super::hypernyms::HypernymRegistry;
use super::QaError;
use crate::ingest::Triple;
use crate::predicates;
use crate::synthesis::PairedDescription;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Explicit,
    Implicit,
}

impl Condition {
    pub const BOTH: [Condition; 2] = [Condition::Explicit, Condition::Implicit];

    pub fn name(self) -> &'static str {
        match self {
            Condition::Explicit => "explicit",
            Condition::Implicit => "implicit",
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedAnswer {
    pub label: String,
    pub credit: f64,
}

/// A question about a hidden fact, independent of the text it is asked
/// against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub predicate_id: String,
    pub question_text: String,
    /// Most specific first, credits strictly decreasing from 1.0.
    pub expected_answers: Vec<ExpectedAnswer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAItem {
    pub entity_id: String,
    pub predicate_id: String,
    pub question_text: String,
    pub expected_answers: Vec<ExpectedAnswer>,
    pub condition: Condition,
    pub source_text: String,
}

pub fn build_question(hidden: &Triple, entity_label: &str, hypernyms: &HypernymRegistry) -> Result<Question, QaError> {
    if !hidden.is_hidden {
        return Err(QaError::NotHidden(hidden.fact()));
    }
    let pid = hidden.predicate_id.as_str();
    let spec = predicates::lookup(pid)
        .filter(|p| p.hideable)
        .ok_or_else(|| QaError::NoQuestionTemplate(pid.to_string()))?;
    let question_text = predicates::question_for(spec.id, entity_label)
        .ok_or_else(|| QaError::NoQuestionTemplate(pid.to_string()))?;
    let label = hidden.object_label();
    let mut expected_answers = vec![ExpectedAnswer {
        label: label.clone(),
        credit: 1.0,
    }];
    if spec.answer_kind == predicates::AnswerKind::Item {
        if let Some(h) = hypernyms.get(&label) {
            if !h.eq_ignore_ascii_case(&label) {
                expected_answers.push(ExpectedAnswer {
                    label: h.to_string(),
                    credit: hypernyms.credit,
                });
            }
        }
    }
    Ok(Question {
        predicate_id: pid.to_string(),
        question_text,
        expected_answers,
    })
}

/// The explicit and the implicit item for a pair.
pub fn items_for_pair(pair: &PairedDescription, hypernyms: &HypernymRegistry) -> Result<[QAItem; 2], QaError> {
    let q = build_question(&pair.hidden_triple, &pair.entity_label, hypernyms)?;
    let item = |condition: Condition| QAItem {
        entity_id: pair.entity_id.to_string(),
        predicate_id: q.predicate_id.clone(),
        question_text: q.question_text.clone(),
        expected_answers: q.expected_answers.clone(),
        condition,
        source_text: pair.text(condition == Condition::Explicit).to_string(),
    };
    Ok([item(Condition::Explicit), item(Condition::Implicit)])
}
