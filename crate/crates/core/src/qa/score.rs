use std::collections::BTreeSet;

use super::item::ExpectedAnswer;
use super::normalize::{find_date, Normalizer};
use crate::ingest::MONTHS;
use crate::predicates::AnswerKind;

/// Credit of the first expected answer whose normalized form equals the
/// answer's; 0 when nothing matches or the answer is absent.
pub fn score_answer(normalized: Option<&str>, expected: &[ExpectedAnswer]) -> f64 {
    let n = Normalizer::standard();
    let Some(answer) = normalized.and_then(|a| n.key(a)) else {
        return 0.0;
    };
    expected
        .iter()
        .find(|e| n.key(&e.label).as_deref() == Some(answer.as_str()))
        .map_or(0.0, |e| e.credit)
}

/// The "NaN" rule: an answer is a failure when it is absent (empty or a
/// refusal, so `normalized` is `None`) or shares nothing with the answer
/// type. For dates that means no digit and no month name; for items, no
/// token in common with the predicate's label vocabulary (skipped when the
/// vocabulary is empty).
pub fn is_failure(normalized: Option<&str>, kind: AnswerKind, vocabulary_tokens: &BTreeSet<&str>) -> bool {
    let Some(answer) = normalized else {
        return true;
    };
    match kind {
        AnswerKind::Date => {
            find_date(answer).is_none()
                && !answer.chars().any(|c| c.is_ascii_digit())
                && !answer
                    .split(|c: char| !c.is_alphabetic())
                    .any(|w| MONTHS.iter().any(|m| m.eq_ignore_ascii_case(w)))
        }
        AnswerKind::Item => {
            let key = Normalizer::standard().key(answer).unwrap_or_default();
            !vocabulary_tokens.is_empty() && !key.split(' ').any(|t| vocabulary_tokens.contains(t))
        }
        AnswerKind::Text => false,
    }
}
