use super::normalize::{find_date, AnswerVocabulary};
use super::HypernymRegistry;
use crate::digest::derive_seed;
use crate::ingest::MONTHS;
use crate::llm::{BackendError, Cassette, ChatClient, CompletionBackend, DecodingParams};
use crate::predicates::{self, AnswerKind, OCCUPATION};
use crate::synthesis::occupation_cues;
use crate::text::contains_label;

/// Extraction interface: answer a question from a context text.
pub trait QaBackend: Sync {
    fn id(&self) -> String;
    fn answer(&self, question: &str, context: &str) -> Result<String, BackendError>;
}

/// Prompt sent to completion-style QA backends (and the replay key).
pub fn qa_prompt(question: &str, context: &str) -> String {
    format!(
        "Answer the question using only the text below. Reply with the answer alone, in a few words. \
If the text does not contain the answer, say that you cannot determine it.\n\nText: {context}\n\nQuestion: {question}\nAnswer:"
    )
}

pub struct RemoteQa {
    client: ChatClient,
    params: DecodingParams,
}

impl RemoteQa {
    pub fn new(client: ChatClient, params: DecodingParams) -> Self {
        RemoteQa { client, params }
    }
}

impl QaBackend for RemoteQa {
    fn id(&self) -> String {
        format!("{}#{}", self.client.id(), self.params.model)
    }

    fn answer(&self, question: &str, context: &str) -> Result<String, BackendError> {
        self.client.complete(&qa_prompt(question, context), &self.params)
    }
}

pub struct ReplayQa {
    cassette: Cassette,
}

impl ReplayQa {
    pub fn new(cassette: Cassette) -> Self {
        ReplayQa { cassette }
    }
}

impl QaBackend for ReplayQa {
    fn id(&self) -> String {
        "replay".into()
    }

    fn answer(&self, question: &str, context: &str) -> Result<String, BackendError> {
        self.cassette.replay(&qa_prompt(question, context))
    }
}

pub const REFUSAL: &str = "I cannot determine this from the text.";

/// Deterministic reader standing in for the extraction model.
///
/// It names the longest expected label found in the text, decodes the mock
/// generator's occupation cues (sometimes only to the hypernym), and
/// otherwise refuses or guesses from the vocabulary.
pub struct MockQa {
    vocabulary: AnswerVocabulary,
    hypernyms: HypernymRegistry,
}

impl MockQa {
    pub fn new(vocabulary: AnswerVocabulary, hypernyms: HypernymRegistry) -> Self {
        MockQa { vocabulary, hypernyms }
    }

    fn decode_cue(&self, context: &str) -> Option<&'static str> {
        crate::synthesis::MOCK_OCCUPATIONS
            .iter()
            .chain(["singer", "painter", "politician", "journalist", "poet"].iter())
            .copied()
            .find(|label| {
                occupation_cues(label).iter().any(|cue| {
                    cue.split("{e}")
                        .map(str::trim)
                        .filter(|f| !f.is_empty())
                        .all(|f| context.contains(f))
                })
            })
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

impl QaBackend for MockQa {
    fn id(&self) -> String {
        "mock".into()
    }

    fn answer(&self, question: &str, context: &str) -> Result<String, BackendError> {
        let Some((spec, _)) = predicates::match_question(question) else {
            return Ok(REFUSAL.into());
        };
        let h = derive_seed(0, &format!("{question}\n{context}"));
        if spec.answer_kind == AnswerKind::Date {
            return Ok(match find_date(context) {
                Some(iso) => {
                    let parts: Vec<u32> = iso.split('-').map(|p| p.parse().unwrap_or(0)).collect();
                    match parts.as_slice() {
                        [y, m, d] => format!("{} {d}, {y}", MONTHS[*m as usize - 1]),
                        [y, m] => format!("{} {y}", MONTHS[*m as usize - 1]),
                        _ => iso,
                    }
                }
                None => REFUSAL.into(),
            });
        }
        let labels: Vec<&str> = self
            .vocabulary
            .by_predicate
            .get(spec.id)
            .map(|s| s.iter().map(String::as_str).collect())
            .unwrap_or_default();
        if let Some(found) = labels
            .iter()
            .filter(|l| contains_label(context, l))
            .max_by_key(|l| (l.len(), std::cmp::Reverse(**l)))
        {
            return Ok(capitalize(found));
        }
        if spec.id == OCCUPATION {
            if let Some(label) = self.decode_cue(context) {
                let answer = match self.hypernyms.get(label) {
                    Some(hyper) if h.is_multiple_of(3) => hyper,
                    _ => label,
                };
                return Ok(capitalize(answer));
            }
        }
        if h.is_multiple_of(4) || labels.is_empty() {
            return Ok(REFUSAL.into());
        }
        Ok(capitalize(labels[(h / 4) as usize % labels.len()]))
    }
}
