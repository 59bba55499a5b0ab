use super::pair::{validate_pair, PairedDescription, Violation, PAIR_SCHEMA};
use super::prompt::build_prompt;
use super::task::GenerationTask;
use super::SynthesisError;
use crate::clock::Clock;
use crate::llm::{BackendError, Cassette, CompletionBackend, DecodingParams};

#[derive(Debug, Clone)]
pub struct GenerationOptions {
    pub params: DecodingParams,
    /// Extra prompts after the first one when a pair fails validation.
    pub max_reasks: u32,
    pub clock: Clock,
}

impl Default for GenerationOptions {
    fn default() -> Self {
        GenerationOptions {
            params: DecodingParams::default(),
            max_reasks: 2,
            clock: Clock::default(),
        }
    }
}

/// Pull the final `Explicit:` and `Implicit:` paragraphs out of a reply.
///
/// Markers may be decorated (`**Explicit:**`, `## Implicit:`); a later
/// marker replaces an earlier draft. A paragraph runs until the next marker
/// or blank line.
pub fn parse_response(text: &str) -> Option<(String, String)> {
    #[derive(Clone, Copy, PartialEq)]
    enum Slot {
        Explicit,
        Implicit,
    }
    let mut explicit: Option<String> = None;
    let mut implicit: Option<String> = None;
    let mut current: Option<Slot> = None;
    for line in text.lines() {
        let bare = line.trim().trim_start_matches(['*', '#', '-', ' ']);
        let lower = bare.to_ascii_lowercase();
        let marker = [("explicit", Slot::Explicit), ("implicit", Slot::Implicit)]
            .into_iter()
            .find_map(|(word, slot)| {
                let rest = lower.strip_prefix(word)?;
                let rest = rest.trim_start_matches(['*', ' ']);
                let rest = rest.strip_prefix("description").unwrap_or(rest).trim_start_matches(['*', ' ']);
                rest.starts_with(':').then(|| (slot, bare.len() - rest.len() + 1))
            });
        if let Some((slot, offset)) = marker {
            let body = bare[offset..].trim().trim_matches('*').trim().to_string();
            match slot {
                Slot::Explicit => explicit = Some(body),
                Slot::Implicit => implicit = Some(body),
            }
            current = Some(slot);
            continue;
        }
        if line.trim().is_empty() {
            current = None;
            continue;
        }
        let target = match current {
            Some(Slot::Explicit) => explicit.as_mut(),
            Some(Slot::Implicit) => implicit.as_mut(),
            None => None,
        };
        if let Some(buf) = target {
            if !buf.is_empty() {
                buf.push(' ');
            }
            buf.push_str(line.trim());
        }
    }
    Some((explicit?, implicit?))
}

fn reask_prompt(base: &str, violations: &[Violation]) -> String {
    let tags: Vec<&str> = violations.iter().map(|v| v.tag()).collect();
    format!(
        "{base}\n\nYour previous reply was rejected because of: {}. Write both descriptions again, fix these problems, and finish with the Explicit: and Implicit: lines.",
        tags.join(", ")
    )
}

/// Generate one validated pair, re-asking up to `opts.max_reasks` times with
/// the violations appended to the prompt.
pub fn generate_pair(
    task: &GenerationTask,
    backend: &dyn CompletionBackend,
    opts: &GenerationOptions,
) -> Result<PairedDescription, SynthesisError> {
    let base = build_prompt(task)?;
    let hidden = task.entity.hidden().expect("build_prompt checked the task").clone();
    let mut prompt = base.clone();
    let mut last = None;
    for _ in 0..=opts.max_reasks {
        let reply = backend.complete(&prompt, &opts.params)?;
        let (explicit_text, implicit_text) = parse_response(&reply).unwrap_or_default();
        let candidate = PairedDescription {
            schema: PAIR_SCHEMA.to_string(),
            entity_id: task.entity.entity_id.clone(),
            entity_label: task.entity.label.clone(),
            hidden_triple: hidden.clone(),
            explicit_text,
            implicit_text,
            strategy_name: task.strategy.name().to_string(),
            backend_id: backend.id(),
            generation_timestamp: opts.clock.now(),
        };
        let verdict = validate_pair(&candidate);
        if verdict.is_ok() {
            return Ok(candidate);
        }
        log::debug!("{}: rejected pair ({:?})", task.entity.entity_id, verdict.violations);
        prompt = reask_prompt(&base, &verdict.violations);
        last = Some((candidate, verdict.violations));
    }
    let (candidate, violations) = last.expect("at least one attempt");
    Err(SynthesisError::UnvalidatablePair {
        entity_id: task.entity.entity_id.to_string(),
        attempts: opts.max_reasks + 1,
        violations,
        last_candidate: Box::new(candidate),
    })
}

/// Recorded-response backend.
pub struct ReplayGenerator {
    cassette: Cassette,
}

impl ReplayGenerator {
    pub fn new(cassette: Cassette) -> Self {
        ReplayGenerator { cassette }
    }
}

impl CompletionBackend for ReplayGenerator {
    fn id(&self) -> String {
        "replay".into()
    }

    fn complete(&self, prompt: &str, _params: &DecodingParams) -> Result<String, BackendError> {
        self.cassette.replay(prompt)
    }
}
