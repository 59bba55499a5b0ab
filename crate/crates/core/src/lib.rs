//! Paired explicit/implicit biographical information-extraction corpora.
//!
//! The crate covers the whole experiment pipeline:
//!
//! * [`ingest`] pulls Human entities from Wikidata, keeps the biographical
//!   statements and marks one of them as the hidden fact.
//! * [`synthesis`] prompts a generation backend for an explicit and an
//!   implicit description of each entity and validates the contrast.
//! * [`qa`] asks a QA backend for the hidden fact against both texts and
//!   scores the answers with hypernym credit.
//! * [`stats`] compares the explicit and implicit score distributions with
//!   the Wilcoxon signed-rank test.
//! * [`metrics`] and [`experiment`] run the occupation-classification matrix
//!   (train/test on explicit, implicit or both) through a pluggable trainer.
//! * [`pipeline`] chains the stages with digests and manifests so reruns
//!   are resumable.
//!
//! Every backend that would normally talk to a remote service has a
//! deterministic in-process stand-in, so the full pipeline runs offline.

pub mod clock;
pub mod digest;
pub mod experiment;
mod http;
pub mod ingest;
pub mod jsonl;
pub mod llm;
pub mod metrics;
pub mod pipeline;
pub mod predicates;
pub mod qa;
pub mod stats;
pub mod synthesis;
pub mod text;

pub use http::{HttpError, RetryPolicy};

/// Location of the fixtures shipped with the crate (few-shot exemplars,
/// lemma table, hypernym registry, Wikidata snapshot, recorded responses).
pub fn fixtures_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/qa.md")]
    mod qa {}
    #[doc = include_str!("../../../book/src/wilcoxon.md")]
    mod wilcoxon {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/experiment.md")]
    mod experiment {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
