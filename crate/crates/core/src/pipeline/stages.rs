//! One function per stage, on in-memory data. The orchestrator and the
//! single-stage CLI commands both call these.

use std::path::Path;

use super::config::{
    BackendKind, EvaluationConfig, FinetuneConfig, FinetuneCorpus, IngestConfig, SourceKind, StatsConfig,
    SynthesisConfig, TrainerKind,
};
use super::PipelineError;
use crate::clock::Clock;
use crate::experiment::{run_matrix, Dataset, ExperimentMode, ExternalTrainer, LexicalTrainer, MatrixOutcome, Trainer};
use crate::ingest::{
    fetch_entities, select_hidden_property, CachingSource, EntityRecord, FetchOptions, FixtureSource, HttpSource,
    IngestError, WikidataSource,
};
use crate::llm::{Cassette, ChatClient, CompletionBackend};
use crate::qa::{
    evaluate_pairs, resolve_metric, AnswerRecord, AnswerVocabulary, EvalContext, EvalOptions, HypernymRegistry,
    MockQa, QaBackend, RemoteQa, ReplayQa, ScoreDistribution,
};
use crate::stats::{compare_conditions, ComparisonReport};
use crate::synthesis::{
    mock_occupation_corpus, synthesize_corpus, CorpusOptions, GenerationOptions, MockGenerator, PairedDescription,
    ReplayGenerator, SynthesisOutcome,
};
use crate::RetryPolicy;

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOutcome {
    /// Entities with their hidden fact marked.
    pub records: Vec<EntityRecord>,
    /// Entities fetched but left out because nothing could be hidden.
    pub dropped: Vec<String>,
}

/// Fetch `cfg.count` Human entities and mark one hidden fact on each.
pub fn ingest(cfg: &IngestConfig, seed: u64) -> Result<IngestOutcome, PipelineError> {
    let source: Box<dyn WikidataSource> = match cfg.source {
        SourceKind::Snapshot => Box::new(FixtureSource::open(cfg.snapshot_dir())?),
        SourceKind::Live => Box::new(HttpSource::new(cfg.endpoint.clone(), RetryPolicy::default())),
        SourceKind::Cached => {
            let dir = cfg
                .cache_dir
                .clone()
                .ok_or_else(|| PipelineError::Config("ingest.source = \"cached\" needs ingest.cache_dir".into()))?;
            Box::new(CachingSource::new(
                HttpSource::new(cfg.endpoint.clone(), RetryPolicy::default()),
                dir,
            )?)
        }
    };
    let opts = FetchOptions {
        concurrency: cfg.concurrency,
        ..FetchOptions::default()
    };
    let fetched = fetch_entities(cfg.count, seed, source.as_ref(), &cfg.filter, &opts)?;
    let mut out = IngestOutcome {
        records: Vec::with_capacity(fetched.len()),
        dropped: Vec::new(),
    };
    for r in fetched {
        match select_hidden_property(&r, seed) {
            Ok(h) => out.records.push(h),
            Err(IngestError::NoHideableProperty(id)) => {
                log::warn!("{id} has nothing to hide; left out");
                out.dropped.push(id);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

fn cassette(path: Option<&Path>, section: &str) -> Result<Cassette, PipelineError> {
    let path = path.ok_or_else(|| PipelineError::Config(format!("{section}: the replay backend needs a cassette")))?;
    Ok(Cassette::load(path)?)
}

pub fn generation_backend(cfg: &SynthesisConfig) -> Result<Box<dyn CompletionBackend>, PipelineError> {
    Ok(match cfg.backend {
        BackendKind::Mock => Box::new(MockGenerator),
        BackendKind::Replay => Box::new(ReplayGenerator::new(cassette(cfg.cassette.as_deref(), "synthesis")?)),
        BackendKind::Remote => Box::new(ChatClient::from_env()?),
    })
}

pub fn synthesize(entities: &[EntityRecord], cfg: &SynthesisConfig, clock: Clock) -> Result<SynthesisOutcome, PipelineError> {
    let backend = generation_backend(cfg)?;
    let opts = CorpusOptions {
        generation: GenerationOptions {
            params: cfg.decoding.clone(),
            max_reasks: cfg.max_reasks,
            clock,
        },
        concurrency: cfg.concurrency,
    };
    Ok(synthesize_corpus(entities, backend.as_ref(), &opts)?)
}

pub fn qa_backend(cfg: &EvaluationConfig, pairs: &[PairedDescription]) -> Result<Box<dyn QaBackend>, PipelineError> {
    Ok(match cfg.backend {
        BackendKind::Mock => {
            let hypernyms = HypernymRegistry::default();
            Box::new(MockQa::new(AnswerVocabulary::from_pairs(pairs, &hypernyms), hypernyms))
        }
        BackendKind::Replay => Box::new(ReplayQa::new(cassette(cfg.cassette.as_deref(), "evaluation")?)),
        BackendKind::Remote => Box::new(RemoteQa::new(ChatClient::from_env()?, cfg.decoding.clone())),
    })
}

/// Ask the hidden-fact question against both texts of every pair.
pub fn evaluate(pairs: &[PairedDescription], cfg: &EvaluationConfig) -> Result<Vec<AnswerRecord>, PipelineError> {
    let backend = qa_backend(cfg, pairs)?;
    let hypernyms = HypernymRegistry::default();
    let ctx = EvalContext::new(
        &AnswerVocabulary::from_pairs(pairs, &hypernyms),
        hypernyms,
        resolve_metric(&cfg.metric)?,
    );
    Ok(evaluate_pairs(
        pairs,
        backend.as_ref(),
        &ctx,
        &EvalOptions {
            concurrency: cfg.concurrency,
        },
    )?)
}

pub fn stats(records: &[AnswerRecord], cfg: &StatsConfig, metric_id: &str) -> Result<ComparisonReport, PipelineError> {
    let dist = ScoreDistribution::from_records(records, cfg.field, metric_id)?;
    Ok(compare_conditions(&dist, &cfg.compare)?)
}

/// Corpus the classification matrix trains on.
pub fn finetune_corpus(
    cfg: &FinetuneConfig,
    synthesized: Option<&[PairedDescription]>,
    seed: u64,
) -> Result<Vec<PairedDescription>, PipelineError> {
    match (&cfg.corpus, synthesized) {
        (FinetuneCorpus::MockOccupations { size }, _) => Ok(mock_occupation_corpus(*size, seed)),
        (FinetuneCorpus::Synthesized, Some(p)) => Ok(p.to_vec()),
        (FinetuneCorpus::Synthesized, None) => {
            Err(PipelineError::Config("finetune.corpus = synthesized needs the synthesized pairs".into()))
        }
    }
}

/// Run the whole matrix into `out`, one subdirectory per cell.
pub fn finetune(
    pairs: &[PairedDescription],
    cfg: &FinetuneConfig,
    seed: u64,
    out: &Path,
    clock: Clock,
) -> Result<MatrixOutcome, PipelineError> {
    let mut exp = cfg.experiment.clone();
    exp.seed = seed;
    let data = Dataset::from_pairs(pairs, exp.top_k)?;
    let command = cfg.command.clone();
    let profile = exp.model_profile.clone();
    let kind = cfg.trainer;
    let factory = move |mode: ExperimentMode| -> Box<dyn Trainer> {
        match (kind, &command) {
            (TrainerKind::External, Some(cmd)) => Box::new(ExternalTrainer::new(
                cmd.clone(),
                profile.clone(),
                out.join(mode.code()).join("runner"),
            )),
            _ => Box::new(LexicalTrainer::default()),
        }
    };
    Ok(run_matrix(&data, &exp, &factory, Some(out), clock)?)
}
