use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::clock::Clock;
use crate::digest::canonical_json_digest;
use crate::experiment::ExperimentConfig;
use crate::ingest::{PropertyFilter, WikidataEndpoint};
use crate::llm::DecodingParams;
use crate::qa::ScoreField;
use crate::stats::CompareOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Synthesize,
    Evaluate,
    Stats,
    Finetune,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Ingest,
        Stage::Synthesize,
        Stage::Evaluate,
        Stage::Stats,
        Stage::Finetune,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Synthesize => "synthesize",
            Stage::Evaluate => "evaluate",
            Stage::Stats => "stats",
            Stage::Finetune => "finetune",
            Stage::Report => "report",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    /// Committed snapshot directory, no network.
    Snapshot,
    Live,
    /// Live access behind an on-disk cache in snapshot layout.
    Cached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestConfig {
    pub source: SourceKind,
    /// Snapshot directory; the bundled snapshot when unset.
    pub snapshot: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub count: usize,
    pub concurrency: usize,
    pub endpoint: WikidataEndpoint,
    pub filter: PropertyFilter,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            source: SourceKind::Snapshot,
            snapshot: None,
            cache_dir: None,
            count: 100,
            concurrency: 4,
            endpoint: WikidataEndpoint::default(),
            filter: PropertyFilter::default(),
        }
    }
}

impl IngestConfig {
    pub fn snapshot_dir(&self) -> PathBuf {
        self.snapshot.clone().unwrap_or_else(|| crate::fixtures_dir().join("snapshot"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Mock,
    Replay,
    Remote,
}

impl std::str::FromStr for BackendKind {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mock" => Ok(BackendKind::Mock),
            "replay" => Ok(BackendKind::Replay),
            "remote" => Ok(BackendKind::Remote),
            other => Err(PipelineError::Config(format!("unknown backend {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisConfig {
    pub backend: BackendKind,
    /// Recorded responses for the replay backend.
    pub cassette: Option<PathBuf>,
    pub decoding: DecodingParams,
    pub max_reasks: u32,
    pub concurrency: usize,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            backend: BackendKind::Mock,
            cassette: None,
            decoding: DecodingParams::default(),
            max_reasks: 2,
            concurrency: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluationConfig {
    pub backend: BackendKind,
    pub cassette: Option<PathBuf>,
    pub decoding: DecodingParams,
    /// `baseline` or `adapter:NAME`.
    pub metric: String,
    pub concurrency: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            backend: BackendKind::Mock,
            cassette: None,
            decoding: DecodingParams {
                temperature: 0.0,
                max_tokens: 64,
                ..DecodingParams::default()
            },
            metric: "baseline".into(),
            concurrency: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StatsConfig {
    pub field: ScoreField,
    #[serde(flatten)]
    pub compare: CompareOptions,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            field: ScoreField::Score,
            compare: CompareOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainerKind {
    /// In-process lexical classifier.
    Mock,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum FinetuneCorpus {
    /// Occupation-hidden pairs from the synthesize stage.
    Synthesized,
    /// Balanced in-process occupation corpus of `size` pairs.
    MockOccupations { size: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FinetuneConfig {
    pub trainer: TrainerKind,
    /// Runner command for the external trainer.
    pub command: Option<String>,
    pub corpus: FinetuneCorpus,
    #[serde(flatten)]
    pub experiment: ExperimentConfig,
}

impl Default for FinetuneConfig {
    fn default() -> Self {
        FinetuneConfig {
            trainer: TrainerKind::Mock,
            command: None,
            corpus: FinetuneCorpus::MockOccupations { size: 500 },
            experiment: ExperimentConfig::default(),
        }
    }
}

/// Everything a pipeline run needs. Secrets come from the environment
/// (`WD_API_TOKEN`, `GEN_API_KEY`), never from this file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub stages: Vec<Stage>,
    /// Stamp artifacts with the Unix epoch instead of the wall clock so
    /// reruns are byte-identical.
    pub fixed_clock: bool,
    pub ingest: IngestConfig,
    pub synthesis: SynthesisConfig,
    pub evaluation: EvaluationConfig,
    pub stats: StatsConfig,
    pub finetune: FinetuneConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            stages: Stage::ALL.to_vec(),
            fixed_clock: true,
            ingest: IngestConfig::default(),
            synthesis: SynthesisConfig::default(),
            evaluation: EvaluationConfig::default(),
            stats: StatsConfig::default(),
            finetune: FinetuneConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.ingest.count == 0 {
            return bad("ingest.count must be at least 1".into());
        }
        let alpha = self.stats.compare.alpha;
        if !(alpha > 0.0 && alpha < 1.0) {
            return bad(format!("stats.alpha must lie in (0, 1), got {alpha}"));
        }
        let ratio = self.finetune.experiment.split_ratio;
        if !(ratio > 0.0 && ratio < 1.0) {
            return bad(format!("finetune.split_ratio must lie in (0, 1), got {ratio}"));
        }
        for (name, kind, cassette) in [
            ("synthesis", self.synthesis.backend, &self.synthesis.cassette),
            ("evaluation", self.evaluation.backend, &self.evaluation.cassette),
        ] {
            if kind == BackendKind::Replay && cassette.is_none() {
                return bad(format!("{name}.backend = \"replay\" needs {name}.cassette"));
            }
        }
        if self.finetune.trainer == TrainerKind::External && self.finetune.command.is_none() {
            return bad("finetune.trainer = \"external\" needs finetune.command".into());
        }
        crate::experiment::model_profile(&self.finetune.experiment.model_profile)
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        let metric = &self.evaluation.metric;
        if metric != "baseline" && !metric.strip_prefix("adapter:").is_some_and(|n| !n.is_empty()) {
            return bad(format!("evaluation.metric must be `baseline` or `adapter:NAME`, got {metric:?}"));
        }
        Ok(())
    }

    /// Key-order independent hash of the whole configuration.
    pub fn hash(&self) -> String {
        canonical_json_digest(self)
    }

    /// Hash of the settings a stage depends on.
    pub fn stage_hash(&self, stage: Stage) -> String {
        let section = match stage {
            Stage::Ingest => serde_json::to_value(&self.ingest),
            Stage::Synthesize => serde_json::to_value(&self.synthesis),
            Stage::Evaluate => serde_json::to_value(&self.evaluation),
            Stage::Stats => serde_json::to_value(&self.stats),
            Stage::Finetune => serde_json::to_value(&self.finetune),
            Stage::Report => Ok(serde_json::Value::Null),
        }
        .expect("config serializes");
        canonical_json_digest(&serde_json::json!({
            "stage": stage,
            "seed": self.seed,
            "fixed_clock": self.fixed_clock,
            "section": section,
        }))
    }

    pub fn clock(&self) -> Clock {
        if self.fixed_clock {
            Clock::epoch()
        } else {
            Clock::System
        }
    }
}
