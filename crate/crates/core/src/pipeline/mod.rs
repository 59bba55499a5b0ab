//! End-to-end runs: ingest, synthesize, evaluate, stats, finetune and
//! report, with a manifest per stage so unchanged stages are skipped on
//! rerun.
//!
//! Run directory layout:
//!
//! ```text
//! entities.jsonl  pairs.jsonl  synthesis_failures.jsonl  answers.jsonl
//! stats.json  stats.md  finetune/<cell>/...  finetune/matrix.{json,md}
//! report.md  report.json  manifests/<stage>.json  pipeline.lock
//! ```

mod config;
mod manifest;
mod report;
pub mod stages;

use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::{Path, PathBuf};

pub use config::{
    BackendKind, EvaluationConfig, FinetuneConfig, FinetuneCorpus, IngestConfig, PipelineConfig, SourceKind, Stage,
    StatsConfig, SynthesisConfig, TrainerKind,
};
pub use manifest::{RunManifest, MANIFEST_SCHEMA};
pub use report::{CorpusCounts, RunReport, REPORT_INPUTS};

use crate::experiment::ExperimentError;
use crate::ingest::{EntityRecord, IngestError};
use crate::jsonl::{self, write_atomic, write_json, JsonlError};
use crate::llm::BackendError;
use crate::qa::{AnswerRecord, QaError};
use crate::stats::{ComparisonReport, StatsError};
use crate::synthesis::{PairedDescription, SynthesisError};
use manifest::{digest_all, files_under};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0} is locked by another run (delete pipeline.lock if no run is active)")]
    Locked(PathBuf),
    #[error("stage {stage} needs {missing}, which no earlier stage produced")]
    MissingInput { stage: Stage, missing: String },
    #[error("nothing to report in {0}")]
    NothingToReport(PathBuf),
    #[error("stage {stage} failed: {source}")]
    StageFailed {
        stage: Stage,
        #[source]
        source: Box<PipelineError>,
    },
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Qa(#[from] QaError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
}

impl From<std::io::Error> for PipelineError {
    fn from(e: std::io::Error) -> Self {
        PipelineError::Io(e.to_string())
    }
}

/// Exclusive claim on a run directory, released on drop.
pub struct RunLock {
    path: PathBuf,
}

impl RunLock {
    pub fn acquire(out: &Path) -> Result<Self, PipelineError> {
        std::fs::create_dir_all(out)?;
        let path = out.join("pipeline.lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(RunLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(PipelineError::Locked(out.to_path_buf())),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageStatus {
    Ran,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub stages: Vec<(Stage, StageStatus)>,
}

impl PipelineOutcome {
    pub fn status(&self, stage: Stage) -> Option<StageStatus> {
        self.stages.iter().find(|(s, _)| *s == stage).map(|(_, st)| *st)
    }
}

fn inputs_for(cfg: &PipelineConfig, stage: Stage, out: &Path) -> Vec<PathBuf> {
    let mut v = Vec::new();
    match stage {
        Stage::Ingest => {
            if cfg.ingest.source == SourceKind::Snapshot {
                v.push(cfg.ingest.snapshot_dir());
            }
        }
        Stage::Synthesize => {
            v.push(out.join("entities.jsonl"));
            v.extend(cfg.synthesis.cassette.clone().filter(|_| cfg.synthesis.backend == BackendKind::Replay));
        }
        Stage::Evaluate => {
            v.push(out.join("pairs.jsonl"));
            v.extend(cfg.evaluation.cassette.clone().filter(|_| cfg.evaluation.backend == BackendKind::Replay));
        }
        Stage::Stats => v.push(out.join("answers.jsonl")),
        Stage::Finetune => {
            if cfg.finetune.corpus == FinetuneCorpus::Synthesized {
                v.push(out.join("pairs.jsonl"));
            }
        }
        Stage::Report => v.extend(REPORT_INPUTS.iter().map(|p| out.join(p)).filter(|p| p.exists())),
    }
    v
}

fn outputs_for(stage: Stage, out: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    Ok(match stage {
        Stage::Ingest => vec![out.join("entities.jsonl")],
        Stage::Synthesize => vec![out.join("pairs.jsonl"), out.join("synthesis_failures.jsonl")],
        Stage::Evaluate => vec![out.join("answers.jsonl")],
        Stage::Stats => vec![out.join("stats.json"), out.join("stats.md")],
        Stage::Finetune => files_under(&out.join("finetune"))?,
        Stage::Report => vec![out.join("report.md"), out.join("report.json")],
    })
}

fn up_to_date(cfg: &PipelineConfig, stage: Stage, out: &Path, inputs: &[PathBuf]) -> bool {
    let Some(m) = RunManifest::load(out, stage) else {
        return false;
    };
    if m.config_hash != cfg.stage_hash(stage) || inputs.iter().any(|p| !p.exists()) {
        return false;
    }
    let Ok(current_in) = digest_all(out, inputs) else {
        return false;
    };
    let current_out = outputs_for(stage, out).and_then(|paths| {
        if paths.iter().any(|p| !p.exists()) {
            return Err(PipelineError::Io("missing output".into()));
        }
        digest_all(out, &paths)
    });
    current_in == m.inputs && current_out.is_ok_and(|o| o == m.outputs)
}

fn read_rows<T: serde::de::DeserializeOwned>(stage: Stage, path: &Path) -> Result<Vec<T>, PipelineError> {
    if !path.exists() {
        return Err(PipelineError::MissingInput {
            stage,
            missing: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
        });
    }
    Ok(jsonl::read(path)?)
}

fn execute(cfg: &PipelineConfig, stage: Stage, out: &Path) -> Result<(), PipelineError> {
    let clock = cfg.clock();
    match stage {
        Stage::Ingest => {
            let r = stages::ingest(&cfg.ingest, cfg.seed)?;
            jsonl::write(&out.join("entities.jsonl"), &r.records)?;
        }
        Stage::Synthesize => {
            let entities: Vec<EntityRecord> = read_rows(stage, &out.join("entities.jsonl"))?;
            let r = stages::synthesize(&entities, &cfg.synthesis, clock)?;
            jsonl::write(&out.join("pairs.jsonl"), &r.pairs)?;
            jsonl::write(&out.join("synthesis_failures.jsonl"), &r.failures)?;
        }
        Stage::Evaluate => {
            let pairs: Vec<PairedDescription> = read_rows(stage, &out.join("pairs.jsonl"))?;
            let answers = stages::evaluate(&pairs, &cfg.evaluation)?;
            jsonl::write(&out.join("answers.jsonl"), &answers)?;
        }
        Stage::Stats => {
            let answers: Vec<AnswerRecord> = read_rows(stage, &out.join("answers.jsonl"))?;
            let r = stages::stats(&answers, &cfg.stats, &cfg.evaluation.metric)?;
            write_stats(out, &r)?;
        }
        Stage::Finetune => {
            let synthesized: Option<Vec<PairedDescription>> = match cfg.finetune.corpus {
                FinetuneCorpus::Synthesized => Some(read_rows(stage, &out.join("pairs.jsonl"))?),
                FinetuneCorpus::MockOccupations { .. } => None,
            };
            let pairs = stages::finetune_corpus(&cfg.finetune, synthesized.as_deref(), cfg.seed)?;
            let dir = out.join("finetune");
            if dir.exists() {
                std::fs::remove_dir_all(&dir)?;
            }
            stages::finetune(&pairs, &cfg.finetune, cfg.seed, &dir, clock)?;
        }
        Stage::Report => {
            write_report(out)?;
        }
    }
    Ok(())
}

pub fn write_stats(out: &Path, report: &ComparisonReport) -> Result<(), PipelineError> {
    write_json(&out.join("stats.json"), report)?;
    write_atomic(&out.join("stats.md"), report.to_markdown().as_bytes())?;
    Ok(())
}

/// Render `report.md` and `report.json` from whatever the run directory holds.
pub fn write_report(out: &Path) -> Result<RunReport, PipelineError> {
    let report = RunReport::load(out)?;
    write_json(&out.join("report.json"), &report)?;
    write_atomic(&out.join("report.md"), report.to_markdown().as_bytes())?;
    Ok(report)
}

/// Run the configured stages in order. A stage is skipped when its
/// manifest matches the current config, inputs and outputs; once a stage
/// runs, every later stage runs too.
pub fn run_pipeline(cfg: &PipelineConfig, out: &Path) -> Result<PipelineOutcome, PipelineError> {
    cfg.validate()?;
    let _lock = RunLock::acquire(out)?;
    std::fs::create_dir_all(out.join("manifests"))?;
    let clock = cfg.clock();
    let mut dirty = false;
    let mut outcome = PipelineOutcome { stages: Vec::new() };
    for stage in Stage::ALL.into_iter().filter(|s| cfg.stages.contains(s)) {
        let inputs = inputs_for(cfg, stage, out);
        if !dirty && up_to_date(cfg, stage, out, &inputs) {
            log::info!("{stage}: up to date, skipped");
            outcome.stages.push((stage, StageStatus::Skipped));
            continue;
        }
        dirty = true;
        log::info!("{stage}: running");
        let manifest_path = RunManifest::path(out, stage);
        let _ = std::fs::remove_file(&manifest_path);
        let started_at = clock.now();
        let fail = |e: PipelineError| PipelineError::StageFailed {
            stage,
            source: Box::new(e),
        };
        let input_digests = digest_all(out, &inputs).map_err(fail)?;
        execute(cfg, stage, out).map_err(fail)?;
        let outputs = outputs_for(stage, out).map_err(fail)?;
        let manifest = RunManifest {
            schema: MANIFEST_SCHEMA.into(),
            stage,
            config_hash: cfg.stage_hash(stage),
            inputs: input_digests,
            outputs: digest_all(out, &outputs).map_err(fail)?,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            started_at,
            finished_at: clock.now(),
        };
        write_json(&manifest_path, &manifest)?;
        outcome.stages.push((stage, StageStatus::Ran));
    }
    Ok(outcome)
}

/// Output digests of every stage manifest in a run directory, keyed by
/// stage and path.
pub fn output_digests(out: &Path) -> std::collections::BTreeMap<String, String> {
    Stage::ALL
        .into_iter()
        .filter_map(|s| RunManifest::load(out, s))
        .flat_map(|m| {
            let stage = m.stage;
            m.outputs.into_iter().map(move |(k, v)| (format!("{stage}:{k}"), v))
        })
        .collect()
}
