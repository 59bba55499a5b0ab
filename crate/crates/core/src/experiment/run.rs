use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::split::split_entities;
use super::{build_splits, model_profile, Dataset, ExperimentError, ExperimentMode, LoRAConfig, Trainer};
use crate::clock::Clock;
use crate::digest::canonical_json_digest;
use crate::jsonl::{self, write_json};
use crate::metrics::{compute_report, render_table, ClassifierReport, ConfusionMatrix, TableRow};
use crate::qa::Condition;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub split_ratio: f64,
    pub seed: u64,
    pub model_profile: String,
    /// Overrides the profile's LoRA settings when set.
    pub lora: Option<LoRAConfig>,
    /// Append the no-fine-tuning cell to the matrix.
    pub ablation: bool,
    pub concurrency: usize,
    pub top_k: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            split_ratio: 0.8,
            seed: 0,
            model_profile: "llama-3.2-1b".into(),
            lora: None,
            ablation: true,
            concurrency: 4,
            top_k: 5,
        }
    }
}

impl ExperimentConfig {
    pub fn resolved_lora(&self) -> Result<LoRAConfig, ExperimentError> {
        match &self.lora {
            Some(l) => Ok(l.clone()),
            None => Ok(model_profile(&self.model_profile)?.lora),
        }
    }

    pub fn cells(&self) -> Vec<ExperimentMode> {
        let mut cells = ExperimentMode::TABLE.to_vec();
        if self.ablation {
            cells.push(ExperimentMode::Ablation);
        }
        cells
    }
}

/// Scores of one cell plus what produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    #[serde(flatten)]
    pub report: ClassifierReport,
    pub cell: ExperimentMode,
    pub seed: u64,
    pub trainer_id: String,
    pub model_profile: String,
    pub lora: LoRAConfig,
    pub split_ratio: f64,
    pub n_train: usize,
    pub n_test: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Running,
    Completed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellManifest {
    pub cell: ExperimentMode,
    pub train_conditions: Vec<Condition>,
    pub test_condition: Condition,
    pub ablation: bool,
    pub status: CellStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub config_hash: String,
    pub seed: u64,
    pub split_ratio: f64,
    pub corpus_digest: String,
    pub train_entities_digest: String,
    pub test_entities_digest: String,
    pub trainer_id: String,
    pub model_profile: String,
    pub lora: LoRAConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_digest: Option<String>,
    pub tool_version: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: Option<DateTime<Utc>>,
}

#[derive(Serialize)]
struct PredictionRow<'a> {
    entity_id: &'a str,
    label: &'a str,
    prediction: &'a str,
}

/// Fits `trainer` on the cell's training split (skipped for the ablation
/// cell), predicts the test split and scores it. With `out`, the cell
/// directory gets `manifest.json` (also on failure), `report.json` and
/// `predictions.jsonl`.
pub fn run_experiment(
    data: &Dataset,
    mode: ExperimentMode,
    trainer: &mut dyn Trainer,
    cfg: &ExperimentConfig,
    out: Option<&Path>,
    clock: Clock,
) -> Result<CellReport, ExperimentError> {
    let lora = cfg.resolved_lora()?;
    let (train, test) = build_splits(&data.examples, mode, cfg.split_ratio, cfg.seed)?;
    let split = split_entities(&data.examples, cfg.split_ratio, cfg.seed)?;
    let mut manifest = CellManifest {
        cell: mode,
        train_conditions: mode.train_conditions().to_vec(),
        test_condition: mode.test_condition(),
        ablation: mode.is_ablation(),
        status: CellStatus::Running,
        error: None,
        config_hash: canonical_json_digest(cfg),
        seed: cfg.seed,
        split_ratio: cfg.split_ratio,
        corpus_digest: data.corpus_digest.clone(),
        train_entities_digest: canonical_json_digest(&split.train),
        test_entities_digest: canonical_json_digest(&split.test),
        trainer_id: trainer.id(),
        model_profile: cfg.model_profile.clone(),
        lora: lora.clone(),
        report_digest: None,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        started_at: clock.now(),
        finished_at: None,
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join("manifest.json"), &manifest)?;
    }

    let test_texts: Vec<String> = test.iter().map(|e| e.text.clone()).collect();
    let trained = (|| {
        trainer.init(&data.labels, &lora, cfg.seed)?;
        if !mode.is_ablation() {
            let texts: Vec<String> = train.iter().map(|e| e.text.clone()).collect();
            let labels: Vec<String> = train.iter().map(|e| e.label.clone()).collect();
            trainer.fit(&texts, &labels)?;
        }
        trainer.predict(&test_texts)
    })();
    let predictions = match trained {
        Ok(p) => p,
        Err(source) => {
            if let Some(dir) = out {
                manifest.status = CellStatus::Failed;
                manifest.error = Some(source.to_string());
                manifest.finished_at = Some(clock.now());
                write_json(&dir.join("manifest.json"), &manifest)?;
            }
            return Err(ExperimentError::Trainer {
                cell: mode.code().into(),
                source,
            });
        }
    };
    let truth: Vec<&str> = test.iter().map(|e| e.label.as_str()).collect();
    let predicted: Vec<&str> = predictions.iter().map(String::as_str).collect();
    let cm = ConfusionMatrix::from_predictions(&truth, &predicted, &data.labels.labels)?;
    let mut lora = lora;
    if let Some(f) = trainer.trainable_fraction() {
        lora.trainable_fraction = Some(f);
    }
    let report = CellReport {
        report: compute_report(&cm, mode.row_label())?,
        cell: mode,
        seed: cfg.seed,
        trainer_id: trainer.id(),
        model_profile: cfg.model_profile.clone(),
        lora: lora.clone(),
        split_ratio: cfg.split_ratio,
        n_train: train.len(),
        n_test: test.len(),
    };
    if let Some(dir) = out {
        let rows: Vec<PredictionRow> = test
            .iter()
            .zip(&predictions)
            .map(|(e, p)| PredictionRow {
                entity_id: &e.entity_id,
                label: &e.label,
                prediction: p,
            })
            .collect();
        jsonl::write(&dir.join("predictions.jsonl"), &rows).map_err(|e| ExperimentError::Io(e.to_string()))?;
        write_json(&dir.join("report.json"), &report)?;
        manifest.lora = lora;
        manifest.status = CellStatus::Completed;
        manifest.report_digest = Some(canonical_json_digest(&report));
        manifest.finished_at = Some(clock.now());
        write_json(&dir.join("manifest.json"), &manifest)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOutcome {
    pub reports: Vec<CellReport>,
    pub markdown: String,
}

/// Table of the cells in matrix order.
pub fn render_matrix(title: &str, reports: &[CellReport]) -> String {
    let rows: Vec<TableRow> = reports.iter().map(|r| TableRow::from(&r.report)).collect();
    render_table(title, &rows)
}

/// Every cell of the matrix, each with a fresh trainer from `factory`.
/// Cells run in parallel; each owns `out/<code>/`. When a cell fails the
/// others still finish and keep their outputs, and the error lists both.
pub fn run_matrix(
    data: &Dataset,
    cfg: &ExperimentConfig,
    factory: &(dyn Fn(ExperimentMode) -> Box<dyn Trainer> + Sync),
    out: Option<&Path>,
    clock: Clock,
) -> Result<MatrixOutcome, ExperimentError> {
    let cells = cfg.cells();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.concurrency.max(1))
        .build()
        .map_err(|e| ExperimentError::Io(e.to_string()))?;
    let results: Vec<Result<CellReport, ExperimentError>> = pool.install(|| {
        use rayon::prelude::*;
        cells
            .par_iter()
            .map(|&mode| {
                let dir: Option<PathBuf> = out.map(|o| o.join(mode.code()));
                let mut trainer = factory(mode);
                run_experiment(data, mode, trainer.as_mut(), cfg, dir.as_deref(), clock)
            })
            .collect()
    });
    let mut reports = Vec::new();
    let (mut failed, mut completed) = (Vec::new(), Vec::new());
    for (mode, r) in cells.iter().zip(results) {
        match r {
            Ok(rep) => {
                completed.push(mode.code().to_string());
                reports.push(rep);
            }
            Err(e) => {
                log::error!("cell {mode}: {e}");
                failed.push(format!("{}: {e}", mode.code()));
            }
        }
    }
    if !failed.is_empty() {
        return Err(ExperimentError::Matrix { failed, completed });
    }
    let title = format!("{} ({}, seed {})", reports[0].trainer_id, cfg.model_profile, cfg.seed);
    let markdown = render_matrix(&title, &reports);
    if let Some(dir) = out {
        write_json(&dir.join("matrix.json"), &reports)?;
        jsonl::write_atomic(&dir.join("matrix.md"), markdown.as_bytes())?;
    }
    Ok(MatrixOutcome { reports, markdown })
}
