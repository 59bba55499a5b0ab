use std::collections::HashMap;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::Command;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{LabelSet, LoRAConfig};
use crate::digest::derive_seed;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("trainer used before init")]
    NotInitialized,
    #[error("{0} training texts but {1} labels")]
    LengthMismatch(usize, usize),
    #[error("training label {0:?} is not in the label set")]
    UnknownLabel(String),
    #[error("external runner failed: {0}")]
    Runner(String),
    #[error("external runner returned bad predictions: {0}")]
    BadPredictions(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for TrainError {
    fn from(e: std::io::Error) -> Self {
        TrainError::Io(e.to_string())
    }
}

/// A sequence classifier the matrix can fit and query. One instance serves
/// one cell: `init`, then optionally `fit`, then `predict`.
pub trait Trainer {
    fn id(&self) -> String;
    /// Set up an untrained model over `labels`.
    fn init(&mut self, labels: &LabelSet, lora: &LoRAConfig, seed: u64) -> Result<(), TrainError>;
    fn fit(&mut self, texts: &[String], labels: &[String]) -> Result<(), TrainError>;
    fn predict(&mut self, texts: &[String]) -> Result<Vec<String>, TrainError>;
    /// Share of parameters updated, if the backend reports it.
    fn trainable_fraction(&self) -> Option<f64> {
        None
    }
}

fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// One-vs-rest logistic regression over hashed unigram and bigram
/// presence features, trained by plain SGD in a seeded order. Before `fit`
/// the weights are small seeded noise, which plays the part of an
/// untuned classification head.
#[derive(Debug, Clone)]
pub struct LexicalTrainer {
    pub dims: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    labels: Vec<String>,
    /// `labels.len()` rows of `dims + 1` (last entry is the bias).
    weights: Vec<Vec<f64>>,
    seed: u64,
    feature_cache: HashMap<String, usize>,
}

impl Default for LexicalTrainer {
    fn default() -> Self {
        LexicalTrainer {
            dims: 1 << 16,
            epochs: 10,
            learning_rate: 0.5,
            labels: Vec::new(),
            weights: Vec::new(),
            seed: 0,
            feature_cache: HashMap::new(),
        }
    }
}

impl LexicalTrainer {
    fn features(&mut self, text: &str) -> Vec<(usize, f64)> {
        let toks = tokens(text);
        let mut grams: Vec<String> = toks.clone();
        grams.extend(toks.windows(2).map(|w| format!("{} {}", w[0], w[1])));
        let mut idx: Vec<usize> = grams
            .into_iter()
            .map(|g| {
                let dims = self.dims;
                *self
                    .feature_cache
                    .entry(g)
                    .or_insert_with_key(|g| (derive_seed(0, g) % dims as u64) as usize)
            })
            .collect();
        idx.sort_unstable();
        idx.dedup();
        let value = 1.0 / (idx.len().max(1) as f64).sqrt();
        idx.into_iter().map(|i| (i, value)).collect()
    }

    fn score(&self, class: usize, x: &[(usize, f64)]) -> f64 {
        let w = &self.weights[class];
        w[self.dims] + x.iter().map(|(i, v)| w[*i] * v).sum::<f64>()
    }
}

impl Trainer for LexicalTrainer {
    fn id(&self) -> String {
        "lexical-ovr".into()
    }

    fn init(&mut self, labels: &LabelSet, _lora: &LoRAConfig, seed: u64) -> Result<(), TrainError> {
        self.labels = labels.labels.clone();
        self.seed = seed;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "lexical/init"));
        self.weights = (0..self.labels.len())
            .map(|_| (0..=self.dims).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        Ok(())
    }

    fn fit(&mut self, texts: &[String], labels: &[String]) -> Result<(), TrainError> {
        if self.labels.is_empty() {
            return Err(TrainError::NotInitialized);
        }
        if texts.len() != labels.len() {
            return Err(TrainError::LengthMismatch(texts.len(), labels.len()));
        }
        let targets: Vec<usize> = labels
            .iter()
            .map(|l| {
                self.labels
                    .iter()
                    .position(|k| k == l)
                    .ok_or_else(|| TrainError::UnknownLabel(l.clone()))
            })
            .collect::<Result<_, _>>()?;
        let xs: Vec<Vec<(usize, f64)>> = texts.iter().map(|t| self.features(t)).collect();
        for w in &mut self.weights {
            w.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut order: Vec<usize> = (0..xs.len()).collect();
        for epoch in 0..self.epochs {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &format!("lexical/epoch{epoch}")));
            order.shuffle(&mut rng);
            for &n in &order {
                for c in 0..self.labels.len() {
                    let y = if targets[n] == c { 1.0 } else { 0.0 };
                    let p = 1.0 / (1.0 + (-self.score(c, &xs[n])).exp());
                    let step = self.learning_rate * (p - y);
                    let w = &mut self.weights[c];
                    for (i, v) in &xs[n] {
                        w[*i] -= step * v;
                    }
                    w[self.dims] -= step;
                }
            }
        }
        Ok(())
    }

    fn predict(&mut self, texts: &[String]) -> Result<Vec<String>, TrainError> {
        if self.labels.is_empty() {
            return Err(TrainError::NotInitialized);
        }
        Ok(texts
            .iter()
            .map(|t| {
                let x = self.features(t);
                let mut best = 0;
                for c in 1..self.labels.len() {
                    if self.score(c, &x) > self.score(best, &x) {
                        best = c;
                    }
                }
                self.labels[best].clone()
            })
            .collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunnerResult {
    #[serde(default)]
    trainable_fraction: Option<f64>,
}

/// Hands the cell to an external fine-tuning runner.
///
/// On `predict` the trainer writes `train.jsonl` (`{"text", "label"}`),
/// `test.jsonl` (`{"text"}`) and `job.json` into its work directory, then
/// runs `sh -c "<command> <job.json>"` with `IMPLICIT_IE_JOB` also set to
/// the job path. The runner must write `predictions.jsonl`, one JSON string
/// per test line, and may write `result.json` with `trainable_fraction`.
pub struct ExternalTrainer {
    pub command: String,
    pub model_profile: String,
    pub work_dir: PathBuf,
    labels: Vec<String>,
    lora: Option<LoRAConfig>,
    seed: u64,
    train: Option<(Vec<String>, Vec<String>)>,
    trainable_fraction: Option<f64>,
}

impl ExternalTrainer {
    pub fn new(command: impl Into<String>, model_profile: impl Into<String>, work_dir: impl Into<PathBuf>) -> Self {
        ExternalTrainer {
            command: command.into(),
            model_profile: model_profile.into(),
            work_dir: work_dir.into(),
            labels: Vec::new(),
            lora: None,
            seed: 0,
            train: None,
            trainable_fraction: None,
        }
    }
}

fn write_lines(path: &std::path::Path, rows: impl Iterator<Item = serde_json::Value>) -> Result<(), TrainError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for row in rows {
        writeln!(f, "{row}")?;
    }
    f.flush()?;
    Ok(())
}

impl Trainer for ExternalTrainer {
    fn id(&self) -> String {
        format!("external:{}", self.model_profile)
    }

    fn init(&mut self, labels: &LabelSet, lora: &LoRAConfig, seed: u64) -> Result<(), TrainError> {
        self.labels = labels.labels.clone();
        self.lora = Some(lora.clone());
        self.seed = seed;
        Ok(())
    }

    fn fit(&mut self, texts: &[String], labels: &[String]) -> Result<(), TrainError> {
        if texts.len() != labels.len() {
            return Err(TrainError::LengthMismatch(texts.len(), labels.len()));
        }
        self.train = Some((texts.to_vec(), labels.to_vec()));
        Ok(())
    }

    fn predict(&mut self, texts: &[String]) -> Result<Vec<String>, TrainError> {
        let lora = self.lora.clone().ok_or(TrainError::NotInitialized)?;
        std::fs::create_dir_all(&self.work_dir)?;
        let train_path = self.work_dir.join("train.jsonl");
        let test_path = self.work_dir.join("test.jsonl");
        let predictions_path = self.work_dir.join("predictions.jsonl");
        let job_path = self.work_dir.join("job.json");
        let (train_texts, train_labels) = self.train.clone().unwrap_or_default();
        write_lines(
            &train_path,
            train_texts.iter().zip(&train_labels).map(|(t, l)| json!({"text": t, "label": l})),
        )?;
        write_lines(&test_path, texts.iter().map(|t| json!({"text": t})))?;
        let _ = std::fs::remove_file(&predictions_path);
        let job = json!({
            "model_profile": self.model_profile,
            "lora": lora,
            "labels": self.labels,
            "seed": self.seed,
            "fine_tune": self.train.is_some(),
            "train_path": train_path,
            "test_path": test_path,
            "predictions_path": predictions_path,
        });
        crate::jsonl::write_json(&job_path, &job)?;
        let status = Command::new("sh")
            .arg("-c")
            .arg(format!("{} \"$IMPLICIT_IE_JOB\"", self.command))
            .env("IMPLICIT_IE_JOB", &job_path)
            .status()
            .map_err(|e| TrainError::Runner(e.to_string()))?;
        if !status.success() {
            return Err(TrainError::Runner(format!("`{}` exited with {status}", self.command)));
        }
        let text = std::fs::read_to_string(&predictions_path)
            .map_err(|e| TrainError::BadPredictions(format!("{}: {e}", predictions_path.display())))?;
        let preds: Vec<String> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str::<String>(l).map_err(|e| TrainError::BadPredictions(e.to_string())))
            .collect::<Result<_, _>>()?;
        if preds.len() != texts.len() {
            return Err(TrainError::BadPredictions(format!(
                "{} predictions for {} texts",
                preds.len(),
                texts.len()
            )));
        }
        let result_path = self.work_dir.join("result.json");
        if let Ok(raw) = std::fs::read_to_string(result_path) {
            let r: RunnerResult = serde_json::from_str(&raw).map_err(|e| TrainError::BadPredictions(e.to_string()))?;
            self.trainable_fraction = r.trainable_fraction;
        }
        Ok(preds)
    }

    fn trainable_fraction(&self) -> Option<f64> {
        self.trainable_fraction
    }
}
