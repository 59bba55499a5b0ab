//! The occupation-classification matrix: train on explicit, implicit or
//! both kinds of description, test on one kind, and score each cell.

mod lora;
mod mode;
mod run;
mod split;
mod subset;
mod trainer;

pub use lora::{model_profile, LoRAConfig, ModelProfile, MODEL_PROFILES, TARGET_MODULES};
pub use mode::ExperimentMode;
pub use run::{
    render_matrix, run_experiment, run_matrix, CellManifest, CellReport, CellStatus, ExperimentConfig, MatrixOutcome,
};
pub use split::{build_splits, split_entities, EntitySplit};
pub use subset::{build_subset, ClassificationExample, Dataset, LabelSet, OCCUPATION};
pub use trainer::{ExternalTrainer, LexicalTrainer, TrainError, Trainer};

use crate::metrics::MetricsError;
use crate::qa::Condition;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("top-k needs k >= 2, got {0}")]
    InvalidK(usize),
    #[error("wanted {wanted} occupation labels, the corpus has {found}")]
    NotEnoughLabels { wanted: usize, found: usize },
    #[error("no pair hides an occupation")]
    NoOccupationPairs,
    #[error("split ratio must lie in (0, 1), got {0}")]
    InvalidRatio(f64),
    #[error("label {label:?} has {entities} entities, too few for both sides of the split")]
    SplitTooSmall { label: String, entities: usize },
    #[error("examples contain no {0} texts")]
    MissingCondition(Condition),
    #[error("unknown model profile {0:?}")]
    UnknownProfile(String),
    #[error("unknown experiment mode {0:?}")]
    UnknownMode(String),
    #[error("cell {cell} failed: {source}")]
    Trainer {
        cell: String,
        #[source]
        source: TrainError,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("matrix aborted: failed {failed:?}, completed {completed:?}")]
    Matrix { failed: Vec<String>, completed: Vec<String> },
}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        ExperimentError::Io(e.to_string())
    }
}
