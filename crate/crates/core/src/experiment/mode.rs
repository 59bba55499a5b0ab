use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::qa::Condition;

/// One cell of the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentMode {
    /// Train and test on explicit texts.
    Ee,
    Ii,
    /// Train on both, test on explicit.
    BiE,
    BiI,
    /// Train on explicit, test on implicit.
    Ei,
    /// No training, test on implicit.
    Ablation,
}

impl ExperimentMode {
    /// Fine-tuned cells in table order.
    pub const TABLE: [ExperimentMode; 5] = [
        ExperimentMode::Ee,
        ExperimentMode::Ii,
        ExperimentMode::BiE,
        ExperimentMode::BiI,
        ExperimentMode::Ei,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ExperimentMode::Ee => "ee",
            ExperimentMode::Ii => "ii",
            ExperimentMode::BiE => "bi-e",
            ExperimentMode::BiI => "bi-i",
            ExperimentMode::Ei => "ei",
            ExperimentMode::Ablation => "ablation",
        }
    }

    pub fn row_label(self) -> &'static str {
        match self {
            ExperimentMode::Ee => "Train and test explicit",
            ExperimentMode::Ii => "Train and test implicit",
            ExperimentMode::BiE => "Train explicit implicit, test explicit",
            ExperimentMode::BiI => "Train explicit implicit, test implicit",
            ExperimentMode::Ei => "Train explicit, test implicit",
            ExperimentMode::Ablation => "No fine-tuning, test implicit",
        }
    }

    pub fn train_conditions(self) -> &'static [Condition] {
        match self {
            ExperimentMode::Ee | ExperimentMode::Ei => &[Condition::Explicit],
            ExperimentMode::Ii => &[Condition::Implicit],
            ExperimentMode::BiE | ExperimentMode::BiI => &Condition::BOTH,
            ExperimentMode::Ablation => &[],
        }
    }

    pub fn test_condition(self) -> Condition {
        match self {
            ExperimentMode::Ee | ExperimentMode::BiE => Condition::Explicit,
            _ => Condition::Implicit,
        }
    }

    pub fn is_ablation(self) -> bool {
        self == ExperimentMode::Ablation
    }
}

impl fmt::Display for ExperimentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ExperimentMode {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExperimentMode::TABLE
            .into_iter()
            .chain([ExperimentMode::Ablation])
            .find(|m| m.code() == s)
            .ok_or_else(|| ExperimentError::UnknownMode(s.to_string()))
    }
}
