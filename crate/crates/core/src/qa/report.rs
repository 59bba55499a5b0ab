use serde::{Deserialize, Serialize};

use super::evaluate::AnswerRecord;
use super::item::Condition;
use super::QaError;

/// Failures among the records of one condition, kept as counts so the rate
/// is a single division.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureRate {
    pub condition: Condition,
    pub failures: usize,
    pub total: usize,
}

impl FailureRate {
    pub fn rate(&self) -> f64 {
        self.failures as f64 / self.total as f64
    }

    /// Two-decimal percentage, e.g. `14.60%`.
    pub fn percent(&self) -> String {
        format!("{:.2}%", self.rate() * 100.0)
    }
}

pub fn compute_failure_rate(records: &[AnswerRecord], condition: Condition) -> Result<FailureRate, QaError> {
    let slice: Vec<&AnswerRecord> = records.iter().filter(|r| r.condition == condition).collect();
    if slice.is_empty() {
        return Err(QaError::EmptyInput(condition.to_string()));
    }
    Ok(FailureRate {
        condition,
        failures: slice.iter().filter(|r| r.is_failure).count(),
        total: slice.len(),
    })
}

/// Which number of a record feeds the distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreField {
    Score,
    SemanticDistance,
}

/// What to do with entities that failed in at least one condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailurePolicy {
    /// Drop the entity from the pairing.
    Exclude,
    /// Keep it, with 0 for the failed side.
    IncludeAsZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedRow {
    pub entity_id: String,
    pub explicit: f64,
    pub implicit: f64,
    pub explicit_failure: bool,
    pub implicit_failure: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDistribution {
    pub metric_id: String,
    pub field: ScoreField,
    pub rows: Vec<PairedRow>,
}

impl ScoreDistribution {
    /// One row per entity, in order of first appearance. Every entity must
    /// have exactly one record per condition.
    pub fn from_records(records: &[AnswerRecord], field: ScoreField, metric_id: &str) -> Result<Self, QaError> {
        let mut order: Vec<&str> = Vec::new();
        let mut sides: std::collections::HashMap<&str, [Option<&AnswerRecord>; 2]> = Default::default();
        for r in records {
            let slot = sides.entry(&r.entity_id).or_insert_with(|| {
                order.push(&r.entity_id);
                [None, None]
            });
            let i = usize::from(r.condition == Condition::Implicit);
            if slot[i].replace(r).is_some() {
                return Err(QaError::Invalid(format!("{} has two {} records", r.entity_id, r.condition)));
            }
        }
        let value = |r: &AnswerRecord| match field {
            ScoreField::Score => r.score,
            ScoreField::SemanticDistance => r.semantic_distance.unwrap_or(0.0),
        };
        let rows = order
            .into_iter()
            .map(|id| match sides[id] {
                [Some(e), Some(i)] => Ok(PairedRow {
                    entity_id: id.to_string(),
                    explicit: value(e),
                    implicit: value(i),
                    explicit_failure: e.is_failure,
                    implicit_failure: i.is_failure,
                }),
                _ => Err(QaError::Invalid(format!("{id} lacks one of the two conditions"))),
            })
            .collect::<Result<_, _>>()?;
        Ok(ScoreDistribution {
            metric_id: metric_id.to_string(),
            field,
            rows,
        })
    }

    /// `(explicit, implicit)` samples under a failure policy.
    pub fn paired(&self, policy: FailurePolicy) -> (Vec<f64>, Vec<f64>) {
        self.rows
            .iter()
            .filter(|r| policy == FailurePolicy::IncludeAsZero || !(r.explicit_failure || r.implicit_failure))
            .map(|r| (r.explicit, r.implicit))
            .unzip()
    }
}
