use serde::{Deserialize, Serialize};

use super::{ConfusionMatrix, MetricsError};

pub const REPORT_SCHEMA: &str = "report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Nothing was predicted as this label; precision is reported as 0.
    #[serde(default)]
    pub precision_undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub schema: String,
    pub mode: String,
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub precision_macro: f64,
    pub recall_macro: f64,
    pub f1_macro: f64,
    pub per_class: Vec<ClassMetrics>,
    pub confusion: ConfusionMatrix,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores a confusion matrix. Macro values are unweighted means over the
/// labels that occur in the truth; labels with no support are listed in
/// `per_class` but left out of the averages. F1 is averaged per class, not
/// recomputed from the macro precision and recall.
pub fn compute_report(cm: &ConfusionMatrix, mode: &str) -> Result<ClassifierReport, MetricsError> {
    cm.validate()?;
    if cm.total() == 0 {
        return Err(MetricsError::Empty);
    }
    let per_class: Vec<ClassMetrics> = (0..cm.labels.len())
        .map(|i| {
            let tp = cm.counts[i][i];
            let col = cm.col_sum(i);
            let support = cm.row_sum(i);
            let precision = ratio(tp, col);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                label: cm.labels[i].clone(),
                precision,
                recall,
                f1,
                support,
                precision_undefined: col == 0,
            }
        })
        .collect();
    let present: Vec<&ClassMetrics> = per_class.iter().filter(|c| c.support > 0).collect();
    let mean = |f: fn(&ClassMetrics) -> f64| present.iter().map(|c| f(c)).sum::<f64>() / present.len() as f64;
    let recall_macro = mean(|c| c.recall);
    Ok(ClassifierReport {
        schema: REPORT_SCHEMA.into(),
        mode: mode.to_string(),
        accuracy: ratio(cm.trace(), cm.total()),
        balanced_accuracy: recall_macro,
        precision_macro: mean(|c| c.precision),
        recall_macro,
        f1_macro: mean(|c| c.f1),
        per_class,
        confusion: cm.clone(),
    })
}
