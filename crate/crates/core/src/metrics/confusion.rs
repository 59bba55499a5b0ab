use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Rows are true labels, columns predicted labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(labels: &[String]) -> Result<Self, MetricsError> {
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(MetricsError::DuplicateLabel(l.clone()));
            }
        }
        Ok(ConfusionMatrix {
            labels: labels.to_vec(),
            counts: vec![vec![0; labels.len()]; labels.len()],
        })
    }

    pub fn from_predictions<S: AsRef<str>>(truth: &[S], predicted: &[S], labels: &[String]) -> Result<Self, MetricsError> {
        if truth.len() != predicted.len() {
            return Err(MetricsError::LengthMismatch {
                truth: truth.len(),
                predicted: predicted.len(),
            });
        }
        if truth.is_empty() {
            return Err(MetricsError::Empty);
        }
        let mut cm = Self::zeros(labels)?;
        for (t, p) in truth.iter().zip(predicted) {
            let i = cm.index(t.as_ref())?;
            let j = cm.index(p.as_ref())?;
            cm.counts[i][j] += 1;
        }
        Ok(cm)
    }

    /// Checks shape after deserializing or hand-building a matrix.
    pub fn validate(&self) -> Result<(), MetricsError> {
        Self::zeros(&self.labels)?;
        let k = self.labels.len();
        if self.counts.len() != k || self.counts.iter().any(|r| r.len() != k) {
            return Err(MetricsError::Malformed(format!("expected a {k}x{k} grid")));
        }
        Ok(())
    }

    pub fn index(&self, label: &str) -> Result<usize, MetricsError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| MetricsError::UnknownLabel(label.to_string()))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        self.counts.iter().map(|r| r[j]).sum()
    }

    /// Elementwise sum of two matrices over the same labels.
    pub fn merge(&self, other: &ConfusionMatrix) -> Result<ConfusionMatrix, MetricsError> {
        if self.labels != other.labels {
            return Err(MetricsError::LabelMismatch);
        }
        let mut out = self.clone();
        for (row, other_row) in out.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(other_row) {
                *c += o;
            }
        }
        Ok(out)
    }

    /// Same counts with the labels reordered; `order[k]` is the old index
    /// placed at position `k`.
    pub fn permuted(&self, order: &[usize]) -> ConfusionMatrix {
        ConfusionMatrix {
            labels: order.iter().map(|&i| self.labels[i].clone()).collect(),
            counts: order
                .iter()
                .map(|&i| order.iter().map(|&j| self.counts[i][j]).collect())
                .collect(),
        }
    }
}
