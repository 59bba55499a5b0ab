//! Classification metrics for the experiment matrix: confusion matrix,
//! accuracy, balanced accuracy and macro precision/recall/F1.

mod confusion;
mod report;
mod table;

pub use confusion::ConfusionMatrix;
pub use report::{compute_report, ClassMetrics, ClassifierReport, REPORT_SCHEMA};
pub use table::{render_table, PublishedTable, TableRow, TABLE_HEADER};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("no examples to score")]
    Empty,
    #[error("{truth} true labels but {predicted} predictions")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("label {0:?} is not in the label set")]
    UnknownLabel(String),
    #[error("label {0:?} appears twice in the label set")]
    DuplicateLabel(String),
    #[error("confusion matrices have different label sets")]
    LabelMismatch,
    #[error("malformed confusion matrix: {0}")]
    Malformed(String),
}
