use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ClassifierReport;

pub const TABLE_HEADER: &str = "| Mode | Acc. | Bal. Acc. | Precision | Recall | F1 |";

/// One rendered line of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub mode: String,
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl From<&ClassifierReport> for TableRow {
    fn from(r: &ClassifierReport) -> Self {
        TableRow {
            mode: r.mode.clone(),
            accuracy: r.accuracy,
            balanced_accuracy: r.balanced_accuracy,
            precision: r.precision_macro,
            recall: r.recall_macro,
            f1: r.f1_macro,
        }
    }
}

/// Results for one model as previously reported, for side-by-side rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedTable {
    pub model: String,
    pub rows: Vec<TableRow>,
}

/// Markdown table with a `### title` heading and 3-decimal cells.
pub fn render_table(title: &str, rows: &[TableRow]) -> String {
    let mut out = format!("### {title}\n\n{TABLE_HEADER}\n|---|---|---|---|---|---|\n");
    for r in rows {
        let _ = writeln!(
            out,
            "| {} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} |",
            r.mode, r.accuracy, r.balanced_accuracy, r.precision, r.recall, r.f1
        );
    }
    out
}
