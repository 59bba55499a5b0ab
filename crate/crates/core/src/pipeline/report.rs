use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::experiment::{render_matrix, CellReport};
use crate::stats::ComparisonReport;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusCounts {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entities: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synthesis_failures: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub corpus: CorpusCounts,
    pub stats: Option<ComparisonReport>,
    pub matrix: Option<Vec<CellReport>>,
}

/// Run-directory files the report reads when they exist.
pub const REPORT_INPUTS: [&str; 6] = [
    "entities.jsonl",
    "pairs.jsonl",
    "synthesis_failures.jsonl",
    "answers.jsonl",
    "stats.json",
    "finetune/matrix.json",
];

fn count_lines(path: &Path) -> Result<Option<usize>, PipelineError> {
    match std::fs::read_to_string(path) {
        Ok(t) => Ok(Some(t.lines().filter(|l| !l.trim().is_empty()).count())),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(PipelineError::Io(format!("{}: {e}", path.display()))),
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Option<T>, PipelineError> {
    match std::fs::read_to_string(path) {
        Ok(t) => serde_json::from_str(&t)
            .map(Some)
            .map_err(|e| PipelineError::Io(format!("{}: {e}", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(PipelineError::Io(format!("{}: {e}", path.display()))),
    }
}

impl RunReport {
    /// Collect whatever a run directory holds.
    pub fn load(out: &Path) -> Result<Self, PipelineError> {
        let report = RunReport {
            schema: "run-report/1".into(),
            corpus: CorpusCounts {
                entities: count_lines(&out.join("entities.jsonl"))?,
                pairs: count_lines(&out.join("pairs.jsonl"))?,
                synthesis_failures: count_lines(&out.join("synthesis_failures.jsonl"))?,
                answers: count_lines(&out.join("answers.jsonl"))?,
            },
            stats: read_json(&out.join("stats.json"))?,
            matrix: read_json(&out.join("finetune/matrix.json"))?,
        };
        if report.stats.is_none() && report.matrix.is_none() && report.corpus == CorpusCounts::default() {
            return Err(PipelineError::NothingToReport(out.to_path_buf()));
        }
        Ok(report)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("# Run report\n");
        let c = &self.corpus;
        if *c != CorpusCounts::default() {
            out.push_str("\n## Corpus\n\n");
            for (name, v) in [
                ("Entities", c.entities),
                ("Pairs", c.pairs),
                ("Pairs that failed validation", c.synthesis_failures),
                ("Answers", c.answers),
            ] {
                if let Some(v) = v {
                    let _ = writeln!(out, "- {name}: {v}");
                }
            }
        }
        if let Some(s) = &self.stats {
            out.push('\n');
            out.push_str(&s.to_markdown());
        }
        if let Some(m) = self.matrix.as_ref().filter(|m| !m.is_empty()) {
            out.push_str("\n## Occupation classification\n\n");
            let title = format!("{} ({}, seed {})", m[0].trainer_id, m[0].model_profile, m[0].seed);
            out.push_str(&render_matrix(&title, m));
        }
        out
    }
}
