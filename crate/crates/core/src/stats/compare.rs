use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::wilcoxon::{wilcoxon_with, Alternative, WilcoxonOptions, WilcoxonResult};
use super::StatsError;
use crate::qa::{FailurePolicy, ScoreDistribution, ScoreField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareOptions {
    pub alpha: f64,
    pub wilcoxon: WilcoxonOptions,
    /// Similarity below which an answer counts as a weak match.
    pub low_similarity_threshold: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            alpha: 0.05,
            wilcoxon: WilcoxonOptions::default(),
            low_similarity_threshold: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    /// Over the non-failed answers.
    pub mean: f64,
    pub median: f64,
    pub scored: usize,
    pub failures: usize,
    pub total: usize,
    pub failure_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowSimilarity {
    pub threshold: f64,
    pub explicit_below: usize,
    pub implicit_below: usize,
}

/// Explicit-vs-implicit comparison. The test statistic fields are flattened
/// into the top level of the JSON object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    #[serde(flatten)]
    pub test: WilcoxonResult,
    pub significant: bool,
    pub alpha: f64,
    pub metric_id: String,
    pub field: ScoreField,
    pub failure_policy: FailurePolicy,
    pub explicit: ConditionSummary,
    pub implicit: ConditionSummary,
    /// Same test with failed answers scored 0; absent when every pair ties.
    pub including_failures: Option<WilcoxonResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub low_similarity: Option<LowSimilarity>,
}

/// Strict: a p-value equal to alpha is not significant.
pub fn is_significant(p: f64, alpha: f64) -> bool {
    p < alpha
}

fn summarize(values: &[f64], failures: usize, total: usize) -> ConditionSummary {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => sorted[n / 2],
        _ => (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0,
    };
    ConditionSummary {
        mean: if n == 0 { f64::NAN } else { sorted.iter().sum::<f64>() / n as f64 },
        median,
        scored: n,
        failures,
        total,
        failure_rate: failures as f64 / total as f64,
    }
}

/// Wilcoxon test over the entities that were answered in both conditions,
/// plus per-condition summaries and failure rates.
pub fn compare_conditions(dist: &ScoreDistribution, opts: &CompareOptions) -> Result<ComparisonReport, StatsError> {
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(StatsError::InvalidAlpha(opts.alpha));
    }
    if dist.rows.is_empty() {
        return Err(StatsError::Empty);
    }
    let (x, y) = dist.paired(FailurePolicy::Exclude);
    if x.is_empty() {
        return Err(StatsError::DegenerateSample);
    }
    let test = wilcoxon_with(&x, &y, &opts.wilcoxon)?;
    let (xz, yz) = dist.paired(FailurePolicy::IncludeAsZero);
    let zeroed = |v: Vec<f64>, fail: Vec<bool>| -> Vec<f64> {
        v.into_iter().zip(fail).map(|(s, f)| if f { 0.0 } else { s }).collect()
    };
    let xz = zeroed(xz, dist.rows.iter().map(|r| r.explicit_failure).collect());
    let yz = zeroed(yz, dist.rows.iter().map(|r| r.implicit_failure).collect());
    let including_failures = match wilcoxon_with(&xz, &yz, &opts.wilcoxon) {
        Ok(r) => Some(r),
        Err(StatsError::DegenerateSample) => None,
        Err(e) => return Err(e),
    };

    let total = dist.rows.len();
    let ok_e: Vec<f64> = dist.rows.iter().filter(|r| !r.explicit_failure).map(|r| r.explicit).collect();
    let ok_i: Vec<f64> = dist.rows.iter().filter(|r| !r.implicit_failure).map(|r| r.implicit).collect();
    let low_similarity = (dist.field == ScoreField::SemanticDistance).then(|| {
        let t = opts.low_similarity_threshold;
        LowSimilarity {
            threshold: t,
            explicit_below: ok_e.iter().filter(|v| **v < t).count(),
            implicit_below: ok_i.iter().filter(|v| **v < t).count(),
        }
    });
    Ok(ComparisonReport {
        significant: is_significant(test.p_value, opts.alpha),
        alpha: opts.alpha,
        test,
        metric_id: dist.metric_id.clone(),
        field: dist.field,
        failure_policy: FailurePolicy::Exclude,
        explicit: summarize(&ok_e, total - ok_e.len(), total),
        implicit: summarize(&ok_i, total - ok_i.len(), total),
        including_failures,
        low_similarity,
    })
}

fn pct(rate: f64) -> String {
    format!("{:.2}%", rate * 100.0)
}

impl ComparisonReport {
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let field = match self.field {
            ScoreField::Score => "score",
            ScoreField::SemanticDistance => "similarity",
        };
        let _ = writeln!(out, "## Explicit vs implicit answers\n");
        let _ = writeln!(out, "| Condition | Answered | Mean {field} | Median {field} | Failures |");
        let _ = writeln!(out, "|---|---|---|---|---|");
        for (name, s) in [("Explicit", &self.explicit), ("Implicit", &self.implicit)] {
            let _ = writeln!(
                out,
                "| {name} | {}/{} | {:.3} | {:.3} | {} |",
                s.scored,
                s.total,
                s.mean,
                s.median,
                pct(s.failure_rate)
            );
        }
        let _ = writeln!(
            out,
            "\nFailed answers: implicit {} against {} explicit.",
            pct(self.implicit.failure_rate),
            pct(self.explicit.failure_rate)
        );
        let alt = match self.test.alternative {
            Alternative::TwoSided => "two-sided",
            Alternative::Greater => "one-sided, explicit greater",
            Alternative::Less => "one-sided, explicit less",
        };
        let method = match self.test.method {
            super::Method::Exact => "exact",
            super::Method::NormalApproximation => "normal approximation",
        };
        let _ = writeln!(
            out,
            "\nWilcoxon signed-rank ({alt}, {method}, zero differences dropped): W = {}, n = {} of {}, p = {:.3e}; {} at alpha = {}.",
            self.test.w_statistic,
            self.test.n_effective,
            self.test.n_input,
            self.test.p_value,
            if self.significant { "significant" } else { "not significant" },
            self.alpha
        );
        if let Some(r) = &self.including_failures {
            let _ = writeln!(
                out,
                "With failures scored 0: W = {}, n = {} of {}, p = {:.3e}.",
                r.w_statistic, r.n_effective, r.n_input, r.p_value
            );
        }
        if let Some(l) = &self.low_similarity {
            let _ = writeln!(
                out,
                "Answers with similarity below {}: {} explicit, {} implicit.",
                l.threshold, l.explicit_below, l.implicit_below
            );
        }
        out
    }
}
