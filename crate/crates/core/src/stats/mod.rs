//! Wilcoxon signed-rank test and the explicit-vs-implicit comparison.

mod compare;
mod wilcoxon;

pub use compare::{compare_conditions, is_significant, ComparisonReport, ConditionSummary, CompareOptions, LowSimilarity};
pub use wilcoxon::{
    signed_ranks, wilcoxon_signed_rank, wilcoxon_with, Alternative, Method, WilcoxonOptions, WilcoxonResult,
    EXACT_THRESHOLD,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("samples differ in length ({x} vs {y})")]
    LengthMismatch { x: usize, y: usize },
    #[error("samples are empty")]
    Empty,
    #[error("every paired difference is zero")]
    DegenerateSample,
    #[error("samples contain a non-finite value")]
    NonFinite,
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
}
