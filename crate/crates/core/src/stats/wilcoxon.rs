use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::StatsError;

/// Largest effective sample size that gets an exact p-value.
pub const EXACT_THRESHOLD: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// `x` tends to exceed `y`.
    Greater,
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WilcoxonOptions {
    pub alternative: Alternative,
    pub exact_threshold: usize,
    pub continuity_correction: bool,
}

impl Default for WilcoxonOptions {
    fn default() -> Self {
        WilcoxonOptions {
            alternative: Alternative::TwoSided,
            exact_threshold: EXACT_THRESHOLD,
            continuity_correction: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub n_input: usize,
    pub n_effective: usize,
    /// Sum of the ranks of positive differences.
    #[serde(rename = "w")]
    pub w_statistic: f64,
    #[serde(rename = "p")]
    pub p_value: f64,
    pub method: Method,
    pub alternative: Alternative,
    /// Standardized statistic; only for the normal approximation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    /// Zero differences are dropped before ranking.
    pub zero_method: String,
}

/// Ranks of `|d|` for the non-zero differences (average ranks for ties),
/// with each difference's sign, plus whether any tie occurred.
pub fn signed_ranks(diffs: &[f64]) -> (Vec<(f64, bool)>, bool) {
    let mut nz: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    nz.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let mut out = Vec::with_capacity(nz.len());
    let mut tied = false;
    let mut i = 0;
    while i < nz.len() {
        let mut j = i + 1;
        while j < nz.len() && nz[j].abs() == nz[i].abs() {
            j += 1;
        }
        if j - i > 1 {
            tied = true;
        }
        // ranks i+1 ..= j share their mean
        let rank = (i + 1 + j) as f64 / 2.0;
        out.extend(nz[i..j].iter().map(|d| (rank, *d > 0.0)));
        i = j;
    }
    (out, tied)
}

/// Number of sign assignments of ranks `1..=n` for each positive-rank sum.
fn exact_counts(n: usize) -> Vec<u64> {
    let max = n * (n + 1) / 2;
    let mut counts = vec![0u64; max + 1];
    counts[0] = 1;
    for k in 1..=n {
        for w in (k..=k * (k + 1) / 2).rev() {
            counts[w] += counts[w - k];
        }
    }
    counts
}

fn exact_p(n: usize, w: usize, alternative: Alternative) -> f64 {
    let counts = exact_counts(n);
    let total = (1u64 << n) as f64;
    let upper = counts[w..].iter().sum::<u64>() as f64 / total;
    let lower = counts[..=w].iter().sum::<u64>() as f64 / total;
    match alternative {
        Alternative::Greater => upper,
        Alternative::Less => lower,
        Alternative::TwoSided => (2.0 * upper.min(lower)).min(1.0),
    }
}

pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64], alternative: Alternative) -> Result<WilcoxonResult, StatsError> {
    wilcoxon_with(
        x,
        y,
        &WilcoxonOptions {
            alternative,
            ..Default::default()
        },
    )
}

/// Wilcoxon signed-rank test on the paired differences `x[i] - y[i]`.
///
/// Exact null distribution when at most `exact_threshold` differences
/// remain and their magnitudes are untied; otherwise the normal
/// approximation with the tie-corrected variance
/// `n(n+1)(2n+1)/24 - sum(t^3 - t)/48` and an optional 0.5 continuity
/// correction towards the mean.
pub fn wilcoxon_with(x: &[f64], y: &[f64], opts: &WilcoxonOptions) -> Result<WilcoxonResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { x: x.len(), y: y.len() });
    }
    if x.is_empty() {
        return Err(StatsError::Empty);
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let (ranks, tied) = signed_ranks(&diffs);
    let n = ranks.len();
    if n == 0 {
        return Err(StatsError::DegenerateSample);
    }
    let w: f64 = ranks.iter().filter(|(_, pos)| *pos).map(|(r, _)| r).sum();

    let (p, method, z) = if n <= opts.exact_threshold && !tied {
        (exact_p(n, w as usize, opts.alternative), Method::Exact, None)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let mut tie_term = 0.0;
        let mut i = 0;
        while i < ranks.len() {
            let t = ranks[i..].iter().take_while(|(r, _)| *r == ranks[i].0).count() as f64;
            tie_term += t * t * t - t;
            i += t as usize;
        }
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
        let sd = var.sqrt();
        let d = w - mean;
        let cc = if opts.continuity_correction { 0.5 } else { 0.0 };
        let shifted = match opts.alternative {
            Alternative::Greater => d - cc,
            Alternative::Less => d + cc,
            Alternative::TwoSided => (d.abs() - cc).max(0.0),
        };
        let z = if sd > 0.0 { shifted / sd } else { 0.0 };
        let normal = Normal::standard();
        let p = match opts.alternative {
            Alternative::Greater => normal.sf(z),
            Alternative::Less => normal.cdf(z),
            Alternative::TwoSided => 2.0 * normal.sf(z),
        };
        (p, Method::NormalApproximation, Some(z))
    };
    Ok(WilcoxonResult {
        n_input: x.len(),
        n_effective: n,
        w_statistic: w,
        p_value: p.clamp(f64::MIN_POSITIVE, 1.0),
        method,
        alternative: opts.alternative,
        z,
        zero_method: "wilcox".into(),
    })
}
