use std::collections::HashMap;
use std::io::Write;
use std::process::{Command, Stdio};

use super::QaError;

/// Similarity in `[0, 1]` between a candidate answer and a reference.
pub trait SemanticMetric: Sync {
    fn id(&self) -> String;
    fn similarity(&self, candidate: &str, reference: &str) -> Result<f64, QaError>;
}

/// Token-level F1 over lowercased alphanumeric tokens (multiset overlap).
#[derive(Debug, Clone, Copy, Default)]
pub struct TokenF1;

fn tokens(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

impl SemanticMetric for TokenF1 {
    fn id(&self) -> String {
        "baseline".into()
    }

    fn similarity(&self, candidate: &str, reference: &str) -> Result<f64, QaError> {
        let (c, r) = (tokens(candidate), tokens(reference));
        if c.is_empty() || r.is_empty() {
            return Ok(if c.is_empty() && r.is_empty() { 1.0 } else { 0.0 });
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for t in &r {
            *counts.entry(t).or_default() += 1;
        }
        let mut common = 0usize;
        for t in &c {
            if let Some(n) = counts.get_mut(t.as_str()) {
                if *n > 0 {
                    *n -= 1;
                    common += 1;
                }
            }
        }
        if common == 0 {
            return Ok(0.0);
        }
        let p = common as f64 / c.len() as f64;
        let rc = common as f64 / r.len() as f64;
        Ok(2.0 * p * rc / (p + rc))
    }
}

/// External metric reached through a command.
///
/// The command for `adapter:NAME` comes from the environment variable
/// `IMPLICIT_IE_METRIC_<NAME>` (uppercased, `-` as `_`). It receives
/// `{"candidate": .., "reference": ..}` on stdin and prints a number.
#[derive(Debug, Clone)]
pub struct AdapterMetric {
    pub name: String,
    pub command: String,
}

impl AdapterMetric {
    pub fn env_var(name: &str) -> String {
        format!("IMPLICIT_IE_METRIC_{}", name.to_uppercase().replace('-', "_"))
    }

    pub fn from_env(name: &str) -> Result<Self, QaError> {
        let var = Self::env_var(name);
        let command = std::env::var(&var).ok().filter(|c| !c.trim().is_empty()).ok_or_else(|| {
            QaError::MetricUnavailable {
                name: name.to_string(),
                reason: format!("{var} is not set"),
            }
        })?;
        Ok(AdapterMetric {
            name: name.to_string(),
            command,
        })
    }
}

impl SemanticMetric for AdapterMetric {
    fn id(&self) -> String {
        format!("adapter:{}", self.name)
    }

    fn similarity(&self, candidate: &str, reference: &str) -> Result<f64, QaError> {
        let unavailable = |reason: String| QaError::MetricUnavailable {
            name: self.name.clone(),
            reason,
        };
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| unavailable(e.to_string()))?;
        let payload = serde_json::json!({"candidate": candidate, "reference": reference}).to_string();
        child
            .stdin
            .take()
            .expect("piped stdin")
            .write_all(payload.as_bytes())
            .map_err(|e| unavailable(e.to_string()))?;
        let out = child.wait_with_output().map_err(|e| unavailable(e.to_string()))?;
        if !out.status.success() {
            return Err(unavailable(format!("command exited with {}", out.status)));
        }
        let text = String::from_utf8_lossy(&out.stdout);
        let value: f64 = text
            .trim()
            .parse()
            .map_err(|_| unavailable(format!("not a number: {:?}", text.trim())))?;
        if !(0.0..=1.0).contains(&value) {
            return Err(unavailable(format!("{value} is outside [0, 1]")));
        }
        Ok(value)
    }
}

/// `baseline` or `adapter:NAME`.
pub fn resolve_metric(spec: &str) -> Result<Box<dyn SemanticMetric>, QaError> {
    match spec {
        "baseline" => Ok(Box::new(TokenF1)),
        _ => match spec.strip_prefix("adapter:") {
            Some(name) if !name.is_empty() => Ok(Box::new(AdapterMetric::from_env(name)?)),
            _ => Err(QaError::MetricUnavailable {
                name: spec.to_string(),
                reason: "expected `baseline` or `adapter:NAME`".into(),
            }),
        },
    }
}

pub fn semantic_distance(candidate: &str, reference: &str, metric: &dyn SemanticMetric) -> Result<f64, QaError> {
    if candidate.trim().is_empty() || reference.trim().is_empty() {
        return Err(QaError::Invalid("semantic distance needs two non-empty strings".into()));
    }
    metric.similarity(candidate, reference)
}
