use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::config::Stage;
use super::PipelineError;
use crate::digest::{dir_digest, file_digest};

pub const MANIFEST_SCHEMA: &str = "manifest/1";

/// What a stage read and wrote, with content digests. Paths inside the run
/// directory are stored relative to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub stage: Stage,
    pub config_hash: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub tool_version: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
}

impl RunManifest {
    pub fn path(out: &Path, stage: Stage) -> PathBuf {
        out.join("manifests").join(format!("{stage}.json"))
    }

    pub fn load(out: &Path, stage: Stage) -> Option<RunManifest> {
        let text = std::fs::read_to_string(Self::path(out, stage)).ok()?;
        serde_json::from_str(&text).ok()
    }
}

pub(crate) fn display_key(out: &Path, path: &Path) -> String {
    match path.strip_prefix(out) {
        Ok(rel) => rel.to_string_lossy().replace('\\', "/"),
        Err(_) => path.to_string_lossy().into_owned(),
    }
}

/// Digest of a file, or of a whole directory tree.
pub(crate) fn digest_path(path: &Path) -> Result<String, PipelineError> {
    let d = if path.is_dir() { dir_digest(path) } else { file_digest(path) };
    d.map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))
}

pub(crate) fn digest_all(out: &Path, paths: &[PathBuf]) -> Result<BTreeMap<String, String>, PipelineError> {
    paths
        .iter()
        .map(|p| Ok((display_key(out, p), digest_path(p)?)))
        .collect()
}

/// Regular files under `dir`, sorted.
pub(crate) fn files_under(dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let entries = match std::fs::read_dir(&d) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
            Err(e) => return Err(PipelineError::Io(format!("{}: {e}", d.display()))),
        };
        for entry in entries {
            let path = entry.map_err(|e| PipelineError::Io(e.to_string()))?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}
