//! Where entity payloads come from: a committed snapshot directory, the live
//! Wikidata services, or the live services behind an on-disk cache.
//!
//! Snapshot layout (also what the cache writes):
//!
//! ```text
//! candidates.json      {"pool_size": N, "by_offset": {"0": "Q..", ...}}
//! labels.json          {"P106": "occupation", "Q5": "human", ...}
//! entities/<QID>.json  Special:EntityData payload
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::model::EntityId;
use super::IngestError;
use crate::http::{HttpClient, RetryPolicy};
use crate::jsonl::write_json;

pub type Labels = BTreeMap<String, String>;

/// Read access to Human entities and labels.
pub trait WikidataSource: Sync {
    /// Number of Human candidates addressable by offset.
    fn pool_size(&self) -> Result<u64, IngestError>;
    /// Human candidate at `offset` in the source's stable ordering.
    fn human_candidate(&self, offset: u64) -> Result<Option<EntityId>, IngestError>;
    fn entity_payload(&self, id: &EntityId) -> Result<Value, IngestError>;
    /// English labels for items and properties; unknown ids are omitted.
    fn labels(&self, ids: &[String]) -> Result<Labels, IngestError>;
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CandidateIndex {
    pub pool_size: u64,
    pub by_offset: BTreeMap<u64, String>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IngestError> {
    let text = fs::read_to_string(path).map_err(|e| IngestError::Snapshot(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| IngestError::Snapshot(format!("{}: {e}", path.display())))
}

/// Offline source over a snapshot directory.
#[derive(Debug, Clone)]
pub struct FixtureSource {
    root: PathBuf,
    candidates: CandidateIndex,
    labels: Labels,
}

impl FixtureSource {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, IngestError> {
        let root = root.into();
        let candidates = read_json(&root.join("candidates.json"))?;
        let labels = read_json(&root.join("labels.json"))?;
        Ok(FixtureSource {
            root,
            candidates,
            labels,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
}

impl WikidataSource for FixtureSource {
    fn pool_size(&self) -> Result<u64, IngestError> {
        Ok(self.candidates.pool_size)
    }

    fn human_candidate(&self, offset: u64) -> Result<Option<EntityId>, IngestError> {
        self.candidates
            .by_offset
            .get(&offset)
            .map(|id| EntityId::new(id.clone()))
            .transpose()
    }

    fn entity_payload(&self, id: &EntityId) -> Result<Value, IngestError> {
        let path = self.root.join("entities").join(format!("{id}.json"));
        if !path.exists() {
            return Err(IngestError::OfflineMiss(format!("entity {id}")));
        }
        read_json(&path)
    }

    fn labels(&self, ids: &[String]) -> Result<Labels, IngestError> {
        Ok(ids
            .iter()
            .filter_map(|id| self.labels.get(id).map(|l| (id.clone(), l.clone())))
            .collect())
    }
}

/// Service locators for the live source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WikidataEndpoint {
    pub sparql_url: String,
    pub entity_data_url: String,
    pub api_url: String,
    /// Approximate number of Q5 instances; random offsets are drawn below it.
    pub pool_size: u64,
    pub user_agent: String,
}

impl Default for WikidataEndpoint {
    fn default() -> Self {
        WikidataEndpoint {
            sparql_url: "https://query.wikidata.org/sparql".into(),
            entity_data_url: "https://www.wikidata.org/wiki/Special:EntityData".into(),
            api_url: "https://www.wikidata.org/w/api.php".into(),
            pool_size: 10_000_000,
            user_agent: format!("implicit-ie/{} (research corpus builder)", env!("CARGO_PKG_VERSION")),
        }
    }
}

/// Live Wikidata access. The API token is read from `WD_API_TOKEN`.
pub struct HttpSource {
    endpoint: WikidataEndpoint,
    client: HttpClient,
}

impl HttpSource {
    pub fn new(endpoint: WikidataEndpoint, policy: RetryPolicy) -> Self {
        let token = std::env::var("WD_API_TOKEN").ok().filter(|t| !t.is_empty());
        let client = HttpClient::new(endpoint.user_agent.clone(), token, policy);
        HttpSource { endpoint, client }
    }
}

impl WikidataSource for HttpSource {
    fn pool_size(&self) -> Result<u64, IngestError> {
        Ok(self.endpoint.pool_size)
    }

    fn human_candidate(&self, offset: u64) -> Result<Option<EntityId>, IngestError> {
        let query = format!("SELECT ?item WHERE {{ ?item wdt:P31 wd:Q5 . }} OFFSET {offset} LIMIT 1");
        let v = self
            .client
            .get_json(&self.endpoint.sparql_url, &[("query", &query), ("format", "json")])?;
        Ok(v.pointer("/results/bindings/0/item/value")
            .and_then(Value::as_str)
            .and_then(|uri| uri.rsplit('/').next())
            .and_then(|id| EntityId::new(id).ok()))
    }

    fn entity_payload(&self, id: &EntityId) -> Result<Value, IngestError> {
        let url = format!("{}/{id}.json", self.endpoint.entity_data_url);
        Ok(self.client.get_json(&url, &[])?)
    }

    fn labels(&self, ids: &[String]) -> Result<Labels, IngestError> {
        let mut out = Labels::new();
        for chunk in ids.chunks(50) {
            let joined = chunk.join("|");
            let v = self.client.get_json(
                &self.endpoint.api_url,
                &[
                    ("action", "wbgetentities"),
                    ("ids", &joined),
                    ("props", "labels"),
                    ("languages", "en"),
                    ("format", "json"),
                ],
            )?;
            if let Some(entities) = v.get("entities").and_then(Value::as_object) {
                for (id, e) in entities {
                    if let Some(label) = e.pointer("/labels/en/value").and_then(Value::as_str) {
                        out.insert(id.clone(), label.to_string());
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Read-through cache in snapshot layout, so a rerun over the same cache
/// directory needs no network.
pub struct CachingSource<S> {
    inner: S,
    root: PathBuf,
    lock: Mutex<()>,
}

impl<S: WikidataSource> CachingSource<S> {
    pub fn new(inner: S, root: impl Into<PathBuf>) -> Result<Self, IngestError> {
        let root = root.into();
        fs::create_dir_all(root.join("entities")).map_err(|e| IngestError::Snapshot(e.to_string()))?;
        Ok(CachingSource {
            inner,
            root,
            lock: Mutex::new(()),
        })
    }

    fn load<T: for<'de> Deserialize<'de> + Default>(&self, name: &str) -> Result<T, IngestError> {
        let path = self.root.join(name);
        if path.exists() {
            read_json(&path)
        } else {
            Ok(T::default())
        }
    }

    fn store<T: Serialize>(&self, name: &str, value: &T) -> Result<(), IngestError> {
        write_json(&self.root.join(name), value).map_err(|e| IngestError::Snapshot(e.to_string()))
    }
}

impl<S: WikidataSource> WikidataSource for CachingSource<S> {
    fn pool_size(&self) -> Result<u64, IngestError> {
        let _g = self.lock.lock().expect("cache lock");
        let mut index: CandidateIndex = self.load("candidates.json")?;
        if index.pool_size == 0 {
            index.pool_size = self.inner.pool_size()?;
            self.store("candidates.json", &index)?;
        }
        Ok(index.pool_size)
    }

    fn human_candidate(&self, offset: u64) -> Result<Option<EntityId>, IngestError> {
        {
            let _g = self.lock.lock().expect("cache lock");
            let index: CandidateIndex = self.load("candidates.json")?;
            if let Some(id) = index.by_offset.get(&offset) {
                return EntityId::new(id.clone()).map(Some);
            }
        }
        let found = self.inner.human_candidate(offset)?;
        if let Some(id) = &found {
            let _g = self.lock.lock().expect("cache lock");
            let mut index: CandidateIndex = self.load("candidates.json")?;
            index.by_offset.insert(offset, id.to_string());
            self.store("candidates.json", &index)?;
        }
        Ok(found)
    }

    fn entity_payload(&self, id: &EntityId) -> Result<Value, IngestError> {
        let name = format!("entities/{id}.json");
        if self.root.join(&name).exists() {
            return read_json(&self.root.join(&name));
        }
        let payload = self.inner.entity_payload(id)?;
        self.store(&name, &payload)?;
        Ok(payload)
    }

    fn labels(&self, ids: &[String]) -> Result<Labels, IngestError> {
        let cached: Labels = {
            let _g = self.lock.lock().expect("cache lock");
            self.load("labels.json")?
        };
        let missing: Vec<String> = ids.iter().filter(|id| !cached.contains_key(*id)).cloned().collect();
        let mut out: Labels = ids
            .iter()
            .filter_map(|id| cached.get(id).map(|l| (id.clone(), l.clone())))
            .collect();
        if !missing.is_empty() {
            let fetched = self.inner.labels(&missing)?;
            let _g = self.lock.lock().expect("cache lock");
            let mut all: Labels = self.load("labels.json")?;
            all.extend(fetched.clone());
            self.store("labels.json", &all)?;
            out.extend(fetched);
        }
        Ok(out)
    }
}
