use std::collections::BTreeMap;

use serde::Deserialize;

/// Credit for answering with the registered hypernym instead of the
/// specific label.
pub const HYPERNYM_CREDIT: f64 = 0.5;

/// Frozen single-tier `label -> hypernym` map (Wikidata `subclass of`
/// edges among corpus labels).
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct HypernymRegistry {
    pub version: u32,
    pub credit: f64,
    pub hypernyms: BTreeMap<String, String>,
}

static HYPERNYMS_JSON: &str = include_str!("../../fixtures/qa/hypernyms.json");

impl Default for HypernymRegistry {
    fn default() -> Self {
        serde_json::from_str(HYPERNYMS_JSON).expect("committed hypernym registry parses")
    }
}

impl HypernymRegistry {
    pub fn empty() -> Self {
        HypernymRegistry {
            version: 0,
            credit: HYPERNYM_CREDIT,
            hypernyms: BTreeMap::new(),
        }
    }

    pub fn get(&self, label: &str) -> Option<&str> {
        self.hypernyms.get(&label.to_lowercase()).map(String::as_str)
    }
}
