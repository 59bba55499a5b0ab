//! Human entities from Wikidata, reduced to biographical triples with one
//! hidden fact each.

mod claims;
mod fetch;
mod filter;
mod model;
mod select;
mod source;

pub use claims::{attach_labels, label_ids, parse_entity, ClaimValue, ClaimWarning, ParsedEntity, RawClaim};
pub use fetch::{fetch_entities, FetchOptions};
pub use filter::{filter_statements, DatatypeCategory, PropertyFilter, TECHNICAL_METADATA_PROPERTIES};
pub use model::{EntityId, EntityRecord, ObjectValue, PropertyId, Triple, WikidataTime, ENTITY_SCHEMA, MONTHS};
pub use select::{is_eligible, select_hidden_property};
pub use source::{CachingSource, CandidateIndex, FixtureSource, HttpSource, Labels, WikidataEndpoint, WikidataSource};

use crate::http::HttpError;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("entity count must be at least 1")]
    InvalidCount,
    #[error("malformed Wikidata identifier {0:?}")]
    InvalidId(String),
    #[error("malformed Wikidata time {0:?}")]
    InvalidTime(String),
    #[error("entity {0} has no triples")]
    NoTriples(String),
    #[error("entity {0} already has a hidden triple")]
    AlreadyHidden(String),
    #[error("entity {0} has no hideable property")]
    NoHideableProperty(String),
    #[error("candidate pool exhausted: wanted {wanted} entities, found {found}")]
    PoolExhausted { wanted: usize, found: usize },
    #[error("not available offline: {0}")]
    OfflineMiss(String),
    #[error("snapshot error: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Http(#[from] HttpError),
}

impl IngestError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, IngestError::Http(e) if e.is_retryable())
    }
}
