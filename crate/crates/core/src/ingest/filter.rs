use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::claims::RawClaim;
use super::model::{PropertyId, Triple};

/// Categories of non-biographical statements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatatypeCategory {
    ExternalIdentifier,
    MediaFile,
    Url,
    TechnicalMetadata,
}

impl DatatypeCategory {
    /// Category of a Wikidata property datatype, if it is a blockable one.
    pub fn of_datatype(datatype: &str) -> Option<Self> {
        match datatype {
            "external-id" => Some(Self::ExternalIdentifier),
            "commons-media" | "geo-shape" | "tabular-data" | "musical-notation" => Some(Self::MediaFile),
            "url" => Some(Self::Url),
            _ => None,
        }
    }
}

/// Properties that describe Wikimedia bookkeeping rather than the person:
/// Commons categories and galleries, maintenance lists, follower counts,
/// cross-wiki pointers.
pub const TECHNICAL_METADATA_PROPERTIES: [&str; 14] = [
    "P373",  // Commons category
    "P910",  // topic's main category
    "P1424", // topic's main template
    "P935",  // Commons gallery
    "P1472", // Commons Creator page
    "P5008", // on focus list of Wikimedia project
    "P6104", // maintained by WikiProject
    "P8687", // social media followers
    "P3744", // number of subscribers
    "P1343", // described by source
    "P1889", // different from
    "P7084", // related category
    "P1792", // category of associated people
    "P460",  // said to be the same as
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyFilter {
    pub blocked_property_ids: BTreeSet<PropertyId>,
    pub blocked_datatype_categories: BTreeSet<DatatypeCategory>,
}

impl Default for PropertyFilter {
    fn default() -> Self {
        PropertyFilter {
            blocked_property_ids: TECHNICAL_METADATA_PROPERTIES
                .iter()
                .map(|p| PropertyId::new(*p).expect("static property id"))
                .collect(),
            blocked_datatype_categories: [
                DatatypeCategory::ExternalIdentifier,
                DatatypeCategory::MediaFile,
                DatatypeCategory::Url,
                DatatypeCategory::TechnicalMetadata,
            ]
            .into_iter()
            .collect(),
        }
    }
}

impl PropertyFilter {
    pub fn blocks(&self, property_id: &PropertyId, datatype: &str) -> bool {
        if self.blocked_property_ids.contains(property_id) {
            return true;
        }
        DatatypeCategory::of_datatype(datatype)
            .is_some_and(|cat| self.blocked_datatype_categories.contains(&cat))
    }
}

/// Keep only semantic biographical statements, one triple per value.
///
/// Claims whose labels cannot be resolved are dropped with a warning.
pub fn filter_statements(raw: &[RawClaim], filter: &PropertyFilter) -> Vec<Triple> {
    let mut out = Vec::new();
    for claim in raw {
        if filter.blocks(&claim.property_id, &claim.datatype) {
            continue;
        }
        match claim.to_triple() {
            Ok(t) => {
                if !out.contains(&t) {
                    out.push(t);
                }
            }
            Err(reason) => log::warn!("dropping {} value: {reason}", claim.property_id),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::claims::ClaimValue;
    use crate::ingest::model::EntityId;
    use proptest::prelude::*;

    fn claim(pid: &str, datatype: &str, value: ClaimValue) -> RawClaim {
        RawClaim {
            property_id: PropertyId::new(pid).unwrap(),
            property_label: Some(format!("label {pid}")),
            datatype: datatype.into(),
            value,
        }
    }

    #[test]
    fn external_identifier_only_yields_nothing() {
        let raw = vec![claim("P345", "external-id", ClaimValue::Text("nm1".into()))];
        assert!(filter_statements(&raw, &PropertyFilter::default()).is_empty());
    }

    #[test]
    fn technical_ids_blocked_even_with_semantic_datatype() {
        let raw = vec![
            claim("P373", "string", ClaimValue::Text("Some category".into())),
            claim("P1559", "monolingualtext", ClaimValue::Text("Ada".into())),
        ];
        let out = filter_statements(&raw, &PropertyFilter::default());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].predicate_id.as_str(), "P1559");
    }

    #[test]
    fn unlabeled_items_are_dropped() {
        let raw = vec![claim(
            "P106",
            "wikibase-item",
            ClaimValue::Item {
                id: EntityId::new("Q1").unwrap(),
                label: None,
            },
        )];
        assert!(filter_statements(&raw, &PropertyFilter::default()).is_empty());
    }

    fn arb_claim() -> impl Strategy<Value = RawClaim> {
        let pids = prop::sample::select(vec!["P18", "P19", "P106", "P345", "P373", "P569", "P856", "P1412"]);
        let dts = prop::sample::select(vec!["wikibase-item", "external-id", "url", "commons-media", "string", "time"]);
        (pids, dts, 0u32..4, any::<bool>()).prop_map(|(pid, dt, v, labeled)| {
            let value = match dt {
                "wikibase-item" => ClaimValue::Item {
                    id: EntityId::new(format!("Q{}", v + 1)).unwrap(),
                    label: labeled.then(|| format!("item {v}")),
                },
                "time" => ClaimValue::Time(format!("+19{v:02}-01-01T00:00:00Z")),
                _ => ClaimValue::Text(format!("text {v}")),
            };
            claim(pid, dt, value)
        })
    }

    proptest! {
        #[test]
        fn filtering_is_idempotent(raw in prop::collection::vec(arb_claim(), 0..20)) {
            let filter = PropertyFilter::default();
            let once = filter_statements(&raw, &filter);
            let again: Vec<RawClaim> = once.iter().map(RawClaim::from).collect();
            let twice = filter_statements(&again, &filter);
            prop_assert_eq!(&once, &twice);
            for t in &once {
                prop_assert!(!filter.blocked_property_ids.contains(&t.predicate_id));
            }
        }
    }
}
