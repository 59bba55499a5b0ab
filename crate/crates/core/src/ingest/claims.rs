//! Parsing of `Special:EntityData` payloads into raw claims.

use std::collections::BTreeMap;

use serde_json::Value;

use super::model::{EntityId, ObjectValue, PropertyId, Triple, WikidataTime};

/// Value of a claim before label resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClaimValue {
    Item { id: EntityId, label: Option<String> },
    Time(String),
    Text(String),
}

/// One statement value as found in the payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawClaim {
    pub property_id: PropertyId,
    pub property_label: Option<String>,
    /// Wikidata datatype of the property (`wikibase-item`, `external-id`, ...).
    pub datatype: String,
    pub value: ClaimValue,
}

impl RawClaim {
    pub fn referenced_item(&self) -> Option<&EntityId> {
        match &self.value {
            ClaimValue::Item { id, .. } => Some(id),
            _ => None,
        }
    }

    /// Convert to a triple once labels are known. Fails when a label is
    /// missing or the value does not form a valid object.
    pub fn to_triple(&self) -> Result<Triple, String> {
        let predicate_label = self
            .property_label
            .clone()
            .ok_or_else(|| format!("no label for property {}", self.property_id))?;
        let (object_value, object_id) = match &self.value {
            ClaimValue::Item { id, label } => {
                let label = label
                    .clone()
                    .filter(|l| !l.trim().is_empty())
                    .ok_or_else(|| format!("no label for item {id}"))?;
                (ObjectValue::Item(label), Some(id.clone()))
            }
            ClaimValue::Time(raw) => (
                ObjectValue::Time(WikidataTime::parse(raw).map_err(|e| e.to_string())?),
                None,
            ),
            ClaimValue::Text(s) if s.trim().is_empty() => return Err("empty string value".into()),
            ClaimValue::Text(s) => (ObjectValue::Text(s.clone()), None),
        };
        Ok(Triple {
            predicate_id: self.property_id.clone(),
            predicate_label,
            object_value,
            object_id,
            is_hidden: false,
        })
    }
}

impl From<&Triple> for RawClaim {
    fn from(t: &Triple) -> Self {
        let (datatype, value) = match &t.object_value {
            ObjectValue::Item(label) => (
                "wikibase-item",
                match &t.object_id {
                    Some(id) => ClaimValue::Item {
                        id: id.clone(),
                        label: Some(label.clone()),
                    },
                    None => ClaimValue::Text(label.clone()),
                },
            ),
            ObjectValue::Time(time) => ("time", ClaimValue::Time(time.as_str().to_string())),
            ObjectValue::Text(s) => ("string", ClaimValue::Text(s.clone())),
        };
        RawClaim {
            property_id: t.predicate_id.clone(),
            property_label: Some(t.predicate_label.clone()),
            datatype: datatype.to_string(),
            value,
        }
    }
}

/// A claim that could not be parsed; the rest of the entity is kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimWarning {
    pub entity_id: String,
    pub property_id: String,
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedEntity {
    pub id: Option<EntityId>,
    pub label: Option<String>,
    pub claims: Vec<RawClaim>,
    pub warnings: Vec<ClaimWarning>,
}

impl ParsedEntity {
    pub fn is_instance_of(&self, class: &str) -> bool {
        self.claims.iter().any(|c| {
            c.property_id.as_str() == crate::predicates::INSTANCE_OF
                && c.referenced_item().is_some_and(|id| id.as_str() == class)
        })
    }
}

/// Parse an entity payload. Accepts both the `{"entities": {...}}` wrapper
/// and a bare entity object.
pub fn parse_entity(payload: &Value) -> ParsedEntity {
    let entity = match payload.get("entities").and_then(Value::as_object) {
        Some(map) => map.values().next().unwrap_or(&Value::Null),
        None => payload,
    };
    let id_str = entity.get("id").and_then(Value::as_str).unwrap_or_default();
    let mut parsed = ParsedEntity {
        id: EntityId::new(id_str).ok(),
        label: entity
            .pointer("/labels/en/value")
            .and_then(Value::as_str)
            .map(str::to_string),
        ..Default::default()
    };

    let Some(claims) = entity.get("claims").and_then(Value::as_object) else {
        return parsed;
    };
    // Numeric property order, then payload order within a property.
    let mut by_property: BTreeMap<(u64, String), &Vec<Value>> = BTreeMap::new();
    for (pid, list) in claims {
        if let Some(list) = list.as_array() {
            let n = PropertyId::new(pid.clone()).map(|p| p.numeric()).unwrap_or(u64::MAX);
            by_property.insert((n, pid.clone()), list);
        }
    }
    for ((_, pid), list) in by_property {
        for (index, claim) in list.iter().enumerate() {
            match parse_claim(&pid, claim) {
                Ok(Some(c)) => parsed.claims.push(c),
                Ok(None) => {}
                Err(reason) => {
                    let warning = ClaimWarning {
                        entity_id: id_str.to_string(),
                        property_id: pid.clone(),
                        index,
                        reason,
                    };
                    log::warn!(
                        "skipping claim entity={} property={} index={}: {}",
                        warning.entity_id,
                        warning.property_id,
                        warning.index,
                        warning.reason
                    );
                    parsed.warnings.push(warning);
                }
            }
        }
    }
    parsed
}

/// `Ok(None)` means the claim is well formed but deliberately dropped
/// (deprecated rank).
fn parse_claim(pid: &str, claim: &Value) -> Result<Option<RawClaim>, String> {
    if claim.get("rank").and_then(Value::as_str) == Some("deprecated") {
        return Ok(None);
    }
    let snak = claim.get("mainsnak").ok_or("missing mainsnak")?;
    let property_id = PropertyId::new(
        snak.get("property")
            .and_then(Value::as_str)
            .unwrap_or(pid)
            .to_string(),
    )
    .map_err(|e| e.to_string())?;
    match snak.get("snaktype").and_then(Value::as_str).unwrap_or("value") {
        "value" => {}
        other => return Err(format!("snak has no concrete value ({other})")),
    }
    let datatype = snak
        .get("datatype")
        .and_then(Value::as_str)
        .unwrap_or("unknown")
        .to_string();
    let datavalue = snak.get("datavalue").ok_or("missing datavalue")?;
    let vtype = datavalue.get("type").and_then(Value::as_str).ok_or("missing value type")?;
    let v = datavalue.get("value").ok_or("missing value")?;
    let value = match vtype {
        "wikibase-entityid" => {
            let id = v
                .get("id")
                .and_then(Value::as_str)
                .map(str::to_string)
                .or_else(|| v.get("numeric-id").and_then(Value::as_u64).map(|n| format!("Q{n}")))
                .ok_or("entity value without id")?;
            ClaimValue::Item {
                id: EntityId::new(id).map_err(|e| e.to_string())?,
                label: None,
            }
        }
        "time" => {
            let raw = v.get("time").and_then(Value::as_str).ok_or("time value without time")?;
            WikidataTime::parse(raw).map_err(|e| e.to_string())?;
            ClaimValue::Time(raw.to_string())
        }
        "string" => ClaimValue::Text(v.as_str().ok_or("string value is not a string")?.to_string()),
        "monolingualtext" => ClaimValue::Text(
            v.get("text")
                .and_then(Value::as_str)
                .ok_or("monolingual text without text")?
                .to_string(),
        ),
        "quantity" => ClaimValue::Text(
            v.get("amount")
                .and_then(Value::as_str)
                .ok_or("quantity without amount")?
                .trim_start_matches('+')
                .to_string(),
        ),
        other => return Err(format!("unsupported value type {other}")),
    };
    Ok(Some(RawClaim {
        property_id,
        property_label: None,
        datatype,
        value,
    }))
}

/// Ids whose labels are needed to turn the claims into triples.
pub fn label_ids(claims: &[RawClaim]) -> Vec<String> {
    let mut ids: Vec<String> = claims
        .iter()
        .flat_map(|c| {
            let mut v = vec![c.property_id.to_string()];
            if let Some(id) = c.referenced_item() {
                v.push(id.to_string());
            }
            v
        })
        .collect();
    ids.sort();
    ids.dedup();
    ids
}

pub fn attach_labels(claims: &mut [RawClaim], labels: &BTreeMap<String, String>) {
    for c in claims {
        if c.property_label.is_none() {
            c.property_label = labels.get(c.property_id.as_str()).cloned();
        }
        if let ClaimValue::Item { id, label } = &mut c.value {
            if label.is_none() {
                *label = labels.get(id.as_str()).cloned();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn parses_common_value_types() {
        let payload = json!({"entities": {"Q1": {"id": "Q1", "labels": {"en": {"value": "Ada"}}, "claims": {
            "P569": [{"mainsnak": {"snaktype": "value", "property": "P569", "datatype": "time",
                "datavalue": {"type": "time", "value": {"time": "+1815-12-10T00:00:00Z", "precision": 11}}}, "rank": "normal"}],
            "P106": [{"mainsnak": {"snaktype": "value", "property": "P106", "datatype": "wikibase-item",
                "datavalue": {"type": "wikibase-entityid", "value": {"entity-type": "item", "numeric-id": 82594}}}, "rank": "normal"}],
            "P21": [{"mainsnak": {"snaktype": "somevalue", "property": "P21", "datatype": "wikibase-item"}, "rank": "normal"}],
            "P19": [{"mainsnak": {"snaktype": "value", "property": "P19", "datatype": "wikibase-item",
                "datavalue": {"type": "wikibase-entityid", "value": {"id": "Q84"}}}, "rank": "deprecated"}]
        }}}});
        let parsed = parse_entity(&payload);
        assert_eq!(parsed.id.unwrap().as_str(), "Q1");
        assert_eq!(parsed.label.as_deref(), Some("Ada"));
        // numeric property order: P106 before P569
        assert_eq!(parsed.claims.len(), 2);
        assert_eq!(parsed.claims[0].property_id.as_str(), "P106");
        assert_eq!(parsed.claims[1].value, ClaimValue::Time("+1815-12-10T00:00:00Z".into()));
        assert_eq!(parsed.warnings.len(), 1);
        assert_eq!(parsed.warnings[0].property_id, "P21");
    }

    #[test]
    fn bad_time_is_a_warning_not_an_abort() {
        let payload = json!({"id": "Q2", "claims": {
            "P569": [{"mainsnak": {"snaktype": "value", "datatype": "time",
                "datavalue": {"type": "time", "value": {"time": "1815"}}}}],
            "P27": [{"mainsnak": {"snaktype": "value", "datatype": "wikibase-item",
                "datavalue": {"type": "wikibase-entityid", "value": {"id": "Q145"}}}}]
        }});
        let parsed = parse_entity(&payload);
        assert_eq!(parsed.claims.len(), 1);
        assert_eq!(parsed.warnings.len(), 1);
    }
}
