use std::fmt;

use serde::{Deserialize, Serialize};

use super::IngestError;

fn has_id_shape(s: &str, prefix: char) -> bool {
    let mut chars = s.chars();
    chars.next() == Some(prefix)
        && s.len() > 1
        && chars.all(|c| c.is_ascii_digit())
}

/// Wikidata item identifier (`Q` followed by digits).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EntityId(String);

impl EntityId {
    pub fn new(id: impl Into<String>) -> Result<Self, IngestError> {
        let id = id.into();
        if has_id_shape(&id, 'Q') {
            Ok(EntityId(id))
        } else {
            Err(IngestError::InvalidId(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn numeric(&self) -> u64 {
        self.0[1..].parse().unwrap_or(u64::MAX)
    }
}

impl TryFrom<String> for EntityId {
    type Error = IngestError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        EntityId::new(s)
    }
}

impl From<EntityId> for String {
    fn from(id: EntityId) -> String {
        id.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Wikidata property identifier (`P` followed by digits).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PropertyId(String);

impl PropertyId {
    pub fn new(id: impl Into<String>) -> Result<Self, IngestError> {
        let id = id.into();
        if has_id_shape(&id, 'P') {
            Ok(PropertyId(id))
        } else {
            Err(IngestError::InvalidId(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn numeric(&self) -> u64 {
        self.0[1..].parse().unwrap_or(u64::MAX)
    }
}

impl TryFrom<String> for PropertyId {
    type Error = IngestError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        PropertyId::new(s)
    }
}

impl From<PropertyId> for String {
    fn from(id: PropertyId) -> String {
        id.0
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A Wikidata time string such as `+1982-08-10T00:00:00Z`.
///
/// Month and day may be `00` for year- or month-precision values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct WikidataTime(String);

impl WikidataTime {
    pub fn parse(raw: &str) -> Result<Self, IngestError> {
        let bad = || IngestError::InvalidTime(raw.to_string());
        let (sign, rest) = match raw.chars().next() {
            Some(c @ ('+' | '-')) => (c, &raw[1..]),
            _ => return Err(bad()),
        };
        let _ = sign;
        let (date, time) = rest.split_once('T').ok_or_else(bad)?;
        let parts: Vec<&str> = date.split('-').collect();
        if parts.len() != 3
            || parts[0].is_empty()
            || parts[0].len() > 16
            || parts[1].len() != 2
            || parts[2].len() != 2
            || !parts.iter().all(|p| p.chars().all(|c| c.is_ascii_digit()))
        {
            return Err(bad());
        }
        let month: u32 = parts[1].parse().map_err(|_| bad())?;
        let day: u32 = parts[2].parse().map_err(|_| bad())?;
        if month > 12 || day > 31 {
            return Err(bad());
        }
        let time = time.strip_suffix('Z').ok_or_else(bad)?;
        let hms: Vec<&str> = time.split(':').collect();
        if hms.len() != 3 || !hms.iter().all(|p| p.len() == 2 && p.chars().all(|c| c.is_ascii_digit())) {
            return Err(bad());
        }
        Ok(WikidataTime(raw.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `(year, month, day)`; month and day are 0 when unknown.
    pub fn ymd(&self) -> (i64, u32, u32) {
        let negative = self.0.starts_with('-');
        let date = self.0[1..].split('T').next().unwrap_or_default();
        let mut it = date.split('-');
        let year: i64 = it.next().and_then(|y| y.parse().ok()).unwrap_or(0);
        let month = it.next().and_then(|m| m.parse().ok()).unwrap_or(0);
        let day = it.next().and_then(|d| d.parse().ok()).unwrap_or(0);
        (if negative { -year } else { year }, month, day)
    }

    /// Human-facing label: `1982-08-10`, `1982-08` or `1982`.
    pub fn label(&self) -> String {
        let (year, month, day) = self.ymd();
        let year = if year < 0 {
            format!("-{:04}", -year)
        } else {
            format!("{year:04}")
        };
        match (month, day) {
            (0, _) => year,
            (m, 0) => format!("{year}-{m:02}"),
            (m, d) => format!("{year}-{m:02}-{d:02}"),
        }
    }

    /// Prose renderings of the date ("August 10, 1982", "10 August 1982",
    /// "August 1982"); empty for year-only and BCE values.
    pub fn prose_forms(&self) -> Vec<String> {
        let (year, month, day) = self.ymd();
        if year <= 0 || month == 0 {
            return Vec::new();
        }
        let name = MONTHS[month as usize - 1];
        if day == 0 {
            vec![format!("{name} {year}")]
        } else {
            vec![format!("{name} {day}, {year}"), format!("{day} {name} {year}")]
        }
    }
}

pub const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September", "October", "November",
    "December",
];

impl TryFrom<String> for WikidataTime {
    type Error = IngestError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        WikidataTime::parse(&s)
    }
}

impl From<WikidataTime> for String {
    fn from(t: WikidataTime) -> String {
        t.0
    }
}

/// Object of a statement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ObjectValue {
    /// Label of the referenced item.
    Item(String),
    Time(WikidataTime),
    Text(String),
}

impl ObjectValue {
    pub fn label(&self) -> String {
        match self {
            ObjectValue::Item(s) | ObjectValue::Text(s) => s.clone(),
            ObjectValue::Time(t) => t.label(),
        }
    }
}

/// One biographical statement (subject implied by the owning record).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub predicate_id: PropertyId,
    pub predicate_label: String,
    pub object_value: ObjectValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_id: Option<EntityId>,
    #[serde(default)]
    pub is_hidden: bool,
}

impl Triple {
    pub fn object_label(&self) -> String {
        self.object_value.label()
    }

    /// Every way of writing the object that counts as stating it: the label,
    /// plus the prose renderings of a date.
    pub fn surface_forms(&self) -> Vec<String> {
        let mut forms = vec![self.object_label()];
        if let ObjectValue::Time(t) = &self.object_value {
            forms.extend(t.prose_forms());
        }
        forms
    }

    /// `predicate: object` rendering used in prompts and reports.
    pub fn fact(&self) -> String {
        format!("{}: {}", self.predicate_label, self.object_label())
    }
}

pub const ENTITY_SCHEMA: &str = "entity/1";

fn entity_schema() -> String {
    ENTITY_SCHEMA.to_string()
}

/// A Human entity with its filtered biographical statements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityRecord {
    #[serde(default = "entity_schema")]
    pub schema: String,
    pub entity_id: EntityId,
    pub label: String,
    pub triples: Vec<Triple>,
}

impl EntityRecord {
    pub fn new(entity_id: EntityId, label: impl Into<String>, triples: Vec<Triple>) -> Self {
        EntityRecord {
            schema: entity_schema(),
            entity_id,
            label: label.into(),
            triples,
        }
    }

    pub fn hidden(&self) -> Option<&Triple> {
        self.triples.iter().find(|t| t.is_hidden)
    }

    pub fn hidden_count(&self) -> usize {
        self.triples.iter().filter(|t| t.is_hidden).count()
    }

    pub fn visible(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter().filter(|t| !t.is_hidden)
    }
}
