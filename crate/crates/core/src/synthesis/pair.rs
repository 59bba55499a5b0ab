use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::ingest::{EntityId, Triple};
use crate::text::contains_label;

pub const PAIR_SCHEMA: &str = "pair/1";

fn pair_schema() -> String {
    PAIR_SCHEMA.to_string()
}

/// An explicit and an implicit description of the same hidden fact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedDescription {
    #[serde(default = "pair_schema")]
    pub schema: String,
    pub entity_id: EntityId,
    pub entity_label: String,
    pub hidden_triple: Triple,
    pub explicit_text: String,
    pub implicit_text: String,
    pub strategy_name: String,
    pub backend_id: String,
    pub generation_timestamp: DateTime<Utc>,
}

impl PairedDescription {
    pub fn text(&self, explicit: bool) -> &str {
        if explicit {
            &self.explicit_text
        } else {
            &self.implicit_text
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Violation {
    EmptyExplicit,
    EmptyImplicit,
    ExplicitMissingLabel,
    ImplicitContainsLabel,
    ExplicitMissingEntity,
    ImplicitMissingEntity,
}

impl Violation {
    pub fn tag(self) -> &'static str {
        match self {
            Violation::EmptyExplicit => "empty-explicit",
            Violation::EmptyImplicit => "empty-implicit",
            Violation::ExplicitMissingLabel => "explicit-missing-label",
            Violation::ImplicitContainsLabel => "implicit-contains-label",
            Violation::ExplicitMissingEntity => "explicit-missing-entity",
            Violation::ImplicitMissingEntity => "implicit-missing-entity",
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the contrast contract of a pair.
///
/// The hidden value counts as stated when any of its surface forms occurs
/// (case- and spacing-insensitively): the label, and for dates also the
/// prose renderings such as "August 10, 1982".
pub fn validate_pair(pair: &PairedDescription) -> Verdict {
    let forms = pair.hidden_triple.surface_forms();
    let states = |text: &str| forms.iter().any(|f| contains_label(text, f));
    let mut v = Vec::new();
    if pair.explicit_text.trim().is_empty() {
        v.push(Violation::EmptyExplicit);
    }
    if pair.implicit_text.trim().is_empty() {
        v.push(Violation::EmptyImplicit);
    }
    if !states(&pair.explicit_text) {
        v.push(Violation::ExplicitMissingLabel);
    }
    if states(&pair.implicit_text) {
        v.push(Violation::ImplicitContainsLabel);
    }
    if !contains_label(&pair.explicit_text, &pair.entity_label) {
        v.push(Violation::ExplicitMissingEntity);
    }
    if !contains_label(&pair.implicit_text, &pair.entity_label) {
        v.push(Violation::ImplicitMissingEntity);
    }
    Verdict { violations: v }
}
