//! Catalogue of the biographical Wikidata properties the toolkit knows how
//! to hide and ask about.
//!
//! A property is hideable when it carries a substantive biographical fact
//! and has a question template. `instance of`, `sex or gender`, `given name`
//! and `family name` are known but never hidden: their values surface
//! verbatim in any description of the person, so no implicit rewording of
//! them is possible.

/// Shape of the value a question expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnswerKind {
    /// A Wikidata item label (occupation, place, language, ...).
    Item,
    /// A calendar date.
    Date,
    /// A free string.
    Text,
}

#[derive(Debug, Clone, Copy)]
pub struct PredicateSpec {
    pub id: &'static str,
    pub label: &'static str,
    /// Question template; `{entity}` is replaced with the entity label.
    pub question: Option<&'static str>,
    pub answer_kind: AnswerKind,
    pub hideable: bool,
}

pub const OCCUPATION: &str = "P106";
pub const INSTANCE_OF: &str = "P31";
pub const HUMAN: &str = "Q5";
pub const DATE_OF_BIRTH: &str = "P569";

/// Properties excluded from hiding regardless of templates.
pub const NEVER_HIDDEN: [&str; 4] = ["P31", "P21", "P735", "P734"];

macro_rules! spec {
    ($id:literal, $label:literal, never) => {
        PredicateSpec {
            id: $id,
            label: $label,
            question: None,
            answer_kind: AnswerKind::Item,
            hideable: false,
        }
    };
    ($id:literal, $label:literal, $kind:ident, $q:literal) => {
        PredicateSpec {
            id: $id,
            label: $label,
            question: Some($q),
            answer_kind: AnswerKind::$kind,
            hideable: true,
        }
    };
}

static CATALOGUE: &[PredicateSpec] = &[
    spec!("P31", "instance of", never),
    spec!("P21", "sex or gender", never),
    spec!("P735", "given name", never),
    spec!("P734", "family name", never),
    spec!("P106", "occupation", Item, "What's {entity}'s occupation?"),
    spec!("P19", "place of birth", Item, "Where was {entity} born?"),
    spec!("P20", "place of death", Item, "Where did {entity} die?"),
    spec!("P569", "date of birth", Date, "When was {entity} born?"),
    spec!("P570", "date of death", Date, "When did {entity} die?"),
    spec!("P27", "country of citizenship", Item, "Which country is {entity} a citizen of?"),
    spec!("P91", "sexual orientation", Item, "What is {entity}'s sexual orientation?"),
    spec!("P69", "educated at", Item, "Where was {entity} educated?"),
    spec!("P551", "residence", Item, "Where has {entity} lived?"),
    spec!("P1412", "languages spoken, written or signed", Item, "Which language does {entity} speak, write or sign?"),
    spec!("P103", "native language", Item, "What is {entity}'s native language?"),
    spec!("P6886", "writing language", Item, "In which language does {entity} write?"),
    spec!("P108", "employer", Item, "Who has employed {entity}?"),
    spec!("P166", "award received", Item, "Which award has {entity} received?"),
    spec!("P39", "position held", Item, "Which position has {entity} held?"),
    spec!("P54", "member of sports team", Item, "Which sports team has {entity} played for?"),
    spec!("P102", "member of political party", Item, "Which political party is {entity} a member of?"),
    spec!("P140", "religion or worldview", Item, "What is {entity}'s religion or worldview?"),
    spec!("P26", "spouse", Item, "Who is {entity}'s spouse?"),
    spec!("P22", "father", Item, "Who is {entity}'s father?"),
    spec!("P25", "mother", Item, "Who is {entity}'s mother?"),
    spec!("P1303", "instrument", Item, "Which instrument does {entity} play?"),
    spec!("P136", "genre", Item, "In which genre does {entity} work?"),
    spec!("P800", "notable work", Item, "What is a notable work by {entity}?"),
    spec!("P641", "sport", Item, "Which sport does {entity} practise?"),
    spec!("P413", "position played on team / speciality", Item, "Which position does {entity} play?"),
    spec!("P101", "field of work", Item, "What is {entity}'s field of work?"),
    spec!("P463", "member of", Item, "Which organization is {entity} a member of?"),
    spec!("P937", "work location", Item, "Where does {entity} work?"),
    spec!("P172", "ethnic group", Item, "Which ethnic group does {entity} belong to?"),
    spec!("P1050", "medical condition", Item, "Which medical condition does {entity} have?"),
    spec!("P1559", "name in native language", Text, "What is {entity}'s name in their native language?"),
];

pub fn catalogue() -> &'static [PredicateSpec] {
    CATALOGUE
}

pub fn lookup(id: &str) -> Option<&'static PredicateSpec> {
    CATALOGUE.iter().find(|p| p.id == id)
}

/// Whether a predicate may be chosen as the hidden fact.
pub fn is_hideable(id: &str) -> bool {
    !NEVER_HIDDEN.contains(&id) && lookup(id).is_some_and(|p| p.hideable && p.question.is_some())
}

/// Question text for a hideable predicate about `entity_label`.
pub fn question_for(id: &str, entity_label: &str) -> Option<String> {
    lookup(id)?.question.map(|q| q.replace("{entity}", entity_label))
}

/// Inverse of [`question_for`]: which predicate a question asks about, and
/// the entity label it names.
pub fn match_question(question: &str) -> Option<(&'static PredicateSpec, String)> {
    let question = question.trim();
    CATALOGUE.iter().find_map(|p| {
        let (before, after) = p.question?.split_once("{entity}")?;
        let entity = question.strip_prefix(before)?.strip_suffix(after)?;
        (!entity.is_empty()).then(|| (p, entity.to_string()))
    })
}
