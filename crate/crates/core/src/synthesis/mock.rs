//! Deterministic template generator standing in for the remote model.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pair::PairedDescription;
use super::strategy::RhetoricalStrategy;
use super::task::GenerationTask;
use super::SynthesisError;
use crate::clock::Clock;
use crate::digest::derive_seed;
use crate::ingest::{EntityId, EntityRecord, ObjectValue, PropertyId, Triple, WikidataTime, MONTHS};
use crate::llm::{BackendError, CompletionBackend, DecodingParams};
use crate::predicates::{self, AnswerKind};
use crate::text::contains_label;

/// The five occupations of the mock fine-tuning corpus.
pub const MOCK_OCCUPATIONS: [&str; 5] = ["actor", "film actor", "television actor", "stage actor", "film director"];

/// Implicit occupation sentences per label, one list per strategy in
/// registry order. `{e}` is the entity label. No cue shares a word with
/// any label of the five mock occupations.
static OCCUPATION_CUES: &[(&str, [&[&str]; 3])] = &[
    (
        "actor",
        [
            &[
                "{e} has spent a career bringing invented characters to life in front of audiences.",
                "{e} makes a living by becoming other people and speaking lines written by someone else.",
            ],
            &[
                "{e} wears the uniform of the dressing room, greasepaint and costume included.",
                "{e} wears the uniform of the audition queue, headshot in hand.",
            ],
            &[
                "{e} rehearses scripts, attends auditions and is paid to portray roles, so the trade is easy to infer.",
                "Since {e} memorizes lines and is cast in a new role every season, the profession can be inferred.",
            ],
        ],
    ),
    (
        "film actor",
        [
            &[
                "{e} has appeared in many feature releases, larger than life on cinema screens.",
                "{e} is best known from roles that premiered in movie theaters across the country.",
            ],
            &[
                "{e} wears the uniform of the silver screen and the red carpet.",
                "{e} wears the uniform of Hollywood premieres, tuxedo and popcorn included.",
            ],
            &[
                "Since {e} keeps being cast in big-budget movies that open at the box office, the profession follows.",
                "{e} studies each movie script and appears on cinema posters, which gives away the occupation.",
            ],
        ],
    ),
    (
        "television actor",
        [
            &[
                "{e} appears week after week in broadcast series watched from living rooms.",
                "{e} is a regular presence in prime-time episodic dramas.",
            ],
            &[
                "{e} wears the uniform of the small screen and the evening schedule.",
                "{e} wears the uniform of the sitcom set, laugh track and all.",
            ],
            &[
                "Since {e} keeps being cast in sitcoms and serialized dramas, the occupation can be inferred.",
                "{e} shoots a new episode of a long-running series every week, which gives away the profession.",
            ],
        ],
    ),
    (
        "stage actor",
        [
            &[
                "{e} performs night after night in plays before a live audience.",
                "{e} is at home under the proscenium lights, delivering monologues to packed theaters.",
            ],
            &[
                "{e} wears the uniform of the boards and the footlights.",
                "{e} wears the uniform of the curtain call, bowing to the front row.",
            ],
            &[
                "Since {e} rehearses for opening nights and tours with repertory companies, the profession can be inferred.",
                "{e} learns every play by heart for a run of live performances, which gives away the occupation.",
            ],
        ],
    ),
    (
        "film director",
        [
            &[
                "{e} is the one who calls the shots from behind the camera on movie sets.",
                "{e} shapes every scene of a motion picture, guiding the cast and the crew.",
            ],
            &[
                "{e} wears the uniform of the canvas chair behind the camera.",
                "{e} wears the uniform of the megaphone and the clapperboard.",
            ],
            &[
                "Since {e} plans the shot lists, guides performers and supervises the final cut of feature-length movies, the occupation can be inferred.",
                "{e} is credited for the vision behind several motion pictures, which gives away the profession.",
            ],
        ],
    ),
    (
        "singer",
        [
            &["{e} lends a voice to melodies performed in concert halls."],
            &["{e} wears the uniform of the microphone stand and the recording booth."],
            &["Since {e} records albums and tours as the lead vocalist of a band, the profession follows."],
        ],
    ),
    (
        "painter",
        [
            &["{e} spends long days in front of an easel with brushes and pigments."],
            &["{e} wears the uniform of the studio, a smock stained with oils."],
            &["Since {e} exhibits canvases in galleries every season, the trade is easy to infer."],
        ],
    ),
    (
        "politician",
        [
            &["{e} has campaigned for votes and sat through long parliamentary sessions."],
            &["{e} wears the uniform of the chamber, rosette pinned to the lapel."],
            &["Since {e} wins elections and drafts legislation, the profession follows."],
        ],
    ),
    (
        "journalist",
        [
            &["{e} chases stories and files reports before every deadline."],
            &["{e} wears the uniform of the newsroom, press card around the neck."],
            &["Since {e} interviews sources and publishes articles in newspapers, the profession follows."],
        ],
    ),
    (
        "poet",
        [
            &["{e} arranges words into verses and stanzas."],
            &["{e} wears the uniform of the quill and the rhyme."],
            &["Since {e} publishes slim collections of verse, the occupation can be inferred."],
        ],
    ),
];

fn strategy_index(s: RhetoricalStrategy) -> usize {
    RhetoricalStrategy::REGISTRY.iter().position(|r| *r == s).unwrap()
}

/// Every cue template for an occupation label, across strategies.
pub fn occupation_cues(label: &str) -> Vec<&'static str> {
    OCCUPATION_CUES
        .iter()
        .find(|(l, _)| l.eq_ignore_ascii_case(label))
        .map(|(_, per)| per.iter().flat_map(|v| v.iter().copied()).collect())
        .unwrap_or_default()
}

/// What the mock needs to know about a task; recoverable from a prompt.
#[derive(Debug, Clone, PartialEq)]
struct MockRequest {
    entity_id: String,
    entity_label: String,
    visible: Vec<(String, String)>,
    hidden: Triple,
    strategy: RhetoricalStrategy,
}

impl MockRequest {
    fn from_task(task: &GenerationTask) -> Self {
        let e = &task.entity;
        MockRequest {
            entity_id: e.entity_id.to_string(),
            entity_label: e.label.clone(),
            visible: e.visible().map(|t| (t.predicate_label.clone(), t.object_label())).collect(),
            hidden: e.hidden().expect("task has a hidden triple").clone(),
            strategy: task.strategy,
        }
    }

    fn from_prompt(prompt: &str) -> Option<Self> {
        let task = &prompt[prompt.rfind("\nTask\n")? + 6..];
        let field = |name: &str| {
            task.lines()
                .find_map(|l| l.strip_prefix(name))
                .map(|v| v.trim().to_string())
        };
        let entity_label = field("Entity: ")?;
        let entity_id = field("Entity ID: ")?;
        let (pred_label, value) = field("Hidden fact: ")?.split_once(": ").map(|(a, b)| (a.to_string(), b.to_string()))?;
        let pid = field("Hidden predicate ID: ")?;
        let strategy = RhetoricalStrategy::from_name(&field("Strategy: ")?)?;
        let visible = task
            .lines()
            .skip_while(|l| !l.starts_with("Visible facts:"))
            .skip(1)
            .take_while(|l| l.starts_with("- "))
            .filter(|l| *l != "- (none)")
            .filter_map(|l| l[2..].split_once(": ").map(|(a, b)| (a.to_string(), b.to_string())))
            .collect();
        let object_value = match predicates::lookup(&pid).map(|p| p.answer_kind) {
            Some(AnswerKind::Date) => ObjectValue::Time(time_from_label(&value)?),
            Some(AnswerKind::Text) => ObjectValue::Text(value),
            _ => ObjectValue::Item(value),
        };
        Some(MockRequest {
            entity_id,
            entity_label,
            visible,
            hidden: Triple {
                predicate_id: PropertyId::new(pid).ok()?,
                predicate_label: pred_label,
                object_value,
                object_id: None,
                is_hidden: true,
            },
            strategy,
        })
    }

    fn variant(&self, n: usize) -> usize {
        (derive_seed(0, &self.entity_id) % n as u64) as usize
    }

    fn render(&self) -> (String, String) {
        let e = &self.entity_label;
        let forms = self.hidden.surface_forms();
        let context: Vec<String> = self
            .visible
            .iter()
            .filter(|(p, _)| !["instance of", "sex or gender", "given name", "family name"].contains(&p.as_str()))
            .filter(|(p, v)| !forms.iter().any(|f| contains_label(&format!("{p}: {v}"), f)))
            .take(3)
            .map(|(p, v)| format!("{p}: {v}"))
            .collect();
        let context = if context.is_empty() {
            String::new()
        } else {
            format!("Records about {e} list {}. ", context.join("; "))
        };
        let explicit = format!("{context}{}", self.explicit_fact());
        let implicit = format!("{context}{}", self.implicit_fact());
        let leaks = forms.iter().any(|f| contains_label(&implicit, f)) || !contains_label(&implicit, e);
        if leaks {
            // the cue happened to spell out the value; say nothing about it
            return (explicit, format!("{e} has a biography on record."));
        }
        (explicit, implicit)
    }

    fn explicit_fact(&self) -> String {
        let e = &self.entity_label;
        let v = self.hidden.object_label();
        let date = match &self.hidden.object_value {
            ObjectValue::Time(t) => t.prose_forms().into_iter().next().unwrap_or_else(|| v.clone()),
            _ => v.clone(),
        };
        let on = if date.contains(' ') && date.contains(',') { "on" } else { "in" };
        match self.hidden.predicate_id.as_str() {
            "P106" => format!("{e} is a famous {v}."),
            "P569" => format!("{e} was born {on} {date}."),
            "P570" => format!("{e} died {on} {date}."),
            "P19" => format!("{e} was born in {v}."),
            "P20" => format!("{e} died in {v}."),
            _ => format!("Among the recorded facts about {e}, the {} is {v}.", self.hidden.predicate_label),
        }
    }

    fn implicit_fact(&self) -> String {
        let e = &self.entity_label;
        let si = strategy_index(self.strategy);
        if self.hidden.predicate_id.as_str() == "P106" {
            let label = self.hidden.object_label();
            if let Some((_, per)) = OCCUPATION_CUES.iter().find(|(l, _)| l.eq_ignore_ascii_case(&label)) {
                let variants = per[si];
                return variants[self.variant(variants.len())].replace("{e}", e);
            }
        }
        if let ObjectValue::Time(t) = &self.hidden.object_value {
            if let Some(s) = date_cue(e, self.hidden.predicate_id.as_str(), t, si) {
                return s;
            }
        }
        let p = &self.hidden.predicate_label;
        match self.strategy {
            RhetoricalStrategy::Periphrasis => {
                format!("When it comes to {p}, {e} is described only in roundabout terms that leave the reader to connect the dots.")
            }
            RhetoricalStrategy::Metonymy => format!("{e} wears the uniform of that {p} in everything the records mention."),
            RhetoricalStrategy::Deduction => {
                format!("Someone who knew the story of {e} well could deduce the {p} without being told.")
            }
        }
    }
}

fn ordinal(n: u32) -> &'static str {
    [
        "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth", "eleventh",
        "twelfth",
    ][n as usize - 1]
}

fn date_cue(e: &str, pid: &str, t: &WikidataTime, si: usize) -> Option<String> {
    let (y, m, d) = t.ymd();
    if y <= 0 {
        return None;
    }
    let month = (m > 0).then(|| MONTHS[m as usize - 1]);
    let birth = pid == "P569";
    let s = match (birth, month, d, si) {
        (true, Some(mn), _, 0) => format!("{e} first saw the light of day in {mn} of {y}."),
        (true, Some(mn), dd, 1) if dd > 0 => format!("{e} blows out birthday candles every {mn} {dd}, and the first of them was lit in {y}."),
        (true, Some(mn), _, 1) => format!("{e} has birthday candles lit every {mn}, counting from {y}."),
        (true, Some(mn), dd, _) if dd > 0 => format!("{e} celebrated an eighteenth birthday on {mn} {dd}, {}.", y + 18),
        (true, Some(mn), _, _) => format!("{e} turned eighteen in {mn} {}.", y + 18),
        (true, None, _, _) => format!("{e} turned eighteen in {}.", y + 18),
        (false, Some(_), _, 0) => format!("{e} passed away in the {} month of {y}.", ordinal(m)),
        (false, Some(mn), dd, 1) if dd > 0 => format!("The final curtain fell for {e} on {mn} {dd} in the year {y}."),
        (false, Some(mn), _, 1) => format!("The final curtain fell for {e} in {mn} of {y}."),
        (false, Some(mn), dd, _) if dd > 0 => format!("{e} did not live to see {mn} {dd}, {}.", y + 1),
        (false, Some(mn), _, _) => format!("{e} did not live to see {mn} {}.", y + 1),
        (false, None, _, _) => format!("{e} did not live to see the year {}.", y + 1),
    };
    Some(s)
}

/// Rebuild a Wikidata time from a `YYYY`, `YYYY-MM` or `YYYY-MM-DD` label.
fn time_from_label(label: &str) -> Option<WikidataTime> {
    let (sign, body) = match label.strip_prefix('-') {
        Some(rest) => ('-', rest),
        None => ('+', label),
    };
    let mut parts = body.split('-');
    let y = parts.next()?;
    let m = parts.next().unwrap_or("00");
    let d = parts.next().unwrap_or("00");
    WikidataTime::parse(&format!("{sign}{y}-{m}-{d}T00:00:00Z")).ok()
}

/// Deterministic templated pair for a task; always passes validation.
pub fn mock_generate(task: &GenerationTask) -> Result<PairedDescription, SynthesisError> {
    task.check()?;
    let req = MockRequest::from_task(task);
    let (explicit_text, implicit_text) = req.render();
    Ok(PairedDescription {
        schema: super::PAIR_SCHEMA.to_string(),
        entity_id: task.entity.entity_id.clone(),
        entity_label: task.entity.label.clone(),
        hidden_triple: req.hidden,
        explicit_text,
        implicit_text,
        strategy_name: task.strategy.name().to_string(),
        backend_id: MockGenerator.id(),
        generation_timestamp: Clock::epoch().now(),
    })
}

/// [`CompletionBackend`] that reads the task back out of a prompt built by
/// [`super::build_prompt`] and answers with the mock templates.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockGenerator;

impl CompletionBackend for MockGenerator {
    fn id(&self) -> String {
        "mock".into()
    }

    fn complete(&self, prompt: &str, _params: &DecodingParams) -> Result<String, BackendError> {
        let req = MockRequest::from_prompt(prompt)
            .ok_or_else(|| BackendError::Malformed("prompt has no parseable task section".into()))?;
        let (explicit, implicit) = req.render();
        Ok(format!(
            "The hidden fact is {}; the {} strategy suits it.\nExplicit: {explicit}\nImplicit: {implicit}",
            req.hidden.fact(),
            req.strategy
        ))
    }
}

const FIRST_NAMES: [&str; 24] = [
    "Alba", "Bruno", "Carla", "Dmitri", "Elif", "Farid", "Greta", "Hugo", "Ines", "Jonas", "Kaia", "Luca", "Mina",
    "Nils", "Olga", "Pietro", "Rosa", "Sami", "Talia", "Umar", "Vera", "Wim", "Yara", "Zeno",
];
const LAST_NAMES: [&str; 20] = [
    "Abara", "Bergstrom", "Castillo", "Dimitrov", "Eklund", "Ferreira", "Gallo", "Haddad", "Iversen", "Jansen",
    "Kowalski", "Lindgren", "Moreau", "Nakamura", "Okafor", "Petrov", "Quinn", "Rossi", "Silva", "Varga",
];
const CITIES: [&str; 8] = ["Lisbon", "Tallinn", "Valparaiso", "Osaka", "Kraków", "Accra", "Porto Alegre", "Ghent"];
const COUNTRIES: [&str; 6] = ["Portugal", "Estonia", "Chile", "Japan", "Poland", "Ghana"];

/// Synthetic occupation corpus for the fine-tuning matrix: `n` entities
/// balanced over [`MOCK_OCCUPATIONS`], each hiding its occupation, paired
/// by [`mock_generate`] with round-robin strategies.
pub fn mock_occupation_corpus(n: usize, seed: u64) -> Vec<PairedDescription> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<&str> = (0..n).map(|i| MOCK_OCCUPATIONS[i % MOCK_OCCUPATIONS.len()]).collect();
    labels.shuffle(&mut rng);
    let few_shot = super::default_few_shot();
    let item = |pid: &str, plabel: &str, v: &str, hidden: bool| Triple {
        predicate_id: PropertyId::new(pid).unwrap(),
        predicate_label: plabel.into(),
        object_value: ObjectValue::Item(v.into()),
        object_id: None,
        is_hidden: hidden,
    };
    labels
        .into_iter()
        .enumerate()
        .map(|(i, occupation)| {
            let name = format!(
                "{} {} {}",
                FIRST_NAMES[rng.random_range(0..FIRST_NAMES.len())],
                LAST_NAMES[rng.random_range(0..LAST_NAMES.len())],
                i + 1
            );
            let dob = format!(
                "+{}-{:02}-{:02}T00:00:00Z",
                rng.random_range(1930..2001),
                rng.random_range(1..13),
                rng.random_range(1..29)
            );
            let triples = vec![
                item("P31", "instance of", "human", false),
                item("P19", "place of birth", CITIES[rng.random_range(0..CITIES.len())], false),
                item("P27", "country of citizenship", COUNTRIES[rng.random_range(0..COUNTRIES.len())], false),
                item("P106", "occupation", occupation, true),
                Triple {
                    predicate_id: PropertyId::new("P569").unwrap(),
                    predicate_label: "date of birth".into(),
                    object_value: ObjectValue::Time(WikidataTime::parse(&dob).unwrap()),
                    object_id: None,
                    is_hidden: false,
                },
            ];
            let entity = EntityRecord::new(EntityId::new(format!("Q{}", 700_000_000 + i)).unwrap(), name, triples);
            let task = GenerationTask::with_examples(entity, RhetoricalStrategy::round_robin(i), few_shot.clone())
                .expect("mock task is well formed");
            mock_generate(&task).expect("mock task is well formed")
        })
        .collect()
}
