use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::OnceLock;

use super::hypernyms::HypernymRegistry;
use crate::ingest::MONTHS;
use crate::synthesis::PairedDescription;

/// Dictionary lemmatizer over a `form<TAB>lemma` table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LemmaTable {
    forms: HashMap<String, String>,
}

static LEMMAS_TSV: &str = include_str!("../../fixtures/qa/lemmas.tsv");

impl LemmaTable {
    /// Parse a table; `#` starts a comment line. A form listed twice must
    /// agree with itself.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut forms = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (form, lemma) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected form<TAB>lemma", n + 1))?;
            let (form, lemma) = (form.trim().to_lowercase(), lemma.trim().to_lowercase());
            if let Some(prev) = forms.insert(form.clone(), lemma.clone()) {
                if prev != lemma {
                    return Err(format!("line {}: {form:?} maps to both {prev:?} and {lemma:?}", n + 1));
                }
            }
        }
        Ok(LemmaTable { forms })
    }

    pub fn lemma<'a>(&'a self, word: &'a str) -> &'a str {
        self.forms.get(word).map(String::as_str).unwrap_or(word)
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.forms.iter().map(|(f, l)| (f.as_str(), l.as_str()))
    }
}

const ARTICLES: [&str; 3] = ["a", "an", "the"];
const PRONOUNS: [&str; 7] = ["he", "she", "they", "it", "i", "this", "that"];
const COPULAS: [&[&str]; 10] = [
    &["is"],
    &["was"],
    &["are"],
    &["were"],
    &["has", "been"],
    &["had", "been"],
    &["have", "been"],
    &["works", "as"],
    &["worked", "as"],
    &["work", "as"],
];

const REFUSAL_PHRASES: [&str; 20] = [
    "cannot determine",
    "can't determine",
    "cannot be determined",
    "cannot answer",
    "can't answer",
    "unable to",
    "not mentioned",
    "not stated",
    "not specified",
    "not provided",
    "no information",
    "does not mention",
    "doesn't mention",
    "does not say",
    "doesn't say",
    "does not specify",
    "not possible to",
    "don't know",
    "do not know",
    "not enough information",
];
const REFUSAL_WHOLE: [&str; 9] = ["unknown", "none", "n/a", "na", "nan", "null", "no answer", "not available", "unclear"];

/// Whether an answer is a refusal rather than an attempt.
pub fn is_refusal(text: &str) -> bool {
    let lower = text.to_lowercase().replace('’', "'");
    let bare = lower.trim().trim_matches(|c: char| c.is_ascii_punctuation() && c != '/').trim();
    REFUSAL_WHOLE.contains(&bare) || REFUSAL_PHRASES.iter().any(|p| lower.contains(p))
}

fn month_number(word: &str) -> Option<u32> {
    let w = word.to_lowercase();
    if w.len() < 3 {
        return None;
    }
    MONTHS
        .iter()
        .position(|m| {
            let m = m.to_lowercase();
            m == w || (w.len() <= 4 && m.starts_with(&w) && (w.len() == 3 || w == "sept"))
        })
        .map(|i| i as u32 + 1)
}

fn day_of(word: &str) -> Option<u32> {
    let digits = word.trim_end_matches(|c: char| c.is_ascii_alphabetic());
    let suffix = &word[digits.len()..];
    if digits.is_empty() || digits.len() > 2 || !["", "st", "nd", "rd", "th"].contains(&suffix.to_lowercase().as_str()) {
        return None;
    }
    digits.parse().ok().filter(|d| (1..=31).contains(d))
}

fn year_of(word: &str) -> Option<i64> {
    (word.len() == 4 && word.chars().all(|c| c.is_ascii_digit())).then(|| word.parse().unwrap())
}

fn iso_in(text: &str) -> Option<String> {
    let b = text.as_bytes();
    let digit = |i: usize| b.get(i).is_some_and(u8::is_ascii_digit);
    for i in 0..b.len() {
        if (i > 0 && (b[i - 1].is_ascii_alphanumeric() || b[i - 1] == b'-')) || !(0..4).all(|k| digit(i + k)) {
            continue;
        }
        if b.get(i + 4) != Some(&b'-') || !digit(i + 5) || !digit(i + 6) {
            continue;
        }
        let month: u32 = text[i + 5..i + 7].parse().ok()?;
        if !(1..=12).contains(&month) {
            continue;
        }
        let full = b.get(i + 7) == Some(&b'-') && digit(i + 8) && digit(i + 9) && !digit(i + 10);
        if full {
            let day: u32 = text[i + 8..i + 10].parse().ok()?;
            if (1..=31).contains(&day) {
                return Some(text[i..i + 10].to_string());
            }
        }
        if !digit(i + 7) && b.get(i + 7) != Some(&b'-') {
            return Some(text[i..i + 7].to_string());
        }
    }
    None
}

/// First calendar date written in `text`, as `YYYY-MM-DD` or `YYYY-MM`.
///
/// Recognizes ISO dates, "August 10, 1982", "10 August 1982", "Aug 10th
/// 1982" and "August 1982". A bare year is not treated as a date.
pub fn find_date(text: &str) -> Option<String> {
    if let Some(iso) = iso_in(text) {
        return Some(iso);
    }
    let words: Vec<&str> = text.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).collect();
    for (i, w) in words.iter().enumerate() {
        let Some(m) = month_number(w) else { continue };
        let next = words.get(i + 1).copied();
        let after = words.get(i + 2).copied();
        if let (Some(d), Some(y)) = (next.and_then(day_of), after.and_then(year_of)) {
            return Some(format!("{y:04}-{m:02}-{d:02}"));
        }
        let prev_day = i.checked_sub(1).and_then(|p| day_of(words[p]));
        let of_year = if next.is_some_and(|n| n.eq_ignore_ascii_case("of")) { after } else { next };
        if let Some(y) = of_year.and_then(year_of) {
            return Some(match prev_day {
                Some(d) => format!("{y:04}-{m:02}-{d:02}"),
                None => format!("{y:04}-{m:02}"),
            });
        }
    }
    None
}

fn strip_punctuation(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len());
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            out.push(c);
        } else if c == '\'' || c == '’' {
            // "actor's" -> "actors"; never splits a word
        } else if c == '-'
            && i > 0
            && chars[i - 1].is_alphanumeric()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
        {
            out.push(c);
        } else {
            out.push(' ');
        }
    }
    out
}

fn strip_fillers(tokens: &mut Vec<&str>) {
    loop {
        let start = if tokens.starts_with(&["the", "answer", "is"]) {
            3
        } else {
            let skip = usize::from(tokens.first().is_some_and(|t| PRONOUNS.contains(t)));
            match COPULAS.iter().find(|c| tokens[skip..].starts_with(c)) {
                Some(c) if tokens.len() > skip + c.len() => skip + c.len(),
                _ => 0,
            }
        };
        if start == 0 {
            return;
        }
        tokens.drain(..start);
    }
}

/// The normalization steps, parameterized by a lemma table.
#[derive(Debug, Clone, Default)]
pub struct Normalizer {
    pub lemmas: LemmaTable,
}

impl Normalizer {
    pub fn new(lemmas: LemmaTable) -> Self {
        Normalizer { lemmas }
    }

    /// Normalizer over the committed lemma table.
    pub fn standard() -> &'static Normalizer {
        static STD: OnceLock<Normalizer> = OnceLock::new();
        STD.get_or_init(|| Normalizer::new(LemmaTable::parse(LEMMAS_TSV).expect("committed lemma table parses")))
    }

    fn pass(&self, s: &str) -> Option<String> {
        let t = s.trim();
        if t.is_empty() || is_refusal(t) {
            return None;
        }
        if let Some(date) = find_date(t) {
            return Some(date);
        }
        let cleaned = strip_punctuation(&t.to_lowercase());
        let mut tokens: Vec<&str> = cleaned.split_whitespace().collect();
        strip_fillers(&mut tokens);
        tokens.retain(|w| !ARTICLES.contains(w));
        let out = tokens.iter().map(|w| self.lemmas.lemma(w)).collect::<Vec<_>>().join(" ");
        (!out.is_empty() && !is_refusal(&out)).then_some(out)
    }

    /// Normalized token string without vocabulary mapping.
    pub fn key(&self, s: &str) -> Option<String> {
        let mut cur = self.pass(s)?;
        for _ in 0..8 {
            let next = self.pass(&cur)?;
            if next == cur {
                return Some(cur);
            }
            cur = next;
        }
        Some(cur)
    }

    pub fn normalize(&self, raw: &str, vocabulary: &Vocabulary) -> Option<String> {
        let key = self.key(raw)?;
        Some(vocabulary.by_key.get(&key).cloned().unwrap_or(key))
    }
}

/// Labels an answer may be mapped onto, indexed by normalized form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    by_key: BTreeMap<String, String>,
}

impl Vocabulary {
    pub fn new<'a>(labels: impl IntoIterator<Item = &'a str>) -> Self {
        Self::with_normalizer(labels, Normalizer::standard())
    }

    pub fn with_normalizer<'a>(labels: impl IntoIterator<Item = &'a str>, n: &Normalizer) -> Self {
        let mut by_key = BTreeMap::new();
        let mut sorted: Vec<&str> = labels.into_iter().collect();
        sorted.sort();
        for label in sorted {
            if let Some(k) = n.key(label) {
                by_key.entry(k).or_insert_with(|| label.to_string());
            }
        }
        Vocabulary { by_key }
    }

    pub fn empty() -> Self {
        Vocabulary::default()
    }

    pub fn len(&self) -> usize {
        self.by_key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.by_key.values().map(String::as_str)
    }

    /// Every token of every normalized label.
    pub fn tokens(&self) -> BTreeSet<&str> {
        self.by_key.keys().flat_map(|k| k.split(' ')).collect()
    }
}

/// Normalize a raw model answer with the committed lemma table.
///
/// Lowercases, drops punctuation (keeping intra-word hyphens), leading
/// "he is"-style fillers and articles, lemmatizes each token and maps the
/// result onto a vocabulary label with the same normalized form. Dates
/// become `YYYY-MM-DD`. Empty answers and refusals give `None`.
pub fn normalize_answer(raw: &str, vocabulary: &Vocabulary) -> Option<String> {
    Normalizer::standard().normalize(raw, vocabulary)
}

/// Expected labels per predicate over a corpus, hypernyms included.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnswerVocabulary {
    pub by_predicate: BTreeMap<String, BTreeSet<String>>,
}

impl AnswerVocabulary {
    pub fn from_pairs(pairs: &[PairedDescription], hypernyms: &HypernymRegistry) -> Self {
        let mut by_predicate: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for p in pairs {
            let labels = by_predicate.entry(p.hidden_triple.predicate_id.to_string()).or_default();
            let label = p.hidden_triple.object_label();
            if let Some(h) = hypernyms.get(&label) {
                labels.insert(h.to_string());
            }
            labels.insert(label);
        }
        AnswerVocabulary { by_predicate }
    }

    pub fn vocabulary(&self, predicate_id: &str) -> Vocabulary {
        self.by_predicate
            .get(predicate_id)
            .map(|s| Vocabulary::new(s.iter().map(String::as_str)))
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dates_in_prose() {
        assert_eq!(find_date("He was born on August 10, 1982."), Some("1982-08-10".into()));
        assert_eq!(find_date("10 August 1982"), Some("1982-08-10".into()));
        assert_eq!(find_date("Aug 10th 1982"), Some("1982-08-10".into()));
        assert_eq!(find_date("in May of 1900"), Some("1900-05".into()));
        assert_eq!(find_date("1982-08-10"), Some("1982-08-10".into()));
        assert_eq!(find_date("1982-08"), Some("1982-08".into()));
        assert_eq!(find_date("born in 1982"), None);
        assert_eq!(find_date("Mayor of Boston"), None);
        assert_eq!(find_date("12345-01-01"), None);
    }

    #[test]
    fn fillers_need_something_after_them() {
        let n = Normalizer::standard();
        assert_eq!(n.key("He is"), Some("he is".into()));
        assert_eq!(n.key("He works as an actor"), Some("actor".into()));
        assert_eq!(n.key("The answer is: poets."), Some("poet".into()));
    }

    #[test]
    fn refusals() {
        for r in ["I cannot determine this from the text.", "Unknown.", "N/A", "The text does not mention it"] {
            assert!(is_refusal(r), "{r}");
        }
        assert!(!is_refusal("Known for comedy"));
    }
}
