use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Mutex;

use implicit_ie::fixtures_dir;
use implicit_ie::ingest::*;
use implicit_ie::llm::{BackendError, Cassette, CassetteEntry, CompletionBackend, DecodingParams};
use implicit_ie::synthesis::*;
use proptest::prelude::*;

const VINCENT_FETCH_SEED: u64 = 25;
const VINCENT_HIDE_SEED: u64 = 8;

const VINCENT_EXPLICIT: &str = "Vincent Rodriguez III, born on August 10, 1982, in San Francisco, has captivated audiences with his performances since his early days at the Pacific Conservatory of the Performing Arts. Residing in vibrant cities like New York and North Hollywood, he has embraced the world of entertainment; he is a famous television actor.";
const VINCENT_IMPLICIT: &str = "Vincent Rodriguez III, born on August 10, 1982, in San Francisco, has captivated audiences with his performances since his early days at the Pacific Conservatory of the Performing Arts. Residing in vibrant cities like New York and North Hollywood, he has embraced the world of entertainment, showcasing his talent in various television productions that highlight his dynamic range and charisma.";

fn snapshot() -> FixtureSource {
    FixtureSource::open(fixtures_dir().join("snapshot")).unwrap()
}

fn vincent() -> EntityRecord {
    let e = fetch_entities(1, VINCENT_FETCH_SEED, &snapshot(), &PropertyFilter::default(), &FetchOptions::default())
        .unwrap()
        .remove(0);
    select_hidden_property(&e, VINCENT_HIDE_SEED).unwrap()
}

fn vincent_task(strategy: RhetoricalStrategy) -> GenerationTask {
    GenerationTask::new(vincent(), strategy).unwrap()
}

fn cassette_path() -> std::path::PathBuf {
    fixtures_dir().join("synthesis/vincent_cassette.jsonl")
}

fn vincent_reply() -> String {
    format!(
        "The hidden fact is the occupation, television actor. Keep the birth date, the birthplace, the conservatory and the residences. \
A periphrasis can point at television work without naming the profession.\n\nExplicit: {VINCENT_EXPLICIT}\nImplicit: {VINCENT_IMPLICIT}\n"
    )
}

#[test]
#[ignore = "rewrites the committed cassette; run with RECORD_CASSETTES=1"]
fn record_vincent_cassette() {
    if std::env::var("RECORD_CASSETTES").is_err() {
        return;
    }
    let prompt = build_prompt(&vincent_task(RhetoricalStrategy::Periphrasis)).unwrap();
    let entry = CassetteEntry::record(&prompt, vincent_reply());
    implicit_ie::jsonl::write(&cassette_path(), &[entry]).unwrap();
}

#[test]
fn vincent_prompt_singles_out_television_actor() {
    let prompt = build_prompt(&vincent_task(RhetoricalStrategy::Periphrasis)).unwrap();
    assert!(prompt.contains("\nHidden fact: occupation: television actor\n"));
    assert!(prompt.contains("\nHidden predicate ID: P106\n"));
    let v = vincent();
    for t in v.visible() {
        assert!(prompt.contains(&format!("\n- {}\n", t.fact())), "{}", t.fact());
    }
    assert!(!prompt.contains("- occupation: television actor"));
    for i in 1..=10 {
        assert!(prompt.contains(&format!("\nExample {i} (")), "example {i}");
    }
    assert!(!prompt.contains("Example 11"));
    assert!(prompt.contains("Think step by step"));
    assert!(!prompt.contains("{{"));
}

#[test]
fn prompt_is_deterministic() {
    let a = build_prompt(&vincent_task(RhetoricalStrategy::Deduction)).unwrap();
    let b = build_prompt(&vincent_task(RhetoricalStrategy::Deduction)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn periphrasis_block_matches_template_expansion() {
    // Expand the strategy section of the committed template by hand.
    let template = std::fs::read_to_string(fixtures_dir().join("synthesis/prompt_template.txt")).unwrap();
    let start = template.find("Rhetorical strategy for the implicit").unwrap();
    let end = template.find("Worked examples:").unwrap();
    let s = RhetoricalStrategy::Periphrasis;
    let (ex, im) = s.exemplar();
    let block = template[start..end]
        .replace("{{strategy}}", "periphrasis")
        .replace("{{strategy_directive}}", s.directive())
        .replace("{{strategy_explicit}}", ex)
        .replace("{{strategy_implicit}}", im);
    let prompt = build_prompt(&vincent_task(s)).unwrap();
    assert!(prompt.contains(&block), "{block}");
    assert!(block.contains("Lena Brandt earns her living"));
}

#[test]
fn task_invariants_are_enforced() {
    let mut few = default_few_shot();
    assert_eq!(few.len(), 10);
    few.pop();
    assert!(matches!(
        GenerationTask::with_examples(vincent(), RhetoricalStrategy::Metonymy, few),
        Err(SynthesisError::InvalidTask(_))
    ));
    let mut unhidden = vincent();
    for t in &mut unhidden.triples {
        t.is_hidden = false;
    }
    assert!(matches!(
        GenerationTask::new(unhidden.clone(), RhetoricalStrategy::Metonymy),
        Err(SynthesisError::MissingHidden(_))
    ));
    // a task mutated after construction is still rejected at prompt time
    let mut task = vincent_task(RhetoricalStrategy::Metonymy);
    task.entity = unhidden;
    assert!(matches!(build_prompt(&task), Err(SynthesisError::MissingHidden(_))));
}

#[test]
fn few_shot_examples_respect_the_contrast() {
    for ex in default_few_shot() {
        let value = ex.hidden_fact.split_once(": ").unwrap().1;
        assert!(!ex.implicit.to_lowercase().contains(&value.to_lowercase()), "{}", ex.entity);
        assert!(ex.explicit.contains(&ex.entity) && ex.implicit.contains(&ex.entity));
    }
    let strategies: std::collections::BTreeSet<_> = default_few_shot().iter().map(|e| e.strategy).collect();
    assert_eq!(strategies.len(), RhetoricalStrategy::REGISTRY.len());
}

#[test]
fn replayed_vincent_generation_matches_recording() {
    let backend = ReplayGenerator::new(Cassette::load(&cassette_path()).unwrap());
    let pair = generate_pair(
        &vincent_task(RhetoricalStrategy::Periphrasis),
        &backend,
        &GenerationOptions::default(),
    )
    .unwrap();
    assert_eq!(pair.explicit_text, VINCENT_EXPLICIT);
    assert_eq!(pair.implicit_text, VINCENT_IMPLICIT);
    assert_eq!(pair.backend_id, "replay");
    assert_eq!(pair.strategy_name, "periphrasis");
    assert!(validate_pair(&pair).is_ok());
}

#[test]
fn replay_misses_are_not_retryable() {
    let backend = ReplayGenerator::new(Cassette::load(&cassette_path()).unwrap());
    let err = generate_pair(&vincent_task(RhetoricalStrategy::Deduction), &backend, &GenerationOptions::default())
        .unwrap_err();
    assert!(matches!(err, SynthesisError::Backend(BackendError::NotRecorded { .. })));
    assert!(!err.is_retryable());
}

#[test]
fn mock_vincent_pair_uses_periphrasis_cue() {
    let pair = mock_generate(&vincent_task(RhetoricalStrategy::Periphrasis)).unwrap();
    assert!(pair.explicit_text.contains("television actor"));
    assert!(!pair.implicit_text.to_lowercase().contains("television actor"));
    let cues: Vec<String> = occupation_cues("television actor")[..2]
        .iter()
        .map(|c| c.replace("{e}", "Vincent Rodriguez III"))
        .collect();
    assert!(cues.iter().any(|c| pair.implicit_text.ends_with(c.as_str())), "{}", pair.implicit_text);
    assert!(validate_pair(&pair).is_ok());
    assert_eq!(pair, mock_generate(&vincent_task(RhetoricalStrategy::Periphrasis)).unwrap());
}

#[test]
fn mock_metonymy_occupation_wears_the_uniform() {
    let pair = mock_generate(&vincent_task(RhetoricalStrategy::Metonymy)).unwrap();
    assert!(pair.implicit_text.contains("Vincent Rodriguez III wears the uniform of"), "{}", pair.implicit_text);
    assert!(validate_pair(&pair).is_ok());
}

#[test]
fn mock_outputs_differ_only_in_entity_label() {
    let a = vincent_task(RhetoricalStrategy::Deduction);
    let mut b = a.clone();
    b.entity.label = "Zorbax Quillfeather".into();
    let pa = mock_generate(&a).unwrap();
    let pb = mock_generate(&b).unwrap();
    assert_ne!(pa.explicit_text, pb.explicit_text);
    assert_eq!(pa.explicit_text.replace("Vincent Rodriguez III", "Zorbax Quillfeather"), pb.explicit_text);
    assert_eq!(pa.implicit_text.replace("Vincent Rodriguez III", "Zorbax Quillfeather"), pb.implicit_text);
}

#[test]
fn mock_backend_through_prompt_matches_mock_generate() {
    let records = fetch_entities(60, 4, &snapshot(), &PropertyFilter::default(), &FetchOptions::default()).unwrap();
    let mut checked = 0;
    for (i, r) in records.iter().enumerate() {
        let Ok(hidden) = select_hidden_property(r, 17) else { continue };
        for s in RhetoricalStrategy::REGISTRY {
            let task = GenerationTask::new(hidden.clone(), s).unwrap();
            let direct = mock_generate(&task).unwrap();
            assert!(validate_pair(&direct).is_ok(), "{i} {s}: {direct:?}");
            let via = generate_pair(&task, &MockGenerator, &GenerationOptions::default()).unwrap();
            assert_eq!((&via.explicit_text, &via.implicit_text), (&direct.explicit_text, &direct.implicit_text));
            checked += 1;
        }
    }
    assert!(checked >= 150);
}

#[test]
fn date_hidden_pairs_are_valid_for_every_precision() {
    for (raw, pid, plabel) in [
        ("+1982-08-10T00:00:00Z", "P569", "date of birth"),
        ("+1982-08-00T00:00:00Z", "P569", "date of birth"),
        ("+1982-00-00T00:00:00Z", "P569", "date of birth"),
        ("+2011-01-31T00:00:00Z", "P570", "date of death"),
        ("+2011-01-00T00:00:00Z", "P570", "date of death"),
        ("+2011-00-00T00:00:00Z", "P570", "date of death"),
    ] {
        let t = Triple {
            predicate_id: PropertyId::new(pid).unwrap(),
            predicate_label: plabel.into(),
            object_value: ObjectValue::Time(WikidataTime::parse(raw).unwrap()),
            object_id: None,
            is_hidden: true,
        };
        let e = EntityRecord::new(EntityId::new("Q1").unwrap(), "Noor Vale", vec![t]);
        for s in RhetoricalStrategy::REGISTRY {
            let task = GenerationTask::new(e.clone(), s).unwrap();
            let pair = mock_generate(&task).unwrap();
            assert!(validate_pair(&pair).is_ok(), "{raw} {s}: {pair:?}");
            let via = generate_pair(&task, &MockGenerator, &GenerationOptions::default()).unwrap();
            assert_eq!(via.implicit_text, pair.implicit_text);
        }
    }
}

/// Always answers with an explicit text that omits the hidden value.
struct Stubborn {
    calls: AtomicU32,
    prompts: Mutex<Vec<String>>,
}

impl CompletionBackend for Stubborn {
    fn id(&self) -> String {
        "stubborn".into()
    }
    fn complete(&self, prompt: &str, _: &DecodingParams) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.prompts.lock().unwrap().push(prompt.to_string());
        Ok("Explicit: Vincent Rodriguez III works in entertainment.\nImplicit: Vincent Rodriguez III works in entertainment.".into())
    }
}

#[test]
fn invalid_replies_are_reasked_twice_then_fail() {
    let backend = Stubborn {
        calls: AtomicU32::new(0),
        prompts: Mutex::new(Vec::new()),
    };
    let err = generate_pair(&vincent_task(RhetoricalStrategy::Periphrasis), &backend, &GenerationOptions::default())
        .unwrap_err();
    assert_eq!(backend.calls.load(Ordering::SeqCst), 3);
    match err {
        SynthesisError::UnvalidatablePair {
            attempts,
            violations,
            last_candidate,
            ..
        } => {
            assert_eq!(attempts, 3);
            assert_eq!(violations, vec![Violation::ExplicitMissingLabel]);
            assert_eq!(last_candidate.explicit_text, "Vincent Rodriguez III works in entertainment.");
        }
        other => panic!("{other}"),
    }
    let prompts = backend.prompts.lock().unwrap();
    assert!(!prompts[0].contains("rejected"));
    assert!(prompts[1].contains("explicit-missing-label"));
}

#[test]
fn transport_failures_surface_as_retryable() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let policy = implicit_ie::RetryPolicy {
        max_attempts: 1,
        base_backoff: std::time::Duration::from_millis(1),
        min_interval: std::time::Duration::ZERO,
        timeout: std::time::Duration::from_secs(2),
    };
    let client = implicit_ie::llm::ChatClient::new(format!("http://{addr}"), "k".into(), policy);
    let err = generate_pair(&vincent_task(RhetoricalStrategy::Periphrasis), &client, &GenerationOptions::default())
        .unwrap_err();
    assert!(err.is_retryable(), "{err}");
}

#[test]
fn identical_texts_with_label_flag_only_the_implicit() {
    let mut pair = mock_generate(&vincent_task(RhetoricalStrategy::Periphrasis)).unwrap();
    pair.implicit_text = pair.explicit_text.clone();
    assert_eq!(validate_pair(&pair).violations, vec![Violation::ImplicitContainsLabel]);
    pair.explicit_text = "   ".into();
    pair.implicit_text.clear();
    assert_eq!(
        validate_pair(&pair).violations,
        vec![
            Violation::EmptyExplicit,
            Violation::EmptyImplicit,
            Violation::ExplicitMissingLabel,
            Violation::ExplicitMissingEntity,
            Violation::ImplicitMissingEntity
        ]
    );
}

#[test]
fn vincent_reference_pair_is_valid() {
    let mut pair = mock_generate(&vincent_task(RhetoricalStrategy::Periphrasis)).unwrap();
    pair.explicit_text = VINCENT_EXPLICIT.into();
    pair.implicit_text = VINCENT_IMPLICIT.into();
    assert!(validate_pair(&pair).is_ok());
}

#[test]
fn pair_json_round_trips() {
    let pair = mock_generate(&vincent_task(RhetoricalStrategy::Metonymy)).unwrap();
    let line = serde_json::to_string(&pair).unwrap();
    assert!(line.starts_with(r#"{"schema":"pair/1","#));
    assert!(line.contains(r#""generation_timestamp":"1970-01-01T00:00:00Z""#));
    assert_eq!(serde_json::from_str::<PairedDescription>(&line).unwrap(), pair);
}

#[test]
fn corpus_order_and_strategies_do_not_depend_on_concurrency() {
    let records: Vec<EntityRecord> =
        fetch_entities(30, 9, &snapshot(), &PropertyFilter::default(), &FetchOptions::default())
            .unwrap()
            .iter()
            .filter_map(|r| select_hidden_property(r, 1).ok())
            .collect();
    let run = |concurrency| {
        synthesize_corpus(
            &records,
            &MockGenerator,
            &CorpusOptions {
                concurrency,
                generation: GenerationOptions {
                    clock: implicit_ie::clock::Clock::epoch(),
                    ..Default::default()
                },
            },
        )
        .unwrap()
    };
    let a = run(1);
    let b = run(6);
    assert_eq!(a.pairs, b.pairs);
    assert!(a.failures.is_empty());
    for (i, p) in a.pairs.iter().enumerate() {
        assert_eq!(p.entity_id, records[i].entity_id);
        assert_eq!(p.strategy_name, RhetoricalStrategy::round_robin(i).name());
    }
}

#[test]
fn entities_without_hidden_fact_are_reported_not_fatal() {
    let mut records: Vec<EntityRecord> =
        fetch_entities(3, 9, &snapshot(), &PropertyFilter::default(), &FetchOptions::default()).unwrap();
    records[1] = select_hidden_property(&records[1], 2).unwrap();
    let out = synthesize_corpus(&records, &MockGenerator, &CorpusOptions::default()).unwrap();
    assert_eq!(out.pairs.len(), 1);
    assert_eq!(out.failures.len(), 2);
}

#[test]
fn mock_occupation_corpus_is_balanced_and_valid() {
    let pairs = mock_occupation_corpus(500, 3);
    assert_eq!(pairs.len(), 500);
    for label in MOCK_OCCUPATIONS {
        assert_eq!(pairs.iter().filter(|p| p.hidden_triple.object_label() == label).count(), 100);
    }
    assert!(pairs.iter().all(|p| validate_pair(p).is_ok()));
    assert_eq!(pairs, mock_occupation_corpus(500, 3));
}

/// Lowercase and squeeze whitespace one character at a time.
fn squeeze(s: &str) -> String {
    let mut out = String::new();
    let mut pending_space = false;
    for c in s.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.extend(c.to_lowercase());
        }
    }
    out
}

fn scramble(label: &str, mask: &[bool], gaps: &[usize]) -> String {
    let mut out = String::new();
    let mut word = 0;
    for (i, c) in label.chars().enumerate() {
        if c == ' ' {
            out.push_str([" ", "  ", "\t", " \n "][gaps[word % gaps.len()] % 4]);
            word += 1;
        } else if mask[i % mask.len()] {
            out.extend(c.to_uppercase());
        } else {
            out.push(c);
        }
    }
    out
}

proptest! {
    #[test]
    fn validation_agrees_with_normalized_substring_oracle(
        label_idx in 0usize..5,
        mask in proptest::collection::vec(any::<bool>(), 1..20),
        gaps in proptest::collection::vec(0usize..4, 1..4),
        in_explicit in any::<bool>(),
        in_implicit in any::<bool>(),
        prefix in "[a-z ]{0,12}",
    ) {
        let label = MOCK_OCCUPATIONS[label_idx];
        let mut pair = mock_generate(&vincent_task(RhetoricalStrategy::Periphrasis)).unwrap();
        pair.hidden_triple.object_value = ObjectValue::Item(label.to_string());
        let body = |with: bool| {
            if with {
                format!("Vincent Rodriguez III {prefix} {} works.", scramble(label, &mask, &gaps))
            } else {
                format!("Vincent Rodriguez III {prefix} works.")
            }
        };
        pair.explicit_text = body(in_explicit);
        pair.implicit_text = body(in_implicit);
        let verdict = validate_pair(&pair);
        let oracle = |t: &str| squeeze(t).contains(&squeeze(label));
        prop_assert_eq!(verdict.violations.contains(&Violation::ExplicitMissingLabel), !oracle(&pair.explicit_text));
        prop_assert_eq!(verdict.violations.contains(&Violation::ImplicitContainsLabel), oracle(&pair.implicit_text));
    }
}
