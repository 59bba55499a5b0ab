use std::collections::{BTreeMap, BTreeSet};

use implicit_ie::clock::Clock;
use implicit_ie::experiment::*;
use implicit_ie::fixtures_dir;
use implicit_ie::ingest::ObjectValue;
use implicit_ie::qa::Condition;
use implicit_ie::synthesis::{mock_occupation_corpus, PairedDescription, MOCK_OCCUPATIONS};
use proptest::prelude::*;

fn corpus(n: usize) -> Vec<PairedDescription> {
    mock_occupation_corpus(n, 0)
}

fn dataset(n: usize) -> Dataset {
    Dataset::from_pairs(&corpus(n), 5).unwrap()
}

fn relabel(pair: &PairedDescription, label: &str) -> PairedDescription {
    let mut p = pair.clone();
    p.hidden_triple.object_value = ObjectValue::Item(label.to_string());
    p
}

fn lexical(_: ExperimentMode) -> Box<dyn Trainer> {
    Box::new(LexicalTrainer::default())
}

#[test]
fn mock_corpus_keeps_the_five_occupations() {
    // the five labels dominate; rarer occupations fall outside the top 5
    let base = corpus(500);
    let mut pairs = base.clone();
    pairs.extend(base[..40].iter().map(|p| relabel(p, "singer")));
    pairs.extend(base[40..70].iter().map(|p| relabel(p, "painter")));
    let (labels, examples) = build_subset(&pairs, 5).unwrap();
    let got: BTreeSet<&str> = labels.labels.iter().map(String::as_str).collect();
    assert_eq!(got, MOCK_OCCUPATIONS.into_iter().collect());
    assert_eq!(examples.len(), 1000);
    assert_eq!(examples[0].condition, Condition::Explicit);
    assert_eq!(examples[1].condition, Condition::Implicit);
    assert_eq!(examples[0].entity_id, examples[1].entity_id);
}

#[test]
fn subset_preconditions() {
    let pairs = corpus(20);
    assert!(matches!(build_subset(&pairs, 1), Err(ExperimentError::InvalidK(1))));
    assert!(matches!(
        build_subset(&pairs, 6),
        Err(ExperimentError::NotEnoughLabels { wanted: 6, found: 5 })
    ));
    assert!(matches!(build_subset(&[], 2), Err(ExperimentError::NoOccupationPairs)));
}

proptest! {
    #[test]
    fn top_k_matches_sort_oracle(counts in prop::collection::vec(1usize..12, 3..9), k in 2usize..4) {
        let base = corpus(1);
        // reverse order so ties cannot be settled by insertion order
        let names: Vec<String> = (0..counts.len()).rev().map(|i| format!("job{i}")).collect();
        let pairs: Vec<PairedDescription> = names
            .iter()
            .zip(&counts)
            .flat_map(|(name, &c)| std::iter::repeat_n(relabel(&base[0], name), c))
            .collect();
        let (labels, _) = build_subset(&pairs, k).unwrap();
        let mut oracle: Vec<(usize, &String)> = counts.iter().copied().zip(&names).collect();
        oracle.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));
        let want: Vec<String> = oracle.into_iter().take(k).map(|(_, n)| n.clone()).collect();
        prop_assert_eq!(labels.labels, want);
    }
}

#[test]
fn cross_condition_split_is_pure_and_disjoint() {
    let data = dataset(200);
    let (train, test) = build_splits(&data.examples, ExperimentMode::Ei, 0.8, 3).unwrap();
    assert!(train.iter().all(|e| e.condition == Condition::Explicit));
    assert!(test.iter().all(|e| e.condition == Condition::Implicit));
    let a: BTreeSet<&str> = train.iter().map(|e| e.entity_id.as_str()).collect();
    let b: BTreeSet<&str> = test.iter().map(|e| e.entity_id.as_str()).collect();
    assert!(a.is_disjoint(&b));
}

#[test]
fn hundred_entities_split_eighty_twenty() {
    // unbalanced labels: 35, 25, 20, 12, 8
    let base = corpus(100);
    let sizes = [35, 25, 20, 12, 8];
    let mut pairs = Vec::new();
    let mut i = 0;
    for (label, n) in MOCK_OCCUPATIONS.iter().zip(sizes) {
        for _ in 0..n {
            pairs.push(relabel(&base[i], label));
            i += 1;
        }
    }
    let data = Dataset::from_pairs(&pairs, 5).unwrap();
    let split = split_entities(&data.examples, 0.8, 11).unwrap();
    assert_eq!((split.train.len(), split.test.len()), (80, 20));
    let label_of: BTreeMap<&str, &str> = data.examples.iter().map(|e| (e.entity_id.as_str(), e.label.as_str())).collect();
    for (label, n) in MOCK_OCCUPATIONS.iter().zip(sizes) {
        let in_train = split.train.iter().filter(|id| label_of[id.as_str()] == *label).count() as f64;
        assert!((in_train - n as f64 * 0.8).abs() <= 1.0, "{label}: {in_train} of {n}");
    }
}

#[test]
fn both_conditions_double_the_training_set() {
    let data = dataset(100);
    let split = split_entities(&data.examples, 0.8, 5).unwrap();
    let (train, test) = build_splits(&data.examples, ExperimentMode::BiI, 0.8, 5).unwrap();
    assert_eq!(train.len(), 2 * split.train.len());
    assert_eq!(test.len(), split.test.len());
    assert!(test.iter().all(|e| e.condition == Condition::Implicit));
}

#[test]
fn splits_never_share_entities() {
    let data = dataset(100);
    for seed in 0..100 {
        let split = split_entities(&data.examples, 0.8, seed).unwrap();
        assert!(split.train.is_disjoint(&split.test));
        for mode in ExperimentMode::TABLE {
            let (train, test) = build_splits(&data.examples, mode, 0.8, seed).unwrap();
            assert!(train.iter().all(|e| split.train.contains(&e.entity_id)));
            assert!(test.iter().all(|e| split.test.contains(&e.entity_id)));
        }
    }
}

#[test]
fn tiny_stratum_is_named() {
    let base = corpus(21);
    let mut pairs: Vec<PairedDescription> =
        (0..20).map(|i| relabel(&base[i], MOCK_OCCUPATIONS[i % 5])).collect();
    pairs.push(relabel(&base[20], "poet"));
    let (labels, examples) = build_subset(&pairs, 6).unwrap();
    assert!(labels.contains("poet"));
    match split_entities(&examples, 0.8, 0) {
        Err(ExperimentError::SplitTooSmall { label, entities: 1 }) => assert_eq!(label, "poet"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(split_entities(&examples, 1.0, 0), Err(ExperimentError::InvalidRatio(_))));
}

#[test]
fn missing_condition_is_rejected() {
    let data = dataset(50);
    let explicit_only: Vec<ClassificationExample> =
        data.examples.into_iter().filter(|e| e.condition == Condition::Explicit).collect();
    assert!(matches!(
        build_splits(&explicit_only, ExperimentMode::Ee, 0.8, 0),
        Err(ExperimentError::MissingCondition(Condition::Implicit))
    ));
}

#[test]
fn lora_profiles() {
    let llama = model_profile("llama-3.2-1b").unwrap();
    let deepseek = model_profile("deepseek-r1-distill-qwen-1.5b").unwrap();
    let phi = model_profile("phi-1_5").unwrap();
    assert_eq!((llama.lora.rank, llama.lora.epochs), (128, 3));
    assert_eq!((deepseek.lora.rank, deepseek.lora.epochs), (128, 3));
    assert_eq!((phi.lora.rank, phi.lora.epochs), (256, 6));
    for p in [&llama, &deepseek, &phi] {
        assert_eq!(p.lora.alpha, 64);
        assert_eq!(p.lora.dropout, 0.15);
        assert_eq!(p.lora.learning_rate, 3e-5);
        assert_eq!(p.lora.target_modules.len(), 7);
    }
    assert!(matches!(model_profile("gpt-2"), Err(ExperimentError::UnknownProfile(_))));
}

#[test]
fn modes_parse_and_label_rows() {
    for m in ExperimentMode::TABLE {
        assert_eq!(m.code().parse::<ExperimentMode>().unwrap(), m);
    }
    assert_eq!("ablation".parse::<ExperimentMode>().unwrap(), ExperimentMode::Ablation);
    assert!("matrix".parse::<ExperimentMode>().is_err());
    assert_eq!(ExperimentMode::Ei.row_label(), "Train explicit, test implicit");
}

#[test]
fn same_cell_twice_gives_identical_reports() {
    let data = dataset(200);
    let cfg = ExperimentConfig { seed: 4, ..Default::default() };
    let run = || {
        let mut t = LexicalTrainer::default();
        let r = run_experiment(&data, ExperimentMode::Ei, &mut t, &cfg, None, Clock::epoch()).unwrap();
        serde_json::to_string(&r).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn implicit_training_beats_cross_condition_transfer() {
    let data = dataset(500);
    let cfg = ExperimentConfig::default();
    let mut acc = BTreeMap::new();
    for mode in [ExperimentMode::Ii, ExperimentMode::Ei, ExperimentMode::BiI] {
        let mut t = LexicalTrainer::default();
        let r = run_experiment(&data, mode, &mut t, &cfg, None, Clock::epoch()).unwrap();
        acc.insert(mode.code(), r.report.accuracy);
    }
    assert!(acc["ii"] > acc["ei"], "{acc:?}");
    assert!(acc["bi-i"] >= acc["ei"], "{acc:?}");
}

#[test]
fn untrained_cell_is_near_chance() {
    let data = dataset(500);
    let mut t = LexicalTrainer::default();
    let r = run_experiment(&data, ExperimentMode::Ablation, &mut t, &ExperimentConfig::default(), None, Clock::epoch()).unwrap();
    assert_eq!(r.n_train, 0);
    assert_eq!(r.n_test, 100);
    assert!((0.12..=0.35).contains(&r.report.accuracy), "{}", r.report.accuracy);
}

#[test]
fn matrix_rows_follow_table_order() {
    let data = dataset(200);
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { ablation: false, ..Default::default() };
    let out = run_matrix(&data, &cfg, &lexical, Some(dir.path()), Clock::epoch()).unwrap();
    let rows: Vec<&str> = out.reports.iter().map(|r| r.report.mode.as_str()).collect();
    assert_eq!(
        rows,
        [
            "Train and test explicit",
            "Train and test implicit",
            "Train explicit implicit, test explicit",
            "Train explicit implicit, test implicit",
            "Train explicit, test implicit",
        ]
    );
    let md_rows: Vec<&str> = out
        .markdown
        .lines()
        .filter(|l| l.starts_with("| Train"))
        .map(|l| l.split(" | ").next().unwrap().trim_start_matches("| "))
        .collect();
    assert_eq!(md_rows, rows);
    for code in ["ee", "ii", "bi-e", "bi-i", "ei"] {
        for f in ["manifest.json", "report.json", "predictions.jsonl"] {
            assert!(dir.path().join(code).join(f).exists(), "{code}/{f}");
        }
    }
    assert!(dir.path().join("matrix.md").exists());

    let with_ablation = run_matrix(&data, &ExperimentConfig::default(), &lexical, None, Clock::epoch()).unwrap();
    assert_eq!(with_ablation.reports.len(), 6);
    assert_eq!(with_ablation.reports[5].cell, ExperimentMode::Ablation);
}

#[test]
fn manifests_differ_only_in_seed_derived_fields() {
    let data = dataset(100);
    let read = |seed: u64| {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig { seed, ablation: false, ..Default::default() };
        run_matrix(&data, &cfg, &lexical, Some(dir.path()), Clock::epoch()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("ei/manifest.json")).unwrap();
        serde_json::from_str::<serde_json::Map<String, serde_json::Value>>(&text).unwrap()
    };
    let (a, b) = (read(1), read(2));
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    let differing: BTreeSet<&str> = a.keys().filter(|k| a[*k] != b[*k]).map(String::as_str).collect();
    let seed_derived: BTreeSet<&str> =
        ["seed", "config_hash", "train_entities_digest", "test_entities_digest", "report_digest"].into();
    assert!(differing.is_subset(&seed_derived), "{differing:?}");
    assert!(differing.contains("seed"));
}

struct Broken;

impl Trainer for Broken {
    fn id(&self) -> String {
        "broken".into()
    }
    fn init(&mut self, _: &LabelSet, _: &LoRAConfig, _: u64) -> Result<(), TrainError> {
        Ok(())
    }
    fn fit(&mut self, _: &[String], _: &[String]) -> Result<(), TrainError> {
        Err(TrainError::Runner("out of memory".into()))
    }
    fn predict(&mut self, _: &[String]) -> Result<Vec<String>, TrainError> {
        unreachable!()
    }
}

#[test]
fn failed_cell_keeps_the_others() {
    let data = dataset(100);
    let dir = tempfile::tempdir().unwrap();
    let factory = |mode: ExperimentMode| -> Box<dyn Trainer> {
        if mode == ExperimentMode::Ei {
            Box::new(Broken)
        } else {
            Box::new(LexicalTrainer::default())
        }
    };
    let cfg = ExperimentConfig { ablation: false, ..Default::default() };
    match run_matrix(&data, &cfg, &factory, Some(dir.path()), Clock::epoch()) {
        Err(ExperimentError::Matrix { failed, completed }) => {
            assert_eq!(failed.len(), 1);
            assert!(failed[0].starts_with("ei:"));
            assert_eq!(completed, ["ee", "ii", "bi-e", "bi-i"]);
        }
        other => panic!("{other:?}"),
    }
    assert!(dir.path().join("ee/report.json").exists());
    let manifest: CellManifest =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ei/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.status, CellStatus::Failed);
    assert!(manifest.error.unwrap().contains("out of memory"));
    assert!(!dir.path().join("ei/report.json").exists());
}

#[test]
fn external_runner_gets_the_job_spec() {
    let data = dataset(50);
    let dir = tempfile::tempdir().unwrap();
    let runner = fixtures_dir().join("experiment/first_label_runner.sh");
    let mut t = ExternalTrainer::new(format!("sh {}", runner.display()), "phi-1_5", dir.path());
    let cfg = ExperimentConfig { model_profile: "phi-1_5".into(), ..Default::default() };
    let r = run_experiment(&data, ExperimentMode::Ii, &mut t, &cfg, None, Clock::epoch()).unwrap();
    assert_eq!(r.trainer_id, "external:phi-1_5");
    assert_eq!(r.lora.trainable_fraction, Some(0.068));
    // every prediction is the first label
    let first = &data.labels.labels[0];
    assert_eq!(r.report.per_class.iter().find(|c| &c.label == first).unwrap().recall, 1.0);

    let job: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("job.json")).unwrap()).unwrap();
    assert_eq!(job["model_profile"], "phi-1_5");
    assert_eq!(job["lora"]["r"], 256);
    assert_eq!(job["lora"]["alpha"], 64);
    assert_eq!(job["lora"]["dropout"], 0.15);
    assert_eq!(job["lora"]["lr"], 3e-5);
    assert_eq!(job["lora"]["epochs"], 6);
    assert_eq!(
        job["lora"]["target_modules"],
        serde_json::json!([
            "self_attn.q_proj",
            "self_attn.k_proj",
            "self_attn.v_proj",
            "self_attn.o_proj",
            "mlp.gate_proj",
            "mlp.up_proj",
            "mlp.down_proj"
        ])
    );
    assert!(job["train_path"].as_str().unwrap().ends_with("train.jsonl"));
    assert!(job["test_path"].as_str().unwrap().ends_with("test.jsonl"));
    let train_lines = std::fs::read_to_string(dir.path().join("train.jsonl")).unwrap().lines().count();
    assert_eq!(train_lines, r.n_train);
}

#[test]
fn failing_runner_is_a_trainer_error() {
    let data = dataset(50);
    let dir = tempfile::tempdir().unwrap();
    let mut t = ExternalTrainer::new("exit 3; true", "llama-3.2-1b", dir.path());
    let err = run_experiment(&data, ExperimentMode::Ee, &mut t, &ExperimentConfig::default(), None, Clock::epoch()).unwrap_err();
    assert!(matches!(err, ExperimentError::Trainer { ref cell, source: TrainError::Runner(_) } if cell == "ee"), "{err}");
}
