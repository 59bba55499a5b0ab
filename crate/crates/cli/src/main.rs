//! `implicit-ie`: one subcommand per pipeline stage, plus `pipeline` for
//! the whole chain.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use implicit_ie::experiment::{run_experiment, Dataset, ExperimentMode, ExternalTrainer, LexicalTrainer, Trainer};
use implicit_ie::ingest::EntityRecord;
use implicit_ie::jsonl;
use implicit_ie::pipeline::{
    self, run_pipeline, stages, write_report, BackendKind, FinetuneCorpus, PipelineConfig, SourceKind,
    TrainerKind,
};
use implicit_ie::qa::AnswerRecord;
use implicit_ie::synthesis::{mock_occupation_corpus, PairedDescription};

const DEFAULT_RUN_DIR: &str = "run";

#[derive(Parser, Debug)]
#[command(name = "implicit-ie", version, about = "Build and evaluate paired explicit/implicit biography corpora")]
struct Cli {
    /// Pipeline configuration (TOML). Flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file for single-stage commands, run directory otherwise.
    /// An existing directory gets the stage's usual file name.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Backend {
    Mock,
    Remote,
    Replay,
}

impl From<Backend> for BackendKind {
    fn from(b: Backend) -> Self {
        match b {
            Backend::Mock => BackendKind::Mock,
            Backend::Remote => BackendKind::Remote,
            Backend::Replay => BackendKind::Replay,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TrainerArg {
    Mock,
    External,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fetch Human entities and mark one hidden fact each.
    Ingest {
        #[arg(long)]
        count: Option<usize>,
        /// Read from this snapshot directory instead of the bundled one.
        #[arg(long, conflicts_with = "offline_cache")]
        snapshot: Option<PathBuf>,
        /// Fetch live through an on-disk cache; cached entities never hit the network.
        #[arg(long)]
        offline_cache: Option<PathBuf>,
    },
    /// Generate an explicit and an implicit description per entity.
    Synthesize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        backend: Option<Backend>,
        #[arg(long)]
        cassette: Option<PathBuf>,
    },
    /// Ask the QA backend for the hidden fact under both conditions.
    Evaluate {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, value_enum)]
        backend: Option<Backend>,
        #[arg(long)]
        cassette: Option<PathBuf>,
        /// `baseline` or `adapter:NAME`.
        #[arg(long)]
        metric: Option<String>,
    },
    /// Wilcoxon signed-rank comparison of explicit and implicit scores.
    Stats {
        #[arg(long)]
        answers: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        /// Metric id the answers were scored with.
        #[arg(long)]
        metric: Option<String>,
    },
    /// Occupation classification for one cell or the whole matrix.
    Finetune {
        /// Pairs to train on; a balanced mock occupation corpus when omitted.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// ee, ii, bi-e, bi-i, ei, ablation or matrix.
        #[arg(long, default_value = "matrix")]
        mode: String,
        #[arg(long, value_enum)]
        trainer: Option<TrainerArg>,
        /// Runner command for the external trainer.
        #[arg(long)]
        command: Option<String>,
        #[arg(long)]
        profile: Option<String>,
    },
    /// Render report.md and report.json from a run directory.
    Report,
    /// Run every configured stage, skipping those already up to date.
    Pipeline,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_RUN_DIR))
}

/// Where a single-stage command writes its main file.
fn out_file(cli: &Cli, default_name: &str) -> Result<PathBuf> {
    let path = match &cli.out {
        Some(p) if p.is_dir() => p.join(default_name),
        Some(p) => p.clone(),
        None => Path::new(DEFAULT_RUN_DIR).join(default_name),
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(path)
}

fn reading(path: &Path) -> String {
    format!("reading {}", path.display())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let mut cfg = load_config(&cli)?;
    match &cli.command {
        Command::Ingest { count, snapshot, offline_cache } => {
            if let Some(n) = count {
                cfg.ingest.count = *n;
            }
            if let Some(dir) = snapshot {
                cfg.ingest.source = SourceKind::Snapshot;
                cfg.ingest.snapshot = Some(dir.clone());
            }
            if let Some(dir) = offline_cache {
                cfg.ingest.source = SourceKind::Cached;
                cfg.ingest.cache_dir = Some(dir.clone());
            }
            cfg.validate()?;
            let out = out_file(&cli, "entities.jsonl")?;
            let r = stages::ingest(&cfg.ingest, cfg.seed)?;
            if !r.dropped.is_empty() {
                log::warn!("{} entities had no hideable property: {}", r.dropped.len(), r.dropped.join(", "));
            }
            jsonl::write(&out, &r.records)?;
            println!("{} entities -> {}", r.records.len(), out.display());
        }
        Command::Synthesize { input, backend, cassette } => {
            if let Some(b) = backend {
                cfg.synthesis.backend = (*b).into();
            }
            if cassette.is_some() {
                cfg.synthesis.cassette = cassette.clone();
            }
            cfg.validate()?;
            let out = out_file(&cli, "pairs.jsonl")?;
            let entities: Vec<EntityRecord> = jsonl::read(input).with_context(|| reading(input))?;
            let r = stages::synthesize(&entities, &cfg.synthesis, cfg.clock())?;
            jsonl::write(&out, &r.pairs)?;
            let failures = out.with_file_name(format!(
                "{}_failures.jsonl",
                out.file_stem().unwrap_or_default().to_string_lossy()
            ));
            jsonl::write(&failures, &r.failures)?;
            println!("{} pairs, {} failures -> {}", r.pairs.len(), r.failures.len(), out.display());
        }
        Command::Evaluate { pairs, backend, cassette, metric } => {
            if let Some(b) = backend {
                cfg.evaluation.backend = (*b).into();
            }
            if cassette.is_some() {
                cfg.evaluation.cassette = cassette.clone();
            }
            if let Some(m) = metric {
                cfg.evaluation.metric = m.clone();
            }
            cfg.validate()?;
            let out = out_file(&cli, "answers.jsonl")?;
            let pairs: Vec<PairedDescription> = jsonl::read(pairs).with_context(|| reading(pairs))?;
            let answers = stages::evaluate(&pairs, &cfg.evaluation)?;
            jsonl::write(&out, &answers)?;
            println!("{} answers -> {}", answers.len(), out.display());
        }
        Command::Stats { answers, alpha, metric } => {
            if let Some(a) = alpha {
                cfg.stats.compare.alpha = *a;
            }
            if let Some(m) = metric {
                cfg.evaluation.metric = m.clone();
            }
            cfg.validate()?;
            let out = out_file(&cli, "stats.json")?;
            let records: Vec<AnswerRecord> = jsonl::read(answers).with_context(|| reading(answers))?;
            let report = stages::stats(&records, &cfg.stats, &cfg.evaluation.metric)?;
            let md = out.with_extension("md");
            jsonl::write_json(&out, &report)?;
            jsonl::write_atomic(&md, report.to_markdown().as_bytes())?;
            print!("{}", report.to_markdown());
        }
        Command::Finetune { corpus, mode, trainer, command, profile } => {
            if let Some(t) = trainer {
                cfg.finetune.trainer = match t {
                    TrainerArg::Mock => TrainerKind::Mock,
                    TrainerArg::External => TrainerKind::External,
                };
            }
            if command.is_some() {
                cfg.finetune.command = command.clone();
            }
            if let Some(p) = profile {
                cfg.finetune.experiment.model_profile = p.clone();
            }
            cfg.validate()?;
            let pairs = match corpus {
                Some(path) => jsonl::read(path).with_context(|| reading(path))?,
                None => match cfg.finetune.corpus {
                    FinetuneCorpus::MockOccupations { size } => mock_occupation_corpus(size, cfg.seed),
                    FinetuneCorpus::Synthesized => bail!("finetune.corpus = synthesized needs --corpus"),
                },
            };
            let out = run_dir(&cli);
            if mode == "matrix" {
                let m = stages::finetune(&pairs, &cfg.finetune, cfg.seed, &out, cfg.clock())?;
                print!("{}", m.markdown);
            } else {
                let mode: ExperimentMode = mode.parse()?;
                let mut exp = cfg.finetune.experiment.clone();
                exp.seed = cfg.seed;
                let data = Dataset::from_pairs(&pairs, exp.top_k)?;
                let cell_dir = out.join(mode.code());
                let mut trainer: Box<dyn Trainer> = match (cfg.finetune.trainer, &cfg.finetune.command) {
                    (TrainerKind::External, Some(cmd)) => Box::new(ExternalTrainer::new(
                        cmd.clone(),
                        exp.model_profile.clone(),
                        cell_dir.join("runner"),
                    )),
                    _ => Box::new(LexicalTrainer::default()),
                };
                let r = run_experiment(&data, mode, trainer.as_mut(), &exp, Some(&cell_dir), cfg.clock())?;
                println!(
                    "{}: accuracy {:.3}, balanced accuracy {:.3}, macro F1 {:.3} (n_test {}) -> {}",
                    mode.row_label(),
                    r.report.accuracy,
                    r.report.balanced_accuracy,
                    r.report.f1_macro,
                    r.n_test,
                    cell_dir.display()
                );
            }
        }
        Command::Report => {
            let out = run_dir(&cli);
            let r = write_report(&out)?;
            print!("{}", r.to_markdown());
        }
        Command::Pipeline => {
            let out = run_dir(&cli);
            let outcome = run_pipeline(&cfg, &out)?;
            for (stage, status) in &outcome.stages {
                let word = match status {
                    pipeline::StageStatus::Ran => "ran",
                    pipeline::StageStatus::Skipped => "skipped",
                };
                println!("{stage}: {word}");
            }
        }
    }
    Ok(())
}
