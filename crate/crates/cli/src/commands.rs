use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use semframe::cluster::{Linkage, Metric};
use semframe::corpus::{attach_annotations, parse_conllu, parse_task_jsonl, to_task_jsonl, Sentence};
use semframe::embeddings::{load_contextual_vectors, load_word_vectors};
use semframe::eval::evaluate;
use semframe::labeling::Labeling;
use semframe::pipeline::{
    self, ConfigOverrides, ModelFile, PipelineConfig, Resources, Subtask, VectorSource,
};
use semframe::Error;

#[derive(Debug, Parser)]
#[command(name = "semframe", version, about = "Unsupervised semantic frame and role induction")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a corpus and write it as task JSONL (optionally exporting gold labelings).
    Convert(ConvertArgs),
    /// Cluster verb instances into frames.
    InduceFrames(InduceArgs),
    /// Cluster highlighted arguments into generic roles.
    InduceRoles(InduceArgs),
    /// Combine frame and role labelings into frame-specific slot labels.
    Merge(MergeArgs),
    /// Run one of the trivial baseline labelers.
    Baseline(BaselineArgs),
    /// Train the supervised logistic-regression labeler.
    TrainLogreg(TrainArgs),
    /// Label instances with a trained logistic-regression model.
    PredictLogreg(PredictArgs),
    /// Score a predicted labeling against gold (Purity F1, B-Cubed F1).
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
struct ConvertArgs {
    /// Input corpus: task JSONL, or CoNLL-U (`.conllu`) together with --annotations.
    #[arg(long)]
    corpus: PathBuf,
    /// JSONL highlights (`id`, `predicate`, `slots`) for a CoNLL-U corpus.
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Output task JSONL.
    #[arg(long)]
    out: PathBuf,
    /// Write gold frame labels of verb instances (TSV).
    #[arg(long)]
    gold_frames: Option<PathBuf>,
    /// Write gold generic roles of slot instances (TSV).
    #[arg(long)]
    gold_roles: Option<PathBuf>,
    /// Write gold `<frame>.<role>` labels of slot instances (TSV).
    #[arg(long)]
    gold_slots: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VectorArgs {
    /// Word vectors in word2vec text format.
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Precomputed contextual vectors (JSONL `{"id", "vector"}`).
    #[arg(long)]
    contextual_vectors: Option<PathBuf>,
    /// Lowercase word-vector keys and lookups.
    #[arg(long)]
    lowercase: bool,
}

#[derive(Debug, Args)]
struct InduceArgs {
    /// Task JSONL corpus.
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    vectors: VectorArgs,
    /// TOML config (keys: recipe, normalize, metric, linkage, k, vectors, ...).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output labeling TSV.
    #[arg(long)]
    out: PathBuf,
    /// Number of clusters.
    #[arg(long)]
    k: Option<usize>,
    /// Distance between instance vectors.
    #[arg(long)]
    metric: Option<String>,
    /// Inter-cluster distance rule.
    #[arg(long)]
    linkage: Option<String>,
    /// Comma-separated vector blocks, e.g. `context-tfidf,word`.
    #[arg(long, value_delimiter = ',')]
    recipe: Option<Vec<String>>,
    /// L2-normalize the composed vectors.
    #[arg(long)]
    normalize: Option<bool>,
    /// Also write the full dendrogram as TSV.
    #[arg(long)]
    dendrogram: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MergeArgs {
    /// Frame labeling of verb instances (TSV).
    #[arg(long)]
    frames: PathBuf,
    /// Role labeling of slot instances (TSV); may be partial or empty.
    #[arg(long)]
    roles: PathBuf,
    /// Task JSONL corpus.
    #[arg(long)]
    corpus: PathBuf,
    /// Output labeling TSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaselineKind {
    PerVerb,
    PerDepRole,
    Boolean,
    #[value(name = "123")]
    Ordinal,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    /// Which baseline to run.
    #[arg(long, value_enum)]
    kind: BaselineKind,
    /// Task JSONL corpus.
    #[arg(long)]
    corpus: PathBuf,
    /// Output labeling TSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SubtaskArg {
    A,
    B2,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Training corpus (task JSONL).
    #[arg(long)]
    corpus: PathBuf,
    /// Gold labeling of every training instance (TSV).
    #[arg(long)]
    gold: PathBuf,
    /// Corpora whose dependency labels must be representable at prediction time.
    #[arg(long = "extra-corpus")]
    extra_corpus: Vec<PathBuf>,
    /// Which instances to label: verbs (A) or slots (B2).
    #[arg(long, value_enum, default_value = "b2")]
    subtask: SubtaskArg,
    #[command(flatten)]
    vectors: VectorArgs,
    /// TOML config (recipe, normalize, learning_rate, max_epochs, l2, tolerance, ...).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated vector blocks.
    #[arg(long, value_delimiter = ',')]
    recipe: Option<Vec<String>>,
    /// Output model JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Model JSON written by train-logreg.
    #[arg(long)]
    model: PathBuf,
    /// Corpus to label (task JSONL).
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    vectors: VectorArgs,
    /// TOML config (vector paths, weighting, block_scale).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output labeling TSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Predicted labeling (TSV).
    #[arg(long)]
    pred: PathBuf,
    /// Gold labeling (TSV).
    #[arg(long)]
    gold: PathBuf,
    /// Standard-output format.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Also write the score JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_)) => 1,
        _ if err.downcast_ref::<UsageError>().is_some() => 1,
        _ => 2,
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Convert(a) => convert(a),
        Command::InduceFrames(a) => induce(a, Subtask::A),
        Command::InduceRoles(a) => induce(a, Subtask::B2),
        Command::Merge(a) => merge(a),
        Command::Baseline(a) => baseline(a),
        Command::TrainLogreg(a) => train(a),
        Command::PredictLogreg(a) => predict(a),
        Command::Evaluate(a) => evaluate_cmd(a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| anyhow!(e.error))
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn report<T>(w: semframe::WithWarnings<T>) -> T {
    for msg in &w.warnings {
        eprintln!("warning: {msg}");
    }
    w.value
}

fn load_corpus(path: &Path) -> Result<Vec<Sentence>> {
    let text = read(path)?;
    let parsed = parse_task_jsonl(&text).with_context(|| format!("corpus {}", path.display()))?;
    Ok(report(parsed))
}

fn load_labeling(path: &Path) -> Result<Labeling> {
    Labeling::from_tsv(&read(path)?).with_context(|| format!("labeling {}", path.display()))
}

fn convert(a: ConvertArgs) -> Result<()> {
    let text = read(&a.corpus)?;
    let is_conllu = a
        .corpus
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("conllu") || e.eq_ignore_ascii_case("conll"));
    let corpus = if is_conllu {
        let ann_path = a
            .annotations
            .as_ref()
            .ok_or_else(|| usage("a CoNLL-U corpus needs --annotations"))?;
        let parsed = report(parse_conllu(&text).with_context(|| format!("corpus {}", a.corpus.display()))?);
        report(attach_annotations(parsed, &read(ann_path)?)?)
    } else {
        if a.annotations.is_some() {
            return Err(usage("--annotations only applies to CoNLL-U input"));
        }
        report(parse_task_jsonl(&text).with_context(|| format!("corpus {}", a.corpus.display()))?)
    };

    let gold = [
        (&a.gold_frames, pipeline::gold_frames(&corpus)),
        (&a.gold_roles, pipeline::gold_roles(&corpus)),
        (&a.gold_slots, pipeline::gold_slots(&corpus)),
    ];
    write_atomic(&a.out, &to_task_jsonl(&corpus))?;
    for (path, labeling) in &gold {
        if let Some(p) = path {
            write_atomic(p, &labeling.to_tsv())?;
        }
    }
    let slots: usize = corpus.iter().map(|s| s.slots.len()).sum();
    eprintln!(
        "convert: {} sentences, {slots} slots -> {}",
        corpus.len(),
        a.out.display()
    );
    Ok(())
}

/// Resolves defaults < config file < flags.
fn resolve_config(
    subtask: Subtask,
    config: Option<&Path>,
    vectors: &VectorArgs,
) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::for_subtask(subtask);
    if let Some(path) = config {
        let overrides = ConfigOverrides::from_toml(&read(path)?)
            .with_context(|| format!("config {}", path.display()))?;
        cfg = overrides.apply(cfg)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.vectors, &mut cfg.contextual_vectors].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
    if vectors.vectors.is_some() {
        cfg.vectors = vectors.vectors.clone();
    }
    if vectors.contextual_vectors.is_some() {
        cfg.contextual_vectors = vectors.contextual_vectors.clone();
    }
    if vectors.lowercase {
        cfg.lowercase = true;
    }
    Ok(cfg)
}

fn parse_recipe(items: &[String]) -> Result<Vec<VectorSource>> {
    Ok(items
        .iter()
        .map(|s| s.trim().parse::<VectorSource>())
        .collect::<Result<_, _>>()?)
}

fn load_resources(cfg: &PipelineConfig) -> Result<Resources> {
    let store = match &cfg.vectors {
        Some(p) => Some(report(
            load_word_vectors(&read(p)?, cfg.lowercase)
                .with_context(|| format!("word vectors {}", p.display()))?,
        )),
        None => None,
    };
    let contextual = match &cfg.contextual_vectors {
        Some(p) => Some(
            load_contextual_vectors(&read(p)?)
                .with_context(|| format!("contextual vectors {}", p.display()))?,
        ),
        None => None,
    };
    Ok(Resources { store, contextual })
}

fn induce(a: InduceArgs, subtask: Subtask) -> Result<()> {
    let mut cfg = resolve_config(subtask, a.config.as_deref(), &a.vectors)?;
    if let Some(k) = a.k {
        cfg.k = k;
    }
    if let Some(m) = &a.metric {
        cfg.metric = m.parse::<Metric>()?;
    }
    if let Some(l) = &a.linkage {
        cfg.linkage = l.parse::<Linkage>()?;
    }
    if let Some(r) = &a.recipe {
        cfg.recipe = parse_recipe(r)?;
    }
    if let Some(n) = a.normalize {
        cfg.normalize = n;
    }
    cfg.validate()?;

    let corpus = load_corpus(&a.corpus)?;
    let resources = load_resources(&cfg)?;
    let result = match subtask {
        Subtask::A => pipeline::run_subtask_a(&corpus, &cfg, &resources)?,
        _ => pipeline::run_subtask_b2(&corpus, &cfg, &resources)?,
    };
    write_atomic(&a.out, &result.labeling.to_tsv())?;
    if let Some(p) = &a.dendrogram {
        write_atomic(p, &result.dendrogram.to_tsv())?;
    }
    let what = if subtask == Subtask::A { "verb" } else { "slot" };
    eprintln!(
        "{}: {} {what} instances -> {} clusters ({} / {}) -> {}",
        if subtask == Subtask::A { "induce-frames" } else { "induce-roles" },
        result.labeling.len(),
        cfg.k,
        cfg.metric,
        cfg.linkage,
        a.out.display()
    );
    Ok(())
}

fn merge(a: MergeArgs) -> Result<()> {
    let frames = load_labeling(&a.frames)?;
    let roles = load_labeling(&a.roles)?;
    let corpus = load_corpus(&a.corpus)?;
    let merged = pipeline::merge_b1(&frames, &roles, &corpus)?;
    let unknown = merged
        .iter()
        .filter(|(_, l)| l.ends_with(&format!(".{}", pipeline::UNKNOWN_ROLE)))
        .count();
    write_atomic(&a.out, &merged.to_tsv())?;
    eprintln!(
        "merge: {} slots ({unknown} without a role) -> {}",
        merged.len(),
        a.out.display()
    );
    Ok(())
}

fn baseline(a: BaselineArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let labeling = match a.kind {
        BaselineKind::PerVerb => pipeline::baseline_cluster_per_verb(&corpus),
        BaselineKind::PerDepRole => pipeline::baseline_cluster_per_dep_role(&corpus),
        BaselineKind::Boolean => pipeline::baseline_boolean(&corpus),
        BaselineKind::Ordinal => pipeline::baseline_123(&corpus),
    };
    write_atomic(&a.out, &labeling.to_tsv())?;
    let clusters: std::collections::BTreeSet<&str> = labeling.iter().map(|(_, l)| l).collect();
    eprintln!(
        "baseline: {} instances, {} clusters -> {}",
        labeling.len(),
        clusters.len(),
        a.out.display()
    );
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let subtask = match a.subtask {
        SubtaskArg::A => Subtask::A,
        SubtaskArg::B2 => Subtask::B2,
    };
    let mut cfg = resolve_config(subtask, a.config.as_deref(), &a.vectors)?;
    if let Some(r) = &a.recipe {
        cfg.recipe = parse_recipe(r)?;
    }
    cfg.validate()?;
    let corpus = load_corpus(&a.corpus)?;
    let extra: Vec<Vec<Sentence>> = a
        .extra_corpus
        .iter()
        .map(|p| load_corpus(p))
        .collect::<Result<_>>()?;
    let extra_refs: Vec<&[Sentence]> = extra.iter().map(Vec::as_slice).collect();
    let gold = load_labeling(&a.gold)?;
    let resources = load_resources(&cfg)?;
    let model = pipeline::train_logreg(&corpus, &extra_refs, &gold, &cfg, &resources)?;
    write_atomic(&a.out, &model.to_json())?;
    eprintln!(
        "train-logreg: {} classes, {} features -> {}",
        model.model.classes.len(),
        model.model.dim,
        a.out.display()
    );
    Ok(())
}

fn predict(a: PredictArgs) -> Result<()> {
    let model = ModelFile::from_json(&read(&a.model)?)
        .with_context(|| format!("model {}", a.model.display()))?;
    let cfg = resolve_config(model.subtask, a.config.as_deref(), &a.vectors)?;
    let corpus = load_corpus(&a.corpus)?;
    let resources = load_resources(&cfg)?;
    let labeling = pipeline::predict_logreg(&model, &corpus, &cfg, &resources)?;
    write_atomic(&a.out, &labeling.to_tsv())?;
    eprintln!(
        "predict-logreg: {} instances -> {}",
        labeling.len(),
        a.out.display()
    );
    Ok(())
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<()> {
    let pred = load_labeling(&a.pred)?;
    let gold = load_labeling(&a.gold)?;
    if pred.is_empty() {
        bail!(Error::Data("prediction is empty".into()));
    }
    let report = evaluate(&pred, &gold)?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    if let Some(p) = &a.out {
        write_atomic(p, &json)?;
    }
    match a.format {
        Format::Json => print!("{json}"),
        Format::Table => print!("{report}"),
    }
    eprintln!(
        "evaluate: n={} purity_f1={:.4} bcubed_f1={:.4}",
        report.n, report.purity_f1, report.bcubed_f1
    );
    Ok(())
}
