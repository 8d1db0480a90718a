//! The `stylm` command line: ingest, train, generate, eval-ce, eval-bleu and
//! report. Every command that writes to an output directory also writes a
//! `run.ini` holding the effective configuration, seeds and corpus hash.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::corpus::{self, build_vocab, ingest, join_tokens, preprocess, split_corpus, Corpus, CorpusFormat};
use crate::error::{Error, Result};
use crate::eval::{
    build_report, BaselineMode, ComparisonSpec, ContinuationConfig, ModelGenerator, RandomBaseline, ReportConfig,
    TextGenerator,
};
use crate::model::{self, load_checkpoint, save_checkpoint, GenConfig, ModelConfig, StylizedLM, TrainConfig, Variant};
use crate::ngram::SampleCeConfig;
use crate::numerics::AdamConfig;
use crate::phonetics::{load_rules, G2PRuleSet};

pub const EXIT_GENERIC: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_CONTRACT: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "stylm",
    version,
    about = "Author-conditioned LSTM language models for stylized text"
)]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a JSON Lines corpus into the binary corpus cache.
    Ingest(IngestArgs),
    /// Train a model; writes model.stylm, loss.csv and run.ini.
    Train(TrainArgs),
    /// Sample text from a checkpoint to stdout.
    Generate(GenerateArgs),
    /// Sample cross-entropy matrix of a checkpoint against corpus authors.
    EvalCe(EvalCeArgs),
    /// Quatrain-continuation BLEU of a checkpoint or a random baseline.
    EvalBleu(EvalBleuArgs),
    /// Combined BLEU / sample cross-entropy report over several checkpoints.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Corpus in JSON Lines form.
    #[arg(long)]
    pub input: PathBuf,
    /// Destination cache file.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Default)]
pub struct TrainArgs {
    /// INI file of key = value pairs; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Separate validation corpus; otherwise a split of the training corpus.
    #[arg(long)]
    pub validation: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// full, author_only or vanilla.
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Repeated `key=value` overrides for any config key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub author: String,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    /// Stop after this many lines.
    #[arg(long)]
    pub lines: Option<usize>,
    /// A line of text to continue from.
    #[arg(long)]
    pub seed_line: Option<String>,
    #[arg(long, default_value_t = 200)]
    pub max_tokens: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the text and run.ini here.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalCeArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Corpus the author samples are drawn from.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Comma-separated authors; all corpus authors by default.
    #[arg(long, value_delimiter = ',')]
    pub authors: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long, default_value_t = 500)]
    pub words_per_sample: usize,
    #[arg(long, default_value_t = 20)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Leave out the uniform and weighted random rows.
    #[arg(long)]
    pub no_baselines: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalBleuArgs {
    /// Model to evaluate; required unless --baseline is given.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Validation corpus of quatrains.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Evaluate a random baseline (uniform or weighted) instead of a model.
    #[arg(long)]
    pub baseline: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long)]
    pub max_items: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Repeated `label=path` checkpoints.
    #[arg(long = "checkpoint", value_name = "LABEL=PATH", required = true)]
    pub checkpoints: Vec<String>,
    /// Corpus for author samples (sample cross-entropy).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Validation corpus for continuation BLEU; defaults to --corpus.
    #[arg(long)]
    pub validation: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub authors: Vec<String>,
    /// Add uniform and weighted random rows.
    #[arg(long)]
    pub baselines: bool,
    /// Also compute the sample cross-entropy matrix.
    #[arg(long)]
    pub sample_ce: bool,
    /// `single_label,full_label,author`: compare a single-author model with a
    /// corpus-wide model conditioned on that author.
    #[arg(long, value_name = "SINGLE,FULL,AUTHOR")]
    pub compare: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long)]
    pub max_items: Option<usize>,
    #[arg(long, default_value_t = 500)]
    pub words_per_sample: usize,
    #[arg(long, default_value_t = 20)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Known keys with their defaults; an empty default means "unset".
const KEYS: &[(&str, &str)] = &[
    ("corpus", ""),
    ("validation", ""),
    ("output", "run"),
    ("seed", "0"),
    ("variant", "full"),
    ("rules", "auto"),
    ("min_count", "1"),
    ("validation_fraction", "0.1"),
    ("epochs", "10"),
    ("batch_size", "16"),
    ("bptt", "64"),
    ("lr", "0.001"),
    ("beta1", "0.9"),
    ("beta2", "0.999"),
    ("adam_eps", "1e-8"),
    ("clip_norm", "5"),
    ("d_word", "384"),
    ("d_char_bi", "128"),
    ("d_phon_bi", "128"),
    ("d_doc_proj", "512"),
    ("d_state", "512"),
    ("d_author_emb", "64"),
    ("d_doc_emb", "64"),
    ("d_char_emb", "16"),
    ("d_phon_emb", "16"),
];

/// Flat `key = value` configuration: file first, then flag overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            values: KEYS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

impl RunConfig {
    /// Parses INI text. `#` and `;` start comments and `[section]` lines are
    /// ignored; every key must be known.
    pub fn parse(text: &str, name: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') || line.starts_with('[') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                file: name.to_string(),
                line: i + 1,
                message: format!("expected key = value, got {line:?}"),
            })?;
            cfg.set(k.trim(), v.trim()).map_err(|e| Error::Parse {
                file: name.to_string(),
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.into();
                Ok(())
            }
            None => Err(Error::Config(format!("unknown config key {key:?}"))),
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self
            .raw(key)
            .ok_or_else(|| Error::Config(format!("config key {key:?} is not set")))?;
        raw.parse()
            .map_err(|e| Error::Config(format!("config key {key:?}: cannot parse {raw:?}: {e}")))
    }

    pub fn to_ini(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn model_config(&self) -> Result<ModelConfig> {
        Ok(ModelConfig {
            d_word: self.get("d_word")?,
            d_char_bi: self.get("d_char_bi")?,
            d_phon_bi: self.get("d_phon_bi")?,
            d_doc_proj: self.get("d_doc_proj")?,
            d_state: self.get("d_state")?,
            d_author_emb: self.get("d_author_emb")?,
            d_doc_emb: self.get("d_doc_emb")?,
            d_char_emb: self.get("d_char_emb")?,
            d_phon_emb: self.get("d_phon_emb")?,
            vocab_size: 0,
            author_count: 0,
            variant: self.get::<Variant>("variant")?,
        })
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        Ok(TrainConfig {
            epochs: self.get("epochs")?,
            batch_size: self.get("batch_size")?,
            bptt: self.get("bptt")?,
            adam: AdamConfig {
                lr: self.get("lr")?,
                beta1: self.get("beta1")?,
                beta2: self.get("beta2")?,
                eps: self.get("adam_eps")?,
                clip_norm: self.get("clip_norm")?,
            },
            seed: self.get("seed")?,
        })
    }
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } | Error::Checkpoint(_) => EXIT_IO,
        Error::NonFinite(_) => EXIT_NUMERIC,
        Error::Contract(_) | Error::Insufficient(_) => EXIT_CONTRACT,
        Error::Config(_) => EXIT_USAGE,
        Error::Decode(_) | Error::Parse { .. } | Error::Shape(_) => EXIT_GENERIC,
    }
}

pub fn parse_args<I, T>(argv: I) -> std::result::Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(argv)
}

/// Parses `argv`, runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match parse_args(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Train(a) => cmd_train(a),
        Command::Generate(a) => cmd_generate(a),
        Command::EvalCe(a) => cmd_eval_ce(a),
        Command::EvalBleu(a) => cmd_eval_bleu(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn load_corpus(path: &Path) -> Result<Corpus> {
    ingest(path, CorpusFormat::from_path(path))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `run.ini`: the given settings followed by the corpus hash.
fn write_run_ini(dir: &Path, settings: &[(&str, String)], corpus: Option<&Corpus>) -> Result<()> {
    let mut out = String::new();
    for (k, v) in settings {
        out.push_str(&format!("{k} = {v}\n"));
    }
    if let Some(c) = corpus {
        out.push_str(&format!("corpus_hash = {}\n", c.content_hash()));
    }
    write_file(&dir.join("run.ini"), out)
}

fn cmd_ingest(a: IngestArgs) -> Result<()> {
    let corpus = ingest(&a.input, CorpusFormat::JsonLines)?;
    corpus::write_cache(&corpus, &a.output)?;
    log::info!("wrote {} documents to {}", corpus.len(), a.output.display());
    Ok(())
}

fn rules_for(cfg: &RunConfig, corpus: &Corpus) -> Result<G2PRuleSet> {
    match cfg.raw("rules").unwrap_or("auto") {
        "auto" => Ok(G2PRuleSet::for_language(&corpus.language)),
        "english" => Ok(G2PRuleSet::english()),
        "russian" => Ok(G2PRuleSet::russian()),
        path => load_rules(path),
    }
}

/// Effective training configuration after applying the flag overrides.
pub fn train_run_config(a: &TrainArgs) -> Result<RunConfig> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let paths = [
        ("corpus", &a.corpus),
        ("validation", &a.validation),
        ("output", &a.output),
    ];
    for (k, v) in paths {
        if let Some(p) = v {
            cfg.set(k, p.display().to_string())?;
        }
    }
    if let Some(s) = a.seed {
        cfg.set("seed", s.to_string())?;
    }
    if let Some(e) = a.epochs {
        cfg.set("epochs", e.to_string())?;
    }
    if let Some(v) = &a.variant {
        cfg.set("variant", v.clone())?;
    }
    if let Some(lr) = a.lr {
        cfg.set("lr", lr.to_string())?;
    }
    for kv in &a.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg)
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let cfg = train_run_config(&a)?;
    let corpus_path: PathBuf = cfg.get::<String>("corpus")?.into();
    let output: PathBuf = cfg.get::<String>("output")?.into();
    let corpus = load_corpus(&corpus_path)?;
    let hyper = cfg.train_config()?;
    let (train, validation) = match cfg.raw("validation") {
        Some(p) => (corpus.clone(), Some(load_corpus(Path::new(p))?)),
        None => {
            let frac: f64 = cfg.get("validation_fraction")?;
            if frac > 0.0 && corpus.len() >= 2 {
                let (t, v) = split_corpus(&corpus, frac, hyper.seed)?;
                (t, Some(v))
            } else {
                (corpus.clone(), None)
            }
        }
    };
    let vocab = build_vocab(&train, cfg.get("min_count")?);
    let g2p = rules_for(&cfg, &train)?;
    let (model, trace) = model::train_model(&train, validation.as_ref(), vocab, g2p, &cfg.model_config()?, &hyper)?;
    create_dir(&output)?;
    save_checkpoint(&model, output.join("model.stylm"))?;
    write_file(&output.join("loss.csv"), trace.to_csv())?;
    let mut ini = cfg.to_ini();
    ini.push_str(&format!("corpus_hash = {}\n", corpus.content_hash()));
    write_file(&output.join("run.ini"), ini)?;
    if let Some(last) = trace.last() {
        println!(
            "trained {} epochs: train {:.4} nats/token{}",
            last.epoch,
            last.train_nll,
            last.validation_nll
                .map(|v| format!(", validation {v:.4}"))
                .unwrap_or_default()
        );
    }
    Ok(())
}

fn require_checkpoint(path: &Option<PathBuf>) -> Result<StylizedLM> {
    let p = path
        .as_ref()
        .ok_or_else(|| Error::Config("--checkpoint is required".into()))?;
    load_checkpoint(p)
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let model = require_checkpoint(&a.checkpoint)?;
    let seed_line = a.seed_line.as_deref().map(|s| {
        let mut t = preprocess(s);
        t.push(corpus::EOL.to_string());
        t
    });
    let gen = GenConfig {
        temperature: a.temperature,
        max_tokens: a.max_tokens,
        rng_seed: a.seed,
        stop_after_lines: a.lines,
    };
    let tokens = model.generate(&a.author, seed_line.as_deref(), &gen)?;
    let text = join_tokens(&tokens);
    println!("{}", text.trim_end_matches('\n'));
    if let Some(dir) = &a.output {
        create_dir(dir)?;
        write_file(&dir.join("generated.txt"), format!("{text}\n"))?;
        write_run_ini(
            dir,
            &[
                (
                    "checkpoint",
                    a.checkpoint
                        .as_ref()
                        .map(|p| p.display().to_string())
                        .unwrap_or_default(),
                ),
                ("author", a.author.clone()),
                ("temperature", a.temperature.to_string()),
                ("lines", a.lines.map(|l| l.to_string()).unwrap_or_default()),
                ("seed_line", a.seed_line.clone().unwrap_or_default()),
                ("max_tokens", a.max_tokens.to_string()),
                ("seed", a.seed.to_string()),
            ],
            None,
        )?;
    }
    Ok(())
}

fn gen_config(temperature: f64) -> GenConfig {
    GenConfig {
        temperature,
        ..GenConfig::default()
    }
}

fn authors_or_all(authors: &[String], corpus: &Corpus) -> Vec<String> {
    if authors.is_empty() {
        corpus.author_ids()
    } else {
        authors.to_vec()
    }
}

fn cmd_eval_ce(a: EvalCeArgs) -> Result<()> {
    let model = load_checkpoint(&a.checkpoint)?;
    let corpus = load_corpus(&a.corpus)?;
    let authors = authors_or_all(&a.authors, &corpus);
    let cfg = SampleCeConfig {
        order: a.order,
        words_per_sample: a.words_per_sample,
        n_samples: a.n_samples,
        seed: a.seed,
    };
    let label = a
        .checkpoint
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let model_gen = ModelGenerator::new(label, &model, gen_config(a.temperature));
    let uniform = RandomBaseline::for_corpus(BaselineMode::Uniform, model.vocab().clone(), &corpus);
    let weighted = RandomBaseline::for_corpus(BaselineMode::Weighted, model.vocab().clone(), &corpus);
    let mut gens: Vec<&dyn TextGenerator> = Vec::new();
    if !a.no_baselines {
        gens.push(&uniform);
        gens.push(&weighted);
    }
    gens.push(&model_gen);
    let report = crate::eval::sample_ce_matrix(&gens, &corpus, &authors, &cfg)?;
    print!("{}", report.to_table());
    if let Some(dir) = &a.output {
        create_dir(dir)?;
        write_file(&dir.join("sample_ce.csv"), report.to_csv())?;
        write_run_ini(
            dir,
            &[
                ("checkpoint", a.checkpoint.display().to_string()),
                ("corpus", a.corpus.display().to_string()),
                ("authors", authors.join(",")),
                ("order", a.order.to_string()),
                ("words_per_sample", a.words_per_sample.to_string()),
                ("n_samples", a.n_samples.to_string()),
                ("temperature", a.temperature.to_string()),
                ("seed", a.seed.to_string()),
                ("baselines", (!a.no_baselines).to_string()),
            ],
            Some(&corpus),
        )?;
    }
    Ok(())
}

fn cmd_eval_bleu(a: EvalBleuArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let model = match &a.checkpoint {
        Some(p) => Some(load_checkpoint(p)?),
        None => None,
    };
    let baseline = match &a.baseline {
        Some(mode) => {
            let mode: BaselineMode = mode.parse()?;
            let vocab = match &model {
                Some(m) => m.vocab().clone(),
                None => build_vocab(&corpus, 1),
            };
            Some(RandomBaseline::for_corpus(mode, vocab, &corpus))
        }
        None => None,
    };
    let model_gen = model.as_ref().map(|m| {
        let label = a
            .checkpoint
            .as_ref()
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        ModelGenerator::new(label, m, gen_config(a.temperature))
    });
    let generator: &dyn TextGenerator = match (&baseline, &model_gen) {
        (Some(b), _) => b,
        (None, Some(m)) => m,
        (None, None) => return Err(Error::Config("eval-bleu needs --checkpoint or --baseline".into())),
    };
    let authors = corpus.author_ids();
    let cfg = ReportConfig {
        continuation: ContinuationConfig {
            max_items: a.max_items,
            seed: a.seed,
            ..ContinuationConfig::default()
        },
        include_mixed: true,
        ..ReportConfig::default()
    };
    let report = build_report(&[generator], &corpus, &corpus, &authors, &cfg)?;
    print!("{}", report.to_table());
    if let Some(dir) = &a.output {
        create_dir(dir)?;
        write_file(&dir.join("bleu.csv"), report.to_csv())?;
        write_run_ini(
            dir,
            &[
                (
                    "checkpoint",
                    a.checkpoint
                        .as_ref()
                        .map(|p| p.display().to_string())
                        .unwrap_or_default(),
                ),
                ("corpus", a.corpus.display().to_string()),
                ("baseline", a.baseline.clone().unwrap_or_default()),
                ("temperature", a.temperature.to_string()),
                ("max_items", a.max_items.map(|m| m.to_string()).unwrap_or_default()),
                ("seed", a.seed.to_string()),
            ],
            Some(&corpus),
        )?;
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let validation = match &a.validation {
        Some(p) => load_corpus(p)?,
        None => corpus.clone(),
    };
    let mut models = Vec::new();
    for spec in &a.checkpoints {
        let (label, path) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--checkpoint expects LABEL=PATH, got {spec:?}")))?;
        models.push((label.to_string(), load_checkpoint(path)?));
    }
    let model_gens: Vec<ModelGenerator> = models
        .iter()
        .map(|(l, m)| ModelGenerator::new(l.clone(), m, gen_config(a.temperature)))
        .collect();
    let vocab = models[0].1.vocab().clone();
    let uniform = RandomBaseline::for_corpus(BaselineMode::Uniform, vocab.clone(), &corpus);
    let weighted = RandomBaseline::for_corpus(BaselineMode::Weighted, vocab, &corpus);
    let mut gens: Vec<&dyn TextGenerator> = Vec::new();
    if a.baselines {
        gens.push(&uniform);
        gens.push(&weighted);
    }
    gens.extend(model_gens.iter().map(|g| g as &dyn TextGenerator));
    let comparison = match &a.compare {
        Some(spec) => {
            let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
            let [single, full, author] = parts[..] else {
                return Err(Error::Config(format!(
                    "--compare expects SINGLE,FULL,AUTHOR, got {spec:?}"
                )));
            };
            let index = |label: &str| {
                gens.iter()
                    .position(|g| g.label() == label)
                    .ok_or_else(|| Error::Config(format!("--compare: no checkpoint labelled {label:?}")))
            };
            Some(ComparisonSpec {
                single_author: index(single)?,
                full_corpus: index(full)?,
                author: author.to_string(),
            })
        }
        None => None,
    };
    let authors = authors_or_all(&a.authors, &corpus);
    let cfg = ReportConfig {
        continuation: ContinuationConfig {
            max_items: a.max_items,
            seed: a.seed,
            ..ContinuationConfig::default()
        },
        include_mixed: true,
        sample_ce: a.sample_ce.then_some(SampleCeConfig {
            order: 3,
            words_per_sample: a.words_per_sample,
            n_samples: a.n_samples,
            seed: a.seed,
        }),
        comparison,
    };
    let report = build_report(&gens, &corpus, &validation, &authors, &cfg)?;
    print!("{}", report.to_table());
    if let Some(ce) = &report.sample_ce {
        println!();
        print!("{}", ce.to_table());
    }
    if let Some(c) = &report.comparison {
        println!();
        print!("{}", c.to_table());
    }
    if let Some(dir) = &a.output {
        create_dir(dir)?;
        write_file(&dir.join("report.csv"), report.to_csv())?;
        if let Some(ce) = &report.sample_ce {
            write_file(&dir.join("sample_ce.csv"), ce.to_csv())?;
        }
        if let Some(c) = &report.comparison {
            write_file(&dir.join("comparison.txt"), c.to_table())?;
        }
        write_run_ini(
            dir,
            &[
                ("checkpoints", a.checkpoints.join(",")),
                ("corpus", a.corpus.display().to_string()),
                (
                    "validation",
                    a.validation
                        .as_ref()
                        .map(|p| p.display().to_string())
                        .unwrap_or_default(),
                ),
                ("authors", authors.join(",")),
                ("baselines", a.baselines.to_string()),
                ("sample_ce", a.sample_ce.to_string()),
                ("compare", a.compare.clone().unwrap_or_default()),
                ("temperature", a.temperature.to_string()),
                ("max_items", a.max_items.map(|m| m.to_string()).unwrap_or_default()),
                ("words_per_sample", a.words_per_sample.to_string()),
                ("n_samples", a.n_samples.to_string()),
                ("seed", a.seed.to_string()),
            ],
            Some(&corpus),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn train_flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let ini = dir.path().join("run.ini");
        fs::write(&ini, "[train]\nseed = 3\nepochs = 2\n").unwrap();
        let cli = parse_args(["stylm", "train", "--config", ini.to_str().unwrap(), "--seed", "7"]).unwrap();
        let Command::Train(args) = cli.command else {
            panic!("not train")
        };
        let cfg = train_run_config(&args).unwrap();
        assert_eq!(cfg.get::<u64>("seed").unwrap(), 7);
        assert_eq!(cfg.get::<usize>("epochs").unwrap(), 2);
    }

    #[test]
    fn unknown_config_key_is_an_error() {
        let err = RunConfig::parse("sede = 1\n", "x.ini").unwrap_err();
        assert!(err.to_string().contains("sede"), "{err}");
    }

    #[test]
    fn generate_flags() {
        let cli = parse_args([
            "stylm",
            "generate",
            "--author",
            "poe",
            "--temperature",
            "0.8",
            "--lines",
            "4",
        ])
        .unwrap();
        let Command::Generate(g) = cli.command else {
            panic!("not generate")
        };
        assert_eq!(g.author, "poe");
        assert_eq!(g.temperature, 0.8);
        assert_eq!(g.lines, Some(4));
    }

    #[test]
    fn bogus_subcommand_is_usage_error() {
        let err = parse_args(["stylm", "bogus"]).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_USAGE);
        assert_eq!(run(["stylm", "bogus"]), EXIT_USAGE);
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            exit_code(&Error::io("x", std::io::Error::other("x"))),
            exit_code(&Error::NonFinite("x".into())),
            exit_code(&Error::contract("x")),
            exit_code(&Error::Config("x".into())),
            exit_code(&Error::Shape("x".into())),
        ];
        assert_eq!(codes, [EXIT_IO, EXIT_NUMERIC, EXIT_CONTRACT, EXIT_USAGE, EXIT_GENERIC]);
    }
}
