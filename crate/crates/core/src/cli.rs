//! The `polarity` command line: `prepare`, `select`, `train`, `predict`,
//! `evaluate` and `synth`.
//!
//! Settings come from flags, optionally layered over a TOML config file
//! (`--config`); flags win. All randomness flows from `--seed`. Output files
//! are written to a temporary file and renamed into place.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::{train, PriorMode, SmoothingSpace, TrainOptions, TrainedModel};
use crate::corpus::{load_corpus, ClassSet, Format, LoadMode, NormalizationDict, ZwnjPolicy};
use crate::error::{Error, Result};
use crate::evaluation::{run_cv, EvalConfig};
use crate::pipeline::{FeatureConfig, Pipeline, PreparedCorpus};
use crate::selection::{
    count_contingency, rank_features, select_top_k, term_frequencies, Aggregation, Direction, Method, RankOptions,
};
use crate::stemmer::{AffixTable, Stemmer, DEFAULT_MAX_PASSES};
use crate::synth::{self, GeneratorSpec, Inflection};
use crate::tokenizer::{FeatureId, FeatureSpace};

const CACHE_FILE: &str = "prepared.json";
const CACHE_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "polarity", version, about = "Sentiment classification with feature selection and Naive Bayes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Normalize, tokenize and featurize a corpus into a cache file.
    Prepare(PipelineArgs),
    /// Rank features with one or more selectors and write the rankings.
    Select(PipelineArgs),
    /// Train a model on the whole corpus.
    Train(PipelineArgs),
    /// Label documents with a trained model.
    Predict(PredictArgs),
    /// Stratified k-fold cross-validation for each selector and budget.
    Evaluate(PipelineArgs),
    /// Generate a synthetic corpus with planted polar features.
    Synth(SynthArgs),
}

#[derive(Args, Debug, Default, Clone)]
pub struct PipelineArgs {
    /// TOML file with defaults for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// jsonl or tsv; inferred from the extension when omitted.
    #[arg(long)]
    pub format: Option<Format>,
    /// Comma-separated class labels in tie-break order.
    #[arg(long)]
    pub classes: Option<String>,
    /// join or space.
    #[arg(long)]
    pub zwnj: Option<ZwnjPolicy>,
    #[arg(long, overrides_with = "no_stem")]
    pub stem: bool,
    #[arg(long, overrides_with = "stem")]
    pub no_stem: bool,
    #[arg(long, overrides_with = "no_bigrams")]
    pub bigrams: bool,
    #[arg(long, overrides_with = "bigrams")]
    pub no_bigrams: bool,
    /// df, tfv, mi, mmi, none, or a comma-separated list; `all` means the four selectors.
    #[arg(long)]
    pub selector: Option<String>,
    /// max or mean.
    #[arg(long)]
    pub agg: Option<Aggregation>,
    /// desc or asc.
    #[arg(long)]
    pub tfv_direction: Option<Direction>,
    /// Feature budget, or a strictly increasing comma-separated sweep.
    #[arg(long)]
    pub topk: Option<String>,
    /// paper or standard.
    #[arg(long)]
    pub prior: Option<PriorMode>,
    /// selected or full.
    #[arg(long)]
    pub smooth_space: Option<SmoothingSpace>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Colloquial-form dictionary (two-column TSV).
    #[arg(long)]
    pub dict: Option<PathBuf>,
    /// Affix table (kind, surface, min_stem_length TSV).
    #[arg(long)]
    pub affixes: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Feature space the model was trained on; defaults to features.tsv next to the model.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub format: Option<Format>,
    #[arg(long)]
    pub dict: Option<PathBuf>,
    #[arg(long)]
    pub affixes: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 400)]
    pub n_docs: usize,
    #[arg(long, default_value_t = 0.5)]
    pub balance: f64,
    #[arg(long, default_value_t = 500)]
    pub vocab: usize,
    #[arg(long, default_value_t = 40)]
    pub polar: usize,
    #[arg(long, default_value_t = 8.0)]
    pub strength: f64,
    #[arg(long, default_value_t = 20)]
    pub min_len: usize,
    #[arg(long, default_value_t = 60)]
    pub max_len: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Rewrite tokens as inflected Persian-looking words with pseudo-space compounds.
    #[arg(long)]
    pub inflect: bool,
    #[arg(long, default_value_t = 0.5)]
    pub affix_rate: f64,
    #[arg(long, default_value_t = 0.15)]
    pub compound_rate: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
enum ListOrString<T> {
    List(Vec<T>),
    One(T),
    Text(String),
}

/// Contents of a `--config` file; every key is optional.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    input: Option<PathBuf>,
    format: Option<Format>,
    classes: Option<Vec<String>>,
    zwnj: Option<ZwnjPolicy>,
    stem: Option<bool>,
    bigrams: Option<bool>,
    selector: Option<ListOrString<String>>,
    agg: Option<Aggregation>,
    tfv_direction: Option<Direction>,
    topk: Option<ListOrString<usize>>,
    prior: Option<PriorMode>,
    smooth_space: Option<SmoothingSpace>,
    folds: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    dict: Option<PathBuf>,
    affixes: Option<PathBuf>,
}

/// Fully resolved settings, embedded in every report.
#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub format: Format,
    pub classes: Vec<String>,
    pub features: FeatureConfig,
    pub selectors: Vec<Option<Method>>,
    pub rank: RankOptions,
    pub top_k: Vec<usize>,
    pub train: TrainOptions,
    pub folds: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub dict: Option<PathBuf>,
    pub affixes: Option<PathBuf>,
}

fn parse_selectors(s: &str) -> Result<Vec<Option<Method>>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "all" => out.extend(Method::ALL.map(Some)),
            "none" => out.push(None),
            m => out.push(Some(m.parse()?)),
        }
    }
    if out.is_empty() {
        return Err(Error::Config("empty selector list".into()));
    }
    Ok(out)
}

fn parse_topk(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<usize>().map_err(|_| Error::Config(format!("bad feature budget `{p}`"))))
        .collect()
}

fn infer_format(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") | Some("tab") => Format::Tsv,
        _ => Format::Jsonl,
    }
}

impl PipelineArgs {
    /// Layers flags over the config file over built-in defaults.
    /// `default_selectors` differs between `evaluate` (all four) and the
    /// single-model commands.
    pub fn resolve(&self, default_selectors: &[Option<Method>]) -> Result<PipelineConfig> {
        let file: FileConfig = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let flag = |on: bool, off: bool| {
            if on {
                Some(true)
            } else if off {
                Some(false)
            } else {
                None
            }
        };

        let input = self.input.clone().or(file.input).ok_or_else(|| Error::Config("--input is required".into()))?;
        let format = self.format.or(file.format).unwrap_or_else(|| infer_format(&input));
        let classes = match (&self.classes, file.classes) {
            (Some(s), _) => s.split(',').map(|c| c.trim().to_owned()).collect(),
            (None, Some(list)) => list,
            (None, None) => ClassSet::binary().names().to_vec(),
        };
        ClassSet::new(classes.clone())?;

        let features = FeatureConfig {
            zwnj: self.zwnj.or(file.zwnj).unwrap_or_default(),
            stem: flag(self.stem, self.no_stem).or(file.stem).unwrap_or(true),
            bigrams: flag(self.bigrams, self.no_bigrams).or(file.bigrams).unwrap_or(true),
        };
        let selectors = match (&self.selector, file.selector) {
            (Some(s), _) => parse_selectors(s)?,
            (None, Some(ListOrString::Text(s) | ListOrString::One(s))) => parse_selectors(&s)?,
            (None, Some(ListOrString::List(list))) => parse_selectors(&list.join(","))?,
            (None, None) => default_selectors.to_vec(),
        };
        let top_k = match (&self.topk, file.topk) {
            (Some(s), _) => parse_topk(s)?,
            (None, Some(ListOrString::Text(s))) => parse_topk(&s)?,
            (None, Some(ListOrString::One(k))) => vec![k],
            (None, Some(ListOrString::List(list))) => list,
            (None, None) => Vec::new(),
        };
        if top_k.contains(&0) {
            return Err(Error::Config("feature budgets must be positive".into()));
        }
        if top_k.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("feature budget sweep {top_k:?} must be strictly increasing")));
        }
        let folds = self.folds.or(file.folds).unwrap_or(5);
        if folds < 2 {
            return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
        }
        Ok(PipelineConfig {
            input,
            format,
            classes,
            features,
            selectors,
            rank: RankOptions {
                aggregation: self.agg.or(file.agg).unwrap_or_default(),
                tfv_direction: self.tfv_direction.or(file.tfv_direction).unwrap_or_default(),
            },
            top_k,
            train: TrainOptions {
                prior: self.prior.or(file.prior).unwrap_or_default(),
                smoothing: self.smooth_space.or(file.smooth_space).unwrap_or_default(),
            },
            folds,
            seed: self.seed.or(file.seed).unwrap_or(0),
            out: self.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(".")),
            dict: self.dict.clone().or(file.dict),
            affixes: self.affixes.clone().or(file.affixes),
        })
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Prepare(args) => cmd_prepare(&args.resolve(&[Some(Method::Mmi)])?),
        Command::Select(args) => cmd_select(&args.resolve(&[Some(Method::Mmi)])?),
        Command::Train(args) => cmd_train(&args.resolve(&[Some(Method::Mmi)])?),
        Command::Evaluate(args) => cmd_evaluate(&args.resolve(&Method::ALL.map(Some))?),
        Command::Predict(args) => cmd_predict(&args),
        Command::Synth(args) => cmd_synth(&args),
    }
}

/// Writes through a temporary file in the destination directory, then renames.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        write(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn load_resources(dict: Option<&Path>, affixes: Option<&Path>) -> Result<(NormalizationDict, AffixTable)> {
    let dict = dict.map(NormalizationDict::load).transpose()?.unwrap_or_default();
    let table = affixes.map(AffixTable::load).transpose()?.unwrap_or_default();
    Ok((dict, table))
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    key: String,
    input_sha256: String,
    corpus: PreparedCorpus,
}

/// Where a prepared corpus came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Built,
    Rebuilt,
}

/// Loads the prepared corpus from `<out>/prepared.json` when its key matches
/// the inputs and settings, otherwise prepares it and rewrites the cache.
pub fn load_or_prepare(cfg: &PipelineConfig) -> Result<(PreparedCorpus, String, CacheStatus)> {
    let input = read_bytes(&cfg.input)?;
    let input_sha256 = sha256_hex(&input);
    let mut key_material = Vec::new();
    key_material.extend_from_slice(input_sha256.as_bytes());
    key_material
        .extend_from_slice(serde_json::to_string(&(cfg.format, &cfg.classes, cfg.features)).unwrap().as_bytes());
    for extra in [&cfg.dict, &cfg.affixes].into_iter().flatten() {
        key_material.extend_from_slice(&read_bytes(extra)?);
    }
    let key = sha256_hex(&key_material);

    let cache_path = cfg.out.join(CACHE_FILE);
    let mut status = CacheStatus::Built;
    if cache_path.exists() {
        match fs::File::open(&cache_path)
            .map_err(|e| e.to_string())
            .and_then(|f| serde_json::from_reader::<_, CacheFile>(BufReader::new(f)).map_err(|e| e.to_string()))
        {
            Ok(cache) if cache.version == CACHE_VERSION && cache.key == key => {
                return Ok((cache.corpus, input_sha256, CacheStatus::Hit));
            }
            Ok(_) => status = CacheStatus::Rebuilt,
            Err(e) => {
                eprintln!("warning: ignoring unreadable cache {}: {e}", cache_path.display());
                status = CacheStatus::Rebuilt;
            }
        }
    }

    let classes = ClassSet::new(cfg.classes.clone())?;
    let text =
        String::from_utf8(input).map_err(|_| Error::Data(format!("{} is not valid UTF-8", cfg.input.display())))?;
    let corpus =
        crate::corpus::parse_corpus(&text, &cfg.input.display().to_string(), cfg.format, &classes, LoadMode::Train)?;
    let (dict, table) = load_resources(cfg.dict.as_deref(), cfg.affixes.as_deref())?;
    let pipeline = Pipeline::new(cfg.features, &dict, Stemmer::new(table, DEFAULT_MAX_PASSES)?);
    let prepared = pipeline.prepare(&corpus);
    let cache = CacheFile { version: CACHE_VERSION, key, input_sha256: input_sha256.clone(), corpus: prepared };
    write_atomic(&cache_path, |w| serde_json::to_writer(w, &cache).map_err(std::io::Error::other))?;
    Ok((cache.corpus, input_sha256, status))
}

fn write_space(cfg: &PipelineConfig, space: &FeatureSpace) -> Result<PathBuf> {
    let path = cfg.out.join("features.tsv");
    write_atomic(&path, |w| space.write_tsv(w))?;
    Ok(path)
}

pub fn cmd_prepare(cfg: &PipelineConfig) -> Result<()> {
    let (prepared, _, status) = load_or_prepare(cfg)?;
    let space = prepared.feature_space(None)?;
    write_space(cfg, &space)?;
    let how = match status {
        CacheStatus::Hit => "cache hit",
        CacheStatus::Built => "prepared",
        CacheStatus::Rebuilt => "cache refreshed",
    };
    println!("{how}: {} documents, {} features -> {}", prepared.len(), space.len(), cfg.out.join(CACHE_FILE).display());
    Ok(())
}

pub fn cmd_select(cfg: &PipelineConfig) -> Result<()> {
    let (prepared, _, _) = load_or_prepare(cfg)?;
    let set = prepared.training_set(None)?;
    write_space(cfg, &set.space)?;
    let counts = count_contingency(&set)?;
    let tfs = term_frequencies(&set);
    for method in cfg.selectors.iter().flatten() {
        let ranking = rank_features(&counts, &tfs, *method, cfg.rank)?;
        let path = cfg.out.join(format!("ranking_{method}.tsv"));
        write_atomic(&path, |w| ranking.write_tsv(&set.space, w))?;
        if !ranking.degenerate.is_empty() {
            eprintln!("note: {} features have degenerate {method} scores (scored 0)", ranking.degenerate.len());
        }
        println!("{method}: ranked {} features -> {}", ranking.order.len(), path.display());
    }
    Ok(())
}

pub fn cmd_train(cfg: &PipelineConfig) -> Result<()> {
    let (prepared, _, _) = load_or_prepare(cfg)?;
    let set = prepared.training_set(None)?;
    let selector = cfg.selectors.first().copied().flatten();
    let selected: Vec<FeatureId> = match (selector, cfg.top_k.first()) {
        (Some(method), k) => {
            let ranking = rank_features(&count_contingency(&set)?, &term_frequencies(&set), method, cfg.rank)?;
            select_top_k(&ranking, k.copied().unwrap_or(set.space.len()))?
        }
        (None, _) => set.space.ids().collect(),
    };
    let model = train(&set, &selected, cfg.train)?;
    write_space(cfg, &set.space)?;
    let path = cfg.out.join("model.tsv");
    write_atomic(&path, |w| model.write(w, &cfg.features, &set.space))?;
    println!(
        "trained on {} documents with {} of {} features ({}) -> {}",
        set.docs.len(),
        selected.len(),
        set.space.len(),
        selector.map_or("none".to_owned(), |m| m.to_string()),
        path.display()
    );
    Ok(())
}

pub fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let features_path = match &args.features {
        Some(p) => p.clone(),
        None => args.model.parent().unwrap_or(Path::new(".")).join("features.tsv"),
    };
    let space_file = fs::File::open(&features_path).map_err(|e| Error::io(&features_path, e))?;
    let space = FeatureSpace::read_tsv(BufReader::new(space_file), &features_path.display().to_string())?;
    let model_file = fs::File::open(&args.model).map_err(|e| Error::io(&args.model, e))?;
    let (model, features) = TrainedModel::read(BufReader::new(model_file), &args.model.display().to_string(), &space)?;

    let format = args.format.unwrap_or_else(|| infer_format(&args.input));
    let corpus = load_corpus(&args.input, format, model.classes(), LoadMode::Predict)?;
    let (dict, table) = load_resources(args.dict.as_deref(), args.affixes.as_deref())?;
    let pipeline = Pipeline::new(features, &dict, Stemmer::new(table, DEFAULT_MAX_PASSES)?);

    let docs = corpus.documents();
    let predictions = crate::par::map(docs, |d| model.classify(&space, &pipeline.features(&d.text)));
    let path = args.out.join("predictions.tsv");
    write_atomic(&path, |w| {
        for (d, p) in docs.iter().zip(&predictions) {
            write!(w, "{}\t{}", d.id, model.classes().name(p.class))?;
            for s in &p.scores {
                write!(w, "\t{s:.6}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    println!("labeled {} documents -> {}", docs.len(), path.display());
    Ok(())
}

fn report_stem(selector: Option<Method>, k: Option<usize>) -> String {
    let sel = selector.map_or_else(|| "none".to_owned(), |m| m.to_string());
    match k {
        Some(k) => format!("report_{sel}_k{k}"),
        None => format!("report_{sel}"),
    }
}

/// Runs cross-validation for every (selector, budget) pair and writes one
/// JSON and one text report per pair. Returns the report paths.
pub fn cmd_evaluate(cfg: &PipelineConfig) -> Result<()> {
    evaluate_reports(cfg).map(|_| ())
}

pub fn evaluate_reports(cfg: &PipelineConfig) -> Result<Vec<PathBuf>> {
    let (prepared, input_sha256, _) = load_or_prepare(cfg)?;
    let mut runs: Vec<(Option<Method>, Option<usize>)> = Vec::new();
    for &sel in &cfg.selectors {
        match sel {
            Some(_) if !cfg.top_k.is_empty() => runs.extend(cfg.top_k.iter().map(|&k| (sel, Some(k)))),
            _ => runs.push((sel, None)),
        }
    }
    let mut paths = Vec::new();
    for (selector, top_k) in runs {
        let eval = EvalConfig { selector, rank: cfg.rank, top_k, train: cfg.train, folds: cfg.folds, seed: cfg.seed };
        let report = run_cv(&prepared, &eval)?;
        let doc = serde_json::json!({
            "input": { "path": cfg.input, "sha256": input_sha256 },
            "resolved_config": cfg,
            "report": report.to_json(),
        });
        let stem = report_stem(selector, top_k);
        let json_path = cfg.out.join(format!("{stem}.json"));
        write_atomic(&json_path, |w| {
            serde_json::to_writer_pretty(&mut *w, &doc).map_err(std::io::Error::other)?;
            writeln!(w)
        })?;
        let table = report.to_table();
        write_atomic(&cfg.out.join(format!("{stem}.txt")), |w| w.write_all(table.as_bytes()))?;
        if let Some(k) = top_k {
            println!("k = {k}");
        }
        print!("{table}");
        println!();
        paths.push(json_path);
    }
    Ok(paths)
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let spec = GeneratorSpec {
        n_docs: args.n_docs,
        class_balance: args.balance,
        vocab_size: args.vocab,
        n_polar_features: args.polar,
        polarity_strength: args.strength,
        doc_length: (args.min_len, args.max_len),
        seed: args.seed,
    };
    let (mut corpus, planted) = synth::generate(&spec)?;
    if args.inflect {
        let inflection = Inflection { affix_rate: args.affix_rate, compound_rate: args.compound_rate, seed: args.seed };
        if !(0.0..=1.0).contains(&inflection.affix_rate) || !(0.0..=1.0).contains(&inflection.compound_rate) {
            return Err(Error::Config("affix and compound rates must lie in [0, 1]".into()));
        }
        corpus = synth::inflect(&corpus, &inflection)?;
    }
    let corpus_path = args.out.join("corpus.jsonl");
    write_atomic(&corpus_path, |w| synth::write_jsonl(&corpus, w))?;
    write_atomic(&args.out.join("ground_truth.tsv"), |w| synth::write_ground_truth(&planted, corpus.classes(), w))?;
    println!("{} documents, {} planted features -> {}", corpus.total(), planted.len(), corpus_path.display());
    Ok(())
}
