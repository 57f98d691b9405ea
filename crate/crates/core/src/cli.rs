//! Command-line front end: `ingest`, `cluster`, `train`, `evaluate`,
//! `sweep` and `gen-synthetic`.
//!
//! Settings are resolved in order: built-in defaults or `--preset`, then
//! `--config`, then `--set key=value` overrides, then the dedicated flags.
//! Every run writes `manifest.toml` next to its outputs; passing it back as
//! `--config` repeats the run.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::affinity::{build_correlation_table, build_similarity_table, SimNorm, SimilarityMode};
use crate::baselines::{FactorScorer, PopScorer, Scorer, UcfScorer};
use crate::checkpoint;
use crate::clustering::{cmeans, kmeans, memberships_tsv, normalized_profiles, parse_memberships_tsv, Algorithm, ClusterModel};
use crate::config::Config;
use crate::corpus::{load_friendships, load_interactions, Delimiter, ScalarMode};
use crate::error::{Error, Result};
use crate::evaluator::{evaluate, sweep, sweep_tsv, SweepParam};
use crate::experiment::{Experiment, Method};
use crate::factorizer::{train, UpdateMode};
use crate::store::StoredCorpus;
use crate::synthetic::generate;

#[derive(Debug, Parser)]
#[command(name = "softrec", version, about = "Tag-aware social recommender")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML config file (a previous run's manifest works too).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Built-in settings: compare, beta-sweep, alpha-sweep,
    /// dim-sweep, synthetic.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Override any config key, e.g. `--set train.beta=0.1`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, prune and split a corpus into a corpus directory.
    Ingest(IngestArgs),
    /// Cluster users by tag profile.
    Cluster(ClusterArgs),
    /// Train a factor model and write a checkpoint.
    Train(TrainArgs),
    /// Score a checkpoint or a baseline on the held-out items.
    Evaluate(EvaluateArgs),
    /// Retrain over a grid of one parameter.
    Sweep(SweepArgs),
    /// Write a synthetic clustered corpus.
    GenSynthetic(GenArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// `user item tag` records.
    #[arg(long)]
    pub interactions: Option<PathBuf>,
    /// Friend pairs or `group:` lines.
    #[arg(long)]
    pub friendships: Option<PathBuf>,
    #[arg(long)]
    pub delimiter: Option<Delimiter>,
    #[arg(long)]
    pub min_items: Option<usize>,
    #[arg(long)]
    pub require_friends: Option<bool>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CorpusArg {
    /// Corpus directory written by `ingest`.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub corpus: CorpusArg,
    #[arg(long)]
    pub algorithm: Option<Algorithm>,
    #[arg(long)]
    pub clusters: Option<usize>,
    #[arg(long)]
    pub fuzzifier: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainFlags {
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub lambda_user: Option<f64>,
    #[arg(long)]
    pub lambda_item: Option<f64>,
    #[arg(long)]
    pub latent_dim: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub conv_tol: Option<f64>,
    #[arg(long)]
    pub scalar_mode: Option<ScalarMode>,
    #[arg(long)]
    pub update_mode: Option<UpdateMode>,
    #[arg(long)]
    pub unobserved_weight: Option<f64>,
    /// Same-cluster weight of the hard similarity.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub sim_norm: Option<SimNorm>,
    #[arg(long)]
    pub clusters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub corpus: CorpusArg,
    /// soreg, rsbosn or frsbosn.
    #[arg(long)]
    pub method: Option<Method>,
    /// Memberships TSV from `cluster`, used instead of reclustering.
    #[arg(long)]
    pub memberships: Option<PathBuf>,
    /// Also write the similarity and correlation tables.
    #[arg(long)]
    pub dump_tables: bool,
    #[command(flatten)]
    pub train: TrainFlags,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub corpus: CorpusArg,
    /// Factor checkpoint from `train`; without it `--method` is built here.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub method: Option<Method>,
    /// Comma-separated cutoffs.
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    #[arg(long)]
    pub neighbors: Option<usize>,
    #[command(flatten)]
    pub train: TrainFlags,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// alpha, beta or latent_dim.
    pub param: Option<SweepParam>,
    #[command(flatten)]
    pub corpus: CorpusArg,
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    #[command(flatten)]
    pub train: TrainFlags,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub users_per_cluster: Option<usize>,
    #[arg(long)]
    pub items_per_cluster: Option<usize>,
    #[arg(long)]
    pub overlap: Option<f64>,
    #[arg(long)]
    pub between_fraction: Option<f64>,
    #[arg(long)]
    pub tags_per_item: Option<usize>,
    #[arg(long)]
    pub items_per_user: Option<usize>,
    #[arg(long)]
    pub friends_per_user: Option<usize>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Cluster(_) => "cluster",
            Command::Train(_) => "train",
            Command::Evaluate(_) => "evaluate",
            Command::Sweep(_) => "sweep",
            Command::GenSynthetic(_) => "gen-synthetic",
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl TrainFlags {
    fn apply(&self, cfg: &mut Config) {
        let t = &mut cfg.train;
        set(&mut t.learning_rate, self.learning_rate);
        set(&mut t.alpha, self.alpha);
        set(&mut t.beta, self.beta);
        set(&mut t.lambda_user, self.lambda_user);
        set(&mut t.lambda_item, self.lambda_item);
        set(&mut t.latent_dim, self.latent_dim);
        set(&mut t.max_iter, self.max_iter);
        set(&mut t.conv_tol, self.conv_tol);
        set(&mut t.scalar_mode, self.scalar_mode);
        set(&mut t.update_mode, self.update_mode);
        set(&mut t.unobserved_weight, self.unobserved_weight);
        set(&mut cfg.similarity.lambda, self.lambda);
        set(&mut cfg.similarity.sim_norm, self.sim_norm);
        set(&mut cfg.cluster.clusters, self.clusters);
    }
}

/// Applies `key=value` overrides; values are parsed as TOML, falling back to
/// a bare string.
pub fn apply_overrides(cfg: &Config, overrides: &[String]) -> Result<Config> {
    if overrides.is_empty() {
        return Ok(cfg.clone());
    }
    let mut table = toml::Table::try_from(cfg).map_err(|e| Error::config("config", e.to_string()))?;
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Error::config(item.clone(), "expected KEY=VALUE"))?;
        let key = key.trim();
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_owned()));
        let mut parts: Vec<&str> = key.split('.').collect();
        let leaf = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| Error::config(key, "empty key"))?;
        let mut node = &mut table;
        for part in parts {
            node = node
                .entry(part.to_owned())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| Error::config(key, format!("`{part}` is not a section")))?;
        }
        node.insert(leaf.to_owned(), value);
    }
    Config::parse(&toml::to_string(&table).map_err(|e| Error::config("config", e.to_string()))?)
}

/// Resolves the effective config for `cli`.
pub fn resolve_config(cli: &Cli) -> Result<Config> {
    let c = &cli.common;
    let mut cfg = match (&c.config, &c.preset) {
        (Some(path), None) => Config::load(path)?,
        (None, Some(name)) => Config::preset(name)?,
        (None, None) => Config::default(),
        (Some(_), Some(_)) => return Err(Error::config("preset", "use either --config or --preset, not both")),
    };
    cfg.manifest = None;
    cfg = apply_overrides(&cfg, &c.overrides)?;
    set(&mut cfg.seed, c.seed);
    match &cli.command {
        Command::Ingest(a) => {
            set(&mut cfg.inputs.interactions, a.interactions.clone().map(Some));
            set(&mut cfg.inputs.friendships, a.friendships.clone().map(Some));
            set(&mut cfg.corpus.delimiter, a.delimiter);
            set(&mut cfg.corpus.min_items, a.min_items);
            set(&mut cfg.corpus.require_friends, a.require_friends);
            set(&mut cfg.corpus.test_fraction, a.test_fraction);
        }
        Command::Cluster(a) => {
            set(&mut cfg.inputs.corpus, a.corpus.corpus.clone().map(Some));
            set(&mut cfg.cluster.algorithm, a.algorithm);
            set(&mut cfg.cluster.clusters, a.clusters);
            set(&mut cfg.cluster.fuzzifier, a.fuzzifier);
        }
        Command::Train(a) => {
            set(&mut cfg.inputs.corpus, a.corpus.corpus.clone().map(Some));
            set(&mut cfg.inputs.clusters, a.memberships.clone().map(Some));
            set(&mut cfg.eval.method, a.method);
            cfg.similarity.dump_tables |= a.dump_tables;
            a.train.apply(&mut cfg);
        }
        Command::Evaluate(a) => {
            set(&mut cfg.inputs.corpus, a.corpus.corpus.clone().map(Some));
            set(&mut cfg.inputs.checkpoint, a.checkpoint.clone().map(Some));
            set(&mut cfg.eval.method, a.method);
            set(&mut cfg.eval.ks, a.ks.clone());
            set(&mut cfg.eval.neighbors, a.neighbors);
            a.train.apply(&mut cfg);
        }
        Command::Sweep(a) => {
            set(&mut cfg.inputs.corpus, a.corpus.corpus.clone().map(Some));
            set(&mut cfg.sweep.param, a.param.map(Some));
            set(&mut cfg.sweep.values, a.values.clone());
            set(&mut cfg.sweep.methods, a.methods.clone());
            set(&mut cfg.eval.ks, a.ks.clone());
            a.train.apply(&mut cfg);
        }
        Command::GenSynthetic(a) => {
            let s = &mut cfg.synthetic;
            set(&mut s.users_per_cluster, a.users_per_cluster);
            set(&mut s.items_per_cluster, a.items_per_cluster);
            set(&mut s.overlap, a.overlap);
            set(&mut s.between_fraction, a.between_fraction);
            set(&mut s.tags_per_item, a.tags_per_item);
            set(&mut s.items_per_user, a.items_per_user);
            set(&mut s.friends_per_user, a.friends_per_user);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn require(path: &Option<PathBuf>, key: &str) -> Result<PathBuf> {
    let path = path
        .clone()
        .ok_or_else(|| Error::config(key, "no path given (flag or config key)"))?;
    fs::metadata(&path).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn write_file(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

struct Run<'a> {
    command: &'static str,
    cfg: Config,
    out_dir: &'a Path,
    inputs: Vec<(String, String)>,
    outputs: Vec<String>,
}

impl Run<'_> {
    fn output(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        write_file(self.out_dir, name, contents)?;
        self.outputs.push(name.to_owned());
        Ok(())
    }

    fn corpus(&mut self) -> Result<StoredCorpus> {
        let dir = require(&self.cfg.inputs.corpus, "inputs.corpus")?;
        let corpus = StoredCorpus::read(&dir)?;
        self.inputs.push((dir.display().to_string(), hex::encode(corpus.checksum())));
        Ok(corpus)
    }

    fn manifest(&self, started: Instant) -> Result<String> {
        let mut table = toml::Table::try_from(&self.cfg).map_err(|e| Error::config("config", e.to_string()))?;
        let mut meta = toml::Table::new();
        meta.insert("command".into(), self.command.into());
        meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        meta.insert("seed".into(), toml::Value::Integer(self.cfg.seed as i64));
        meta.insert("wall_time_secs".into(), started.elapsed().as_secs_f64().into());
        let inputs: toml::Table = self.inputs.iter().map(|(k, v)| (k.clone(), v.as_str().into())).collect();
        meta.insert("input_checksums".into(), inputs.into());
        meta.insert(
            "outputs".into(),
            toml::Value::Array(self.outputs.iter().map(|o| o.as_str().into()).collect()),
        );
        table.insert("manifest".into(), meta.into());
        toml::to_string(&table).map_err(|e| Error::config("config", e.to_string()))
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    let started = Instant::now();
    let cfg = resolve_config(cli)?;
    let out_dir = cli.common.out_dir.as_path();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut run = Run {
        command: cli.command.name(),
        cfg,
        out_dir,
        inputs: Vec::new(),
        outputs: Vec::new(),
    };
    match &cli.command {
        Command::Ingest(_) => ingest(&mut run)?,
        Command::Cluster(_) => cluster(&mut run)?,
        Command::Train(_) => train_cmd(&mut run)?,
        Command::Evaluate(_) => evaluate_cmd(&mut run)?,
        Command::Sweep(_) => sweep_cmd(&mut run)?,
        Command::GenSynthetic(_) => gen_synthetic(&mut run)?,
    }
    let manifest = run.manifest(started)?;
    write_file(out_dir, "manifest.toml", manifest)?;
    Ok(())
}

fn ingest(run: &mut Run<'_>) -> Result<()> {
    let interactions = require(&run.cfg.inputs.interactions, "inputs.interactions")?;
    let friendships = require(&run.cfg.inputs.friendships, "inputs.friendships")?;
    for path in [&interactions, &friendships] {
        run.inputs.push((path.display().to_string(), sha256_file(path)?));
    }
    let c = run.cfg.corpus.clone();
    let loaded = load_interactions(&interactions, c.delimiter)?;
    let graph = load_friendships(&friendships, &loaded.users, c.delimiter)?;
    let stored = StoredCorpus::build(&loaded, &graph, c.min_items, c.require_friends, c.test_fraction, run.cfg.seed)?;
    stored.write(run.out_dir)?;
    for (name, _) in stored.files() {
        run.outputs.push(name.to_owned());
    }
    run.output("checksum.txt", format!("{}\n", hex::encode(stored.checksum())))
}

fn cluster_model(cfg: &Config, corpus: &StoredCorpus, algorithm: Algorithm) -> Result<ClusterModel> {
    let profiles = normalized_profiles(&corpus.split.train);
    let c = &cfg.cluster;
    match algorithm {
        Algorithm::KMeans => kmeans(&profiles, c.clusters, c.max_iter, c.tol, cfg.seed),
        Algorithm::CMeans => cmeans(&profiles, c.clusters, c.fuzzifier, c.max_iter, c.tol, cfg.seed),
    }
}

fn cluster(run: &mut Run<'_>) -> Result<()> {
    let corpus = run.corpus()?;
    let model = cluster_model(&run.cfg, &corpus, run.cfg.cluster.algorithm)?;
    run.output("memberships.tsv", memberships_tsv(&model))?;
    let trace: String = model
        .objective_trace
        .iter()
        .enumerate()
        .map(|(k, v)| format!("{}\t{v}\n", k + 1))
        .collect();
    run.output("objective_trace.tsv", format!("iteration\tobjective\n{trace}"))
}

/// Cluster model for a factor method: from the memberships file when one is
/// given, else computed with the method's algorithm.
fn method_clusters(run: &mut Run<'_>, corpus: &StoredCorpus, method: Method) -> Result<ClusterModel> {
    let algorithm = if method == Method::FRsBoSn {
        Algorithm::CMeans
    } else {
        Algorithm::KMeans
    };
    match run.cfg.inputs.clusters.clone() {
        Some(path) => {
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            run.inputs.push((path.display().to_string(), hex::encode(Sha256::digest(text.as_bytes()))));
            let rows = parse_memberships_tsv(&text, &path.display().to_string())?;
            if rows.len() != corpus.split.train.num_users() {
                return Err(Error::Shape(format!(
                    "{} membership rows for {} users",
                    rows.len(),
                    corpus.split.train.num_users()
                )));
            }
            let fuzzifier = (algorithm == Algorithm::CMeans).then_some(run.cfg.cluster.fuzzifier);
            ClusterModel::from_memberships(algorithm, rows, Vec::new(), fuzzifier)
        }
        None => cluster_model(&run.cfg, corpus, algorithm),
    }
}

fn train_cmd(run: &mut Run<'_>) -> Result<()> {
    let method = run.cfg.eval.method;
    if !method.is_factor_model() {
        return Err(Error::config("eval.method", format!("`{method}` has no factors to train")));
    }
    let corpus = run.corpus()?;
    let clusters = method_clusters(run, &corpus, method)?;
    let tensor = &corpus.split.train;
    let mode = if method == Method::FRsBoSn {
        SimilarityMode::Soft
    } else {
        SimilarityMode::Hard {
            lambda: run.cfg.similarity.lambda,
        }
    };
    let sim = build_similarity_table(&corpus.graph, tensor, &clusters, mode, run.cfg.similarity.sim_norm)?;
    let corr = build_correlation_table(&corpus.graph, tensor)?;
    let mut train_cfg = run.cfg.training();
    if method == Method::SoReg {
        train_cfg.alpha = 0.0;
    }
    let (factors, report) = train(tensor, &sim, &corr, &train_cfg)?;
    log::info!("{} epochs, converged: {}", report.epochs_run, report.converged);
    checkpoint::write(
        &run.out_dir.join("factors.bin"),
        &factors,
        train_cfg.scalar_mode,
        run.cfg.seed,
        corpus.checksum(),
    )?;
    run.outputs.push("factors.bin".into());
    run.output("loss_trace.tsv", report.to_tsv())?;
    if run.cfg.similarity.dump_tables {
        run.output("similarity.tsv", sim.to_tsv())?;
        run.output("correlation.tsv", corr.to_tsv())?;
    }
    Ok(())
}

fn evaluate_cmd(run: &mut Run<'_>) -> Result<()> {
    let corpus = run.corpus()?;
    let ks = run.cfg.eval.ks.clone();
    let report = match run.cfg.inputs.checkpoint.clone() {
        Some(path) => {
            let (header, factors) = checkpoint::read(&path)?;
            run.inputs.push((path.display().to_string(), sha256_file(&path)?));
            if header.corpus_checksum != corpus.checksum() {
                return Err(Error::StaleCheckpoint(format!(
                    "{} was trained on corpus {}, but {} has checksum {}; retrain against this corpus",
                    path.display(),
                    hex::encode(header.corpus_checksum),
                    run.cfg.inputs.corpus.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
                    hex::encode(corpus.checksum())
                )));
            }
            let tensor = &corpus.split.train;
            if header.num_users != tensor.num_users() || header.num_items != tensor.num_items() {
                return Err(Error::Shape("checkpoint and corpus disagree on size".into()));
            }
            let scorer = FactorScorer::new(run.cfg.eval.method.name(), factors);
            evaluate(&scorer, &corpus.split, &ks)?
        }
        None => {
            let method = run.cfg.eval.method;
            let scorer: Box<dyn Scorer> = match method {
                Method::Pop => Box::new(PopScorer::new(&corpus.split.train)),
                Method::Ucf => Box::new(UcfScorer::new(&corpus.split.train, run.cfg.eval.neighbors)),
                _ => {
                    let experiment = Experiment::new(&corpus.split, &corpus.graph, &run.cfg)?;
                    experiment.scorer(method, &run.cfg.training())?
                }
            };
            evaluate(scorer.as_ref(), &corpus.split, &ks)?
        }
    };
    for (name, value) in &report.metrics {
        log::info!("{name} = {value:.4}");
    }
    run.output("report.tsv", report.to_tsv())?;
    run.output("per_user.tsv", report.per_user_tsv())
}

fn sweep_cmd(run: &mut Run<'_>) -> Result<()> {
    let s = run.cfg.sweep.clone();
    let param = s
        .param
        .ok_or_else(|| Error::config("sweep.param", "no sweep parameter given"))?;
    if s.values.is_empty() {
        return Err(Error::config("sweep.values", "no values given"));
    }
    let methods = if s.methods.is_empty() {
        vec![Method::RsBoSn, Method::FRsBoSn]
    } else {
        s.methods.clone()
    };
    let corpus = run.corpus()?;
    let rows = sweep(param, &s.values, &run.cfg, &corpus.split, &corpus.graph, &methods)?;
    run.output("sweep.tsv", sweep_tsv(&rows))
}

fn gen_synthetic(run: &mut Run<'_>) -> Result<()> {
    let corpus = generate(&run.cfg.synthetic_params())?;
    run.output("interactions.tsv", corpus.interactions_tsv())?;
    run.output("friendships.tsv", corpus.friendships_tsv())?;
    run.output("truth.tsv", corpus.truth_tsv())
}

/// Entry point for the binary: runs and maps failure to a one-line
/// `error[<category>] ...` message and exit code 1.
pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.common.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}] {}", e.category(), e.to_string().replace('\n', " "));
            1
        }
    }
}
