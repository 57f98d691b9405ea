//! Run configuration: a TOML file of flat `key = value` pairs grouped in
//! sections, plus the built-in experiment presets.
//!
//! Every key, its default, and where the default comes from:
//!
//! | key | default | origin |
//! |-----|---------|--------|
//! | `seed` | 42 | arbitrary |
//! | `corpus.delimiter` | `auto` | input format |
//! | `corpus.min_items` | 2 | pruning threshold, tunable |
//! | `corpus.require_friends` | true | users without friends are pruned |
//! | `corpus.test_fraction` | 0.2 | per-user holdout |
//! | `cluster.clusters` | 10 | cluster count used for both models |
//! | `cluster.fuzzifier` | 2.0 | conventional C-means choice |
//! | `cluster.max_iter` / `cluster.tol` | 100 / 1e-9 | |
//! | `similarity.lambda` | 0.8 | same-cluster weight of the hard similarity |
//! | `similarity.sim_norm` | `cotag` | average over co-tagged items |
//! | `similarity.dump_tables` | false | `train` writes the similarity and correlation tables |
//! | `train.learning_rate` | 0.5 | |
//! | `train.alpha` / `train.beta` | 0.01 / 0.01 | comparison setting |
//! | `train.lambda_user` / `train.lambda_item` | 0.5 / 0.5 | |
//! | `train.latent_dim` | 80 | comparison setting |
//! | `train.max_iter` | 100 | |
//! | `train.conv_tol` | 1e-5 | relative loss change |
//! | `train.init_scale` | 0.01 | uniform init half-width |
//! | `train.scalar_mode` | `tag-count` | `binary` or `tag-count` |
//! | `train.update_mode` | `per-entry` | `per-entry` or `epoch-social` |
//! | `train.unobserved_weight` | 0 | weight of unselected items as zeros; 0 keeps the base objective |
//! | `eval.method` | `frsbosn` | `pop`, `ucf`, `soreg`, `rsbosn`, `frsbosn` |
//! | `eval.ks` | [1, 3, 5] | cutoffs |
//! | `eval.neighbors` | 20 | u-CF neighborhood size |
//! | `sweep.param` / `sweep.values` / `sweep.methods` | none | |
//! | `synthetic.*` | see [`SyntheticParams`] | generator settings for `gen-synthetic` |

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::affinity::SimNorm;
use crate::clustering::Algorithm;
use crate::corpus::Delimiter;
use crate::error::{Error, Result};
use crate::evaluator::SweepParam;
use crate::experiment::Method;
use crate::factorizer::TrainingConfig;
use crate::synthetic::SyntheticParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSection {
    pub delimiter: Delimiter,
    pub min_items: usize,
    pub require_friends: bool,
    pub test_fraction: f64,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection {
            delimiter: Delimiter::Auto,
            min_items: 2,
            require_friends: true,
            test_fraction: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterSection {
    /// Algorithm used by the `cluster` command.
    pub algorithm: Algorithm,
    pub clusters: usize,
    pub fuzzifier: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for ClusterSection {
    fn default() -> Self {
        ClusterSection {
            algorithm: Algorithm::CMeans,
            clusters: 10,
            fuzzifier: 2.0,
            max_iter: 100,
            tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimilaritySection {
    pub lambda: f64,
    pub sim_norm: SimNorm,
    /// `train` also writes `similarity.tsv` and `correlation.tsv`.
    pub dump_tables: bool,
}

impl Default for SimilaritySection {
    fn default() -> Self {
        SimilaritySection {
            lambda: 0.8,
            sim_norm: SimNorm::Cotag,
            dump_tables: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub method: Method,
    pub ks: Vec<usize>,
    pub neighbors: usize,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            method: Method::FRsBoSn,
            ks: vec![1, 3, 5],
            neighbors: 20,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub param: Option<SweepParam>,
    pub values: Vec<f64>,
    pub methods: Vec<Method>,
}

/// Input locations, so that a config (or a run manifest) fully describes a
/// run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InputsSection {
    pub interactions: Option<PathBuf>,
    pub friendships: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub clusters: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub seed: u64,
    pub corpus: CorpusSection,
    pub cluster: ClusterSection,
    pub similarity: SimilaritySection,
    pub train: TrainingConfig,
    pub eval: EvalSection,
    pub sweep: SweepSection,
    pub synthetic: SyntheticParams,
    pub inputs: InputsSection,
    /// Run metadata in manifests; ignored when a manifest is loaded as a
    /// config.
    #[serde(skip_serializing)]
    pub manifest: Option<toml::Table>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 42,
            corpus: CorpusSection::default(),
            cluster: ClusterSection::default(),
            similarity: SimilaritySection::default(),
            train: TrainingConfig::default(),
            eval: EvalSection::default(),
            sweep: SweepSection::default(),
            synthetic: SyntheticParams::default(),
            inputs: InputsSection::default(),
            manifest: None,
        }
    }
}

pub const PRESETS: &[&str] = &["compare", "beta-sweep", "alpha-sweep", "dim-sweep", "synthetic"];

pub const BETA_GRID: [f64; 5] = [0.0001, 0.001, 0.01, 0.1, 0.3];
pub const ALPHA_GRID: [f64; 5] = [0.0001, 0.001, 0.01, 0.1, 0.3];
pub const DIM_GRID: [f64; 4] = [30.0, 60.0, 80.0, 120.0];

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_owned();
            let key = msg
                .split('`')
                .nth(1)
                .unwrap_or("config")
                .to_owned();
            Error::config(key, msg.trim().to_owned())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Training settings with the run seed applied.
    pub fn training(&self) -> TrainingConfig {
        TrainingConfig {
            seed: self.seed,
            ..self.train.clone()
        }
    }

    /// Generator settings with the run seed applied.
    pub fn synthetic_params(&self) -> SyntheticParams {
        SyntheticParams {
            seed: self.seed,
            ..self.synthetic.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.synthetic.validate().map_err(|e| match e {
            Error::Config { key, message } => Error::config(format!("synthetic.{key}"), message),
            other => other,
        })?;
        let c = &self.corpus;
        if !(c.test_fraction > 0.0 && c.test_fraction < 1.0) {
            return Err(Error::config("corpus.test_fraction", "must lie in (0, 1)"));
        }
        if self.cluster.clusters == 0 {
            return Err(Error::config("cluster.clusters", "must be at least 1"));
        }
        if self.cluster.fuzzifier.is_nan() || self.cluster.fuzzifier <= 1.0 {
            return Err(Error::config("cluster.fuzzifier", "must be > 1"));
        }
        let lambda = self.similarity.lambda;
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::config("similarity.lambda", "must lie in (0, 1)"));
        }
        if self.eval.ks.is_empty() || self.eval.ks.contains(&0) {
            return Err(Error::config("eval.ks", "cutoffs must be positive"));
        }
        Ok(())
    }

    /// Built-in experiment settings by name.
    pub fn preset(name: &str) -> Result<Self> {
        let base = Config::default();
        let cfg = match name {
            "compare" => Config {
                train: TrainingConfig {
                    latent_dim: 80,
                    alpha: 0.01,
                    beta: 0.01,
                    ..base.train.clone()
                },
                ..base
            },
            "beta-sweep" => Config {
                sweep: SweepSection {
                    param: Some(SweepParam::Beta),
                    values: BETA_GRID.to_vec(),
                    methods: vec![Method::RsBoSn, Method::FRsBoSn],
                },
                ..base
            },
            "alpha-sweep" => Config {
                train: TrainingConfig {
                    latent_dim: 30,
                    ..base.train.clone()
                },
                sweep: SweepSection {
                    param: Some(SweepParam::Alpha),
                    values: ALPHA_GRID.to_vec(),
                    methods: vec![Method::RsBoSn, Method::FRsBoSn],
                },
                ..base
            },
            "dim-sweep" => Config {
                sweep: SweepSection {
                    param: Some(SweepParam::LatentDim),
                    values: DIM_GRID.to_vec(),
                    methods: vec![Method::RsBoSn, Method::FRsBoSn],
                },
                ..base
            },
            "synthetic" => synthetic_preset(),
            other => {
                return Err(Error::config(
                    "preset",
                    format!("unknown preset `{other}` (known: {})", PRESETS.join(", ")),
                ))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Settings for the generated two-cluster corpora. The `compare` step size
/// and L2 weights diverge on corpora this small.
fn synthetic_preset() -> Config {
    let base = Config::default();
    Config {
        cluster: ClusterSection {
            clusters: 2,
            ..base.cluster.clone()
        },
        train: TrainingConfig {
            learning_rate: 0.002,
            latent_dim: 10,
            lambda_user: 2.0,
            lambda_item: 2.0,
            ..base.train.clone()
        },
        ..base
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_roundtrip() {
        for name in PRESETS {
            let cfg = Config::preset(name).unwrap();
            assert_eq!(Config::parse(&cfg.to_toml()).unwrap(), cfg, "{name}");
        }
        let compare = Config::preset("compare").unwrap();
        assert_eq!((compare.train.latent_dim, compare.train.alpha, compare.train.beta), (80, 0.01, 0.01));
        assert_eq!(Config::preset("beta-sweep").unwrap().sweep.values, BETA_GRID.to_vec());
    }

    #[test]
    fn unknown_key_is_named() {
        match Config::parse("[train]\nbetta = 0.1\n") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "betta"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_value_is_named() {
        match Config::parse("[similarity]\nlambda = 1.5\n") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "similarity.lambda"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn manifest_table_is_ignored() {
        let text = format!("{}\n[manifest]\nwall_time_secs = 1.5\n", Config::default().to_toml());
        let cfg = Config::parse(&text).unwrap();
        assert!(cfg.manifest.is_some());
        assert_eq!(Config { manifest: None, ..cfg }, Config::default());
    }
}
