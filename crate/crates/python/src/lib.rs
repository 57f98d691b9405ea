//! Python bindings: corpora, clustering, training, prediction and
//! evaluation.
//!
//! ```python
//! import softrec
//! records, friends = softrec.generate_synthetic({"users_per_cluster": 30}, seed=1)
//! corpus = softrec.Corpus.from_records(records, friends, seed=1)
//! model = softrec.train(corpus, "frsbosn", preset="synthetic", seed=1)
//! softrec.evaluate(corpus, model=model)["P@1"]
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict};

use softrec::baselines::{FactorScorer, Scorer};
use softrec::cli::apply_overrides;
use softrec::clustering::{cmeans, kmeans, normalized_profiles, Algorithm, ClusterModel};
use softrec::config::Config;
use softrec::corpus::{load_friendships, load_interactions, Delimiter, FriendshipGraph, LoadedCorpus};
use softrec::evaluator::{evaluate as run_evaluation, top_k};
use softrec::experiment::{Experiment, Method};
use softrec::factorizer::{LatentFactors, TrainReport};
use softrec::store::StoredCorpus;
use softrec::synthetic::{generate, SyntheticParams};

create_exception!(softrec, SoftrecError, PyException);

/// `(user, item, tag)` records and `(user, user)` friend pairs.
type Records = (Vec<(String, String, String)>, Vec<(String, String)>);

fn err(e: softrec::Error) -> PyErr {
    SoftrecError::new_err(format!("[{}] {e}", e.category()))
}

/// Turns a Python value into TOML source text.
fn toml_literal(v: &Bound<'_, PyAny>) -> PyResult<String> {
    if v.is_instance_of::<PyBool>() {
        return Ok(v.extract::<bool>()?.to_string());
    }
    if let Ok(i) = v.extract::<i64>() {
        return Ok(i.to_string());
    }
    if let Ok(f) = v.extract::<f64>() {
        return Ok(format!("{f:?}"));
    }
    if let Ok(s) = v.extract::<String>() {
        return Ok(format!("{s:?}"));
    }
    if let Ok(items) = v.extract::<Vec<Bound<'_, PyAny>>>() {
        let parts = items.iter().map(toml_literal).collect::<PyResult<Vec<_>>>()?;
        return Ok(format!("[{}]", parts.join(", ")));
    }
    Err(SoftrecError::new_err(format!("cannot use {v} as a config value")))
}

/// Builds a run config from a preset, `{"section.key": value}` overrides and
/// a seed.
fn resolve(preset: Option<&str>, config: Option<&Bound<'_, PyDict>>, seed: Option<u64>) -> PyResult<Config> {
    let base = match preset {
        Some(name) => Config::preset(name).map_err(err)?,
        None => Config::default(),
    };
    let mut overrides = Vec::new();
    if let Some(dict) = config {
        for (k, v) in dict.iter() {
            overrides.push(format!("{}={}", k.extract::<String>()?, toml_literal(&v)?));
        }
    }
    let mut cfg = apply_overrides(&base, &overrides).map_err(err)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

fn method(name: &str) -> PyResult<Method> {
    name.parse().map_err(err)
}

/// A pruned, split corpus with its friendship graph.
#[pyclass(name = "Corpus", module = "softrec", frozen)]
pub struct PyCorpus {
    inner: StoredCorpus,
}

#[pymethods]
impl PyCorpus {
    /// From `(user, item, tag)` records and `(user, user)` friend pairs.
    #[staticmethod]
    #[pyo3(signature = (records, friendships, min_items=2, require_friends=true, test_fraction=0.2, seed=42))]
    fn from_records(
        records: Vec<(String, String, String)>,
        friendships: Vec<(String, String)>,
        min_items: usize,
        require_friends: bool,
        test_fraction: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let loaded = LoadedCorpus::from_records(records.iter().map(|(u, i, t)| (u.as_str(), i.as_str(), t.as_str())))
            .map_err(err)?;
        let edges = friendships
            .iter()
            .map(|(a, b)| match (loaded.users.get(a), loaded.users.get(b)) {
                (Some(a), Some(b)) => Ok((a, b)),
                _ => Err(SoftrecError::new_err(format!("[unknown-user] friendship ({a}, {b})"))),
            })
            .collect::<PyResult<Vec<_>>>()?;
        let graph = FriendshipGraph::from_edges(loaded.users.len(), edges).map_err(err)?;
        let inner = StoredCorpus::build(&loaded, &graph, min_items, require_friends, test_fraction, seed).map_err(err)?;
        Ok(PyCorpus { inner })
    }

    /// From interaction and friendship files.
    #[staticmethod]
    #[pyo3(signature = (interactions, friendships, min_items=2, require_friends=true, test_fraction=0.2, seed=42))]
    fn load(
        interactions: PathBuf,
        friendships: PathBuf,
        min_items: usize,
        require_friends: bool,
        test_fraction: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let loaded = load_interactions(&interactions, Delimiter::Auto).map_err(err)?;
        let graph = load_friendships(&friendships, &loaded.users, Delimiter::Auto).map_err(err)?;
        let inner = StoredCorpus::build(&loaded, &graph, min_items, require_friends, test_fraction, seed).map_err(err)?;
        Ok(PyCorpus { inner })
    }

    /// A corpus directory written by `softrec ingest` or [`Corpus.write`].
    #[staticmethod]
    fn read(dir: PathBuf) -> PyResult<Self> {
        Ok(PyCorpus {
            inner: StoredCorpus::read(&dir).map_err(err)?,
        })
    }

    fn write(&self, dir: PathBuf) -> PyResult<()> {
        self.inner.write(&dir).map_err(err)
    }

    #[getter]
    fn num_users(&self) -> usize {
        self.inner.split.train.num_users()
    }

    #[getter]
    fn num_items(&self) -> usize {
        self.inner.split.train.num_items()
    }

    #[getter]
    fn num_train_entries(&self) -> usize {
        self.inner.split.train.num_entries()
    }

    #[getter]
    fn num_test_entries(&self) -> usize {
        self.inner.split.num_test_entries()
    }

    #[getter]
    fn num_friendships(&self) -> usize {
        self.inner.graph.num_edges()
    }

    fn users(&self) -> Vec<String> {
        self.inner.users.keys().to_vec()
    }

    fn items(&self) -> Vec<String> {
        self.inner.items.keys().to_vec()
    }

    fn friends(&self, user: usize) -> PyResult<Vec<usize>> {
        self.check_user(user)?;
        Ok(self.inner.graph.friends(user).to_vec())
    }

    fn test_items(&self, user: usize) -> PyResult<Vec<usize>> {
        self.check_user(user)?;
        Ok(self.inner.split.test_items(user))
    }

    /// Hex SHA-256 of the stored files.
    fn checksum(&self) -> String {
        self.inner.checksum().iter().map(|b| format!("{b:02x}")).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Corpus(users={}, items={}, train={}, test={}, friendships={})",
            self.num_users(),
            self.num_items(),
            self.num_train_entries(),
            self.num_test_entries(),
            self.num_friendships()
        )
    }
}

impl PyCorpus {
    fn check_user(&self, user: usize) -> PyResult<()> {
        if user >= self.num_users() {
            return Err(SoftrecError::new_err(format!("[index] user {user} outside {} users", self.num_users())));
        }
        Ok(())
    }
}

/// User memberships from K-means or C-means.
#[pyclass(name = "Clusters", module = "softrec", frozen)]
pub struct PyClusters {
    inner: ClusterModel,
}

#[pymethods]
impl PyClusters {
    #[getter]
    fn algorithm(&self) -> String {
        self.inner.algorithm.to_string()
    }

    #[getter]
    fn memberships(&self) -> Vec<Vec<f64>> {
        self.inner.memberships.clone()
    }

    #[getter]
    fn hard_assign(&self) -> Vec<usize> {
        self.inner.hard_assign.clone()
    }

    #[getter]
    fn objective_trace(&self) -> Vec<f64> {
        self.inner.objective_trace.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Clusters(algorithm={}, clusters={}, users={})",
            self.inner.algorithm,
            self.inner.num_clusters(),
            self.inner.num_users()
        )
    }
}

/// Clusters the users of `corpus` by their training tag profiles.
#[pyfunction]
#[pyo3(signature = (corpus, algorithm="cmeans", clusters=10, fuzzifier=2.0, max_iter=100, tol=1e-9, seed=42))]
fn cluster(
    corpus: &PyCorpus,
    algorithm: &str,
    clusters: usize,
    fuzzifier: f64,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> PyResult<PyClusters> {
    let profiles = normalized_profiles(&corpus.inner.split.train);
    let inner = match algorithm.parse::<Algorithm>().map_err(err)? {
        Algorithm::KMeans => kmeans(&profiles, clusters, max_iter, tol, seed),
        Algorithm::CMeans => cmeans(&profiles, clusters, fuzzifier, max_iter, tol, seed),
    }
    .map_err(err)?;
    Ok(PyClusters { inner })
}

/// Trained latent factors.
#[pyclass(name = "Model", module = "softrec", frozen)]
pub struct PyModel {
    method: Method,
    factors: LatentFactors,
    report: TrainReport,
}

#[pymethods]
impl PyModel {
    #[getter]
    fn method(&self) -> &'static str {
        self.method.name()
    }

    #[getter]
    fn latent_dim(&self) -> usize {
        self.factors.dim()
    }

    #[getter]
    fn loss_trace(&self) -> Vec<f64> {
        self.report.loss_trace.clone()
    }

    #[getter]
    fn epochs_run(&self) -> usize {
        self.report.epochs_run
    }

    #[getter]
    fn converged(&self) -> bool {
        self.report.converged
    }

    fn user_factors(&self, user: usize) -> PyResult<Vec<f64>> {
        self.predict(user, 0)?;
        Ok(self.factors.user(user).to_vec())
    }

    fn item_factors(&self, item: usize) -> PyResult<Vec<f64>> {
        self.predict(0, item)?;
        Ok(self.factors.item(item).to_vec())
    }

    /// `S_u . V_i`.
    fn predict(&self, user: usize, item: usize) -> PyResult<f64> {
        self.factors.predict(user, item).map_err(err)
    }

    /// The `k` best items for `user` outside its training items.
    fn recommend(&self, corpus: &PyCorpus, user: usize, k: usize) -> PyResult<Vec<usize>> {
        corpus.check_user(user)?;
        let scorer = FactorScorer::new(self.method.name(), self.factors.clone());
        Ok(top_k(user, &scorer, k, &corpus.inner.split.train))
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(method={}, latent_dim={}, epochs={})",
            self.method,
            self.factors.dim(),
            self.report.epochs_run
        )
    }
}

/// Trains `method` (`soreg`, `rsbosn` or `frsbosn`) on the training split.
/// `config` maps `section.key` names to values, applied over `preset`.
#[pyfunction]
#[pyo3(signature = (corpus, method="frsbosn", preset=None, config=None, seed=None))]
fn train(
    py: Python<'_>,
    corpus: &PyCorpus,
    method: &str,
    preset: Option<&str>,
    config: Option<&Bound<'_, PyDict>>,
    seed: Option<u64>,
) -> PyResult<PyModel> {
    let m = self::method(method)?;
    if !m.is_factor_model() {
        return Err(SoftrecError::new_err(format!("[config] `{m}` has no factors to train")));
    }
    let cfg = resolve(preset, config, seed)?;
    let c = &corpus.inner;
    let (factors, report) = py
        .detach(|| -> softrec::Result<_> {
            let ex = Experiment::new(&c.split, &c.graph, &cfg)?;
            Ok(ex.train(m, &cfg.training())?.expect("factor model"))
        })
        .map_err(err)?;
    Ok(PyModel {
        method: m,
        factors,
        report,
    })
}

/// Precision and recall at each cutoff, as `{"P@1": ..., "R@1": ...}`.
/// Scores `model` when given, else builds `method` from the config.
#[pyfunction]
#[pyo3(signature = (corpus, model=None, method="frsbosn", ks=vec![1, 3, 5], preset=None, config=None, seed=None))]
#[allow(clippy::too_many_arguments)]
fn evaluate(
    py: Python<'_>,
    corpus: &PyCorpus,
    model: Option<&PyModel>,
    method: &str,
    ks: Vec<usize>,
    preset: Option<&str>,
    config: Option<&Bound<'_, PyDict>>,
    seed: Option<u64>,
) -> PyResult<BTreeMap<String, f64>> {
    let c = &corpus.inner;
    let report = match model {
        Some(model) => {
            let scorer = FactorScorer::new(model.method.name(), model.factors.clone());
            py.detach(|| run_evaluation(&scorer, &c.split, &ks))
        }
        None => {
            let m = self::method(method)?;
            let cfg = resolve(preset, config, seed)?;
            py.detach(|| -> softrec::Result<_> {
                let ex = Experiment::new(&c.split, &c.graph, &cfg)?;
                let scorer: Box<dyn Scorer> = ex.scorer(m, &cfg.training())?;
                run_evaluation(scorer.as_ref(), &c.split, &ks)
            })
        }
    }
    .map_err(err)?;
    Ok(report.metrics.into_iter().collect())
}

/// Synthetic clustered corpus: `(records, friendships)` ready for
/// `Corpus.from_records`. `params` uses the `synthetic.*` key names.
#[pyfunction]
#[pyo3(signature = (params=None, seed=1))]
fn generate_synthetic(
    params: Option<&Bound<'_, PyDict>>,
    seed: u64,
) -> PyResult<Records> {
    let mut overrides = Vec::new();
    if let Some(dict) = params {
        for (k, v) in dict.iter() {
            overrides.push(format!("synthetic.{}={}", k.extract::<String>()?, toml_literal(&v)?));
        }
    }
    let cfg = apply_overrides(&Config::default(), &overrides).map_err(err)?;
    let corpus = generate(&SyntheticParams { seed, ..cfg.synthetic }).map_err(err)?;
    Ok((corpus.records, corpus.friendships))
}

#[pymodule]
#[pyo3(name = "softrec")]
fn softrec_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SoftrecError", m.py().get_type::<SoftrecError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyCorpus>()?;
    m.add_class::<PyClusters>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(cluster, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(generate_synthetic, m)?)?;
    Ok(())
}
