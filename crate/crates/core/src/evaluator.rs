//! Top-k recommendation and precision / recall at k.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::Scorer;
use crate::config::Config;
use crate::corpus::{DataSplit, FriendshipGraph, TagTensor};
use crate::error::{Error, Result};
use crate::experiment::{Experiment, Method};

/// The `k` best-scoring items `u` has not selected in training, by
/// descending score and then ascending item id.
pub fn top_k(u: usize, scorer: &dyn Scorer, k: usize, train: &TagTensor) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    let seen = train.row(u);
    let candidates: Vec<usize> = (0..train.num_items()).filter(|i| !seen.contains_key(i)).collect();
    let scores = scorer.score_items(u, &candidates);
    let mut ranked: Vec<(usize, f64)> = candidates.into_iter().zip(scores).collect();
    let by_rank = |a: &(usize, f64), b: &(usize, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
    if ranked.len() > k {
        ranked.select_nth_unstable_by(k - 1, by_rank);
        ranked.truncate(k);
    }
    ranked.sort_by(by_rank);
    ranked.into_iter().map(|(i, _)| i).collect()
}

/// Per-user outcome for each requested cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct UserEval {
    pub user: usize,
    pub test_size: usize,
    /// `|R(u)|` per cutoff (less than k only when candidates run out).
    pub returned: Vec<usize>,
    /// `|R(u) ∩ T(u)|` per cutoff.
    pub hits: Vec<usize>,
}

impl UserEval {
    pub fn precision(&self, n: usize) -> f64 {
        if self.returned[n] == 0 {
            0.0
        } else {
            self.hits[n] as f64 / self.returned[n] as f64
        }
    }

    pub fn recall(&self, n: usize) -> f64 {
        self.hits[n] as f64 / self.test_size as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub scorer: String,
    pub ks: Vec<usize>,
    /// `P@k` for every cutoff, then `R@k` for every cutoff; macro averages.
    pub metrics: Vec<(String, f64)>,
    pub per_user: Vec<UserEval>,
    pub excluded: Vec<(usize, String)>,
}

impl EvalReport {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn evaluated_users(&self) -> usize {
        self.per_user.len()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric\tvalue\n");
        for (name, value) in &self.metrics {
            out.push_str(&format!("{name}\t{value}\n"));
        }
        out.push_str(&format!("evaluated_users\t{}\n", self.per_user.len()));
        out.push_str(&format!("excluded_users\t{}\n", self.excluded.len()));
        out
    }

    pub fn per_user_tsv(&self) -> String {
        let mut out = String::from("user\ttest_size\tk\treturned\thits\tprecision\trecall\n");
        for e in &self.per_user {
            for (n, k) in self.ks.iter().enumerate() {
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    e.user,
                    e.test_size,
                    k,
                    e.returned[n],
                    e.hits[n],
                    e.precision(n),
                    e.recall(n)
                ));
            }
        }
        for (u, reason) in &self.excluded {
            out.push_str(&format!("# excluded {u}: {reason}\n"));
        }
        out
    }
}

/// Precision and recall at each cutoff in `ks`, averaged over users with a
/// non-empty held-out set.
pub fn evaluate(scorer: &dyn Scorer, split: &DataSplit, ks: &[usize]) -> Result<EvalReport> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::config("eval.ks", "cutoffs must be a non-empty list of positive counts"));
    }
    if split.num_test_entries() == 0 {
        return Err(Error::Evaluation("the test split is empty".into()));
    }
    let max_k = *ks.iter().max().expect("non-empty");
    let outcomes: Vec<std::result::Result<UserEval, (usize, String)>> = (0..split.train.num_users())
        .into_par_iter()
        .map(|u| {
            let test = &split.test[u];
            if test.is_empty() {
                return Err((u, "no held-out items".to_string()));
            }
            let ranked = top_k(u, scorer, max_k, &split.train);
            let mut returned = Vec::with_capacity(ks.len());
            let mut hits = Vec::with_capacity(ks.len());
            for &k in ks {
                let r = &ranked[..k.min(ranked.len())];
                returned.push(r.len());
                hits.push(r.iter().filter(|i| test.contains_key(i)).count());
            }
            Ok(UserEval {
                user: u,
                test_size: test.len(),
                returned,
                hits,
            })
        })
        .collect();

    let mut per_user = Vec::new();
    let mut excluded = Vec::new();
    for o in outcomes {
        match o {
            Ok(e) => per_user.push(e),
            Err(x) => excluded.push(x),
        }
    }
    let n = per_user.len() as f64;
    let mut metrics = Vec::new();
    for (idx, k) in ks.iter().enumerate() {
        let mean = per_user.iter().map(|e| e.precision(idx)).sum::<f64>() / n;
        metrics.push((format!("P@{k}"), mean));
    }
    for (idx, k) in ks.iter().enumerate() {
        let mean = per_user.iter().map(|e| e.recall(idx)).sum::<f64>() / n;
        metrics.push((format!("R@{k}"), mean));
    }
    Ok(EvalReport {
        scorer: scorer.name().to_owned(),
        ks: ks.to_vec(),
        metrics,
        per_user,
        excluded,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Alpha,
    Beta,
    LatentDim,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(SweepParam::Alpha),
            "beta" => Ok(SweepParam::Beta),
            "latent_dim" | "l" => Ok(SweepParam::LatentDim),
            other => Err(Error::config(
                "sweep.param",
                format!("unknown sweep parameter `{other}` (alpha, beta, latent_dim)"),
            )),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Alpha => "alpha",
            SweepParam::Beta => "beta",
            SweepParam::LatentDim => "latent_dim",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub method: Method,
    pub metric: String,
    pub score: f64,
}

pub fn sweep_tsv(rows: &[SweepRow]) -> String {
    let mut out = String::from("param_value\tmodel\tmetric\tvalue\n");
    for r in rows {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", r.value, r.method, r.metric, r.score));
    }
    out
}

/// Retrains every method in `methods` for each value of `param`, with the
/// same seed, and evaluates each run.
pub fn sweep(
    param: SweepParam,
    values: &[f64],
    base: &Config,
    split: &DataSplit,
    graph: &FriendshipGraph,
    methods: &[Method],
) -> Result<Vec<SweepRow>> {
    let experiment = Experiment::new(split, graph, base)?;
    let mut rows = Vec::new();
    for &value in values {
        let mut train = base.training();
        match param {
            SweepParam::Alpha => train.alpha = value,
            SweepParam::Beta => train.beta = value,
            SweepParam::LatentDim => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::config("sweep.values", format!("latent_dim must be a positive integer, got {value}")));
                }
                train.latent_dim = value as usize;
            }
        }
        for &method in methods {
            let report = experiment.evaluate(method, &train)?;
            for (metric, score) in &report.metrics {
                rows.push(SweepRow {
                    value,
                    method,
                    metric: metric.clone(),
                    score: *score,
                });
            }
        }
    }
    Ok(rows)
}
