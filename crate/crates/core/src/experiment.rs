//! The five compared methods, built from one training split.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::affinity::{build_correlation_table, build_similarity_table, CorrelationTable, SimilarityMode, SimilarityTable};
use crate::baselines::{soreg_train, FactorScorer, PopScorer, Scorer, UcfScorer};
use crate::clustering::{cmeans, kmeans, normalized_profiles, ClusterModel};
use crate::config::Config;
use crate::corpus::{DataSplit, FriendshipGraph};
use crate::error::{Error, Result};
use crate::evaluator::{evaluate, EvalReport};
use crate::factorizer::{train, LatentFactors, TrainReport, TrainingConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "pop")]
    Pop,
    #[serde(rename = "ucf")]
    Ucf,
    #[serde(rename = "soreg")]
    SoReg,
    #[serde(rename = "rsbosn")]
    RsBoSn,
    #[serde(rename = "frsbosn")]
    FRsBoSn,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Pop, Method::Ucf, Method::SoReg, Method::RsBoSn, Method::FRsBoSn];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pop => "pop",
            Method::Ucf => "ucf",
            Method::SoReg => "soreg",
            Method::RsBoSn => "rsbosn",
            Method::FRsBoSn => "frsbosn",
        }
    }

    /// Whether the method trains latent factors.
    pub fn is_factor_model(self) -> bool {
        matches!(self, Method::SoReg | Method::RsBoSn | Method::FRsBoSn)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::config(
                    "eval.method",
                    format!("unknown method `{s}` (pop, ucf, soreg, rsbosn, frsbosn)"),
                )
            })
    }
}

/// Cluster models, similarity tables and correlations for one training
/// split, shared by every method and every retrain.
pub struct Experiment<'a> {
    pub split: &'a DataSplit,
    pub graph: &'a FriendshipGraph,
    pub hard_clusters: ClusterModel,
    pub soft_clusters: ClusterModel,
    pub hard_sim: SimilarityTable,
    pub soft_sim: SimilarityTable,
    pub corr: CorrelationTable,
    pub neighbors: usize,
    pub ks: Vec<usize>,
}

impl<'a> Experiment<'a> {
    pub fn new(split: &'a DataSplit, graph: &'a FriendshipGraph, cfg: &Config) -> Result<Self> {
        let profiles = normalized_profiles(&split.train);
        let c = &cfg.cluster;
        let hard_clusters = kmeans(&profiles, c.clusters, c.max_iter, c.tol, cfg.seed)?;
        let soft_clusters = cmeans(&profiles, c.clusters, c.fuzzifier, c.max_iter, c.tol, cfg.seed)?;
        Experiment::with_clusters(split, graph, cfg, hard_clusters, soft_clusters)
    }

    pub fn with_clusters(
        split: &'a DataSplit,
        graph: &'a FriendshipGraph,
        cfg: &Config,
        hard_clusters: ClusterModel,
        soft_clusters: ClusterModel,
    ) -> Result<Self> {
        let norm = cfg.similarity.sim_norm;
        let hard_sim = build_similarity_table(
            graph,
            &split.train,
            &hard_clusters,
            SimilarityMode::Hard {
                lambda: cfg.similarity.lambda,
            },
            norm,
        )?;
        let soft_sim = build_similarity_table(graph, &split.train, &soft_clusters, SimilarityMode::Soft, norm)?;
        let corr = build_correlation_table(graph, &split.train)?;
        Ok(Experiment {
            split,
            graph,
            hard_clusters,
            soft_clusters,
            hard_sim,
            soft_sim,
            corr,
            neighbors: cfg.eval.neighbors,
            ks: cfg.eval.ks.clone(),
        })
    }

    /// Trains a factor model; `None` for the memory-based baselines.
    pub fn train(&self, method: Method, cfg: &TrainingConfig) -> Result<Option<(LatentFactors, TrainReport)>> {
        let train_set = &self.split.train;
        let trained = match method {
            Method::Pop | Method::Ucf => return Ok(None),
            Method::SoReg => soreg_train(train_set, &self.hard_sim, cfg)?,
            Method::RsBoSn => train(train_set, &self.hard_sim, &self.corr, cfg)?,
            Method::FRsBoSn => train(train_set, &self.soft_sim, &self.corr, cfg)?,
        };
        Ok(Some(trained))
    }

    pub fn scorer(&self, method: Method, cfg: &TrainingConfig) -> Result<Box<dyn Scorer>> {
        Ok(match method {
            Method::Pop => Box::new(PopScorer::new(&self.split.train)),
            Method::Ucf => Box::new(UcfScorer::new(&self.split.train, self.neighbors)),
            _ => {
                let (factors, _) = self.train(method, cfg)?.expect("factor model");
                Box::new(FactorScorer::new(method.name(), factors))
            }
        })
    }

    pub fn evaluate(&self, method: Method, cfg: &TrainingConfig) -> Result<EvalReport> {
        let scorer = self.scorer(method, cfg)?;
        evaluate(scorer.as_ref(), self.split, &self.ks)
    }
}
