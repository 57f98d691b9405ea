//! Socially regularized matrix factorization trained by per-entry gradient
//! steps.
//!
//! The objective has five terms: squared error on observed entries, L2 on
//! user factors, L2 on item factors, a user-item term weighting friend
//! distances by `corr(f, i)`, and a social term weighting them by
//! `sim(u, f)`. Both friend sums run over ordered pairs, so every undirected
//! edge contributes from each endpoint.
//!
//! An optional sixth term, `(w0/2) sum_{(u,i) unobserved} (S_u . V_i)^2`,
//! treats unselected items as weak zeros. It is off (`w0 = 0`) by default and
//! is evaluated through the Gram matrices `sum_i V_i V_i^T` and
//! `sum_u S_u S_u^T`, so it never touches the unobserved entries one by one.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::affinity::{CorrelationTable, SimilarityTable};
use crate::corpus::{ScalarMode, TagTensor};
use crate::error::{Error, Result};

/// User and item latent vectors, stored contiguously per user / per item.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentFactors {
    dim: usize,
    users: Vec<f64>,
    items: Vec<f64>,
}

impl LatentFactors {
    pub fn zeros(num_users: usize, num_items: usize, dim: usize) -> Self {
        LatentFactors {
            dim,
            users: vec![0.0; num_users * dim],
            items: vec![0.0; num_items * dim],
        }
    }

    /// Uniform values in `[-scale, scale]`, users first, then items.
    pub fn random(num_users: usize, num_items: usize, dim: usize, scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.random_range(-scale..=scale)).collect()
        };
        let users = draw(num_users * dim);
        let items = draw(num_items * dim);
        LatentFactors { dim, users, items }
    }

    /// From per-user and per-item vectors.
    pub fn from_vectors(dim: usize, users: Vec<Vec<f64>>, items: Vec<Vec<f64>>) -> Result<Self> {
        if users.iter().chain(&items).any(|v| v.len() != dim) {
            return Err(Error::Shape(format!("every latent vector must have length {dim}")));
        }
        Ok(LatentFactors {
            dim,
            users: users.concat(),
            items: items.concat(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_users(&self) -> usize {
        self.users.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn num_items(&self) -> usize {
        self.items.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn user(&self, u: usize) -> &[f64] {
        &self.users[u * self.dim..(u + 1) * self.dim]
    }

    pub fn user_mut(&mut self, u: usize) -> &mut [f64] {
        &mut self.users[u * self.dim..(u + 1) * self.dim]
    }

    pub fn item(&self, i: usize) -> &[f64] {
        &self.items[i * self.dim..(i + 1) * self.dim]
    }

    pub fn item_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.items[i * self.dim..(i + 1) * self.dim]
    }

    pub fn user_data(&self) -> &[f64] {
        &self.users
    }

    pub fn item_data(&self) -> &[f64] {
        &self.items
    }

    pub(crate) fn from_raw(dim: usize, users: Vec<f64>, items: Vec<f64>) -> Self {
        LatentFactors { dim, users, items }
    }

    pub fn is_finite(&self) -> bool {
        self.users.iter().chain(&self.items).all(|x| x.is_finite())
    }

    /// `S_u . V_i`.
    pub fn predict(&self, u: usize, i: usize) -> Result<f64> {
        if u >= self.num_users() || i >= self.num_items() {
            return Err(Error::Index(format!(
                "({u}, {i}) outside {} users x {} items",
                self.num_users(),
                self.num_items()
            )));
        }
        Ok(dot(self.user(u), self.item(i)))
    }
}

/// Free-function form of [`LatentFactors::predict`].
pub fn predict(factors: &LatentFactors, u: usize, i: usize) -> Result<f64> {
    factors.predict(u, i)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `sum_k x_k x_k^T` over the consecutive `dim`-length rows of `data`.
fn gram(data: &[f64], dim: usize) -> Vec<f64> {
    let mut g = vec![0.0; dim * dim];
    for x in data.chunks_exact(dim) {
        rank_one(&mut g, 1.0, x);
    }
    g
}

fn rank_one(g: &mut [f64], w: f64, x: &[f64]) {
    let dim = x.len();
    for (a, row) in g.chunks_exact_mut(dim).enumerate() {
        axpy(w * x[a], x, row);
    }
}

fn mat_vec(g: &[f64], x: &[f64]) -> Vec<f64> {
    g.chunks_exact(x.len()).map(|row| dot(row, x)).collect()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Granularity of the gradient steps within an epoch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateMode {
    /// For each observed entry, a step along the full user gradient and then
    /// along the full item gradient.
    #[default]
    PerEntry,
    /// Per entry, only the squared-error gradient; regularizer gradients are
    /// applied once per user and once per item at the end of the epoch.
    EpochSocial,
}

impl FromStr for UpdateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-entry" => Ok(UpdateMode::PerEntry),
            "epoch-social" => Ok(UpdateMode::EpochSocial),
            other => Err(Error::config(
                "train.update_mode",
                format!("expected `per-entry` or `epoch-social`, got `{other}`"),
            )),
        }
    }
}

impl fmt::Display for UpdateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpdateMode::PerEntry => "per-entry",
            UpdateMode::EpochSocial => "epoch-social",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    /// Weight of the user-item correlation term.
    pub alpha: f64,
    /// Weight of the social similarity term.
    pub beta: f64,
    pub lambda_user: f64,
    pub lambda_item: f64,
    pub latent_dim: usize,
    pub max_iter: usize,
    pub conv_tol: f64,
    /// Set from the run seed; not a config key.
    #[serde(skip)]
    pub seed: u64,
    pub init_scale: f64,
    pub scalar_mode: ScalarMode,
    pub update_mode: UpdateMode,
    /// Weight `w0` of the squared score on unobserved entries.
    pub unobserved_weight: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            learning_rate: 0.5,
            alpha: 0.01,
            beta: 0.01,
            lambda_user: 0.5,
            lambda_item: 0.5,
            latent_dim: 80,
            max_iter: 100,
            conv_tol: 1e-5,
            seed: 42,
            init_scale: 0.01,
            scalar_mode: ScalarMode::TagCount,
            update_mode: UpdateMode::PerEntry,
            unobserved_weight: 0.0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("train.learning_rate", self.learning_rate),
            ("train.conv_tol", self.conv_tol),
            ("train.init_scale", self.init_scale),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("must be > 0, got {v}")));
            }
        }
        let non_negative = [
            ("train.alpha", self.alpha),
            ("train.beta", self.beta),
            ("train.lambda_user", self.lambda_user),
            ("train.lambda_item", self.lambda_item),
            ("train.unobserved_weight", self.unobserved_weight),
        ];
        for (key, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("must be >= 0, got {v}")));
            }
        }
        if self.latent_dim == 0 {
            return Err(Error::config("train.latent_dim", "must be at least 1"));
        }
        Ok(())
    }
}

/// The objective terms.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossBreakdown {
    pub fit: f64,
    pub l2_user: f64,
    pub l2_item: f64,
    pub user_item: f64,
    pub social: f64,
    /// Zero unless `unobserved_weight > 0`.
    pub unobserved: f64,
}

impl LossBreakdown {
    pub fn total(&self) -> f64 {
        self.fit + self.l2_user + self.l2_item + self.user_item + self.social + self.unobserved
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    pub loss_trace: Vec<f64>,
    pub term_trace: Vec<LossBreakdown>,
    pub epochs_run: usize,
    pub converged: bool,
}

impl TrainReport {
    /// `epoch\ttotal\tfit\tl2s\tl2v\tuseritem\tsocial`, one row per epoch,
    /// plus an `unobserved` column when that term was active.
    pub fn to_tsv(&self) -> String {
        let extra = self.term_trace.iter().any(|t| t.unobserved != 0.0);
        let mut out = String::from("epoch\ttotal\tfit\tl2s\tl2v\tuseritem\tsocial");
        out.push_str(if extra { "\tunobserved\n" } else { "\n" });
        for (e, (total, t)) in self.loss_trace.iter().zip(&self.term_trace).enumerate() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                e + 1,
                total,
                t.fit,
                t.l2_user,
                t.l2_item,
                t.user_item,
                t.social
            ));
            if extra {
                out.push_str(&format!("\t{}", t.unobserved));
            }
            out.push('\n');
        }
        out
    }
}

/// The objective bound to one corpus and its precomputed tables.
pub struct Objective<'a> {
    cfg: &'a TrainingConfig,
    sim: &'a SimilarityTable,
    corr: &'a CorrelationTable,
    /// `(item, target)` per user.
    user_entries: Vec<Vec<(usize, f64)>>,
    /// `(user, target)` per item.
    item_entries: Vec<Vec<(usize, f64)>>,
    num_items: usize,
}

impl<'a> Objective<'a> {
    pub fn new(
        tensor: &TagTensor,
        sim: &'a SimilarityTable,
        corr: &'a CorrelationTable,
        cfg: &'a TrainingConfig,
    ) -> Result<Self> {
        let p = tensor.num_users();
        if sim.num_users() != p || corr.num_users() != p {
            return Err(Error::Shape(format!(
                "tables cover {} / {} users, corpus has {p}",
                sim.num_users(),
                corr.num_users()
            )));
        }
        let mut user_entries = vec![Vec::new(); p];
        let mut item_entries = vec![Vec::new(); tensor.num_items()];
        for (u, i, tags) in tensor.entries() {
            let target = cfg.scalar_mode.value(tags);
            user_entries[u].push((i, target));
            item_entries[i].push((u, target));
        }
        Ok(Objective {
            cfg,
            sim,
            corr,
            user_entries,
            item_entries,
            num_items: tensor.num_items(),
        })
    }

    fn check(&self, factors: &LatentFactors) -> Result<()> {
        if factors.num_users() != self.user_entries.len()
            || factors.num_items() != self.num_items
            || factors.dim() != self.cfg.latent_dim
        {
            return Err(Error::Shape(format!(
                "factors are {}x{} (l={}), corpus is {}x{} (l={})",
                factors.num_users(),
                factors.num_items(),
                factors.dim(),
                self.user_entries.len(),
                self.num_items,
                self.cfg.latent_dim
            )));
        }
        Ok(())
    }

    pub fn loss(&self, factors: &LatentFactors) -> Result<LossBreakdown> {
        self.check(factors)?;
        let cfg = self.cfg;
        let mut out = LossBreakdown::default();
        let mut observed_sq = 0.0;
        for (u, entries) in self.user_entries.iter().enumerate() {
            let s_u = factors.user(u);
            for &(i, target) in entries {
                let score = dot(s_u, factors.item(i));
                let r = target - score;
                out.fit += 0.5 * r * r;
                observed_sq += score * score;
            }
        }
        out.l2_user = 0.5 * cfg.lambda_user * dot(factors.user_data(), factors.user_data());
        out.l2_item = 0.5 * cfg.lambda_item * dot(factors.item_data(), factors.item_data());
        for u in 0..self.user_entries.len() {
            let s_u = factors.user(u);
            for &(f, sim) in self.sim.neighbors(u) {
                let d = sq_dist(s_u, factors.user(f));
                out.user_item += 0.5 * cfg.alpha * self.corr.row_sum(f) * d;
                out.social += 0.5 * cfg.beta * sim * d;
            }
        }
        if cfg.unobserved_weight > 0.0 {
            let gram_items = gram(factors.item_data(), factors.dim());
            let all: f64 = (0..self.user_entries.len())
                .map(|u| {
                    let s_u = factors.user(u);
                    dot(s_u, &mat_vec(&gram_items, s_u))
                })
                .sum();
            out.unobserved = 0.5 * cfg.unobserved_weight * (all - observed_sq);
        }
        Ok(out)
    }

    /// Gradient of the regularizer terms (L2, user-item, social) w.r.t. `S_u`.
    pub fn grad_user_regularizers(&self, u: usize, factors: &LatentFactors) -> Vec<f64> {
        let cfg = self.cfg;
        let s_u = factors.user(u);
        let mut g: Vec<f64> = s_u.iter().map(|x| cfg.lambda_user * x).collect();
        let own = self.corr.row_sum(u);
        for &(f, sim) in self.sim.neighbors(u) {
            // d/dS_u of both ordered pairs (u,f) and (f,u).
            let w = cfg.alpha * (self.corr.row_sum(f) + own) + 2.0 * cfg.beta * sim;
            if w != 0.0 {
                for ((gk, a), b) in g.iter_mut().zip(s_u).zip(factors.user(f)) {
                    *gk += w * (a - b);
                }
            }
        }
        g
    }

    /// Adds the unobserved-entry gradient w.r.t. `S_u`, given `sum_i V_i V_i^T`.
    fn add_unobserved_user(&self, u: usize, factors: &LatentFactors, gram_items: &[f64], g: &mut [f64]) {
        let w0 = self.cfg.unobserved_weight;
        let s_u = factors.user(u);
        axpy(w0, &mat_vec(gram_items, s_u), g);
        for &(i, _) in &self.user_entries[u] {
            let v_i = factors.item(i);
            axpy(-w0 * dot(s_u, v_i), v_i, g);
        }
    }

    /// Adds the unobserved-entry gradient w.r.t. `V_i`, given `sum_u S_u S_u^T`.
    fn add_unobserved_item(&self, i: usize, factors: &LatentFactors, gram_users: &[f64], g: &mut [f64]) {
        let w0 = self.cfg.unobserved_weight;
        let v_i = factors.item(i);
        axpy(w0, &mat_vec(gram_users, v_i), g);
        for &(u, _) in &self.item_entries[i] {
            let s_u = factors.user(u);
            axpy(-w0 * dot(s_u, v_i), s_u, g);
        }
    }

    fn user_gradient(&self, u: usize, factors: &LatentFactors, gram_items: Option<&[f64]>) -> Vec<f64> {
        let mut g = self.grad_user_regularizers(u, factors);
        let s_u = factors.user(u);
        for &(i, target) in &self.user_entries[u] {
            let v_i = factors.item(i);
            axpy(dot(s_u, v_i) - target, v_i, &mut g);
        }
        if let Some(gram_items) = gram_items {
            self.add_unobserved_user(u, factors, gram_items, &mut g);
        }
        g
    }

    fn item_gradient(&self, i: usize, factors: &LatentFactors, gram_users: Option<&[f64]>) -> Vec<f64> {
        let v_i = factors.item(i);
        let mut g: Vec<f64> = v_i.iter().map(|x| self.cfg.lambda_item * x).collect();
        for &(u, target) in &self.item_entries[i] {
            let s_u = factors.user(u);
            axpy(dot(s_u, v_i) - target, s_u, &mut g);
        }
        if let Some(gram_users) = gram_users {
            self.add_unobserved_item(i, factors, gram_users, &mut g);
        }
        g
    }

    fn uses_unobserved(&self) -> bool {
        self.cfg.unobserved_weight > 0.0
    }

    pub fn grad_user(&self, u: usize, factors: &LatentFactors) -> Result<Vec<f64>> {
        self.check(factors)?;
        if u >= self.user_entries.len() {
            return Err(Error::Index(format!("user {u}")));
        }
        let gram_items = self.uses_unobserved().then(|| gram(factors.item_data(), factors.dim()));
        Ok(self.user_gradient(u, factors, gram_items.as_deref()))
    }

    pub fn grad_item(&self, i: usize, factors: &LatentFactors) -> Result<Vec<f64>> {
        self.check(factors)?;
        if i >= self.num_items {
            return Err(Error::Index(format!("item {i}")));
        }
        let gram_users = self.uses_unobserved().then(|| gram(factors.user_data(), factors.dim()));
        Ok(self.item_gradient(i, factors, gram_users.as_deref()))
    }

    /// Gradients of the single squared-error term of entry `(u, i)` w.r.t.
    /// `S_u` and `V_i`; the per-entry part of an epoch-social step.
    pub fn entry_gradients(&self, u: usize, i: usize, factors: &LatentFactors) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(factors)?;
        let target = self.user_entries[u]
            .iter()
            .find(|&&(j, _)| j == i)
            .map(|&(_, t)| t)
            .ok_or_else(|| Error::Index(format!("({u}, {i}) is not an observed entry")))?;
        let (s_u, v_i) = (factors.user(u), factors.item(i));
        let r = dot(s_u, v_i) - target;
        Ok((
            v_i.iter().map(|x| r * x).collect(),
            s_u.iter().map(|x| r * x).collect(),
        ))
    }

    fn epoch(&self, factors: &mut LatentFactors) {
        let eta = self.cfg.learning_rate;
        let dim = factors.dim();
        let unobserved = self.uses_unobserved();
        match self.cfg.update_mode {
            UpdateMode::PerEntry => {
                // Gram matrices follow every step through rank-one updates.
                let mut gram_items = unobserved.then(|| gram(factors.item_data(), dim));
                let mut gram_users = unobserved.then(|| gram(factors.user_data(), dim));
                let mut old = vec![0.0; dim];
                for (u, entries) in self.user_entries.iter().enumerate() {
                    for &(i, _) in entries {
                        let g = self.user_gradient(u, factors, gram_items.as_deref());
                        old.copy_from_slice(factors.user(u));
                        axpy(-eta, &g, factors.user_mut(u));
                        if let Some(gs) = gram_users.as_mut() {
                            rank_one(gs, -1.0, &old);
                            rank_one(gs, 1.0, factors.user(u));
                        }
                        let g = self.item_gradient(i, factors, gram_users.as_deref());
                        old.copy_from_slice(factors.item(i));
                        axpy(-eta, &g, factors.item_mut(i));
                        if let Some(gv) = gram_items.as_mut() {
                            rank_one(gv, -1.0, &old);
                            rank_one(gv, 1.0, factors.item(i));
                        }
                    }
                }
            }
            UpdateMode::EpochSocial => {
                let (mut s_u, mut v_i) = (vec![0.0; dim], vec![0.0; dim]);
                for (u, entries) in self.user_entries.iter().enumerate() {
                    for &(i, target) in entries {
                        s_u.copy_from_slice(factors.user(u));
                        v_i.copy_from_slice(factors.item(i));
                        let r = dot(&s_u, &v_i) - target;
                        axpy(-eta * r, &v_i, factors.user_mut(u));
                        axpy(-eta * r, &s_u, factors.item_mut(i));
                    }
                }
                let gram_items = unobserved.then(|| gram(factors.item_data(), dim));
                for u in 0..self.user_entries.len() {
                    let mut g = self.grad_user_regularizers(u, factors);
                    if let Some(gv) = gram_items.as_deref() {
                        self.add_unobserved_user(u, factors, gv, &mut g);
                    }
                    axpy(-eta, &g, factors.user_mut(u));
                }
                let gram_users = unobserved.then(|| gram(factors.user_data(), dim));
                for i in 0..self.num_items {
                    let mut g: Vec<f64> = factors.item(i).iter().map(|x| self.cfg.lambda_item * x).collect();
                    if let Some(gs) = gram_users.as_deref() {
                        self.add_unobserved_item(i, factors, gs, &mut g);
                    }
                    axpy(-eta, &g, factors.item_mut(i));
                }
            }
        }
    }

    /// Runs the training loop from `factors`.
    pub fn fit(&self, mut factors: LatentFactors) -> Result<(LatentFactors, TrainReport)> {
        self.check(&factors)?;
        let mut report = TrainReport::default();
        if self.cfg.max_iter == 0 {
            return Ok((factors, report));
        }
        let mut previous = self.loss(&factors)?.total();
        for epoch in 1..=self.cfg.max_iter {
            self.epoch(&mut factors);
            let terms = self.loss(&factors)?;
            let total = terms.total();
            if !total.is_finite() || !factors.is_finite() {
                return Err(Error::Divergence { epoch, loss: total });
            }
            report.loss_trace.push(total);
            report.term_trace.push(terms);
            report.epochs_run = epoch;
            if (total - previous).abs() / previous.max(1.0) < self.cfg.conv_tol {
                report.converged = true;
                break;
            }
            previous = total;
        }
        Ok((factors, report))
    }
}

/// Value of the objective and its five terms.
pub fn loss(
    factors: &LatentFactors,
    tensor: &TagTensor,
    sim: &SimilarityTable,
    corr: &CorrelationTable,
    cfg: &TrainingConfig,
) -> Result<LossBreakdown> {
    Objective::new(tensor, sim, corr, cfg)?.loss(factors)
}

/// Gradient of the objective w.r.t. `S_u`.
pub fn grad_user(
    u: usize,
    factors: &LatentFactors,
    tensor: &TagTensor,
    sim: &SimilarityTable,
    corr: &CorrelationTable,
    cfg: &TrainingConfig,
) -> Result<Vec<f64>> {
    Objective::new(tensor, sim, corr, cfg)?.grad_user(u, factors)
}

/// Gradient of the objective w.r.t. `V_i`. No regularizer other than L2
/// depends on item factors.
pub fn grad_item(i: usize, factors: &LatentFactors, tensor: &TagTensor, cfg: &TrainingConfig) -> Result<Vec<f64>> {
    let sim = SimilarityTable::empty(tensor.num_users(), crate::affinity::SimilarityMode::Soft);
    let corr = CorrelationTable::empty(tensor.num_users());
    Objective::new(tensor, &sim, &corr, cfg)?.grad_item(i, factors)
}

/// Initializes factors from `cfg.seed` and trains until `max_iter` epochs or
/// until the relative loss change drops below `conv_tol`.
pub fn train(
    tensor: &TagTensor,
    sim: &SimilarityTable,
    corr: &CorrelationTable,
    cfg: &TrainingConfig,
) -> Result<(LatentFactors, TrainReport)> {
    cfg.validate()?;
    let objective = Objective::new(tensor, sim, corr, cfg)?;
    let init = LatentFactors::random(
        tensor.num_users(),
        tensor.num_items(),
        cfg.latent_dim,
        cfg.init_scale,
        cfg.seed,
    );
    objective.fit(init)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affinity::SimilarityMode;
    use crate::corpus::{FriendshipGraph, TagVector};

    fn tensor() -> TagTensor {
        TagTensor::from_entries(
            2,
            2,
            vec!["a".into(), "b".into()],
            vec![
                (0, 0, TagVector::new([(0, 1)])),
                (0, 1, TagVector::new([(0, 1), (1, 2)])),
                (1, 1, TagVector::new([(1, 1)])),
            ],
        )
        .unwrap()
    }

    fn cfg(l: usize) -> TrainingConfig {
        TrainingConfig {
            latent_dim: l,
            alpha: 0.0,
            beta: 0.0,
            lambda_user: 0.0,
            lambda_item: 0.0,
            ..TrainingConfig::default()
        }
    }

    fn no_tables(p: usize) -> (SimilarityTable, CorrelationTable) {
        (SimilarityTable::empty(p, SimilarityMode::Soft), CorrelationTable::empty(p))
    }

    #[test]
    fn zero_factors_binary_loss_is_half_the_entry_count() {
        let t = tensor();
        let (s, c) = no_tables(2);
        let cfg = TrainingConfig {
            scalar_mode: ScalarMode::Binary,
            latent_dim: 3,
            ..TrainingConfig::default()
        };
        let l = loss(&LatentFactors::zeros(2, 2, 3), &t, &s, &c, &cfg).unwrap();
        assert_eq!(l.total(), 1.5);
        assert_eq!(l.fit, 1.5);
    }

    #[test]
    fn exact_factorization_has_zero_loss_and_item_gradient() {
        // T (tag-count) = [[1, 3], [0, 1]] on observed entries.
        let t = tensor();
        let (s, c) = no_tables(2);
        let f = LatentFactors::from_vectors(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![1.0, 0.0], vec![3.0, 1.0]])
            .unwrap();
        let cfg = cfg(2);
        assert_eq!(loss(&f, &t, &s, &c, &cfg).unwrap().total(), 0.0);
        assert_eq!(grad_item(1, &f, &t, &cfg).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn isolated_user_gradient_is_its_l2_term() {
        let t = TagTensor::from_entries(2, 1, vec!["a".into()], vec![(1, 0, TagVector::single(0))]).unwrap();
        let (s, c) = no_tables(2);
        let cfg = TrainingConfig { lambda_user: 1.0, latent_dim: 2, ..cfg(2) };
        let f = LatentFactors::from_vectors(2, vec![vec![0.3, -0.7], vec![1.0, 1.0]], vec![vec![1.0, 2.0]]).unwrap();
        assert_eq!(grad_user(0, &f, &t, &s, &c, &cfg).unwrap(), vec![0.3, -0.7]);
    }

    #[test]
    fn untagged_item_gradient_is_its_l2_term() {
        let t = TagTensor::from_entries(1, 2, vec!["a".into()], vec![(0, 0, TagVector::single(0))]).unwrap();
        let cfg = TrainingConfig { lambda_item: 1.0, ..cfg(2) };
        let f = LatentFactors::from_vectors(2, vec![vec![1.0, 1.0]], vec![vec![1.0, 2.0], vec![0.25, 4.0]]).unwrap();
        assert_eq!(grad_item(1, &f, &t, &cfg).unwrap(), vec![0.25, 4.0]);
    }

    #[test]
    fn identical_friend_vectors_add_no_social_gradient() {
        let t = tensor();
        let g = FriendshipGraph::from_edges(2, [(0, 1)]).unwrap();
        let sim = SimilarityTable::from_values(2, SimilarityMode::Soft, [(0, 1, 0.9)]).unwrap();
        let corr = crate::affinity::build_correlation_table(&g, &t).unwrap();
        let f = LatentFactors::from_vectors(2, vec![vec![0.5, 0.5], vec![0.5, 0.5]], vec![vec![1.0, 0.0], vec![0.0, 1.0]])
            .unwrap();
        let with = TrainingConfig { alpha: 1.0, beta: 1.0, ..cfg(2) };
        let (s0, c0) = no_tables(2);
        assert_eq!(
            grad_user(0, &f, &t, &sim, &corr, &with).unwrap(),
            grad_user(0, &f, &t, &s0, &c0, &cfg(2)).unwrap()
        );
    }

    #[test]
    fn predictions() {
        let f = LatentFactors::from_vectors(1, vec![vec![2.0], vec![0.0]], vec![vec![3.0]]).unwrap();
        assert_eq!(predict(&f, 0, 0).unwrap(), 6.0);
        assert_eq!(predict(&f, 1, 0).unwrap(), 0.0);
        assert!(predict(&f, 2, 0).is_err());
    }

    #[test]
    fn zero_epochs_return_the_initialization() {
        let t = tensor();
        let (s, c) = no_tables(2);
        let cfg = TrainingConfig { max_iter: 0, ..cfg(3) };
        let (f, report) = train(&t, &s, &c, &cfg).unwrap();
        assert_eq!(f, LatentFactors::random(2, 2, 3, cfg.init_scale, cfg.seed));
        assert!(report.loss_trace.is_empty());
        assert_eq!(report.epochs_run, 0);
    }

    #[test]
    fn large_learning_rate_reports_divergence() {
        let t = tensor();
        let (s, c) = no_tables(2);
        let cfg = TrainingConfig { learning_rate: 50.0, max_iter: 200, init_scale: 1.0, ..cfg(2) };
        match train(&t, &s, &c, &cfg) {
            Err(Error::Divergence { epoch, .. }) => assert!(epoch >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn config_validation_names_the_key() {
        let bad = TrainingConfig { beta: -1.0, ..TrainingConfig::default() };
        match bad.validate() {
            Err(Error::Config { key, .. }) => assert_eq!(key, "train.beta"),
            other => panic!("{other:?}"),
        }
    }
}
