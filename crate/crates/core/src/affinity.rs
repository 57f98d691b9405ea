//! Pairwise quantities feeding the regularizers: hard and soft user
//! similarity over friend pairs, and the tag-based user-item correlation.
//!
//! Both similarities average the cosine of the two users' tag vectors over
//! the items they both tagged. The cosine of a zero vector is taken as 0, so
//! `corr(f, i)` vanishes for every item `f` never tagged.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::ClusterModel;
use crate::corpus::{FriendshipGraph, TagTensor, TagVector};
use crate::error::{Error, Result};

/// Cosine similarity of two tag-count vectors; 0 if either is all-zero.
pub fn cos_tags(a: &TagVector, b: &TagVector) -> f64 {
    let denom = (a.norm_sq() * b.norm_sq()).sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    (a.dot(b) / denom).min(1.0)
}

/// Divisor used when averaging co-tag cosines.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimNorm {
    /// Number of items both users tagged.
    #[default]
    Cotag,
    /// Catalog size `q`.
    Catalog,
}

impl FromStr for SimNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cotag" => Ok(SimNorm::Cotag),
            "catalog" => Ok(SimNorm::Catalog),
            other => Err(Error::config(
                "similarity.sim_norm",
                format!("expected `cotag` or `catalog`, got `{other}`"),
            )),
        }
    }
}

/// Average cosine between `u`'s and `f`'s tag vectors on co-tagged items.
pub fn cotag_cosine(u: usize, f: usize, tensor: &TagTensor, norm: SimNorm) -> f64 {
    let (a, b) = if tensor.degree(u) <= tensor.degree(f) {
        (tensor.row(u), tensor.row(f))
    } else {
        (tensor.row(f), tensor.row(u))
    };
    // Ascending item order either way round, so the sum is symmetric.
    let mut sum = 0.0;
    let mut shared = 0usize;
    for (i, ta) in a {
        if let Some(tb) = b.get(i) {
            sum += cos_tags(ta, tb);
            shared += 1;
        }
    }
    let divisor = match norm {
        SimNorm::Cotag => shared,
        SimNorm::Catalog => tensor.num_items(),
    };
    if shared == 0 || divisor == 0 {
        0.0
    } else {
        sum / divisor as f64
    }
}

fn check_pair(u: usize, f: usize, tensor: &TagTensor, clusters: &ClusterModel) -> Result<()> {
    let p = tensor.num_users();
    if u >= p || f >= p {
        return Err(Error::Index(format!("pair ({u}, {f}) outside {p} users")));
    }
    if clusters.num_users() != p {
        return Err(Error::Shape(format!(
            "cluster model covers {} users, corpus has {p}",
            clusters.num_users()
        )));
    }
    Ok(())
}

/// Hard similarity: `k * avg-cosine`, with `k = lambda` for friends in the
/// same K-means cluster and `1 - lambda` otherwise.
pub fn sim_hard(
    u: usize,
    f: usize,
    tensor: &TagTensor,
    clusters: &ClusterModel,
    lambda: f64,
    norm: SimNorm,
) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::config(
            "similarity.lambda",
            format!("must lie in (0, 1), got {lambda}"),
        ));
    }
    check_pair(u, f, tensor, clusters)?;
    let k = if clusters.hard_assign[u] == clusters.hard_assign[f] {
        lambda
    } else {
        1.0 - lambda
    };
    Ok(k * cotag_cosine(u, f, tensor, norm))
}

/// `1 - (1/C) sum_c |mu_uc - mu_fc|`.
pub fn membership_factor(mu_u: &[f64], mu_f: &[f64]) -> f64 {
    let c = mu_u.len() as f64;
    let spread: f64 = mu_u.iter().zip(mu_f).map(|(a, b)| (a - b).abs()).sum();
    1.0 - spread / c
}

/// Soft similarity: the membership factor times the average co-tag cosine.
pub fn sim_soft(
    u: usize,
    f: usize,
    tensor: &TagTensor,
    clusters: &ClusterModel,
    norm: SimNorm,
) -> Result<f64> {
    check_pair(u, f, tensor, clusters)?;
    clusters.check_rows()?;
    Ok(membership_factor(clusters.membership(u), clusters.membership(f))
        * cotag_cosine(u, f, tensor, norm))
}

/// Average cosine between `f`'s tags on `i` and on each item `f` selected.
pub fn corr(f: usize, i: usize, tensor: &TagTensor) -> f64 {
    let row = tensor.row(f);
    let Some(target) = row.get(&i) else {
        return 0.0;
    };
    let total: f64 = row.values().map(|tj| cos_tags(target, tj)).sum();
    total / row.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum SimilarityMode {
    Hard { lambda: f64 },
    Soft,
}

impl SimilarityMode {
    pub fn name(&self) -> &'static str {
        match self {
            SimilarityMode::Hard { .. } => "hard",
            SimilarityMode::Soft => "soft",
        }
    }
}

impl fmt::Display for SimilarityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimilarityMode::Hard { lambda } => write!(f, "hard(lambda={lambda})"),
            SimilarityMode::Soft => f.write_str("soft"),
        }
    }
}

/// Precomputed similarity for every friendship edge, stored in both
/// directions so a user's weighted friend list is a single slice.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityTable {
    pub mode: SimilarityMode,
    weights: Vec<Vec<(usize, f64)>>,
}

impl SimilarityTable {
    /// A table with no edges (every user isolated).
    pub fn empty(num_users: usize, mode: SimilarityMode) -> Self {
        SimilarityTable {
            mode,
            weights: vec![Vec::new(); num_users],
        }
    }

    /// Builds a table from explicit `(u, f, value)` edges.
    pub fn from_values(
        num_users: usize,
        mode: SimilarityMode,
        values: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut weights = vec![Vec::new(); num_users];
        for (u, f, v) in values {
            if u >= num_users || f >= num_users || u == f {
                return Err(Error::Index(format!("similarity edge ({u}, {f})")));
            }
            weights[u].push((f, v));
            weights[f].push((u, v));
        }
        for w in &mut weights {
            w.sort_unstable_by_key(|&(f, _)| f);
            w.dedup_by_key(|&mut (f, _)| f);
        }
        Ok(SimilarityTable { mode, weights })
    }

    pub fn num_users(&self) -> usize {
        self.weights.len()
    }

    /// `(friend, sim)` pairs of `u`, by friend id.
    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.weights[u]
    }

    pub fn get(&self, u: usize, f: usize) -> Option<f64> {
        let row = self.weights.get(u)?;
        row.binary_search_by_key(&f, |&(g, _)| g)
            .ok()
            .map(|k| row[k].1)
    }

    /// Each edge once, `(u, f, value)` with `u < f`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.weights.iter().enumerate().flat_map(|(u, row)| {
            row.iter()
                .filter(move |&&(f, _)| u < f)
                .map(move |&(f, v)| (u, f, v))
        })
    }

    pub fn to_tsv(&self) -> String {
        self.edges().map(|(u, f, v)| format!("{u}\t{f}\t{v}\n")).collect()
    }
}

/// Similarity of every friendship edge under `mode`.
pub fn build_similarity_table(
    graph: &FriendshipGraph,
    tensor: &TagTensor,
    clusters: &ClusterModel,
    mode: SimilarityMode,
    norm: SimNorm,
) -> Result<SimilarityTable> {
    if graph.num_users() != tensor.num_users() {
        return Err(Error::Shape("graph and tensor disagree on user count".into()));
    }
    match mode {
        SimilarityMode::Soft if clusters.is_one_hot() => log::warn!(
            "soft similarity over a one-hot cluster model: membership factor is 1 or 1 - 2/C"
        ),
        SimilarityMode::Hard { .. } if !clusters.is_one_hot() => log::warn!(
            "hard similarity over fuzzy memberships uses argmax assignments"
        ),
        _ => {}
    }
    let edges: Vec<(usize, usize)> = graph.edges().collect();
    let values = edges
        .par_iter()
        .map(|&(u, f)| {
            let v = match mode {
                SimilarityMode::Hard { lambda } => sim_hard(u, f, tensor, clusters, lambda, norm)?,
                SimilarityMode::Soft => sim_soft(u, f, tensor, clusters, norm)?,
            };
            Ok((u, f, v))
        })
        .collect::<Result<Vec<_>>>()?;
    SimilarityTable::from_values(tensor.num_users(), mode, values)
}

/// `corr(f, i)` for every user with at least one friend and every item they
/// selected. Absent pairs are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationTable {
    rows: Vec<Vec<(usize, f64)>>,
    row_sums: Vec<f64>,
}

impl CorrelationTable {
    pub fn empty(num_users: usize) -> Self {
        CorrelationTable {
            rows: vec![Vec::new(); num_users],
            row_sums: vec![0.0; num_users],
        }
    }

    pub fn num_users(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, f: usize) -> &[(usize, f64)] {
        &self.rows[f]
    }

    pub fn get(&self, f: usize, i: usize) -> f64 {
        let row = &self.rows[f];
        row.binary_search_by_key(&i, |&(j, _)| j)
            .map_or(0.0, |k| row[k].1)
    }

    /// `sum_i corr(f, i)`.
    pub fn row_sum(&self, f: usize) -> f64 {
        self.row_sums[f]
    }

    pub fn num_pairs(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (f, row) in self.rows.iter().enumerate() {
            for (i, v) in row {
                out.push_str(&format!("{f}\t{i}\t{v}\n"));
            }
        }
        out
    }
}

pub fn build_correlation_table(graph: &FriendshipGraph, tensor: &TagTensor) -> Result<CorrelationTable> {
    if graph.num_users() != tensor.num_users() {
        return Err(Error::Shape("graph and tensor disagree on user count".into()));
    }
    let rows: Vec<Vec<(usize, f64)>> = (0..tensor.num_users())
        .into_par_iter()
        .map(|f| {
            if graph.friends(f).is_empty() {
                return Vec::new();
            }
            tensor
                .row(f)
                .keys()
                .map(|&i| (i, corr(f, i, tensor)))
                .collect()
        })
        .collect();
    let row_sums = rows
        .iter()
        .map(|r| r.iter().map(|&(_, v)| v).sum())
        .collect();
    Ok(CorrelationTable { rows, row_sums })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::Algorithm;

    fn tv(pairs: &[(usize, u32)]) -> TagVector {
        TagVector::new(pairs.iter().copied())
    }

    #[test]
    fn cosine_cases() {
        let a = tv(&[(0, 1), (1, 1)]);
        assert_eq!(cos_tags(&a, &a), 1.0);
        assert_eq!(cos_tags(&tv(&[(0, 2)]), &tv(&[(1, 3)])), 0.0);
        assert!((cos_tags(&a, &tv(&[(0, 1)])) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(cos_tags(&a, &TagVector::default()), 0.0);
    }

    // u0 and u1 tag items 0 and 1 identically; u2 tags item 2 only.
    fn toy() -> TagTensor {
        TagTensor::from_entries(
            3,
            3,
            vec!["design".into(), "css".into()],
            vec![
                (0, 0, tv(&[(0, 1)])),
                (0, 1, tv(&[(0, 1), (1, 1)])),
                (1, 0, tv(&[(0, 1)])),
                (1, 1, tv(&[(0, 1), (1, 1)])),
                (2, 2, tv(&[(1, 1)])),
            ],
        )
        .unwrap()
    }

    fn hard(assign: &[usize], c: usize) -> ClusterModel {
        let rows = assign
            .iter()
            .map(|&a| {
                let mut r = vec![0.0; c];
                r[a] = 1.0;
                r
            })
            .collect();
        ClusterModel::from_memberships(Algorithm::KMeans, rows, vec![], None).unwrap()
    }

    #[test]
    fn hard_similarity_branches() {
        let t = toy();
        let same = hard(&[0, 0, 1], 2);
        let diff = hard(&[0, 1, 1], 2);
        assert!((sim_hard(0, 1, &t, &same, 0.8, SimNorm::Cotag).unwrap() - 0.8).abs() < 1e-15);
        assert!((sim_hard(0, 1, &t, &diff, 0.8, SimNorm::Cotag).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(sim_hard(0, 2, &t, &same, 0.8, SimNorm::Cotag).unwrap(), 0.0);
        assert!(sim_hard(0, 1, &t, &same, 1.0, SimNorm::Cotag).is_err());
        // Catalog divisor: 2 shared items out of 3.
        let lit = sim_hard(0, 1, &t, &same, 0.8, SimNorm::Catalog).unwrap();
        assert!((lit - 0.8 * 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn soft_similarity_cases() {
        let t = toy();
        let same = ClusterModel::from_memberships(
            Algorithm::CMeans,
            vec![vec![0.3, 0.7], vec![0.3, 0.7], vec![0.5, 0.5]],
            vec![],
            Some(2.0),
        )
        .unwrap();
        assert_eq!(sim_soft(0, 1, &t, &same, SimNorm::Cotag).unwrap(), 1.0);
        assert_eq!(sim_soft(0, 2, &t, &same, SimNorm::Cotag).unwrap(), 0.0);

        let ten = hard(&[0, 3, 0], 10);
        let v = sim_soft(0, 1, &t, &ten, SimNorm::Cotag).unwrap();
        assert!((v - 0.8).abs() < 1e-15);
    }

    #[test]
    fn soft_similarity_rejects_unnormalized_rows() {
        let t = toy();
        let mut bad = hard(&[0, 0, 0], 2);
        bad.memberships[1] = vec![0.6, 0.6];
        assert!(matches!(sim_soft(0, 1, &t, &bad, SimNorm::Cotag), Err(Error::Invariant(_))));
    }

    #[test]
    fn correlation_cases() {
        let t = toy();
        assert_eq!(corr(2, 2, &t), 1.0);
        assert_eq!(corr(2, 0, &t), 0.0);
        let expected = (1.0 + 1.0 / 2f64.sqrt()) / 2.0;
        assert!((corr(0, 0, &t) - expected).abs() < 1e-15);
        assert!((expected - 0.8536).abs() < 1e-4);
    }

    #[test]
    fn tables_match_direct_calls() {
        let t = toy();
        let g = FriendshipGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let c = hard(&[0, 0, 1], 2);
        let table =
            build_similarity_table(&g, &t, &c, SimilarityMode::Hard { lambda: 0.8 }, SimNorm::Cotag)
                .unwrap();
        for (u, f) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
            assert_eq!(
                table.get(u, f).unwrap(),
                sim_hard(u, f, &t, &c, 0.8, SimNorm::Cotag).unwrap()
            );
        }
        assert_eq!(table.get(0, 2), None);

        let corr_table = build_correlation_table(&g, &t).unwrap();
        for f in 0..3 {
            for i in 0..3 {
                assert_eq!(corr_table.get(f, i), corr(f, i, &t));
            }
        }

        let empty = FriendshipGraph::empty(3);
        let table =
            build_similarity_table(&empty, &t, &c, SimilarityMode::Soft, SimNorm::Cotag).unwrap();
        assert_eq!(table.edges().count(), 0);
        assert_eq!(build_correlation_table(&empty, &t).unwrap().num_pairs(), 0);
    }
}
