//! Hard (K-means) and fuzzy (C-means) clustering of user profiles.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{user_tag_profile, TagTensor};
use crate::error::{Error, Result};

/// Row sums of a membership matrix must match 1 within this slack.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    #[serde(rename = "kmeans")]
    KMeans,
    #[serde(rename = "cmeans")]
    CMeans,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::KMeans => "kmeans",
            Algorithm::CMeans => "cmeans",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" | "k-means" => Ok(Algorithm::KMeans),
            "cmeans" | "c-means" => Ok(Algorithm::CMeans),
            other => Err(Error::config(
                "cluster.algorithm",
                format!("expected `kmeans` or `cmeans`, got `{other}`"),
            )),
        }
    }
}

/// Cluster centroids with a row-stochastic user x cluster membership matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterModel {
    pub algorithm: Algorithm,
    pub centroids: Vec<Vec<f64>>,
    pub memberships: Vec<Vec<f64>>,
    pub hard_assign: Vec<usize>,
    /// Only meaningful for C-means.
    pub fuzzifier: Option<f64>,
    pub objective_trace: Vec<f64>,
}

impl ClusterModel {
    /// Rebuilds a model from stored memberships; hard assignments are the
    /// row argmax (ties to the lowest cluster id).
    pub fn from_memberships(
        algorithm: Algorithm,
        memberships: Vec<Vec<f64>>,
        centroids: Vec<Vec<f64>>,
        fuzzifier: Option<f64>,
    ) -> Result<Self> {
        let c = memberships.first().map_or(0, Vec::len);
        if c == 0 || memberships.iter().any(|r| r.len() != c) {
            return Err(Error::Shape("membership rows must share a positive width".into()));
        }
        let model = ClusterModel {
            algorithm,
            hard_assign: memberships.iter().map(|r| argmax(r)).collect(),
            centroids,
            memberships,
            fuzzifier,
            objective_trace: Vec::new(),
        };
        model.check_rows()?;
        Ok(model)
    }

    pub fn num_clusters(&self) -> usize {
        self.memberships.first().map_or(self.centroids.len(), Vec::len)
    }

    pub fn num_users(&self) -> usize {
        self.memberships.len()
    }

    pub fn membership(&self, u: usize) -> &[f64] {
        &self.memberships[u]
    }

    /// True when every row is exactly one-hot.
    pub fn is_one_hot(&self) -> bool {
        self.memberships.iter().all(|row| {
            row.iter().filter(|&&m| m == 1.0).count() == 1
                && row.iter().all(|&m| m == 0.0 || m == 1.0)
        })
    }

    /// Fails if some row is not a probability vector.
    pub fn check_rows(&self) -> Result<()> {
        for (u, row) in self.memberships.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE || row.iter().any(|&m| !(0.0..=1.0).contains(&m)) {
                return Err(Error::Invariant(format!(
                    "membership row {u} is not normalized (sum {sum})"
                )));
            }
        }
        Ok(())
    }

    /// Relabels clusters: old cluster `c` becomes `perm[c]`.
    pub fn permuted(&self, perm: &[usize]) -> ClusterModel {
        let c = self.num_clusters();
        assert_eq!(perm.len(), c, "permutation width");
        let mut centroids = vec![Vec::new(); self.centroids.len()];
        for (old, cent) in self.centroids.iter().enumerate() {
            centroids[perm[old]] = cent.clone();
        }
        let memberships = self
            .memberships
            .iter()
            .map(|row| {
                let mut out = vec![0.0; c];
                for (old, &m) in row.iter().enumerate() {
                    out[perm[old]] = m;
                }
                out
            })
            .collect();
        ClusterModel {
            algorithm: self.algorithm,
            centroids,
            memberships,
            hard_assign: self.hard_assign.iter().map(|&a| perm[a]).collect(),
            fuzzifier: self.fuzzifier,
            objective_trace: self.objective_trace.clone(),
        }
    }
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (c, &m) in row.iter().enumerate() {
        if m > row[best] {
            best = c;
        }
    }
    best
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// L2-normalized dense tag profiles, one per user. Users without tags map to
/// the zero vector.
pub fn normalized_profiles(tensor: &TagTensor) -> Vec<Vec<f64>> {
    (0..tensor.num_users())
        .map(|u| {
            let profile = user_tag_profile(tensor, u).expect("user in range");
            let mut dense = profile.to_dense(tensor.num_tags());
            let norm = profile.norm_sq().sqrt();
            if norm > 0.0 {
                dense.iter_mut().for_each(|x| *x /= norm);
            }
            dense
        })
        .collect()
}

fn validate(profiles: &[Vec<f64>], clusters: usize) -> Result<()> {
    if profiles.is_empty() {
        return Err(Error::EmptyInput("no profiles to cluster".into()));
    }
    let dim = profiles[0].len();
    if profiles.iter().any(|p| p.len() != dim) {
        return Err(Error::Shape("profiles differ in dimension".into()));
    }
    if clusters == 0 {
        return Err(Error::config("cluster.clusters", "must be at least 1"));
    }
    let mut distinct: Vec<Vec<u64>> = profiles
        .iter()
        .map(|p| p.iter().map(|x| x.to_bits()).collect())
        .collect();
    distinct.sort_unstable();
    distinct.dedup();
    if clusters > distinct.len() {
        return Err(Error::config(
            "cluster.clusters",
            format!(
                "{clusters} clusters requested but only {} distinct profiles",
                distinct.len()
            ),
        ));
    }
    Ok(())
}

/// k-means++ seeding: first centroid uniform, then proportional to squared
/// distance from the nearest chosen centroid.
fn seed_centroids(profiles: &[Vec<f64>], clusters: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = profiles.len();
    let mut centroids = vec![profiles[rng.random_range(0..n)].clone()];
    let mut nearest: Vec<f64> = profiles.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < clusters {
        let total: f64 = nearest.iter().sum();
        let mut target = rng.random::<f64>() * total;
        let mut pick = None;
        for (k, &d) in nearest.iter().enumerate() {
            if d <= 0.0 {
                continue;
            }
            pick = Some(k);
            if target < d {
                break;
            }
            target -= d;
        }
        // validate() guarantees enough distinct points, so some d > 0.
        let pick = pick.expect("a point away from every centroid");
        centroids.push(profiles[pick].clone());
        for (k, p) in profiles.iter().enumerate() {
            nearest[k] = nearest[k].min(sq_dist(p, &centroids[centroids.len() - 1]));
        }
    }
    centroids
}

fn mean_of(profiles: &[Vec<f64>], members: impl Iterator<Item = usize>, dim: usize) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; dim];
    let mut count = 0usize;
    for k in members {
        for (s, x) in sum.iter_mut().zip(&profiles[k]) {
            *s += x;
        }
        count += 1;
    }
    (count > 0).then(|| sum.into_iter().map(|s| s / count as f64).collect())
}

/// Lloyd's algorithm with k-means++ seeding.
///
/// Stops after `max_iter` iterations or once the within-cluster sum of
/// squares improves by less than `tol`. An emptied cluster takes over the
/// point farthest from its current centroid.
pub fn kmeans(
    profiles: &[Vec<f64>],
    clusters: usize,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> Result<ClusterModel> {
    validate(profiles, clusters)?;
    let n = profiles.len();
    let dim = profiles[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(profiles, clusters, &mut rng);
    let mut assign = vec![0usize; n];
    let mut trace: Vec<f64> = Vec::new();

    for _ in 0..max_iter {
        for (k, p) in profiles.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, cent) in centroids.iter().enumerate() {
                let d = sq_dist(p, cent);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            assign[k] = best;
        }
        repair_empty_clusters(profiles, &centroids, &mut assign, clusters);
        for (c, cent) in centroids.iter_mut().enumerate() {
            if let Some(mean) = mean_of(profiles, (0..n).filter(|&k| assign[k] == c), dim) {
                *cent = mean;
            }
        }
        let objective: f64 = profiles
            .iter()
            .zip(&assign)
            .map(|(p, &c)| sq_dist(p, &centroids[c]))
            .sum();
        let improvement = trace.last().map(|&prev| prev - objective);
        trace.push(objective);
        if improvement.is_some_and(|d| d < tol) {
            break;
        }
    }

    let memberships = assign
        .iter()
        .map(|&c| {
            let mut row = vec![0.0; clusters];
            row[c] = 1.0;
            row
        })
        .collect();
    Ok(ClusterModel {
        algorithm: Algorithm::KMeans,
        centroids,
        memberships,
        hard_assign: assign,
        fuzzifier: None,
        objective_trace: trace,
    })
}

fn repair_empty_clusters(
    profiles: &[Vec<f64>],
    centroids: &[Vec<f64>],
    assign: &mut [usize],
    clusters: usize,
) {
    loop {
        let mut sizes = vec![0usize; clusters];
        for &c in assign.iter() {
            sizes[c] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        // Farthest point among clusters that can spare one.
        let donor = (0..profiles.len())
            .filter(|&k| sizes[assign[k]] > 1)
            .map(|k| (k, sq_dist(&profiles[k], &centroids[assign[k]])))
            .fold(None, |best: Option<(usize, f64)>, (k, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((k, d)),
            });
        match donor {
            Some((k, _)) => assign[k] = empty,
            None => return,
        }
    }
}

/// Fuzzy memberships of one point: `mu_c` proportional to
/// `(1 / d_c)^(2 / (m - 1))`, normalized. A point sitting on a centroid gets
/// all of its membership there (lowest id on ties).
pub fn fuzzy_memberships(point: &[f64], centroids: &[Vec<f64>], fuzzifier: f64) -> Vec<f64> {
    let dists: Vec<f64> = centroids.iter().map(|c| sq_dist(point, c)).collect();
    let mut row = vec![0.0; centroids.len()];
    if let Some(zero) = dists.iter().position(|&d| d == 0.0) {
        row[zero] = 1.0;
        return row;
    }
    // Scale by the nearest distance so weights stay in (0, 1].
    let d_min = dists.iter().copied().fold(f64::INFINITY, f64::min);
    let exponent = 1.0 / (fuzzifier - 1.0);
    for (w, &d) in row.iter_mut().zip(&dists) {
        *w = (d_min / d).powf(exponent);
    }
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|w| *w /= total);
    row
}

fn fuzzy_objective(profiles: &[Vec<f64>], memberships: &[Vec<f64>], centroids: &[Vec<f64>], m: f64) -> f64 {
    profiles
        .iter()
        .zip(memberships)
        .map(|(p, row)| {
            row.iter()
                .zip(centroids)
                .map(|(&mu, c)| mu.powf(m) * sq_dist(p, c))
                .sum::<f64>()
        })
        .sum()
}

/// Fuzzy C-means with k-means++ seeding and fuzzifier `m > 1`.
///
/// Alternates membership and centroid updates; the recorded objective is
/// `sum_u sum_c mu_uc^m d_uc^2` after each centroid update.
pub fn cmeans(
    profiles: &[Vec<f64>],
    clusters: usize,
    fuzzifier: f64,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> Result<ClusterModel> {
    if !fuzzifier.is_finite() || fuzzifier <= 1.0 {
        return Err(Error::config(
            "cluster.fuzzifier",
            format!("must be a finite value > 1, got {fuzzifier}"),
        ));
    }
    validate(profiles, clusters)?;
    let dim = profiles[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(profiles, clusters, &mut rng);
    let mut memberships: Vec<Vec<f64>> = profiles
        .iter()
        .map(|p| fuzzy_memberships(p, &centroids, fuzzifier))
        .collect();
    let mut trace: Vec<f64> = Vec::new();

    for iter in 0..max_iter {
        if iter > 0 {
            memberships = profiles
                .iter()
                .map(|p| fuzzy_memberships(p, &centroids, fuzzifier))
                .collect();
        }
        for (c, cent) in centroids.iter_mut().enumerate() {
            let mut num = vec![0.0; dim];
            let mut den = 0.0;
            for (p, row) in profiles.iter().zip(&memberships) {
                let w = row[c].powf(fuzzifier);
                if w > 0.0 {
                    den += w;
                    for (s, x) in num.iter_mut().zip(p) {
                        *s += w * x;
                    }
                }
            }
            if den > 0.0 {
                *cent = num.into_iter().map(|s| s / den).collect();
            }
        }
        let objective = fuzzy_objective(profiles, &memberships, &centroids, fuzzifier);
        let improvement = trace.last().map(|&prev| prev - objective);
        trace.push(objective);
        if improvement.is_some_and(|d| d < tol) {
            break;
        }
    }

    Ok(ClusterModel {
        algorithm: Algorithm::CMeans,
        hard_assign: memberships.iter().map(|r| argmax(r)).collect(),
        centroids,
        memberships,
        fuzzifier: Some(fuzzifier),
        objective_trace: trace,
    })
}

/// Memberships as `user_id\tmu_0...\tmu_{C-1}` lines.
pub fn memberships_tsv(model: &ClusterModel) -> String {
    let mut out = String::new();
    for (u, row) in model.memberships.iter().enumerate() {
        out.push_str(&u.to_string());
        for m in row {
            out.push('\t');
            out.push_str(&m.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn parse_memberships_tsv(text: &str, name: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: name.to_owned(),
            line: n + 1,
            message,
        };
        let mut fields = line.split('\t');
        let id: usize = fields
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|e| err(format!("bad user id: {e}")))?;
        if id != rows.len() {
            return Err(err(format!("expected user {}, found {id}", rows.len())));
        }
        let row = fields
            .map(|f| f.parse::<f64>().map_err(|e| err(format!("bad membership: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
