//! Generated corpora with planted user clusters and friend communities.
//!
//! Each cluster owns a pool of items carrying tags from the cluster's own
//! vocabulary; neighbouring clusters share a fraction of their pools. Within
//! a cluster, users fall into communities that favour a subset of the pool,
//! and most friendships stay inside a community. A fraction of users sits
//! between two clusters and draws items from both.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{FriendshipGraph, LoadedCorpus};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticParams {
    pub clusters: usize,
    pub users_per_cluster: usize,
    pub items_per_cluster: usize,
    /// Fraction of a cluster's pool also offered by the next cluster.
    pub overlap: f64,
    /// Fraction of users drawing half their items from a second cluster.
    pub between_fraction: f64,
    pub tags_per_cluster: usize,
    pub tags_per_item: usize,
    pub items_per_user: usize,
    pub communities_per_cluster: usize,
    /// Preference multiplier of a community's favoured items.
    pub community_boost: f64,
    /// Preference multiplier of each user's own favoured items.
    pub personal_boost: f64,
    pub friends_per_user: usize,
    /// Fraction of friendships drawn from other clusters.
    pub cross_friend_fraction: f64,
    /// Fraction of within-cluster friendships kept inside the community.
    pub community_friend_fraction: f64,
    /// Set from the run seed; not a config key.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            clusters: 2,
            users_per_cluster: 100,
            items_per_cluster: 160,
            overlap: 0.2,
            between_fraction: 0.2,
            tags_per_cluster: 24,
            tags_per_item: 3,
            items_per_user: 16,
            communities_per_cluster: 1,
            community_boost: 6.0,
            personal_boost: 1.0,
            friends_per_user: 10,
            cross_friend_fraction: 0.15,
            community_friend_fraction: 0.7,
            seed: 1,
        }
    }
}

impl SyntheticParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("clusters", self.clusters),
            ("users_per_cluster", self.users_per_cluster),
            ("items_per_cluster", self.items_per_cluster),
            ("tags_per_cluster", self.tags_per_cluster),
            ("tags_per_item", self.tags_per_item),
            ("items_per_user", self.items_per_user),
            ("communities_per_cluster", self.communities_per_cluster),
        ];
        for (key, v) in positive {
            if v == 0 {
                return Err(Error::config(key, "must be at least 1"));
            }
        }
        for (key, v) in [
            ("overlap", self.overlap),
            ("between_fraction", self.between_fraction),
            ("cross_friend_fraction", self.cross_friend_fraction),
            ("community_friend_fraction", self.community_friend_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(key, format!("must lie in [0, 1], got {v}")));
            }
        }
        if self.tags_per_item > self.tags_per_cluster {
            return Err(Error::config("tags_per_item", "exceeds tags_per_cluster"));
        }
        if self.community_boost.is_nan() || self.community_boost < 1.0 {
            return Err(Error::config("community_boost", "must be >= 1"));
        }
        if self.personal_boost.is_nan() || self.personal_boost < 1.0 {
            return Err(Error::config("personal_boost", "must be >= 1"));
        }
        if self.items_per_user > self.items_per_cluster {
            return Err(Error::config("items_per_user", "exceeds items_per_cluster"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    /// `(user, item, tag)` records; a repeated record raises the tag count.
    pub records: Vec<(String, String, String)>,
    /// Friend pairs by user key.
    pub friendships: Vec<(String, String)>,
    /// Planted cluster mixture per user.
    pub truth: Vec<Vec<f64>>,
}

impl SyntheticCorpus {
    pub fn corpus(&self) -> Result<(LoadedCorpus, FriendshipGraph)> {
        let loaded = LoadedCorpus::from_records(
            self.records.iter().map(|(u, i, t)| (u.as_str(), i.as_str(), t.as_str())),
        )?;
        let edges = self
            .friendships
            .iter()
            .map(|(a, b)| (loaded.users.get(a).expect("generated user"), loaded.users.get(b).expect("generated user")))
            .collect::<Vec<_>>();
        let graph = FriendshipGraph::from_edges(loaded.users.len(), edges)?;
        Ok((loaded, graph))
    }

    pub fn interactions_tsv(&self) -> String {
        let mut out = String::new();
        for (u, i, t) in &self.records {
            let _ = writeln!(out, "{u}\t{i}\t{t}");
        }
        out
    }

    pub fn friendships_tsv(&self) -> String {
        let mut out = String::new();
        for (a, b) in &self.friendships {
            let _ = writeln!(out, "{a}\t{b}");
        }
        out
    }

    pub fn truth_tsv(&self) -> String {
        let mut out = String::new();
        for (u, row) in self.truth.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            let _ = writeln!(out, "{}\t{}", user_key(u), cells.join("\t"));
        }
        out
    }

    /// Writes `interactions.tsv`, `friendships.tsv` and `truth.tsv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, text) in [
            ("interactions.tsv", self.interactions_tsv()),
            ("friendships.tsv", self.friendships_tsv()),
            ("truth.tsv", self.truth_tsv()),
        ] {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

fn user_key(u: usize) -> String {
    format!("u{u:05}")
}

pub fn generate(params: &SyntheticParams) -> Result<SyntheticCorpus> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let c_count = params.clusters;
    let per = params.items_per_cluster;

    // Item pools: cluster c owns items [c*per, (c+1)*per) and borrows the
    // first `overlap` share of the previous cluster's pool.
    let shared = ((params.overlap * per as f64).round() as usize).min(per);
    let pools: Vec<Vec<usize>> = (0..c_count)
        .map(|c| {
            let mut pool: Vec<usize> = (c * per..(c + 1) * per).collect();
            if c_count > 1 {
                let prev = (c + c_count - 1) % c_count;
                pool.extend(prev * per..prev * per + shared);
            }
            pool
        })
        .collect();
    let item_tags: Vec<Vec<usize>> = (0..c_count * per)
        .map(|i| {
            let c = i / per;
            rand::seq::index::sample(&mut rng, params.tags_per_cluster, params.tags_per_item)
                .into_iter()
                .map(|t| c * params.tags_per_cluster + t)
                .collect()
        })
        .collect();
    // Zipf-like popularity within each pool, in a random order.
    let popularity: Vec<Vec<f64>> = pools
        .iter()
        .map(|pool| {
            let mut ranks: Vec<usize> = (0..pool.len()).collect();
            ranks.shuffle(&mut rng);
            ranks.iter().map(|&r| 1.0 / (r as f64 + 1.0).powf(0.7)).collect()
        })
        .collect();
    // Each community favours a random fifth of its cluster's pool.
    let favoured: Vec<Vec<Vec<bool>>> = pools
        .iter()
        .map(|pool| {
            (0..params.communities_per_cluster)
                .map(|_| (0..pool.len()).map(|_| rng.random::<f64>() < 0.2).collect())
                .collect()
        })
        .collect();

    let p = c_count * params.users_per_cluster;
    let mut home = Vec::with_capacity(p);
    let mut community = Vec::with_capacity(p);
    let mut truth = Vec::with_capacity(p);
    for u in 0..p {
        let c = u / params.users_per_cluster;
        let g = (u % params.users_per_cluster) % params.communities_per_cluster;
        let mut mix = vec![0.0; c_count];
        if c_count > 1 && rng.random::<f64>() < params.between_fraction {
            mix[c] = 0.5;
            mix[(c + 1) % c_count] = 0.5;
        } else {
            mix[c] = 1.0;
        }
        home.push(c);
        community.push(g);
        truth.push(mix);
    }

    let cluster_weights: Vec<WeightedIndex<f64>> = (0..c_count)
        .map(|c| WeightedIndex::new(&popularity[c]).expect("positive weights"))
        .collect();
    let community_weights: Vec<Vec<Vec<f64>>> = (0..c_count)
        .map(|c| {
            favoured[c]
                .iter()
                .map(|fav| {
                    popularity[c]
                        .iter()
                        .zip(fav)
                        .map(|(&w, &f)| if f { w * params.community_boost } else { w })
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut records = Vec::new();
    for u in 0..p {
        // Each user favours a random tenth of the home pool on top of the
        // community preference.
        let mut own = community_weights[home[u]][community[u]].clone();
        for w in own.iter_mut() {
            if rng.random::<f64>() < 0.1 {
                *w *= params.personal_boost;
            }
        }
        let own = WeightedIndex::new(&own).expect("positive weights");
        let lo = params.items_per_user.div_ceil(2);
        let n_items = rng.random_range(lo..=params.items_per_user + lo);
        let mut chosen = BTreeSet::new();
        let mut attempts = 0;
        while chosen.len() < n_items && attempts < 50 * n_items {
            attempts += 1;
            let c = pick_cluster(&truth[u], &mut rng);
            let k = if c == home[u] {
                own.sample(&mut rng)
            } else {
                cluster_weights[c].sample(&mut rng)
            };
            chosen.insert(pools[c][k]);
        }
        for i in chosen {
            let tags = &item_tags[i];
            let n_tags = rng.random_range(1..=tags.len());
            for &t in rand::seq::index::sample(&mut rng, tags.len(), n_tags).iter().map(|k| &tags[k]) {
                let repeats = if rng.random::<f64>() < 0.25 { 2 } else { 1 };
                for _ in 0..repeats {
                    records.push((user_key(u), format!("i{i:05}"), format!("c{}t{:03}", t / params.tags_per_cluster, t % params.tags_per_cluster)));
                }
            }
        }
    }

    let mut edges = BTreeSet::new();
    let half = params.friends_per_user.div_ceil(2);
    for u in 0..p {
        for _ in 0..half {
            let f = if c_count > 1 && rng.random::<f64>() < params.cross_friend_fraction {
                let other = (home[u] + rng.random_range(1..c_count)) % c_count;
                other * params.users_per_cluster + rng.random_range(0..params.users_per_cluster)
            } else if rng.random::<f64>() < params.community_friend_fraction {
                let slots = params.users_per_cluster.div_ceil(params.communities_per_cluster);
                let k = rng.random_range(0..slots);
                let local = (k * params.communities_per_cluster + community[u]).min(params.users_per_cluster - 1);
                home[u] * params.users_per_cluster + local
            } else {
                home[u] * params.users_per_cluster + rng.random_range(0..params.users_per_cluster)
            };
            if f != u {
                edges.insert((u.min(f), u.max(f)));
            }
        }
    }
    let friendships = edges.into_iter().map(|(a, b)| (user_key(a), user_key(b))).collect();
    Ok(SyntheticCorpus {
        records,
        friendships,
        truth,
    })
}

fn pick_cluster(mix: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let x: f64 = rng.random();
    let mut acc = 0.0;
    for (c, &w) in mix.iter().enumerate() {
        acc += w;
        if x < acc {
            return c;
        }
    }
    mix.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}
