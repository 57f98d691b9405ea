//! Comparison methods and the scoring interface shared by every model.

use rayon::prelude::*;

use crate::affinity::{cos_tags, CorrelationTable, SimilarityTable};
use crate::corpus::{user_tag_profile, TagTensor, TagVector};
use crate::error::Result;
use crate::factorizer::{train, LatentFactors, TrainReport, TrainingConfig};

/// Scores candidate items for a user. Implementations are immutable after
/// construction and can be shared across threads.
pub trait Scorer: Sync {
    fn name(&self) -> &str;

    fn score(&self, u: usize, i: usize) -> f64;

    fn score_items(&self, u: usize, items: &[usize]) -> Vec<f64> {
        items.iter().map(|&i| self.score(u, i)).collect()
    }
}

/// Popularity of an item among the tags a user uses: `sum_t n_ut * n_ti`.
pub fn pop_score(u: usize, i: usize, tensor: &TagTensor) -> f64 {
    let profile = user_tag_profile(tensor, u).unwrap_or_default();
    let item_tags = TagVector::new(
        (0..tensor.num_users())
            .filter_map(|v| tensor.get(v, i))
            .flat_map(TagVector::iter),
    );
    profile.dot(&item_tags)
}

pub struct PopScorer {
    user_tags: Vec<TagVector>,
    item_tags: Vec<TagVector>,
}

impl PopScorer {
    pub fn new(tensor: &TagTensor) -> Self {
        let mut item_pairs: Vec<Vec<(usize, u32)>> = vec![Vec::new(); tensor.num_items()];
        for (_, i, tags) in tensor.entries() {
            item_pairs[i].extend(tags.iter());
        }
        PopScorer {
            user_tags: (0..tensor.num_users())
                .map(|u| user_tag_profile(tensor, u).expect("user in range"))
                .collect(),
            item_tags: item_pairs.into_iter().map(TagVector::new).collect(),
        }
    }
}

impl Scorer for PopScorer {
    fn name(&self) -> &str {
        "pop"
    }

    fn score(&self, u: usize, i: usize) -> f64 {
        self.user_tags[u].dot(&self.item_tags[i])
    }
}

/// Top-`k` users by tag-profile cosine, ties to the lower id; `u` excluded.
fn nearest_neighbors(profiles: &[TagVector], u: usize, k: usize) -> Vec<(usize, f64)> {
    let mut sims: Vec<(usize, f64)> = profiles
        .iter()
        .enumerate()
        .filter(|&(v, _)| v != u)
        .map(|(v, pv)| (v, cos_tags(&profiles[u], pv)))
        .collect();
    sims.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    sims.truncate(k);
    sims
}

fn clamp_neighbors(k: usize, num_users: usize) -> usize {
    let max = num_users.saturating_sub(1);
    if k > max {
        log::warn!("neighborhood size {k} exceeds {max} other users; clamping");
        max
    } else {
        k
    }
}

/// User-based CF: `sum_{v in N(u)} a_vi * cos(profile_u, profile_v)`.
pub fn ucf_score(u: usize, i: usize, tensor: &TagTensor, k: usize) -> f64 {
    let profiles: Vec<TagVector> = (0..tensor.num_users())
        .map(|v| user_tag_profile(tensor, v).expect("user in range"))
        .collect();
    let k = clamp_neighbors(k, tensor.num_users());
    nearest_neighbors(&profiles, u, k)
        .into_iter()
        .filter(|&(v, _)| tensor.contains(v, i))
        .map(|(_, s)| s)
        .sum()
}

pub struct UcfScorer {
    neighbors: Vec<Vec<(usize, f64)>>,
    selected: Vec<Vec<usize>>,
}

impl UcfScorer {
    pub fn new(tensor: &TagTensor, k: usize) -> Self {
        let profiles: Vec<TagVector> = (0..tensor.num_users())
            .map(|v| user_tag_profile(tensor, v).expect("user in range"))
            .collect();
        let k = clamp_neighbors(k, tensor.num_users());
        let neighbors = (0..tensor.num_users())
            .into_par_iter()
            .map(|u| nearest_neighbors(&profiles, u, k))
            .collect();
        UcfScorer {
            neighbors,
            selected: (0..tensor.num_users())
                .map(|v| tensor.row(v).keys().copied().collect())
                .collect(),
        }
    }
}

impl Scorer for UcfScorer {
    fn name(&self) -> &str {
        "ucf"
    }

    fn score(&self, u: usize, i: usize) -> f64 {
        self.neighbors[u]
            .iter()
            .filter(|&&(v, _)| self.selected[v].binary_search(&i).is_ok())
            .map(|&(_, s)| s)
            .sum()
    }
}

/// Scores by `S_u . V_i` from trained factors.
pub struct FactorScorer {
    name: String,
    factors: LatentFactors,
}

impl FactorScorer {
    pub fn new(name: impl Into<String>, factors: LatentFactors) -> Self {
        FactorScorer {
            name: name.into(),
            factors,
        }
    }

    pub fn factors(&self) -> &LatentFactors {
        &self.factors
    }
}

impl Scorer for FactorScorer {
    fn name(&self) -> &str {
        &self.name
    }

    fn score(&self, u: usize, i: usize) -> f64 {
        self.factors
            .user(u)
            .iter()
            .zip(self.factors.item(i))
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Social regularization without the user-item term: trains with `alpha`
/// forced to zero.
pub fn soreg_train(
    tensor: &TagTensor,
    sim: &SimilarityTable,
    cfg: &TrainingConfig,
) -> Result<(LatentFactors, TrainReport)> {
    let cfg = TrainingConfig {
        alpha: 0.0,
        ..cfg.clone()
    };
    train(tensor, sim, &CorrelationTable::empty(tensor.num_users()), &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LoadedCorpus;

    fn fixture() -> LoadedCorpus {
        // u used "design" three times; item x carries "design" from two users.
        LoadedCorpus::from_records([
            ("u", "a", "design"),
            ("u", "a", "design"),
            ("u", "b", "design"),
            ("v", "x", "design"),
            ("w", "x", "design"),
            ("w", "y", "css"),
        ])
        .unwrap()
    }

    #[test]
    fn pop_hand_counts() {
        let c = fixture();
        let t = &c.tensor;
        let x = c.items.get("x").unwrap();
        let y = c.items.get("y").unwrap();
        assert_eq!(pop_score(0, x, t), 6.0);
        assert_eq!(pop_score(0, y, t), 0.0);
        let scorer = PopScorer::new(t);
        for u in 0..t.num_users() {
            for i in 0..t.num_items() {
                assert_eq!(scorer.score(u, i), pop_score(u, i, t));
            }
        }
    }

    #[test]
    fn pop_is_zero_for_users_without_tags() {
        let c = fixture();
        let t = crate::corpus::TagTensor::from_entries(
            4,
            c.tensor.num_items(),
            c.tensor.tag_vocab().to_vec(),
            c.tensor.entries().map(|(u, i, v)| (u, i, v.clone())),
        )
        .unwrap();
        assert!((0..t.num_items()).all(|i| pop_score(3, i, &t) == 0.0));
    }

    #[test]
    fn ucf_hand_values() {
        // Profiles: u = {design:3}, v = {design:1}, w = {design:1, css:1}.
        let c = fixture();
        let t = &c.tensor;
        let x = c.items.get("x").unwrap();
        let y = c.items.get("y").unwrap();
        let a = c.items.get("a").unwrap();
        let w_cos = 1.0 / 2f64.sqrt();
        // N(u) with k=2 is {v (1.0), w (0.7071)}; both selected x.
        assert!((ucf_score(0, x, t, 2) - (1.0 + w_cos)).abs() < 1e-15);
        assert!((ucf_score(0, y, t, 2) - w_cos).abs() < 1e-15);
        assert_eq!(ucf_score(0, a, t, 2), 0.0);
        // k=1 keeps only v.
        assert_eq!(ucf_score(0, x, t, 1), 1.0);
        assert_eq!(ucf_score(0, y, t, 1), 0.0);
        assert_eq!(ucf_score(0, x, t, 0), 0.0);
        // k beyond the user count is clamped.
        assert_eq!(ucf_score(0, x, t, 10), ucf_score(0, x, t, 2));
        let scorer = UcfScorer::new(t, 2);
        assert_eq!(scorer.score(0, x), ucf_score(0, x, t, 2));
    }
}
