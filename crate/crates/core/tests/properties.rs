mod common;

use proptest::prelude::*;
use softrec::affinity::{build_similarity_table, corr, sim_hard, sim_soft, SimNorm, SimilarityMode};
use softrec::baselines::{pop_score, ucf_score, Scorer};
use softrec::clustering::{cmeans, kmeans, normalized_profiles};
use softrec::corpus::{prune, split, FriendshipGraph, LoadedCorpus, TagTensor};
use softrec::evaluator::{evaluate, top_k};

fn corpus_strategy() -> impl Strategy<Value = (LoadedCorpus, FriendshipGraph)> {
    (
        prop::collection::vec((0..8usize, 0..10usize, 0..4usize), 6..60),
        prop::collection::vec((0..8usize, 0..8usize), 0..20),
    )
        .prop_map(|(records, pairs)| {
            let owned: Vec<(String, String, String)> = records
                .iter()
                .map(|(u, i, t)| (format!("u{u}"), format!("i{i}"), format!("t{t}")))
                .collect();
            let c = LoadedCorpus::from_records(owned.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str()))).unwrap();
            let p = c.users.len();
            let edges: Vec<(usize, usize)> = pairs
                .into_iter()
                .map(|(a, b)| (a % p, b % p))
                .filter(|(a, b)| a != b)
                .collect();
            let g = FriendshipGraph::from_edges(p, edges).unwrap();
            (c, g)
        })
}

struct Table(Vec<f64>);

impl Scorer for Table {
    fn name(&self) -> &str {
        "table"
    }
    fn score(&self, _u: usize, i: usize) -> f64 {
        self.0[i]
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn prune_is_idempotent((c, g) in corpus_strategy(), min_items in 1..4usize, friends in any::<bool>()) {
        if let Ok(once) = prune(&c.tensor, &g, min_items, friends) {
            let twice = prune(&once.tensor, &once.graph, min_items, friends).unwrap();
            prop_assert_eq!(&twice.tensor, &once.tensor);
            prop_assert_eq!(&twice.graph, &once.graph);
            for u in 0..once.tensor.num_users() {
                prop_assert!(once.tensor.degree(u) >= min_items);
                prop_assert!(!friends || !once.graph.friends(u).is_empty());
            }
        }
    }

    #[test]
    fn split_partitions_every_user((c, _g) in corpus_strategy(), frac in 0.05..0.95f64, seed in any::<u64>()) {
        let s = split(&c.tensor, frac, seed).unwrap();
        for u in 0..c.tensor.num_users() {
            let n = c.tensor.degree(u);
            prop_assert_eq!(s.train.degree(u) + s.test[u].len(), n);
            prop_assert!(s.train.degree(u) >= 1);
            for i in s.test[u].keys() {
                prop_assert!(!s.train.contains(u, *i) && c.tensor.contains(u, *i));
            }
        }
        prop_assert_eq!(split(&c.tensor, frac, seed).unwrap(), s);
    }

    #[test]
    fn fuzzy_rows_sum_to_one_and_objectives_descend((c, _g) in corpus_strategy(), k in 1..4usize, m in 1.2..3.0f64, seed in any::<u64>()) {
        let profiles = normalized_profiles(&c.tensor);
        let k = common::cap(&profiles, k);
        let fuzzy = cmeans(&profiles, k, m, 50, 0.0, seed).unwrap();
        for row in &fuzzy.memberships {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
        for w in fuzzy.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        let hard = kmeans(&profiles, k, 50, 0.0, seed).unwrap();
        prop_assert!(hard.is_one_hot());
        for w in hard.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn similarities_are_symmetric_and_bounded((c, g) in corpus_strategy(), k in 1..4usize, lambda in 0.05..0.95f64, seed in any::<u64>()) {
        let t = &c.tensor;
        let profiles = normalized_profiles(t);
        let k = common::cap(&profiles, k);
        let soft = cmeans(&profiles, k, 2.0, 30, 1e-9, seed).unwrap();
        let hard = kmeans(&profiles, k, 30, 1e-9, seed).unwrap();
        for (u, f) in g.edges() {
            let a = sim_soft(u, f, t, &soft, SimNorm::Cotag).unwrap();
            prop_assert_eq!(a, sim_soft(f, u, t, &soft, SimNorm::Cotag).unwrap());
            prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
            let b = sim_hard(u, f, t, &hard, lambda, SimNorm::Cotag).unwrap();
            prop_assert_eq!(b, sim_hard(f, u, t, &hard, lambda, SimNorm::Cotag).unwrap());
            prop_assert!(b >= 0.0 && b <= lambda.max(1.0 - lambda) + 1e-12);
        }
        let table = build_similarity_table(&g, t, &soft, SimilarityMode::Soft, SimNorm::Cotag).unwrap();
        for (u, f) in g.edges() {
            prop_assert_eq!(table.get(u, f), table.get(f, u));
            prop_assert_eq!(table.get(u, f), Some(sim_soft(u, f, t, &soft, SimNorm::Cotag).unwrap()));
        }
    }

    #[test]
    fn soft_similarity_ignores_cluster_labels((c, g) in corpus_strategy(), seed in any::<u64>()) {
        let t = &c.tensor;
        let profiles = normalized_profiles(t);
        let k = common::cap(&profiles, 3);
        let soft = cmeans(&profiles, k, 2.0, 30, 1e-9, seed).unwrap();
        let perm: Vec<usize> = (0..k).rev().collect();
        let relabeled = soft.permuted(&perm);
        for (u, f) in g.edges() {
            let a = sim_soft(u, f, t, &soft, SimNorm::Cotag).unwrap();
            let b = sim_soft(u, f, t, &relabeled, SimNorm::Cotag).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn corr_lies_in_unit_interval((c, _g) in corpus_strategy()) {
        let t = &c.tensor;
        for f in 0..t.num_users() {
            for i in 0..t.num_items() {
                let v = corr(f, i, t);
                prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
                prop_assert!((v - common::naive_corr(f, i, t)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn pop_score_follows_item_relabeling((c, _g) in corpus_strategy(), shift in 1..10usize) {
        let t = &c.tensor;
        let q = t.num_items();
        let moved = |i: usize| (i + shift) % q;
        let relabeled = TagTensor::from_entries(
            t.num_users(),
            q,
            t.tag_vocab().to_vec(),
            t.entries().map(|(u, i, tags)| (u, moved(i), tags.clone())),
        ).unwrap();
        for u in 0..t.num_users() {
            for i in 0..q {
                prop_assert_eq!(pop_score(u, i, t), pop_score(u, moved(i), &relabeled));
            }
        }
    }

    #[test]
    fn ucf_with_no_neighbors_is_zero((c, _g) in corpus_strategy()) {
        let t = &c.tensor;
        for u in 0..t.num_users() {
            for i in 0..t.num_items() {
                prop_assert_eq!(ucf_score(u, i, t, 0), 0.0);
            }
        }
    }

    #[test]
    fn top_k_equals_full_sort(scores in prop::collection::vec(0..6u8, 1..25), k in 0..30usize) {
        let q = scores.len();
        let scores: Vec<f64> = scores.into_iter().map(f64::from).collect();
        let train = TagTensor::empty(1, q, vec!["t".into()]);
        let mut oracle: Vec<usize> = (0..q).collect();
        oracle.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
        oracle.truncate(k);
        prop_assert_eq!(top_k(0, &Table(scores), k, &train), oracle);
    }

    #[test]
    fn hits_and_recall_grow_with_k((c, _g) in corpus_strategy(), seed in any::<u64>(), noise in prop::collection::vec(0.0..1.0f64, 10)) {
        let s = split(&c.tensor, 0.4, seed).unwrap();
        prop_assume!(s.num_test_entries() > 0);
        let scores: Vec<f64> = (0..c.tensor.num_items()).map(|i| noise[i % noise.len()]).collect();
        let report = evaluate(&Table(scores), &s, &[1, 2, 3, 5, 8]).unwrap();
        for e in &report.per_user {
            for n in 1..e.hits.len() {
                prop_assert!(e.hits[n] >= e.hits[n - 1]);
                prop_assert!(e.recall(n) >= e.recall(n - 1));
            }
        }
    }
}
