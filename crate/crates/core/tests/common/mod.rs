//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softrec::affinity::{build_correlation_table, CorrelationTable, SimilarityMode, SimilarityTable};
use softrec::corpus::{FriendshipGraph, ScalarMode, TagTensor, TagVector};
use softrec::factorizer::{LatentFactors, TrainingConfig};

pub struct Instance {
    pub tensor: TagTensor,
    pub graph: FriendshipGraph,
    pub sim: SimilarityTable,
    pub corr: CorrelationTable,
    pub factors: LatentFactors,
}

/// Random tagged corpus, friend graph, similarity weights in (0, 1] and
/// factors in [-1, 1].
pub fn instance(p: usize, q: usize, l: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab: Vec<String> = (0..5).map(|t| format!("t{t}")).collect();
    let mut entries = Vec::new();
    for u in 0..p {
        for i in 0..q {
            if rng.random_bool(0.35) || i == u % q {
                let tags: Vec<(usize, u32)> = (0..rng.random_range(1..=3))
                    .map(|_| (rng.random_range(0..5), rng.random_range(1..=3)))
                    .collect();
                entries.push((u, i, TagVector::new(tags)));
            }
        }
    }
    let tensor = TagTensor::from_entries(p, q, vocab, entries).unwrap();
    let mut edges = Vec::new();
    for a in 0..p {
        for b in a + 1..p {
            if rng.random_bool(0.4) {
                edges.push((a, b));
            }
        }
    }
    let graph = FriendshipGraph::from_edges(p, edges.clone()).unwrap();
    let sim = SimilarityTable::from_values(
        p,
        SimilarityMode::Soft,
        edges.iter().map(|&(a, b)| (a, b, rng.random_range(0.05..=1.0))),
    )
    .unwrap();
    let corr = build_correlation_table(&graph, &tensor).unwrap();
    let users = (0..p).map(|_| (0..l).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let items = (0..q).map(|_| (0..l).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let factors = LatentFactors::from_vectors(l, users, items).unwrap();
    Instance {
        tensor,
        graph,
        sim,
        corr,
        factors,
    }
}

fn dense(t: &TagVector, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for (tag, c) in t.iter() {
        v[tag] += c as f64;
    }
    v
}

pub fn naive_cos(a: &[f64], b: &[f64]) -> f64 {
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    if aa == 0.0 || bb == 0.0 {
        0.0
    } else {
        ab / (aa.sqrt() * bb.sqrt())
    }
}

/// `corr(f, i)` straight from its definition.
pub fn naive_corr(f: usize, i: usize, tensor: &TagTensor) -> f64 {
    let n = tensor.num_tags();
    let Some(ti) = tensor.get(f, i) else {
        return 0.0;
    };
    let ti = dense(ti, n);
    let own: Vec<usize> = (0..tensor.num_items()).filter(|&j| tensor.contains(f, j)).collect();
    own.iter()
        .map(|&j| naive_cos(&ti, &dense(tensor.get(f, j).unwrap(), n)))
        .sum::<f64>()
        / own.len() as f64
}

fn target(tensor: &TagTensor, mode: ScalarMode, u: usize, i: usize) -> f64 {
    match (tensor.get(u, i), mode) {
        (None, _) => 0.0,
        (Some(_), ScalarMode::Binary) => 1.0,
        (Some(t), ScalarMode::TagCount) => t.iter().map(|(_, c)| c as f64).sum(),
    }
}

fn score(factors: &LatentFactors, u: usize, i: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..factors.dim() {
        s += factors.user(u)[k] * factors.item(i)[k];
    }
    s
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    let mut d = 0.0;
    for k in 0..a.len() {
        d += (a[k] - b[k]) * (a[k] - b[k]);
    }
    d
}

/// Full objective by explicit loops over users, items and friends.
pub fn naive_loss(f: &LatentFactors, tensor: &TagTensor, graph: &FriendshipGraph, sim: &SimilarityTable, cfg: &TrainingConfig) -> f64 {
    let (p, q) = (tensor.num_users(), tensor.num_items());
    let mut total = 0.0;
    for u in 0..p {
        for i in 0..q {
            let s = score(f, u, i);
            if tensor.contains(u, i) {
                let r = target(tensor, cfg.scalar_mode, u, i) - s;
                total += 0.5 * r * r;
            } else {
                total += 0.5 * cfg.unobserved_weight * s * s;
            }
        }
    }
    for u in 0..p {
        for k in 0..f.dim() {
            total += 0.5 * cfg.lambda_user * f.user(u)[k] * f.user(u)[k];
        }
    }
    for i in 0..q {
        for k in 0..f.dim() {
            total += 0.5 * cfg.lambda_item * f.item(i)[k] * f.item(i)[k];
        }
    }
    for u in 0..p {
        for &fr in graph.friends(u) {
            let d = dist_sq(f.user(u), f.user(fr));
            for i in 0..q {
                total += 0.5 * cfg.alpha * naive_corr(fr, i, tensor) * d;
            }
            total += 0.5 * cfg.beta * sim.get(u, fr).unwrap() * d;
        }
    }
    total
}

/// Central finite differences of `loss` with respect to each coordinate
/// produced by `slot`.
pub fn finite_difference(
    factors: &LatentFactors,
    len: usize,
    slot: impl Fn(&mut LatentFactors, usize) -> &mut f64,
    loss: impl Fn(&LatentFactors) -> f64,
) -> Vec<f64> {
    let h = 1e-6;
    (0..len)
        .map(|k| {
            let mut plus = factors.clone();
            *slot(&mut plus, k) += h;
            let mut minus = factors.clone();
            *slot(&mut minus, k) -= h;
            (loss(&plus) - loss(&minus)) / (2.0 * h)
        })
        .collect()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    diff / scale.max(1e-8)
}

/// Largest relative error between analytic and finite-difference gradients
/// over every user and item block.
pub fn max_gradient_error(inst: &Instance, cfg: &TrainingConfig) -> f64 {
    use softrec::factorizer::Objective;
    let obj = Objective::new(&inst.tensor, &inst.sim, &inst.corr, cfg).unwrap();
    let loss = |f: &LatentFactors| obj.loss(f).unwrap().total();
    let l = inst.factors.dim();
    let mut worst: f64 = 0.0;
    for u in 0..inst.tensor.num_users() {
        let fd = finite_difference(&inst.factors, l, |f, k| &mut f.user_mut(u)[k], loss);
        worst = worst.max(rel_err(&obj.grad_user(u, &inst.factors).unwrap(), &fd));
    }
    for i in 0..inst.tensor.num_items() {
        let fd = finite_difference(&inst.factors, l, |f, k| &mut f.item_mut(i)[k], loss);
        worst = worst.max(rel_err(&obj.grad_item(i, &inst.factors).unwrap(), &fd));
    }
    worst
}

/// Cluster count capped by the number of distinct profiles.
pub fn cap(profiles: &[Vec<f64>], k: usize) -> usize {
    let mut distinct: Vec<&Vec<f64>> = Vec::new();
    for p in profiles {
        if !distinct.contains(&p) {
            distinct.push(p);
        }
    }
    k.min(distinct.len())
}

pub fn cfg(alpha: f64, beta: f64, l: usize) -> TrainingConfig {
    TrainingConfig {
        alpha,
        beta,
        latent_dim: l,
        lambda_user: 0.3,
        lambda_item: 0.2,
        ..TrainingConfig::default()
    }
}

pub mod pipeline {
    use std::path::{Path, PathBuf};
    use std::process::{Command, Output};

    pub fn softrec(args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_softrec")).args(args).output().unwrap()
    }

    pub fn ok(args: &[&str]) {
        let out = softrec(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }

    /// Stages run by [`run`], with their extra arguments.
    pub fn stages(root: &Path) -> Vec<(&'static str, Vec<String>)> {
        let p = |s: &str| root.join(s).display().to_string();
        vec![
            ("gen", vec!["gen-synthetic".into(), "--users-per-cluster".into(), "30".into(), "--items-per-cluster".into(), "50".into()]),
            ("corpus", vec!["ingest".into(), "--interactions".into(), p("gen/interactions.tsv"), "--friendships".into(), p("gen/friendships.tsv")]),
            ("clusters", vec!["cluster".into(), "--corpus".into(), p("corpus"), "--clusters".into(), "2".into()]),
            (
                "train",
                vec![
                    "train".into(), "--corpus".into(), p("corpus"), "--method".into(), "frsbosn".into(),
                    "--memberships".into(), p("clusters/memberships.tsv"), "--max-iter".into(), "8".into(), "--dump-tables".into(),
                ],
            ),
            ("eval", vec!["evaluate".into(), "--corpus".into(), p("corpus"), "--checkpoint".into(), p("train/factors.bin"), "--method".into(), "frsbosn".into()]),
            (
                "sweep",
                vec![
                    "sweep".into(), "beta".into(), "--corpus".into(), p("corpus"), "--values".into(), "0.01,0.3".into(),
                    "--max-iter".into(), "3".into(), "--clusters".into(), "2".into(),
                ],
            ),
        ]
    }

    /// Runs every stage under `root` with the `synthetic` preset.
    pub fn run(root: &Path) {
        for (dir, args) in stages(root) {
            let out = root.join(dir).display().to_string();
            let mut all = vec!["--preset", "synthetic", "--out-dir", out.as_str()];
            all.extend(args.iter().map(String::as_str));
            ok(&all);
        }
    }

    /// Reruns each stage from its manifest into `<stage>-again`.
    pub fn rerun(root: &Path) -> Vec<(PathBuf, PathBuf)> {
        let mut pairs = Vec::new();
        for (dir, args) in stages(root) {
            let manifest = root.join(dir).join("manifest.toml").display().to_string();
            let again = root.join(format!("{dir}-again"));
            ok(&["--config", &manifest, "--out-dir", &again.display().to_string(), &args[0]]);
            pairs.push((root.join(dir), again));
        }
        pairs
    }

    /// Output files of a stage directory, manifest excluded.
    pub fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.file_name().unwrap() != "manifest.toml")
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
            .collect();
        files.sort();
        files
    }
}
