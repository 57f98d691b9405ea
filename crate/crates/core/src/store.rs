//! On-disk corpus directory written by `ingest` and read by the later
//! pipeline stages.
//!
//! ```text
//! users.tsv    <id>\t<key>
//! items.tsv    <id>\t<key>
//! tags.tsv     <id>\t<key>
//! train.tsv    <user>\t<item>\t<tag>\t<count>
//! test.tsv     <user>\t<item>\t<tag>\t<count>
//! friends.tsv  <user>\t<user>        (each edge once, lower id first)
//! split.tsv    seed\t<n>
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::corpus::{prune, split, DataSplit, FriendshipGraph, IdMap, LoadedCorpus, TagTensor, TagVector};
use crate::error::{Error, Result};

const FILES: [&str; 7] = ["users.tsv", "items.tsv", "tags.tsv", "train.tsv", "test.tsv", "friends.tsv", "split.tsv"];

#[derive(Clone, Debug)]
pub struct StoredCorpus {
    pub users: IdMap,
    pub items: IdMap,
    pub split: DataSplit,
    pub graph: FriendshipGraph,
}

fn id_map_tsv(map: &IdMap) -> String {
    map.keys()
        .iter()
        .enumerate()
        .map(|(id, key)| format!("{id}\t{key}\n"))
        .collect()
}

fn entries_tsv(rows: impl Iterator<Item = (usize, usize, TagVector)>) -> String {
    let mut out = String::new();
    for (u, i, tags) in rows {
        for (t, n) in tags.iter() {
            out.push_str(&format!("{u}\t{i}\t{t}\t{n}\n"));
        }
    }
    out
}

impl StoredCorpus {
    /// Prunes a loaded corpus and splits it with `seed`.
    pub fn build(
        loaded: &LoadedCorpus,
        graph: &FriendshipGraph,
        min_items: usize,
        require_friends: bool,
        test_fraction: f64,
        seed: u64,
    ) -> Result<Self> {
        let pruned = prune(&loaded.tensor, graph, min_items, require_friends)?;
        log::info!(
            "kept {} of {} users, {} of {} items",
            pruned.kept_users.len(),
            loaded.users.len(),
            pruned.kept_items.len(),
            loaded.items.len()
        );
        Ok(StoredCorpus {
            users: loaded.users.select(&pruned.kept_users),
            items: loaded.items.select(&pruned.kept_items),
            split: split(&pruned.tensor, test_fraction, seed)?,
            graph: pruned.graph,
        })
    }

    /// File name and contents, in a fixed order.
    pub fn files(&self) -> Vec<(&'static str, String)> {
        let train = &self.split.train;
        let test = self
            .split
            .test
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |(&i, t)| (u, i, t.clone())));
        let friends: String = self.graph.edges().map(|(a, b)| format!("{a}\t{b}\n")).collect();
        let tags = IdMap::from_keys(train.tag_vocab().iter().cloned());
        let contents = vec![
            id_map_tsv(&self.users),
            id_map_tsv(&self.items),
            id_map_tsv(&tags),
            entries_tsv(train.entries().map(|(u, i, t)| (u, i, t.clone()))),
            entries_tsv(test),
            friends,
            format!("seed\t{}\n", self.split.seed),
        ];
        FILES.into_iter().zip(contents).collect()
    }

    /// SHA-256 over every file name and its contents.
    pub fn checksum(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        for (name, text) in self.files() {
            hasher.update(name.as_bytes());
            hasher.update([0u8]);
            hasher.update((text.len() as u64).to_le_bytes());
            hasher.update(text.as_bytes());
        }
        hasher.finalize().into()
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, text) in self.files() {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let load = |name: &str| -> Result<(String, String)> {
            let path = dir.join(name);
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            Ok((path.display().to_string(), text))
        };
        let users = parse_id_map(load("users.tsv")?)?;
        let items = parse_id_map(load("items.tsv")?)?;
        let tags = parse_id_map(load("tags.tsv")?)?;
        let (p, q) = (users.len(), items.len());
        let vocab = tags.keys().to_vec();
        let train = TagTensor::from_entries(p, q, vocab.clone(), parse_entries(load("train.tsv")?)?)?;
        let test_tensor = TagTensor::from_entries(p, q, vocab, parse_entries(load("test.tsv")?)?)?;
        let test: Vec<BTreeMap<usize, TagVector>> = (0..p).map(|u| test_tensor.row(u).clone()).collect();
        let (name, text) = load("friends.tsv")?;
        let mut edges = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let fields = fields(&name, n, line, 2)?;
            edges.push((fields[0], fields[1]));
        }
        let graph = FriendshipGraph::from_edges(p, edges)?;
        let (name, text) = load("split.tsv")?;
        let seed = text
            .lines()
            .find_map(|l| l.strip_prefix("seed\t"))
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse {
                path: name.clone(),
                line: 1,
                message: "expected `seed\\t<n>`".into(),
            })?;
        Ok(StoredCorpus {
            users,
            items,
            split: DataSplit { train, test, seed },
            graph,
        })
    }
}

fn fields(name: &str, n: usize, line: &str, want: usize) -> Result<Vec<usize>> {
    let parts: Vec<&str> = line.split('\t').collect();
    let bad = |message: String| Error::Parse {
        path: name.to_owned(),
        line: n + 1,
        message,
    };
    if parts.len() != want {
        return Err(bad(format!("expected {want} fields, found {}", parts.len())));
    }
    parts
        .iter()
        .map(|s| s.parse::<usize>().map_err(|_| bad(format!("`{s}` is not a non-negative integer"))))
        .collect()
}

fn parse_id_map((name, text): (String, String)) -> Result<IdMap> {
    let mut keys = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let (id, key) = line.split_once('\t').ok_or_else(|| Error::Parse {
            path: name.clone(),
            line: n + 1,
            message: "expected `<id>\\t<key>`".into(),
        })?;
        if id.parse::<usize>().ok() != Some(n) {
            return Err(Error::Parse {
                path: name.clone(),
                line: n + 1,
                message: format!("ids must be dense and ordered, expected {n}"),
            });
        }
        keys.push(key.to_owned());
    }
    Ok(IdMap::from_keys(keys))
}

fn parse_entries((name, text): (String, String)) -> Result<Vec<(usize, usize, TagVector)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let f = fields(&name, n, line, 4)?;
        if f[3] == 0 || f[3] > u32::MAX as usize {
            return Err(Error::Parse {
                path: name.clone(),
                line: n + 1,
                message: format!("tag count {} out of range", f[3]),
            });
        }
        out.push((f[0], f[1], TagVector::new([(f[2], f[3] as u32)])));
    }
    Ok(out)
}
