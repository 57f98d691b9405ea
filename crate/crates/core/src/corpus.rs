//! User-item-tag interactions and the friendship graph.
//!
//! The tag tensor keeps per-entry tag-count vectors as ground truth. Scalar
//! targets for factorization are derived through [`ScalarMode`], and the set
//! of items a user selected, `O(u)`, is always read off the stored rows.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse tag-count vector, sorted by tag id, every count at least one.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TagVector(Vec<(usize, u32)>);

impl TagVector {
    /// Builds a vector from arbitrary `(tag, count)` pairs, merging repeats
    /// and dropping zero counts.
    pub fn new(pairs: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut merged: BTreeMap<usize, u32> = BTreeMap::new();
        for (tag, count) in pairs {
            if count > 0 {
                *merged.entry(tag).or_default() += count;
            }
        }
        TagVector(merged.into_iter().collect())
    }

    pub fn single(tag: usize) -> Self {
        TagVector(vec![(tag, 1)])
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of distinct tags.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Sum of all tag counts.
    pub fn total(&self) -> u64 {
        self.0.iter().map(|&(_, c)| u64::from(c)).sum()
    }

    pub fn count(&self, tag: usize) -> u32 {
        self.0
            .binary_search_by_key(&tag, |&(t, _)| t)
            .map(|pos| self.0[pos].1)
            .unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().copied()
    }

    pub fn dot(&self, other: &TagVector) -> f64 {
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        let mut acc = 0.0;
        while let (Some(&&(ta, ca)), Some(&&(tb, cb))) = (a.peek(), b.peek()) {
            match ta.cmp(&tb) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    acc += f64::from(ca) * f64::from(cb);
                    a.next();
                    b.next();
                }
            }
        }
        acc
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|&(_, c)| f64::from(c) * f64::from(c)).sum()
    }

    pub fn add(&mut self, other: &TagVector) {
        *self = TagVector::new(self.iter().chain(other.iter()));
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for &(t, c) in &self.0 {
            if t < dim {
                out[t] = f64::from(c);
            }
        }
        out
    }
}

/// Dense id assignment for string keys, in first-seen order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdMap {
    keys: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_keys(keys: impl IntoIterator<Item = String>) -> Self {
        let mut map = IdMap::new();
        for k in keys {
            map.intern(&k);
        }
        map
    }

    pub fn intern(&mut self, key: &str) -> usize {
        if let Some(&id) = self.index.get(key) {
            return id;
        }
        let id = self.keys.len();
        self.keys.push(key.to_owned());
        self.index.insert(key.to_owned(), id);
        id
    }

    pub fn get(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn key(&self, id: usize) -> Option<&str> {
        self.keys.get(id).map(String::as_str)
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Restricts the map to `ids` (old ids, in new-id order).
    pub fn select(&self, ids: &[usize]) -> IdMap {
        IdMap::from_keys(ids.iter().map(|&id| self.keys[id].clone()))
    }
}

/// How an entry's tag vector becomes the scalar factorization target.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarMode {
    /// 1 wherever an entry exists.
    Binary,
    /// Number of tags on the entry.
    #[default]
    TagCount,
}

impl ScalarMode {
    pub fn value(self, tags: &TagVector) -> f64 {
        match self {
            ScalarMode::Binary => 1.0,
            ScalarMode::TagCount => tags.total() as f64,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            ScalarMode::Binary => 0,
            ScalarMode::TagCount => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(ScalarMode::Binary),
            1 => Some(ScalarMode::TagCount),
            _ => None,
        }
    }
}

impl fmt::Display for ScalarMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalarMode::Binary => "binary",
            ScalarMode::TagCount => "tag-count",
        })
    }
}

impl FromStr for ScalarMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(ScalarMode::Binary),
            "tag-count" => Ok(ScalarMode::TagCount),
            other => Err(Error::config(
                "scalar_mode",
                format!("expected `binary` or `tag-count`, got `{other}`"),
            )),
        }
    }
}

/// Sparse user x item store of tag-count vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TagTensor {
    num_items: usize,
    tag_vocab: Vec<String>,
    rows: Vec<BTreeMap<usize, TagVector>>,
}

impl TagTensor {
    pub fn empty(num_users: usize, num_items: usize, tag_vocab: Vec<String>) -> Self {
        TagTensor {
            num_items,
            tag_vocab,
            rows: vec![BTreeMap::new(); num_users],
        }
    }

    /// Builds a tensor from `(user, item, tags)` triples. Repeated keys are
    /// merged by adding their tag counts.
    pub fn from_entries(
        num_users: usize,
        num_items: usize,
        tag_vocab: Vec<String>,
        entries: impl IntoIterator<Item = (usize, usize, TagVector)>,
    ) -> Result<Self> {
        let mut tensor = TagTensor::empty(num_users, num_items, tag_vocab);
        for (u, i, tags) in entries {
            if u >= num_users || i >= num_items {
                return Err(Error::Index(format!(
                    "entry ({u}, {i}) outside {num_users} x {num_items}"
                )));
            }
            if let Some(&(t, _)) = tags.0.last() {
                if t >= tensor.tag_vocab.len() {
                    return Err(Error::Index(format!("tag id {t} outside vocabulary")));
                }
            } else {
                return Err(Error::Invariant(format!("entry ({u}, {i}) has no tags")));
            }
            tensor.rows[u]
                .entry(i)
                .and_modify(|v| v.add(&tags))
                .or_insert(tags);
        }
        Ok(tensor)
    }

    pub fn num_users(&self) -> usize {
        self.rows.len()
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn tag_vocab(&self) -> &[String] {
        &self.tag_vocab
    }

    pub fn num_tags(&self) -> usize {
        self.tag_vocab.len()
    }

    pub fn num_entries(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    /// The items selected by `u`, `O(u)`, with their tag vectors, by item id.
    pub fn row(&self, u: usize) -> &BTreeMap<usize, TagVector> {
        &self.rows[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.rows[u].len()
    }

    pub fn get(&self, u: usize, i: usize) -> Option<&TagVector> {
        self.rows.get(u).and_then(|r| r.get(&i))
    }

    pub fn contains(&self, u: usize, i: usize) -> bool {
        self.get(u, i).is_some()
    }

    /// All entries in `(user, item)` order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &TagVector)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |(&i, t)| (u, i, t)))
    }

    /// Users who selected each item, by ascending user id.
    pub fn item_users(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_items];
        for (u, i, _) in self.entries() {
            out[i].push(u);
        }
        out
    }

    pub fn scalar(&self, mode: ScalarMode, u: usize, i: usize) -> f64 {
        self.get(u, i).map_or(0.0, |t| mode.value(t))
    }
}

/// Undirected, irreflexive user adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FriendshipGraph {
    adjacency: Vec<Vec<usize>>,
}

impl FriendshipGraph {
    pub fn empty(num_users: usize) -> Self {
        FriendshipGraph {
            adjacency: vec![Vec::new(); num_users],
        }
    }

    /// Symmetric closure of `edges`; self-loops and duplicates are dropped.
    pub fn from_edges(
        num_users: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); num_users];
        for (a, b) in edges {
            if a >= num_users || b >= num_users {
                return Err(Error::Index(format!(
                    "edge ({a}, {b}) outside {num_users} users"
                )));
            }
            if a != b {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(FriendshipGraph { adjacency })
    }

    pub fn num_users(&self) -> usize {
        self.adjacency.len()
    }

    pub fn friends(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn are_friends(&self, u: usize, f: usize) -> bool {
        self.adjacency
            .get(u)
            .is_some_and(|l| l.binary_search(&f).is_ok())
    }

    /// Each undirected edge once, as `(u, f)` with `u < f`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, fs)| {
            fs.iter()
                .copied()
                .filter(move |&f| u < f)
                .map(move |f| (u, f))
        })
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Full scan of the symmetry and irreflexivity invariants.
    pub fn is_consistent(&self) -> bool {
        self.adjacency.iter().enumerate().all(|(u, fs)| {
            fs.windows(2).all(|w| w[0] < w[1])
                && fs
                    .iter()
                    .all(|&f| f != u && f < self.num_users() && self.are_friends(f, u))
        })
    }
}

/// Field separator of the text input formats.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Delimiter {
    /// Tab if the line has one, else comma, else runs of whitespace.
    #[default]
    Auto,
    Tab,
    Comma,
    Whitespace,
}

impl Delimiter {
    fn split(self, line: &str) -> Vec<&str> {
        let resolved = match self {
            Delimiter::Auto if line.contains('\t') => Delimiter::Tab,
            Delimiter::Auto if line.contains(',') => Delimiter::Comma,
            Delimiter::Auto => Delimiter::Whitespace,
            d => d,
        };
        match resolved {
            Delimiter::Tab => line.split('\t').map(str::trim).collect(),
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
            _ => line.split_whitespace().collect(),
        }
    }
}

impl FromStr for Delimiter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Delimiter::Auto),
            "tab" => Ok(Delimiter::Tab),
            "comma" => Ok(Delimiter::Comma),
            "whitespace" => Ok(Delimiter::Whitespace),
            other => Err(Error::config("delimiter", format!("unknown delimiter `{other}`"))),
        }
    }
}

/// A tensor together with the key maps used to build it.
#[derive(Clone, Debug)]
pub struct LoadedCorpus {
    pub tensor: TagTensor,
    pub users: IdMap,
    pub items: IdMap,
}

impl LoadedCorpus {
    /// Builds a corpus from `(user, item, tag)` records, aggregating repeats.
    pub fn from_records<'a>(
        records: impl IntoIterator<Item = (&'a str, &'a str, &'a str)>,
    ) -> Result<Self> {
        let mut users = IdMap::new();
        let mut items = IdMap::new();
        let mut tags = IdMap::new();
        let mut triples = Vec::new();
        for (u, i, t) in records {
            triples.push((users.intern(u), items.intern(i), tags.intern(t)));
        }
        Self::assemble(users, items, tags, triples)
    }

    fn assemble(
        users: IdMap,
        items: IdMap,
        tags: IdMap,
        triples: Vec<(usize, usize, usize)>,
    ) -> Result<Self> {
        if triples.is_empty() {
            return Err(Error::EmptyCorpus("no interaction records".into()));
        }
        let tensor = TagTensor::from_entries(
            users.len(),
            items.len(),
            tags.keys().to_vec(),
            triples
                .into_iter()
                .map(|(u, i, t)| (u, i, TagVector::single(t))),
        )?;
        Ok(LoadedCorpus {
            tensor,
            users,
            items,
        })
    }
}

fn content_lines<'a>(reader: impl BufRead + 'a, name: &'a str) -> impl Iterator<Item = Result<(usize, String)>> + 'a {
    reader
        .lines()
        .enumerate()
        .map(move |(n, line)| {
            line.map(|l| (n + 1, l)).map_err(|e| Error::Parse {
                path: name.to_owned(),
                line: n + 1,
                message: e.to_string(),
            })
        })
        .filter(|r| {
            r.as_ref()
                .map(|(_, l)| {
                    let t = l.trim();
                    !t.is_empty() && !t.starts_with('#')
                })
                .unwrap_or(true)
        })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Reads `user<sep>item<sep>tag` records.
pub fn load_interactions(path: &Path, delimiter: Delimiter) -> Result<LoadedCorpus> {
    parse_interactions(open(path)?, &path.display().to_string(), delimiter)
}

pub fn parse_interactions(
    reader: impl BufRead,
    name: &str,
    delimiter: Delimiter,
) -> Result<LoadedCorpus> {
    let mut users = IdMap::new();
    let mut items = IdMap::new();
    let mut tags = IdMap::new();
    let mut triples = Vec::new();
    for line in content_lines(reader, name) {
        let (line_no, line) = line?;
        let fields = delimiter.split(line.trim());
        let err = |message: String| Error::Parse {
            path: name.to_owned(),
            line: line_no,
            message,
        };
        if fields.len() != 3 {
            return Err(err(format!("expected 3 fields, found {}", fields.len())));
        }
        if fields.iter().any(|f| f.is_empty()) {
            return Err(err("empty field".into()));
        }
        triples.push((
            users.intern(fields[0]),
            items.intern(fields[1]),
            tags.intern(fields[2]),
        ));
    }
    LoadedCorpus::assemble(users, items, tags, triples)
}

/// Reads friendship pairs or group lines (`group:<id>` / `<id>:` followed by
/// member keys; every pair of members becomes an edge).
pub fn load_friendships(path: &Path, users: &IdMap, delimiter: Delimiter) -> Result<FriendshipGraph> {
    parse_friendships(open(path)?, &path.display().to_string(), users, delimiter)
}

pub fn parse_friendships(
    reader: impl BufRead,
    name: &str,
    users: &IdMap,
    delimiter: Delimiter,
) -> Result<FriendshipGraph> {
    let mut edges = Vec::new();
    for line in content_lines(reader, name) {
        let (line_no, line) = line?;
        let fields = delimiter.split(line.trim());
        let lookup = |key: &str| {
            users.get(key).ok_or_else(|| Error::UnknownUser {
                key: key.to_owned(),
                line: line_no,
            })
        };
        let is_group = fields
            .first()
            .is_some_and(|f| f.starts_with("group:") || f.ends_with(':'));
        if is_group {
            let members = fields[1..]
                .iter()
                .filter(|f| !f.is_empty())
                .map(|k| lookup(k))
                .collect::<Result<Vec<_>>>()?;
            for (n, &a) in members.iter().enumerate() {
                for &b in &members[n + 1..] {
                    edges.push((a, b));
                }
            }
        } else {
            if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
                return Err(Error::Parse {
                    path: name.to_owned(),
                    line: line_no,
                    message: format!("expected a user pair, found {} fields", fields.len()),
                });
            }
            edges.push((lookup(fields[0])?, lookup(fields[1])?));
        }
    }
    FriendshipGraph::from_edges(users.len(), edges)
}

/// Output of [`prune`]: the reduced data plus new-to-old id maps.
#[derive(Clone, Debug)]
pub struct Pruned {
    pub tensor: TagTensor,
    pub graph: FriendshipGraph,
    pub kept_users: Vec<usize>,
    pub kept_items: Vec<usize>,
}

/// Drops users with fewer than `min_items` items and, when `require_friends`
/// is set, users left without friends, until nothing changes. Items without
/// remaining entries are dropped and all ids re-densified.
pub fn prune(
    tensor: &TagTensor,
    graph: &FriendshipGraph,
    min_items: usize,
    require_friends: bool,
) -> Result<Pruned> {
    if graph.num_users() != tensor.num_users() {
        return Err(Error::Shape(format!(
            "graph has {} users, tensor has {}",
            graph.num_users(),
            tensor.num_users()
        )));
    }
    let p = tensor.num_users();
    let mut alive: Vec<bool> = (0..p).map(|u| tensor.degree(u) >= min_items).collect();
    if require_friends {
        loop {
            let mut changed = false;
            for u in 0..p {
                if alive[u] && !graph.friends(u).iter().any(|&f| alive[f]) {
                    alive[u] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    let kept_users: Vec<usize> = (0..p).filter(|&u| alive[u]).collect();
    let mut item_used = vec![false; tensor.num_items()];
    for &u in &kept_users {
        for &i in tensor.row(u).keys() {
            item_used[i] = true;
        }
    }
    let kept_items: Vec<usize> = (0..tensor.num_items()).filter(|&i| item_used[i]).collect();
    if kept_users.is_empty() || kept_items.is_empty() {
        return Err(Error::EmptyCorpus("pruning removed every user".into()));
    }

    let user_new = remap(p, &kept_users);
    let item_new = remap(tensor.num_items(), &kept_items);
    let new_tensor = TagTensor::from_entries(
        kept_users.len(),
        kept_items.len(),
        tensor.tag_vocab.clone(),
        kept_users.iter().flat_map(|&u| {
            let (user_new, item_new) = (&user_new, &item_new);
            tensor
                .row(u)
                .iter()
                .map(move |(&i, t)| (user_new[u].unwrap(), item_new[i].unwrap(), t.clone()))
        }),
    )?;
    let new_graph = FriendshipGraph::from_edges(
        kept_users.len(),
        graph
            .edges()
            .filter_map(|(a, b)| Some((user_new[a]?, user_new[b]?))),
    )?;
    Ok(Pruned {
        tensor: new_tensor,
        graph: new_graph,
        kept_users,
        kept_items,
    })
}

fn remap(len: usize, kept: &[usize]) -> Vec<Option<usize>> {
    let mut out = vec![None; len];
    for (new, &old) in kept.iter().enumerate() {
        out[old] = Some(new);
    }
    out
}

/// Per-user random holdout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataSplit {
    pub train: TagTensor,
    /// Held-out items per user, with their tag vectors.
    pub test: Vec<BTreeMap<usize, TagVector>>,
    pub seed: u64,
}

impl DataSplit {
    pub fn test_items(&self, u: usize) -> Vec<usize> {
        self.test[u].keys().copied().collect()
    }

    pub fn num_test_entries(&self) -> usize {
        self.test.iter().map(BTreeMap::len).sum()
    }
}

/// Holds out `ceil(test_fraction * |O(u)|)` items per user, always keeping at
/// least one in training. Users with a single item stay entirely in training.
pub fn split(tensor: &TagTensor, test_fraction: f64, seed: u64) -> Result<DataSplit> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::config(
            "test_fraction",
            format!("must lie in (0, 1), got {test_fraction}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = TagTensor::empty(tensor.num_users(), tensor.num_items(), tensor.tag_vocab.clone());
    let mut test = vec![BTreeMap::new(); tensor.num_users()];
    for (u, test_row) in test.iter_mut().enumerate() {
        let row: Vec<(&usize, &TagVector)> = tensor.row(u).iter().collect();
        let n = row.len();
        let wanted = (test_fraction * n as f64 - 1e-9).ceil() as usize;
        let held = wanted.min(n.saturating_sub(1));
        let mut is_test = vec![false; n];
        if held > 0 {
            for k in index::sample(&mut rng, n, held) {
                is_test[k] = true;
            }
        }
        for ((&i, tags), held_out) in row.into_iter().zip(is_test) {
            if held_out {
                test_row.insert(i, tags.clone());
            } else {
                train.rows[u].insert(i, tags.clone());
            }
        }
    }
    Ok(DataSplit { train, test, seed })
}

/// Total count of each tag over everything `u` tagged.
pub fn user_tag_profile(tensor: &TagTensor, u: usize) -> Result<TagVector> {
    if u >= tensor.num_users() {
        return Err(Error::Index(format!(
            "user {u} outside {} users",
            tensor.num_users()
        )));
    }
    Ok(TagVector::new(
        tensor.row(u).values().flat_map(TagVector::iter),
    ))
}
