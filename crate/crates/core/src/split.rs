//! Train/validation/test partitions of labeled protein pairs.
//!
//! Three schemes are supported. `random` shuffles and slices. `bfs` and
//! `dfs` carve the test positives out of the network as one traversal
//! region grown from a low-degree root, so that test proteins are largely
//! unseen during training. For binary prediction the test set is always
//! balanced with sampled non-interacting pairs.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ordered, Mode, PpiNetwork, TypeSet};
use crate::rng::{self, Rng};

/// Default root-degree threshold: roots must have degree below it.
pub const DEFAULT_ROOT_THRESHOLD: usize = 6;
pub const DEFAULT_RATIOS: [f64; 3] = [0.6, 0.2, 0.2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Random,
    Bfs,
    Dfs,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Random => "random",
            Scheme::Bfs => "bfs",
            Scheme::Dfs => "dfs",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Scheme::Random),
            "bfs" => Ok(Scheme::Bfs),
            "dfs" => Ok(Scheme::Dfs),
            other => Err(Error::InvalidArgument(format!(
                "unknown split scheme `{other}` (expected random, bfs or dfs)"
            ))),
        }
    }
}

/// Label of a pair: interaction status, or the interaction-type set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Binary(bool),
    Types(TypeSet),
}

impl Label {
    /// Interaction indicator: the binary label itself, or whether the type
    /// set is nonempty.
    pub fn interacts(self) -> bool {
        match self {
            Label::Binary(y) => y,
            Label::Types(t) => !t.is_empty(),
        }
    }

    /// Dense target vector: one entry for binary, `n_types` for multilabel.
    pub fn target(self, n_types: usize) -> Vec<f64> {
        match self {
            Label::Binary(y) => vec![if y { 1.0 } else { 0.0 }],
            Label::Types(t) => t.to_dense(n_types),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledPair {
    pub u: usize,
    pub v: usize,
    pub label: Label,
}

impl LabeledPair {
    pub fn key(&self) -> (usize, usize) {
        ordered(self.u, self.v)
    }
}

/// Test-pair category by how many endpoints were seen in training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "BS")]
    Both,
    #[serde(rename = "ES")]
    Either,
    #[serde(rename = "NS")]
    Neither,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Both, Category::Either, Category::Neither];

    pub fn tag(self) -> &'static str {
        match self {
            Category::Both => "BS",
            Category::Either => "ES",
            Category::Neither => "NS",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub train: Vec<LabeledPair>,
    pub val: Vec<LabeledPair>,
    pub test: Vec<LabeledPair>,
    pub scheme: Scheme,
    pub seed: u64,
    pub root: Option<usize>,
    pub threshold: Option<usize>,
    pub mode: Mode,
}

/// Where binary negatives come from.
#[derive(Debug, Clone, Default)]
pub enum Negatives {
    /// Uniformly sampled non-edges.
    #[default]
    Sample,
    /// A shipped list of non-interacting pairs, drawn without replacement.
    Explicit(Vec<(usize, usize)>),
}

fn check_ratios(ratios: [f64; 3]) -> Result<()> {
    let sum: f64 = ratios.iter().sum();
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "split ratios {ratios:?} must be nonnegative and sum to 1"
        )));
    }
    Ok(())
}

/// Shuffles `items` under `seed` and slices them into three contiguous
/// parts of sizes `round(r0 n)`, `round(r1 n)` and the remainder.
pub fn split_random<T: Clone>(items: &[T], ratios: [f64; 3], seed: u64) -> Result<[Vec<T>; 3]> {
    let mut rng = rng::stream(seed, rng::DATA);
    split_random_with(items, ratios, &mut rng)
}

fn split_random_with<T: Clone>(items: &[T], ratios: [f64; 3], rng: &mut Rng) -> Result<[Vec<T>; 3]> {
    check_ratios(ratios)?;
    let n = items.len();
    let n0 = ((ratios[0] * n as f64).round() as usize).min(n);
    let n1 = ((ratios[1] * n as f64).round() as usize).min(n - n0);
    let mut shuffled = items.to_vec();
    shuffled.shuffle(rng);
    let test = shuffled.split_off(n0 + n1);
    let val = shuffled.split_off(n0);
    Ok([shuffled, val, test])
}

/// Picks a root uniformly among nodes with `1 <= degree < threshold`.
pub fn select_root(net: &PpiNetwork, threshold: usize, seed: u64) -> Result<usize> {
    let mut rng = rng::stream(seed, "root");
    select_root_with(net, threshold, &mut rng)
}

fn select_root_with(net: &PpiNetwork, threshold: usize, rng: &mut Rng) -> Result<usize> {
    let qualifying: Vec<usize> = (0..net.len())
        .filter(|&v| {
            let d = net.adj(v).len();
            d >= 1 && d < threshold
        })
        .collect();
    if qualifying.is_empty() {
        return Err(Error::NoQualifyingRoot { threshold });
    }
    Ok(qualifying[rng.random_range(0..qualifying.len())])
}

/// Draws `n` distinct unordered pairs `(u, v)`, `u != v`, that are neither
/// edges of `net` nor members of `exclude`, uniformly at random.
pub fn sample_negatives(
    net: &PpiNetwork,
    n: usize,
    exclude: &BTreeSet<(usize, usize)>,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    let mut rng = rng::stream(seed, "negatives");
    sample_negatives_with(net, n, exclude, &mut rng)
}

pub(crate) fn sample_negatives_with(
    net: &PpiNetwork,
    n: usize,
    exclude: &BTreeSet<(usize, usize)>,
    rng: &mut Rng,
) -> Result<Vec<(usize, usize)>> {
    let nodes = net.len();
    let total = nodes * nodes.saturating_sub(1) / 2;
    let excluded_non_edges = exclude
        .iter()
        .filter(|&&(u, v)| u != v && u < nodes && v < nodes && !net.has_edge(u, v))
        .count();
    let available = total - net.edge_count() - excluded_non_edges;
    if n > available {
        return Err(Error::Insufficient(format!(
            "requested {n} negative pairs but only {available} non-edges are available"
        )));
    }
    let usable = |u: usize, v: usize| !net.has_edge(u, v) && !exclude.contains(&ordered(u, v));

    if n * 2 > available {
        // Dense regime: enumerate and partially shuffle.
        let mut pool: Vec<(usize, usize)> = (0..nodes)
            .flat_map(|u| (u + 1..nodes).map(move |v| (u, v)))
            .filter(|&(u, v)| usable(u, v))
            .collect();
        let (chosen, _) = pool.partial_shuffle(rng, n);
        return Ok(chosen.to_vec());
    }

    let mut seen = HashSet::with_capacity(n * 2);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u = rng.random_range(0..nodes);
        let v = rng.random_range(0..nodes);
        if u == v {
            continue;
        }
        let key = ordered(u, v);
        if usable(u, v) && seen.insert(key) {
            out.push(key);
        }
    }
    Ok(out)
}

struct NegativeDraw<'a> {
    source: &'a Negatives,
    pool_cursor: usize,
    pool: Vec<(usize, usize)>,
}

impl<'a> NegativeDraw<'a> {
    fn new(source: &'a Negatives, rng: &mut Rng) -> Self {
        let pool = match source {
            Negatives::Sample => Vec::new(),
            Negatives::Explicit(pairs) => {
                let mut p: Vec<_> = pairs.iter().map(|&(u, v)| ordered(u, v)).collect();
                p.sort_unstable();
                p.dedup();
                p.shuffle(rng);
                p
            }
        };
        Self {
            source,
            pool_cursor: 0,
            pool,
        }
    }

    fn draw(
        &mut self,
        net: &PpiNetwork,
        n: usize,
        exclude: &BTreeSet<(usize, usize)>,
        rng: &mut Rng,
    ) -> Result<Vec<(usize, usize)>> {
        match self.source {
            Negatives::Sample => sample_negatives_with(net, n, exclude, rng),
            Negatives::Explicit(_) => {
                let mut out = Vec::with_capacity(n);
                while out.len() < n {
                    let Some(&pair) = self.pool.get(self.pool_cursor) else {
                        return Err(Error::Insufficient(format!(
                            "explicit negative list exhausted after {} pairs",
                            out.len()
                        )));
                    };
                    self.pool_cursor += 1;
                    if pair.0 != pair.1 && !net.has_edge(pair.0, pair.1) && !exclude.contains(&pair) {
                        out.push(pair);
                    }
                }
                Ok(out)
            }
        }
    }
}

fn positives_of(net: &PpiNetwork, edges: &[(usize, usize)]) -> Vec<LabeledPair> {
    edges
        .iter()
        .map(|&(u, v)| LabeledPair {
            u,
            v,
            label: match net.mode() {
                Mode::Binary => Label::Binary(true),
                Mode::Multilabel => Label::Types(net.edge_types(u, v).unwrap_or_default()),
            },
        })
        .collect()
}

fn negatives_of(pairs: &[(usize, usize)]) -> Vec<LabeledPair> {
    pairs
        .iter()
        .map(|&(u, v)| LabeledPair {
            u,
            v,
            label: Label::Binary(false),
        })
        .collect()
}

/// Random 60/20/20 split of a network's pairs.
///
/// Binary networks get one sampled negative per edge, and positives and
/// negatives are sliced separately so every fold is exactly balanced.
pub fn split_network_random(net: &PpiNetwork, negatives: &Negatives, seed: u64) -> Result<SplitSpec> {
    let mut rng = rng::stream(seed, rng::DATA);
    let edges = net.edges();
    if edges.is_empty() {
        return Err(Error::Insufficient("network has no edges to split".into()));
    }
    let [mut train, mut val, mut test] =
        split_random_with(&positives_of(net, &edges), DEFAULT_RATIOS, &mut rng)?;
    if net.mode() == Mode::Binary {
        let mut draw = NegativeDraw::new(negatives, &mut rng);
        let neg = draw.draw(net, edges.len(), &BTreeSet::new(), &mut rng)?;
        let [ntr, nva, nte] = split_random_with(&negatives_of(&neg), DEFAULT_RATIOS, &mut rng)?;
        train.extend(ntr);
        val.extend(nva);
        test.extend(nte);
    }
    Ok(SplitSpec {
        train,
        val,
        test,
        scheme: Scheme::Random,
        seed,
        root: None,
        threshold: None,
        mode: net.mode(),
    })
}

/// Collects test positives by traversal from a low-degree root.
///
/// Every visited node contributes all of its incident edges; the next node
/// comes from a FIFO frontier (BFS, ascending index) or a stack (DFS,
/// ascending index popped first). Stops once at least `target` edges are
/// collected.
pub fn collect_by_traversal(
    net: &PpiNetwork,
    root: usize,
    scheme: Scheme,
    target: usize,
) -> Result<Vec<(usize, usize)>> {
    if root >= net.len() {
        return Err(Error::NodeOutOfRange {
            index: root,
            len: net.len(),
        });
    }
    let mut collected: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut order: Vec<(usize, usize)> = Vec::new();
    let mut visited = vec![false; net.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut current = Some(root);

    while let Some(p) = current {
        visited[p] = true;
        for &q in net.adj(p) {
            let key = ordered(p, q);
            if collected.insert(key) {
                order.push(key);
            }
        }
        if collected.len() >= target {
            return Ok(order);
        }
        current = match scheme {
            Scheme::Bfs => {
                for &q in net.adj(p) {
                    if !visited[q] && !queue.contains(&q) {
                        queue.push_back(q);
                    }
                }
                queue.pop_front()
            }
            Scheme::Dfs => {
                for &q in net.adj(p).iter().rev() {
                    if !visited[q] {
                        stack.push(q);
                    }
                }
                loop {
                    match stack.pop() {
                        Some(q) if visited[q] => continue,
                        other => break other,
                    }
                }
            }
            Scheme::Random => {
                return Err(Error::InvalidArgument(
                    "traversal requires the bfs or dfs scheme".into(),
                ))
            }
        };
    }
    Err(Error::TraversalShortfall {
        collected: collected.len(),
        target,
    })
}

/// Traversal-based split of the pairs of `net`.
///
/// Test positives are grown from a root of degree below `threshold` until
/// `target_test_positives` edges are collected. Remaining edges are
/// training positives. For binary networks, test negatives (one per test
/// positive) exclude all edges, and training negatives (one per training
/// positive) additionally exclude the test pairs. A random quarter of each
/// remaining class becomes the validation set.
pub fn split_search(
    net: &PpiNetwork,
    scheme: Scheme,
    target_test_positives: usize,
    threshold: usize,
    negatives: &Negatives,
    seed: u64,
) -> Result<SplitSpec> {
    if scheme == Scheme::Random {
        return Err(Error::InvalidArgument("split_search needs bfs or dfs".into()));
    }
    let mut rng = rng::stream(seed, rng::DATA);
    let root = select_root_with(net, threshold, &mut rng)?;
    let test_edges = collect_by_traversal(net, root, scheme, target_test_positives)?;
    let test_set: BTreeSet<(usize, usize)> = test_edges.iter().copied().collect();
    let train_edges: Vec<(usize, usize)> = net
        .edges()
        .into_iter()
        .filter(|e| !test_set.contains(e))
        .collect();

    let mut test = positives_of(net, &test_edges);
    let remaining_pos = positives_of(net, &train_edges);
    let [mut train, mut val, _] = split_random_with(&remaining_pos, [0.75, 0.25, 0.0], &mut rng)?;

    if net.mode() == Mode::Binary {
        let mut draw = NegativeDraw::new(negatives, &mut rng);
        let test_neg = draw.draw(net, test_edges.len(), &BTreeSet::new(), &mut rng)?;
        let mut exclude = test_set.clone();
        exclude.extend(test_neg.iter().copied());
        let train_neg = draw.draw(net, train_edges.len(), &exclude, &mut rng)?;
        test.extend(negatives_of(&test_neg));
        let [ntr, nva, _] = split_random_with(&negatives_of(&train_neg), [0.75, 0.25, 0.0], &mut rng)?;
        train.extend(ntr);
        val.extend(nva);
    }

    Ok(SplitSpec {
        train,
        val,
        test,
        scheme,
        seed,
        root: Some(root),
        threshold: Some(threshold),
        mode: net.mode(),
    })
}

/// Default number of test positives for traversal splits: a fifth of all
/// pairs, i.e. a fifth of the edges once negatives double the pool.
pub fn default_test_positives(net: &PpiNetwork) -> usize {
    ((net.edge_count() as f64) * DEFAULT_RATIOS[2]).round().max(1.0) as usize
}

/// Dispatches on scheme with default sizes.
pub fn split(
    net: &PpiNetwork,
    scheme: Scheme,
    threshold: usize,
    negatives: &Negatives,
    seed: u64,
) -> Result<SplitSpec> {
    match scheme {
        Scheme::Random => split_network_random(net, negatives, seed),
        _ => split_search(net, scheme, default_test_positives(net), threshold, negatives, seed),
    }
}

impl SplitSpec {
    /// Proteins incident to an interacting training pair.
    ///
    /// Sampled non-interacting pairs do not make a protein "seen": they say
    /// nothing about its place in the network.
    pub fn seen_proteins(&self) -> HashSet<usize> {
        self.train
            .iter()
            .filter(|p| p.label.interacts())
            .flat_map(|p| [p.u, p.v])
            .collect()
    }

    /// BS/ES/NS tag for every test pair, in test order.
    pub fn categorize(&self) -> Vec<Category> {
        categorize_bs_es_ns(&self.seen_proteins(), &self.test)
    }

    pub fn summary(&self) -> SplitSummary {
        SplitSummary {
            scheme: self.scheme,
            seed: self.seed,
            root: self.root,
            threshold: self.threshold,
            mode: self.mode,
            train: self.train.len(),
            val: self.val.len(),
            test: self.test.len(),
        }
    }

    /// TSV rows `u, v, label, fold, tag`; training and validation rows carry
    /// the tag `-`.
    pub fn to_tsv(&self, net: &PpiNetwork) -> String {
        let tags = self.categorize();
        let mut out = String::new();
        let label_text = |l: Label| match l {
            Label::Binary(y) => u8::from(y).to_string(),
            Label::Types(t) => {
                let names: Vec<&str> = (0..net.n_types())
                    .filter(|&i| t.contains(i))
                    .map(|i| net.type_names()[i].as_str())
                    .collect();
                if names.is_empty() {
                    "-".to_string()
                } else {
                    names.join(",")
                }
            }
        };
        for (fold, pairs) in [("train", &self.train), ("val", &self.val)] {
            for p in pairs {
                let _ = writeln!(out, "{}\t{}\t{}\t{fold}\t-", net.id(p.u), net.id(p.v), label_text(p.label));
            }
        }
        for (p, tag) in self.test.iter().zip(tags) {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\ttest\t{}",
                net.id(p.u),
                net.id(p.v),
                label_text(p.label),
                tag.tag()
            );
        }
        out
    }

    /// Writes `<stem>.tsv` and the `<stem>.json` sidecar.
    pub fn save(&self, net: &PpiNetwork, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        let tsv = dir.join(format!("{stem}.tsv"));
        std::fs::write(&tsv, self.to_tsv(net)).map_err(|e| Error::io(&tsv, e))?;
        let json = dir.join(format!("{stem}.json"));
        let mut sidecar = serde_json::to_value(self.summary())?;
        sidecar["root_id"] = match self.root {
            Some(r) => serde_json::Value::String(net.id(r).to_string()),
            None => serde_json::Value::Null,
        };
        let text = serde_json::to_string_pretty(&sidecar)? + "\n";
        std::fs::write(&json, text).map_err(|e| Error::io(&json, e))
    }

    /// Reads a split TSV plus its sidecar back against `net`.
    pub fn load(net: &PpiNetwork, tsv_path: impl AsRef<Path>) -> Result<SplitSpec> {
        let tsv_path = tsv_path.as_ref();
        let text = std::fs::read_to_string(tsv_path).map_err(|e| Error::io(tsv_path, e))?;
        let json_path = tsv_path.with_extension("json");
        let summary: SplitSummary = match std::fs::read_to_string(&json_path) {
            Ok(j) => serde_json::from_str(&j)?,
            Err(e) => return Err(Error::io(json_path, e)),
        };
        let mut spec = SplitSpec {
            train: Vec::new(),
            val: Vec::new(),
            test: Vec::new(),
            scheme: summary.scheme,
            seed: summary.seed,
            root: summary.root,
            threshold: summary.threshold,
            mode: summary.mode,
        };
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 5 {
                return Err(Error::parse(i + 1, "expected 5 tab-separated fields"));
            }
            let lookup = |id: &str| {
                net.index_of(id)
                    .ok_or_else(|| Error::UnknownProtein(id.to_string()))
            };
            let (u, v) = (lookup(f[0])?, lookup(f[1])?);
            let label = match summary.mode {
                Mode::Binary => match f[2] {
                    "0" => Label::Binary(false),
                    "1" => Label::Binary(true),
                    other => return Err(Error::parse(i + 1, format!("bad binary label `{other}`"))),
                },
                Mode::Multilabel => {
                    let mut t = TypeSet::EMPTY;
                    if f[2] != "-" {
                        for tok in f[2].split(',') {
                            let idx = net.type_names().iter().position(|n| n == tok).ok_or_else(|| {
                                Error::UnknownType {
                                    line: i + 1,
                                    token: tok.to_string(),
                                }
                            })?;
                            t = t.with(idx);
                        }
                    }
                    Label::Types(t)
                }
            };
            let pair = LabeledPair { u, v, label };
            match f[3] {
                "train" => spec.train.push(pair),
                "val" => spec.val.push(pair),
                "test" => spec.test.push(pair),
                other => return Err(Error::parse(i + 1, format!("bad fold `{other}`"))),
            }
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitSummary {
    pub scheme: Scheme,
    pub seed: u64,
    pub root: Option<usize>,
    #[serde(rename = "t")]
    pub threshold: Option<usize>,
    pub mode: Mode,
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

/// Tags each pair BS, ES or NS by how many endpoints are in `seen`.
pub fn categorize_bs_es_ns(seen: &HashSet<usize>, pairs: &[LabeledPair]) -> Vec<Category> {
    pairs
        .iter()
        .map(|p| match (seen.contains(&p.u), seen.contains(&p.v)) {
            (true, true) => Category::Both,
            (false, false) => Category::Neither,
            _ => Category::Either,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_network;

    fn net(text: &str) -> PpiNetwork {
        parse_network(text, Mode::Binary).unwrap()
    }

    fn keys(pairs: &[LabeledPair]) -> BTreeSet<(usize, usize)> {
        pairs.iter().map(LabeledPair::key).collect()
    }

    #[test]
    fn random_sizes_and_determinism() {
        let items: Vec<u32> = (0..10).collect();
        let [a, b, c] = split_random(&items, [0.6, 0.2, 0.2], 7).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (6, 2, 2));
        let again = split_random(&items, [0.6, 0.2, 0.2], 7).unwrap();
        assert_eq!([a, b, c], again);
        assert!(split_random(&items, [0.5, 0.5, 0.1], 7).is_err());
    }

    #[test]
    fn root_selection() {
        let star = net("c\t1\nc\t2\nc\t3\nc\t4\nc\t5\n");
        for seed in 0..20 {
            assert!(select_root(&star, 6, seed).unwrap() < star.len());
        }
        assert!(matches!(
            select_root(&star, 1, 0),
            Err(Error::NoQualifyingRoot { threshold: 1 })
        ));
        // Only the leaves qualify under t=2.
        let c = star.index_of("c").unwrap();
        for seed in 0..20 {
            assert_ne!(select_root(&star, 2, seed).unwrap(), c);
        }
    }

    #[test]
    fn bfs_trace_on_path_graph() {
        let g = net("A\tB\nB\tC\nC\tD\nD\tE\n");
        let a = g.index_of("A").unwrap();
        let got: BTreeSet<_> = collect_by_traversal(&g, a, Scheme::Bfs, 2)
            .unwrap()
            .into_iter()
            .collect();
        let id = |s| g.index_of(s).unwrap();
        assert!(got.contains(&ordered(id("A"), id("B"))));
        assert!(got.contains(&ordered(id("B"), id("C"))));
    }

    #[test]
    fn dfs_goes_deep_before_branching() {
        // Tree: r - a - b - c, and r - x, a - y. From leaf c the DFS chain
        // walks c, b, a, then branches.
        let g = net("r\ta\na\tb\nb\tc\nr\tx\na\ty\n");
        let id = |s| g.index_of(s).unwrap();
        let order = collect_by_traversal(&g, id("c"), Scheme::Dfs, 3).unwrap();
        assert_eq!(order[0], ordered(id("b"), id("c")));
        assert_eq!(order[1], ordered(id("a"), id("b")));
        // Node a contributes its remaining edges before any sibling branch.
        let rest: BTreeSet<_> = order[2..].iter().copied().collect();
        assert!(rest.contains(&ordered(id("a"), id("r"))));
        assert!(rest.contains(&ordered(id("a"), id("y"))));
    }

    #[test]
    fn traversal_shortfall() {
        let g = net("A\tB\nC\tD\n");
        let err = collect_by_traversal(&g, 0, Scheme::Bfs, 2).unwrap_err();
        assert!(matches!(err, Error::TraversalShortfall { collected: 1, target: 2 }));
    }

    #[test]
    fn negatives() {
        let k4 = net("a\tb\na\tc\na\td\nb\tc\nb\td\nc\td\n");
        assert!(sample_negatives(&k4, 1, &BTreeSet::new(), 0).is_err());

        let empty = PpiNetwork::from_edges((0..4).map(|i| i.to_string()).collect(), &[]).unwrap();
        let all = sample_negatives(&empty, 6, &BTreeSet::new(), 0).unwrap();
        assert_eq!(all.iter().copied().collect::<BTreeSet<_>>().len(), 6);

        let exclude: BTreeSet<_> = [(0, 1)].into_iter().collect();
        let some = sample_negatives(&empty, 5, &exclude, 3).unwrap();
        assert!(!some.contains(&(0, 1)));
    }

    #[test]
    fn categories() {
        let train = vec![LabeledPair { u: 0, v: 1, label: Label::Binary(true) }];
        let spec = SplitSpec {
            train,
            val: vec![],
            test: vec![
                LabeledPair { u: 0, v: 1, label: Label::Binary(true) },
                LabeledPair { u: 0, v: 2, label: Label::Binary(true) },
                LabeledPair { u: 2, v: 3, label: Label::Binary(false) },
            ],
            scheme: Scheme::Random,
            seed: 0,
            root: None,
            threshold: None,
            mode: Mode::Binary,
        };
        assert_eq!(spec.categorize(), vec![Category::Both, Category::Either, Category::Neither]);
    }

    fn grid(n: usize) -> PpiNetwork {
        let mut edges = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let v = r * n + c;
                if c + 1 < n {
                    edges.push((v, v + 1));
                }
                if r + 1 < n {
                    edges.push((v, v + n));
                }
            }
        }
        PpiNetwork::from_edges((0..n * n).map(|i| format!("p{i}")).collect(), &edges).unwrap()
    }

    #[test]
    fn search_split_invariants() {
        let g = grid(8);
        for scheme in [Scheme::Bfs, Scheme::Dfs] {
            let s = split(&g, scheme, 6, &Negatives::Sample, 11).unwrap();
            let (tr, va, te) = (keys(&s.train), keys(&s.val), keys(&s.test));
            assert!(tr.is_disjoint(&va) && tr.is_disjoint(&te) && va.is_disjoint(&te));
            let pos = s.test.iter().filter(|p| p.label.interacts()).count();
            assert_eq!(pos * 2, s.test.len());
            assert!(g.degree(s.root.unwrap()).unwrap() <= 5);
            assert_eq!(s, split(&g, scheme, 6, &Negatives::Sample, 11).unwrap());
        }
    }

    #[test]
    fn random_split_is_balanced() {
        let g = grid(6);
        let s = split(&g, Scheme::Random, 6, &Negatives::Sample, 2).unwrap();
        for fold in [&s.train, &s.val, &s.test] {
            let pos = fold.iter().filter(|p| p.label.interacts()).count();
            assert_eq!(pos * 2, fold.len());
        }
        let total = (s.train.len() + s.val.len() + s.test.len()) as f64;
        assert!((s.train.len() as f64 - 0.6 * total).abs() <= 1.0);
    }

    #[test]
    fn explicit_negatives_are_used() {
        let g = grid(4);
        let pool: Vec<(usize, usize)> = (0..16)
            .flat_map(|u| (u + 1..16).map(move |v| (u, v)))
            .filter(|&(u, v)| !g.has_edge(u, v))
            .take(60)
            .collect();
        let allowed: BTreeSet<_> = pool.iter().copied().collect();
        let s = split(&g, Scheme::Random, 6, &Negatives::Explicit(pool), 1).unwrap();
        for p in s.train.iter().chain(&s.val).chain(&s.test) {
            if !p.label.interacts() {
                assert!(allowed.contains(&p.key()));
            }
        }
    }

    #[test]
    fn tsv_round_trip() {
        let g = grid(5);
        let s = split(&g, Scheme::Bfs, 6, &Negatives::Sample, 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        s.save(&g, dir.path(), "split").unwrap();
        let back = SplitSpec::load(&g, dir.path().join("split.tsv")).unwrap();
        assert_eq!(back, s);
    }
}
