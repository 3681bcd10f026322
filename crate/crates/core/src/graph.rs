//! Interaction networks and protein embedding tables.
//!
//! # Edge-list format
//!
//! ```text
//! file      := header? line*
//! header    := "#types" SP type ("," type)*          (multilabel mode only)
//! line      := id TAB id (TAB type ("," type)*)? NL
//!            | "#node" TAB id NL                     (isolated protein)
//!            | "#" comment NL | NL
//! ```
//!
//! Duplicate undirected edges are merged and their type sets unioned.
//! Self-loops are rejected. Node indices follow first appearance in the
//! file.
//!
//! # Embedding format
//!
//! ```text
//! file := d SP n NL (id (SP real){d} NL){n}
//! ```
//!
//! Fields are separated by arbitrary whitespace; every value must be finite.
//!
//! # STRING action exports
//!
//! [`convert_string_actions`] turns the public
//! `item_id_a item_id_b mode ... score` layout into the edge-list format
//! above, declaring the seven STRING modes as the label space.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interaction modes of STRING action exports, in label-space order.
pub const STRING_MODES: [&str; 7] = [
    "activation",
    "binding",
    "catalysis",
    "expression",
    "inhibition",
    "ptmod",
    "reaction",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Binary,
    Multilabel,
}

/// Bitset over an interaction-type label space of at most 64 types.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeSet(pub u64);

impl TypeSet {
    pub const EMPTY: TypeSet = TypeSet(0);

    pub fn with(self, index: usize) -> Self {
        TypeSet(self.0 | (1u64 << index))
    }

    pub fn contains(self, index: usize) -> bool {
        self.0 & (1u64 << index) != 0
    }

    pub fn union(self, other: TypeSet) -> Self {
        TypeSet(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Dense 0/1 vector over `n` types.
    pub fn to_dense(self, n: usize) -> Vec<f64> {
        (0..n).map(|i| if self.contains(i) { 1.0 } else { 0.0 }).collect()
    }

    pub fn from_dense(values: &[f64]) -> Self {
        values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.5)
            .fold(TypeSet::EMPTY, |s, (i, _)| s.with(i))
    }
}

/// Unordered node pair stored with the smaller index first.
pub fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// An undirected interaction network.
///
/// Immutable once built; neighbor lists are sorted and free of duplicates.
#[derive(Debug, Clone)]
pub struct PpiNetwork {
    node_ids: Vec<String>,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<usize>>,
    edge_types: HashMap<(usize, usize), TypeSet>,
    type_names: Vec<String>,
    mode: Mode,
    n_edges: usize,
}

impl PpiNetwork {
    /// Builds a binary network over `node_ids` from index pairs.
    pub fn from_edges(node_ids: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let mut builder = NetworkBuilder::new(Mode::Binary, Vec::new());
        for id in &node_ids {
            builder.node(id)?;
        }
        for &(u, v) in edges {
            if u >= node_ids.len() || v >= node_ids.len() {
                return Err(Error::NodeOutOfRange {
                    index: u.max(v),
                    len: node_ids.len(),
                });
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop on node {u}")));
            }
            builder.add_indexed(u, v, TypeSet::EMPTY);
        }
        Ok(builder.finish())
    }

    /// Builds a multilabel network; every edge must carry a nonempty type set.
    pub fn from_typed_edges(
        node_ids: Vec<String>,
        type_names: Vec<String>,
        edges: &[(usize, usize, TypeSet)],
    ) -> Result<Self> {
        let mut builder = NetworkBuilder::new(Mode::Multilabel, type_names);
        for id in &node_ids {
            builder.node(id)?;
        }
        for &(u, v, types) in edges {
            if u >= node_ids.len() || v >= node_ids.len() {
                return Err(Error::NodeOutOfRange {
                    index: u.max(v),
                    len: node_ids.len(),
                });
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop on node {u}")));
            }
            if types.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) has an empty type set"
                )));
            }
            builder.add_indexed(u, v, types);
        }
        Ok(builder.finish())
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.n_edges
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn type_names(&self) -> &[String] {
        &self.type_names
    }

    pub fn n_types(&self) -> usize {
        self.type_names.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn id(&self, v: usize) -> &str {
        &self.node_ids[v]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn neighbors(&self, v: usize) -> Result<&[usize]> {
        self.adjacency
            .get(v)
            .map(Vec::as_slice)
            .ok_or(Error::NodeOutOfRange {
                index: v,
                len: self.len(),
            })
    }

    pub fn degree(&self, v: usize) -> Result<usize> {
        self.neighbors(v).map(<[usize]>::len)
    }

    /// Neighbor list without bounds checking against the error type.
    pub(crate) fn adj(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        match self.adjacency.get(u) {
            Some(list) => list.binary_search(&v).is_ok(),
            None => false,
        }
    }

    /// Type set of edge `(u, v)`; `None` when the edge is absent.
    pub fn edge_types(&self, u: usize, v: usize) -> Option<TypeSet> {
        if !self.has_edge(u, v) {
            return None;
        }
        Some(
            self.edge_types
                .get(&ordered(u, v))
                .copied()
                .unwrap_or(TypeSet::EMPTY),
        )
    }

    /// All edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n_edges);
        for (u, list) in self.adjacency.iter().enumerate() {
            for &v in list {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Network on the same node set keeping only `edges`.
    pub fn restrict_to(&self, edges: &[(usize, usize)]) -> Result<Self> {
        match self.mode {
            Mode::Binary => PpiNetwork::from_edges(self.node_ids.clone(), edges),
            Mode::Multilabel => {
                let typed: Vec<_> = edges
                    .iter()
                    .map(|&(u, v)| {
                        let t = self.edge_types(u, v).ok_or_else(|| {
                            Error::InvalidArgument(format!("({u}, {v}) is not an edge"))
                        })?;
                        Ok((u, v, t))
                    })
                    .collect::<Result<_>>()?;
                PpiNetwork::from_typed_edges(self.node_ids.clone(), self.type_names.clone(), &typed)
            }
        }
    }

    /// Canonical text form: sorted by protein id, one line per edge, with
    /// isolated proteins declared through `#node` lines.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        if self.mode == Mode::Multilabel {
            let _ = writeln!(out, "#types {}", self.type_names.join(","));
        }
        let mut isolated: Vec<&str> = (0..self.len())
            .filter(|&v| self.adjacency[v].is_empty())
            .map(|v| self.node_ids[v].as_str())
            .collect();
        isolated.sort_unstable();
        for id in isolated {
            let _ = writeln!(out, "#node\t{id}");
        }
        let mut lines: Vec<(&str, &str, TypeSet)> = self
            .edges()
            .into_iter()
            .map(|(u, v)| {
                let (a, b) = (self.node_ids[u].as_str(), self.node_ids[v].as_str());
                let t = self.edge_types(u, v).unwrap_or_default();
                if a <= b {
                    (a, b, t)
                } else {
                    (b, a, t)
                }
            })
            .collect();
        lines.sort_unstable();
        for (a, b, t) in lines {
            match self.mode {
                Mode::Binary => {
                    let _ = writeln!(out, "{a}\t{b}");
                }
                Mode::Multilabel => {
                    let names: Vec<&str> = (0..self.n_types())
                        .filter(|&i| t.contains(i))
                        .map(|i| self.type_names[i].as_str())
                        .collect();
                    let _ = writeln!(out, "{a}\t{b}\t{}", names.join(","));
                }
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.serialize()).map_err(|e| Error::io(path, e))
    }
}

struct NetworkBuilder {
    node_ids: Vec<String>,
    index: HashMap<String, usize>,
    edges: HashMap<(usize, usize), TypeSet>,
    type_names: Vec<String>,
    mode: Mode,
}

impl NetworkBuilder {
    fn new(mode: Mode, type_names: Vec<String>) -> Self {
        Self {
            node_ids: Vec::new(),
            index: HashMap::new(),
            edges: HashMap::new(),
            type_names,
            mode,
        }
    }

    fn node(&mut self, id: &str) -> Result<usize> {
        if let Some(&i) = self.index.get(id) {
            return Ok(i);
        }
        let i = self.node_ids.len();
        self.node_ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        Ok(i)
    }

    fn add_indexed(&mut self, u: usize, v: usize, types: TypeSet) {
        let entry = self.edges.entry(ordered(u, v)).or_default();
        *entry = entry.union(types);
    }

    fn finish(self) -> PpiNetwork {
        let n = self.node_ids.len();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in self.edges.keys() {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let n_edges = self.edges.len();
        let edge_types = if self.mode == Mode::Multilabel {
            self.edges
        } else {
            HashMap::new()
        };
        PpiNetwork {
            node_ids: self.node_ids,
            index: self.index,
            adjacency,
            edge_types,
            type_names: self.type_names,
            mode: self.mode,
            n_edges,
        }
    }
}

/// Parses the edge-list format from text.
pub fn parse_network(text: &str, mode: Mode) -> Result<PpiNetwork> {
    let mut builder = NetworkBuilder::new(mode, Vec::new());
    let mut type_index: HashMap<String, usize> = HashMap::new();
    let mut saw_types = false;
    let mut any_content = false;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#types") {
            if saw_types {
                return Err(Error::parse(line_no, "repeated #types header"));
            }
            saw_types = true;
            for token in rest.trim().split(',').map(str::trim) {
                if token.is_empty() {
                    return Err(Error::parse(line_no, "empty type name in #types header"));
                }
                if type_index.contains_key(token) {
                    return Err(Error::parse(line_no, format!("duplicate type `{token}`")));
                }
                if type_index.len() == 64 {
                    return Err(Error::parse(line_no, "more than 64 interaction types"));
                }
                type_index.insert(token.to_string(), builder.type_names.len());
                builder.type_names.push(token.to_string());
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("#node") {
            let id = rest.trim();
            if id.is_empty() || id.contains(char::is_whitespace) {
                return Err(Error::parse(line_no, "malformed #node line"));
            }
            builder.node(id)?;
            any_content = true;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }

        let fields: Vec<&str> = line.split('\t').collect();
        let (a, b) = match fields.as_slice() {
            [a, b] | [a, b, _] => (a.trim(), b.trim()),
            _ => {
                return Err(Error::parse(
                    line_no,
                    format!("expected 2 or 3 tab-separated fields, found {}", fields.len()),
                ))
            }
        };
        if a.is_empty() || b.is_empty() {
            return Err(Error::parse(line_no, "empty protein id"));
        }
        if a == b {
            return Err(Error::SelfLoop { line: line_no });
        }
        let types = match (mode, fields.get(2)) {
            (Mode::Binary, _) => TypeSet::EMPTY,
            (Mode::Multilabel, None) => {
                return Err(Error::parse(line_no, "missing type column in multilabel mode"))
            }
            (Mode::Multilabel, Some(col)) => {
                if !saw_types {
                    return Err(Error::parse(line_no, "type column before #types header"));
                }
                let mut set = TypeSet::EMPTY;
                for token in col.split(',').map(str::trim) {
                    match type_index.get(token) {
                        Some(&t) => set = set.with(t),
                        None => {
                            return Err(Error::UnknownType {
                                line: line_no,
                                token: token.to_string(),
                            })
                        }
                    }
                }
                set
            }
        };
        let u = builder.node(a)?;
        let v = builder.node(b)?;
        builder.add_indexed(u, v, types);
        any_content = true;
    }

    if !any_content {
        return Err(Error::Empty("network file has no edges".into()));
    }
    if mode == Mode::Multilabel && !saw_types {
        return Err(Error::parse(1, "multilabel network requires a #types header"));
    }
    Ok(builder.finish())
}

pub fn load_network(path: impl AsRef<Path>, mode: Mode) -> Result<PpiNetwork> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_network(&text, mode)
}

/// Converts a STRING action export (`item_id_a item_id_b mode ...`) into the
/// multilabel edge-list format. The first line is treated as a column header
/// when its third field is not a known mode.
pub fn convert_string_actions(text: &str) -> Result<String> {
    let mut edges: HashMap<(String, String), TypeSet> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() < 3 {
            return Err(Error::parse(i + 1, "expected at least 3 columns"));
        }
        let mode = fields[2];
        let Some(t) = STRING_MODES.iter().position(|m| *m == mode) else {
            if i == 0 {
                continue;
            }
            return Err(Error::UnknownType {
                line: i + 1,
                token: mode.to_string(),
            });
        };
        let (a, b) = (fields[0], fields[1]);
        if a == b {
            return Err(Error::SelfLoop { line: i + 1 });
        }
        let key = if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        let entry = edges.entry(key).or_default();
        *entry = entry.with(t);
    }
    if edges.is_empty() {
        return Err(Error::Empty("STRING export has no interactions".into()));
    }
    let mut out = format!("#types {}\n", STRING_MODES.join(","));
    let mut keys: Vec<_> = edges.into_iter().collect();
    keys.sort();
    for ((a, b), t) in keys {
        let names: Vec<&str> = (0..STRING_MODES.len())
            .filter(|&i| t.contains(i))
            .map(|i| STRING_MODES[i])
            .collect();
        let _ = writeln!(out, "{a}\t{b}\t{}", names.join(","));
    }
    Ok(out)
}

/// Fixed-dimension protein embeddings.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    ids: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            ids: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        })
    }

    pub fn insert(&mut self, id: &str, vector: &[f64]) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        if let Some(x) = vector.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("{x} in embedding of `{id}`"),
            });
        }
        if self.index.contains_key(id) {
            return Err(Error::DuplicateProtein(id.to_string()));
        }
        self.index.insert(id.to_string(), self.ids.len());
        self.ids.push(id.to_string());
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.index
            .get(id)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    /// Like [`get`](Self::get) but a missing protein is an error.
    pub fn require(&self, id: &str) -> Result<&[f64]> {
        self.get(id)
            .ok_or_else(|| Error::UnknownProtein(id.to_string()))
    }

    /// Row-aligned feature matrix for every node of `net`.
    pub fn aligned(&self, net: &PpiNetwork) -> Result<NodeFeatures> {
        let mut data = Vec::with_capacity(net.len() * self.dim);
        for id in net.node_ids() {
            data.extend_from_slice(self.require(id)?);
        }
        Ok(NodeFeatures {
            dim: self.dim,
            data,
        })
    }

    pub fn serialize(&self) -> String {
        let mut out = format!("{} {}\n", self.dim, self.len());
        for (i, id) in self.ids.iter().enumerate() {
            out.push_str(id);
            for x in &self.data[i * self.dim..(i + 1) * self.dim] {
                // `{:?}` prints the shortest representation that round-trips.
                let _ = write!(out, " {x:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.serialize()).map_err(|e| Error::io(path, e))
    }
}

/// Embeddings indexed by network node, for hot loops.
#[derive(Debug, Clone)]
pub struct NodeFeatures {
    dim: usize,
    data: Vec<f64>,
}

impl NodeFeatures {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.data[v * self.dim..(v + 1) * self.dim]
    }
}

pub fn parse_embeddings(text: &str) -> Result<EmbeddingTable> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Empty("embedding file is empty".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    let [d, n] = head.as_slice() else {
        return Err(Error::parse(1, "header must be `d N`"));
    };
    let dim: usize = d
        .parse()
        .map_err(|_| Error::parse(1, format!("bad dimension `{d}`")))?;
    let count: usize = n
        .parse()
        .map_err(|_| Error::parse(1, format!("bad row count `{n}`")))?;
    let mut table = EmbeddingTable::new(dim)?;
    for (i, line) in lines {
        let line_no = i + 1;
        let mut fields = line.split_whitespace();
        let id = fields.next().unwrap_or_default();
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(line_no, format!("bad number `{f}`")))
            })
            .collect::<Result<_>>()?;
        table.insert(id, &values).map_err(|e| match e {
            Error::DimensionMismatch { expected, found } => Error::parse(
                line_no,
                format!("expected {expected} values, found {found}"),
            ),
            Error::NonFinite { context } => Error::parse(line_no, format!("non-finite {context}")),
            other => other,
        })?;
    }
    if table.len() != count {
        return Err(Error::parse(
            1,
            format!("header declares {count} rows, found {}", table.len()),
        ));
    }
    Ok(table)
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&text)
}

/// Set of unordered pairs.
pub fn pair_set(pairs: impl IntoIterator<Item = (usize, usize)>) -> BTreeSet<(usize, usize)> {
    pairs.into_iter().map(|(u, v)| ordered(u, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_abc() -> PpiNetwork {
        parse_network("A\tB\nB\tC\n", Mode::Binary).unwrap()
    }

    #[test]
    fn duplicate_edges_merge() {
        let net = parse_network("A\tB\nB\tC\nA\tB\n", Mode::Binary).unwrap();
        assert_eq!(net.len(), 3);
        assert_eq!(net.edge_count(), 2);
    }

    #[test]
    fn reversed_duplicate_merges_types() {
        let text = "#types x,y\nA\tB\tx\nB\tA\ty\n";
        let net = parse_network(text, Mode::Multilabel).unwrap();
        assert_eq!(net.edge_count(), 1);
        assert_eq!(net.edge_types(0, 1), Some(TypeSet(0b11)));
    }

    #[test]
    fn self_loop_reports_line() {
        let err = parse_network("A\tB\nA\tA\n", Mode::Binary).unwrap_err();
        assert_eq!(err.to_string(), "self-loop at line 2");
    }

    #[test]
    fn malformed_and_empty_inputs() {
        let err = parse_network("A\tB\nA B C D\n", Mode::Binary).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(matches!(
            parse_network("", Mode::Binary),
            Err(Error::Empty(_))
        ));
        assert!(matches!(
            parse_network("# only a comment\n", Mode::Binary),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn unknown_type_token() {
        let err = parse_network("#types a,b\nA\tB\tc\n", Mode::Multilabel).unwrap_err();
        assert!(matches!(err, Error::UnknownType { line: 2, .. }));
    }

    #[test]
    fn seven_type_header() {
        let text = "#types activation,binding,catalysis,expression,inhibition,ptmod,reaction\n\
                    P1\tP2\tbinding,reaction\nP2\tP3\tactivation\n";
        let net = parse_network(text, Mode::Multilabel).unwrap();
        assert_eq!(net.n_types(), 7);
        assert_eq!(net.edge_types(0, 1).unwrap().len(), 2);
    }

    #[test]
    fn neighbors_and_degree() {
        let net = path_abc();
        let b = net.index_of("B").unwrap();
        let ids: Vec<&str> = net.neighbors(b).unwrap().iter().map(|&v| net.id(v)).collect();
        assert_eq!(ids, ["A", "C"]);
        assert!(net.neighbors(7).is_err());

        let iso = parse_network("#node\tZ\nA\tB\n", Mode::Binary).unwrap();
        assert_eq!(iso.neighbors(iso.index_of("Z").unwrap()).unwrap(), &[] as &[usize]);

        let star = parse_network("c\t1\nc\t2\nc\t3\nc\t4\nc\t5\n", Mode::Binary).unwrap();
        assert_eq!(star.degree(star.index_of("c").unwrap()).unwrap(), 5);
    }

    #[test]
    fn serialization_is_canonical() {
        let a = parse_network("C\tB\nA\tB\nB\tA\n#node\tQ\n", Mode::Binary).unwrap();
        let b = parse_network("A\tB\nB\tC\n#node\tQ\n", Mode::Binary).unwrap();
        assert_eq!(a.serialize(), b.serialize());
        assert_eq!(a.serialize(), "#node\tQ\nA\tB\nB\tC\n");
        let again = parse_network(&a.serialize(), Mode::Binary).unwrap();
        assert_eq!(again.serialize(), a.serialize());
    }

    #[test]
    fn embeddings_parse() {
        let table = parse_embeddings("2 1\nA 0.5 -1.0\n").unwrap();
        assert_eq!(table.get("A").unwrap(), &[0.5, -1.0]);
        assert!(parse_embeddings("2 1\nA 0.5 -1.0 3\n").is_err());
        assert!(parse_embeddings("2 2\nA 0.5 -1.0\nA 1 1\n").is_err());
        assert!(parse_embeddings("2 1\nA NaN 1\n").is_err());
        assert!(parse_embeddings("2 2\nA 0.5 -1.0\n").is_err());
    }

    #[test]
    fn embeddings_round_trip() {
        let mut t = EmbeddingTable::new(3).unwrap();
        t.insert("x", &[0.1, -2.5e-7, 3.0]).unwrap();
        t.insert("y", &[1.0 / 3.0, 0.0, -1.0]).unwrap();
        let back = parse_embeddings(&t.serialize()).unwrap();
        assert_eq!(back.get("y").unwrap(), t.get("y").unwrap());
        assert_eq!(back.serialize(), t.serialize());
    }

    #[test]
    fn string_conversion() {
        let text = "item_id_a item_id_b mode action is_directional a_is_acting score\n\
                    P2 P1 binding - f f 900\n\
                    P1 P2 reaction - f f 900\n\
                    P1 P3 activation activation t t 400\n";
        let tsv = convert_string_actions(text).unwrap();
        let net = parse_network(&tsv, Mode::Multilabel).unwrap();
        assert_eq!(net.n_types(), 7);
        assert_eq!(net.edge_count(), 2);
        let (p1, p2) = (net.index_of("P1").unwrap(), net.index_of("P2").unwrap());
        assert_eq!(net.edge_types(p1, p2), Some(TypeSet(0b100_0010)));
    }
}
