//! Finite node-labeled directed graphs, node sets and valuations.

mod nodeset;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use nodeset::NodeSet;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("cannot read graph file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed graph JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("edge endpoint `{0}` is not a node")]
    DanglingEndpoint(String),
    #[error("duplicate edge `{0}` -> `{1}`")]
    DuplicateEdge(String, String),
    #[error("node `{node}` carries label `{label}` outside the proposition universe")]
    UnknownLabel { node: String, label: String },
    #[error("node index {0} out of range")]
    NodeOutOfRange(usize),
    #[error("proposition universes differ: {0:?} vs {1:?}")]
    UniverseMismatch(Vec<String>, Vec<String>),
}

/// A finite directed graph whose nodes carry sets of proposition symbols.
///
/// Nodes are dense indices `0..N` in file order. Edges form a set, so
/// parallel edges are rejected; self-loops are fine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    props: Vec<String>,
    ids: Vec<String>,
    labels: Vec<FixedBitSet>,
    succ: Vec<Vec<usize>>,
}

impl LabeledGraph {
    /// Build a graph from node ids, per-node label lists and index edges.
    /// `props` is the proposition universe; it is sorted and deduplicated.
    pub fn new(
        props: impl IntoIterator<Item = String>,
        nodes: Vec<(String, Vec<String>)>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let props: Vec<String> = props.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let pidx: HashMap<&str, usize> = props.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
        let n = nodes.len();
        let mut ids = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        let mut seen = HashSet::new();
        for (id, labs) in nodes {
            if !seen.insert(id.clone()) {
                return Err(GraphError::DuplicateNode(id));
            }
            let mut bits = FixedBitSet::with_capacity(props.len());
            for l in labs {
                match pidx.get(l.as_str()) {
                    Some(&i) => bits.insert(i),
                    None => return Err(GraphError::UnknownLabel { node: id, label: l }),
                }
            }
            ids.push(id);
            labels.push(bits);
        }
        let mut succ = vec![Vec::new(); n];
        let mut edge_set = HashSet::new();
        for (u, v) in edges {
            for e in [u, v] {
                if e >= n {
                    return Err(GraphError::DanglingEndpoint(e.to_string()));
                }
            }
            if !edge_set.insert((u, v)) {
                return Err(GraphError::DuplicateEdge(ids[u].clone(), ids[v].clone()));
            }
            succ[u].push(v);
        }
        Ok(LabeledGraph { props, ids, labels, succ })
    }

    /// Convenience constructor with ids `"0".."N-1"` and the universe taken
    /// from the labels.
    pub fn from_parts(labels: &[&[&str]], edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let props: BTreeSet<String> = labels.iter().flat_map(|l| l.iter().map(|s| s.to_string())).collect();
        let nodes = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (i.to_string(), l.iter().map(|s| s.to_string()).collect()))
            .collect();
        Self::new(props, nodes, edges.iter().copied())
    }

    pub fn empty() -> Self {
        LabeledGraph { props: vec![], ids: vec![], labels: vec![], succ: vec![] }
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// The sorted proposition universe.
    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn prop_index(&self, p: &str) -> Option<usize> {
        self.props.binary_search_by(|q| q.as_str().cmp(p)).ok()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, n: usize) -> &str {
        &self.ids[n]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|i| i == id)
    }

    /// Out-neighbors of `n` in insertion order.
    pub fn out_neighbors(&self, n: usize) -> Result<&[usize], GraphError> {
        self.succ.get(n).map(Vec::as_slice).ok_or(GraphError::NodeOutOfRange(n))
    }

    /// Unchecked variant of [`out_neighbors`](Self::out_neighbors) for hot loops.
    pub fn succ(&self, n: usize) -> &[usize] {
        &self.succ[n]
    }

    pub fn out_degree(&self, n: usize) -> usize {
        self.succ[n].len()
    }

    pub fn has_label(&self, n: usize, prop: usize) -> bool {
        self.labels[n].contains(prop)
    }

    /// Whether node `n` carries proposition `p`; symbols outside the universe
    /// are false everywhere.
    pub fn holds(&self, n: usize, p: &str) -> bool {
        self.prop_index(p).is_some_and(|i| self.labels[n].contains(i))
    }

    pub fn labels_of(&self, n: usize) -> Vec<&str> {
        self.labels[n].ones().map(|i| self.props[i].as_str()).collect()
    }

    /// Nodes labeled with `p`.
    pub fn label_set(&self, p: &str) -> NodeSet {
        NodeSet::from_fn(self.node_count(), |n| self.holds(n, p))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ.iter().enumerate().flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    /// `self ⊎ other`: `other`'s nodes follow, shifted by `self.node_count()`.
    /// Clashing ids from `other` get a `'` appended until unique.
    pub fn disjoint_union(&self, other: &LabeledGraph) -> Result<LabeledGraph, GraphError> {
        if self.props != other.props {
            return Err(GraphError::UniverseMismatch(self.props.clone(), other.props.clone()));
        }
        let shift = self.node_count();
        let mut taken: HashSet<String> = self.ids.iter().cloned().collect();
        let mut ids = self.ids.clone();
        for id in &other.ids {
            let mut fresh = id.clone();
            while taken.contains(&fresh) {
                fresh.push('\'');
            }
            taken.insert(fresh.clone());
            ids.push(fresh);
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let mut succ = self.succ.clone();
        succ.extend(other.succ.iter().map(|vs| vs.iter().map(|v| v + shift).collect()));
        Ok(LabeledGraph { props: self.props.clone(), ids, labels, succ })
    }

    /// Same graph over a different proposition universe. Labels outside the
    /// new universe are dropped.
    pub fn with_universe(&self, props: impl IntoIterator<Item = String>) -> LabeledGraph {
        let props: Vec<String> = props.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let labels = (0..self.node_count())
            .map(|n| {
                let mut b = FixedBitSet::with_capacity(props.len());
                for (i, p) in props.iter().enumerate() {
                    if self.holds(n, p) {
                        b.insert(i);
                    }
                }
                b
            })
            .collect();
        LabeledGraph { props, ids: self.ids.clone(), labels, succ: self.succ.clone() }
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let file: GraphFile = serde_json::from_str(text)?;
        file.into_graph()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GraphFile::from_graph(self)).expect("graph serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GraphError> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    /// `{"id": bool}` map in node order.
    pub fn labeling(&self, set: &NodeSet) -> Labeling {
        self.ids.iter().enumerate().map(|(i, id)| (id.clone(), serde_json::Value::Bool(set.contains(i)))).collect()
    }
}

/// Boolean node classification keyed by node id.
pub type Labeling = serde_json::Map<String, serde_json::Value>;

/// Node ids in files may be strings or non-negative integers.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FileId {
    Str(String),
    Num(u64),
}

impl FileId {
    fn into_string(self) -> String {
        match self {
            FileId::Str(s) => s,
            FileId::Num(n) => n.to_string(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeEntry {
    id: FileId,
    #[serde(default)]
    props: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    props: Option<Vec<String>>,
    nodes: Vec<NodeEntry>,
    #[serde(default)]
    edges: Vec<(FileId, FileId)>,
}

impl GraphFile {
    fn into_graph(self) -> Result<LabeledGraph, GraphError> {
        let nodes: Vec<(String, Vec<String>)> = self.nodes.into_iter().map(|e| (e.id.into_string(), e.props)).collect();
        let props = match self.props {
            Some(p) => p,
            None => nodes.iter().flat_map(|(_, l)| l.iter().cloned()).collect(),
        };
        let mut index = HashMap::new();
        for (i, (id, _)) in nodes.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(id.clone()));
            }
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for (u, v) in self.edges {
            let (u, v) = (u.into_string(), v.into_string());
            let iu = *index.get(&u).ok_or(GraphError::DanglingEndpoint(u))?;
            let iv = *index.get(&v).ok_or(GraphError::DanglingEndpoint(v))?;
            edges.push((iu, iv));
        }
        LabeledGraph::new(props, nodes, edges)
    }

    fn from_graph(g: &LabeledGraph) -> Self {
        GraphFile {
            props: Some(g.props.clone()),
            nodes: (0..g.node_count())
                .map(|n| NodeEntry {
                    id: FileId::Str(g.ids[n].clone()),
                    props: g.labels_of(n).into_iter().map(String::from).collect(),
                })
                .collect(),
            edges: g.edges().map(|(u, v)| (FileId::Str(g.ids[u].clone()), FileId::Str(g.ids[v].clone()))).collect(),
        }
    }
}

/// A map from variable names to node sets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Valuation(BTreeMap<String, NodeSet>);

impl Valuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, x: &str) -> Option<&NodeSet> {
        self.0.get(x)
    }

    pub fn insert(&mut self, x: impl Into<String>, s: NodeSet) {
        self.0.insert(x.into(), s);
    }

    /// `V[X ↦ S]`.
    pub fn with(&self, x: impl Into<String>, s: NodeSet) -> Valuation {
        let mut out = self.clone();
        out.insert(x, s);
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &NodeSet)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }
}

impl FromIterator<(String, NodeSet)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (String, NodeSet)>>(iter: I) -> Self {
        Valuation(iter.into_iter().collect())
    }
}
