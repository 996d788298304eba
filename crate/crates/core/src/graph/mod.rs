//! Weighted undirected interaction graph.
//!
//! Node ids are opaque strings externally and dense `usize` indices
//! internally. Edges are stored once with `u < v`; self-loops are rejected.

mod centrality;
mod edges;

use std::collections::{HashMap, VecDeque};
use std::io::{Read, Write};

pub use centrality::{eigencentrality, quantile_split, AnchorSplit, CentralityScores};
pub use edges::{load_edge_list, to_undirected_max, write_edge_list, DirectedEdgeBag};

use crate::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: weight must be positive, got {weight}")]
    NonPositiveWeight { line: usize, weight: f64 },
    #[error("edge list is empty")]
    EmptyEdgeList,
    #[error("graph is empty")]
    EmptyGraph,
    #[error("invalid edge ({u}, {v}): {reason}")]
    InvalidEdge { u: usize, v: usize, reason: &'static str },
    #[error("duplicate node id {0:?}")]
    DuplicateNode(String),
    #[error("unknown node id {0:?}")]
    UnknownNode(String),
    #[error("quantile must lie in (0, 1), got {0}")]
    InvalidQuantile(f64),
    #[error("invalid centrality parameters: {0}")]
    InvalidParameter(&'static str),
    #[error("node map: {0}")]
    NodeMap(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<F> {
    pub u: usize,
    pub v: usize,
    pub weight: F,
}

/// Weighted undirected graph without self-loops.
#[derive(Debug, Clone)]
pub struct Graph<F> {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge<F>>,
    adjacency: Vec<Vec<(usize, F)>>,
    strength: Vec<F>,
    total_weight: F,
}

impl<F: Scalar> Graph<F> {
    /// Build a graph from node ids and index-based edges.
    ///
    /// Every weight must be finite and positive, endpoints distinct and in
    /// range, and each unordered pair may appear only once.
    pub fn from_edges<I>(ids: Vec<String>, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, F)>,
    {
        let n = ids.len();
        let mut index = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(id.clone()));
            }
        }
        let mut list = Vec::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(GraphError::InvalidEdge { u: a, v: b, reason: "endpoint out of range" });
            }
            if a == b {
                return Err(GraphError::InvalidEdge { u: a, v: b, reason: "self-loop" });
            }
            if !(w.is_finite() && w > F::zero()) {
                return Err(GraphError::InvalidEdge { u: a, v: b, reason: "weight must be finite and positive" });
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            list.push(Edge { u, v, weight: w });
        }
        list.sort_by_key(|x| (x.u, x.v));
        if let Some(pair) = list.windows(2).find(|p| (p[0].u, p[0].v) == (p[1].u, p[1].v)) {
            return Err(GraphError::InvalidEdge { u: pair[0].u, v: pair[0].v, reason: "duplicate edge" });
        }

        let mut adjacency = vec![Vec::new(); n];
        let mut strength = vec![F::zero(); n];
        let mut total_weight = F::zero();
        for e in &list {
            adjacency[e.u].push((e.v, e.weight));
            adjacency[e.v].push((e.u, e.weight));
            strength[e.u] += e.weight;
            strength[e.v] += e.weight;
            total_weight += e.weight;
        }
        for nbrs in &mut adjacency {
            nbrs.sort_by_key(|&(j, _)| j);
        }
        Ok(Self { ids, index, edges: list, adjacency, strength, total_weight })
    }

    /// Graph over nodes `"0".."n-1"`; convenient for tests and generators.
    pub fn with_nodes(n: usize, edges: &[(usize, usize, F)]) -> Result<Self, GraphError> {
        let ids = (0..n).map(|i| i.to_string()).collect();
        Self::from_edges(ids, edges.iter().copied())
    }
}

impl<F> Graph<F> {
    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, node: usize) -> &str {
        &self.ids[node]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn edges(&self) -> &[Edge<F>] {
        &self.edges
    }

    /// Neighbors of `node` with edge weights, sorted by neighbor index.
    pub fn neighbors(&self, node: usize) -> &[(usize, F)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn strengths(&self) -> &[F] {
        &self.strength
    }
}

impl<F: Scalar> Graph<F> {
    pub fn strength(&self, node: usize) -> F {
        self.strength[node]
    }

    /// Sum of all edge weights (each undirected edge counted once).
    pub fn total_weight(&self) -> F {
        self.total_weight
    }

    /// Subgraph induced by the nodes with `keep[i] == true`, preserving the
    /// relative order of node indices.
    pub fn induced_subgraph(&self, keep: &[bool]) -> Self {
        assert_eq!(keep.len(), self.node_count());
        let mut remap = vec![usize::MAX; self.node_count()];
        let mut ids = Vec::new();
        for (i, id) in self.ids.iter().enumerate() {
            if keep[i] {
                remap[i] = ids.len();
                ids.push(id.clone());
            }
        }
        let edges = self.edges.iter().filter(|e| keep[e.u] && keep[e.v]).map(|e| (remap[e.u], remap[e.v], e.weight));
        Self::from_edges(ids, edges).expect("induced subgraph of a valid graph is valid")
    }

    /// Repeatedly remove nodes with fewer than `k` incident edges until every
    /// remaining node has degree at least `k`.
    pub fn filter_min_degree(&self, k: usize) -> Self {
        let n = self.node_count();
        let mut degree: Vec<usize> = (0..n).map(|i| self.degree(i)).collect();
        let mut alive = vec![true; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| degree[i] < k).collect();
        for &i in &queue {
            alive[i] = false;
        }
        while let Some(i) = queue.pop_front() {
            for &(j, _) in &self.adjacency[i] {
                if alive[j] {
                    degree[j] -= 1;
                    if degree[j] < k {
                        alive[j] = false;
                        queue.push_back(j);
                    }
                }
            }
        }
        self.induced_subgraph(&alive)
    }

    /// Connected-component label per node, labels numbered in order of the
    /// smallest node index they contain.
    pub fn component_labels(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                for &(j, _) in &self.adjacency[i] {
                    if label[j] == usize::MAX {
                        label[j] = next;
                        stack.push(j);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn component_count(&self) -> usize {
        self.component_labels().into_iter().max().map_or(0, |m| m + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    /// Write the node-id map as CSV `node_id,index`.
    pub fn write_node_map<W: Write>(&self, writer: W) -> Result<(), GraphError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["node_id", "index"]).map_err(csv_err)?;
        for (i, id) in self.ids.iter().enumerate() {
            w.write_record([id.as_str(), &i.to_string()]).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Read a CSV `node_id,index` map, returning ids ordered by index.
pub fn read_node_map<R: Read>(reader: R) -> Result<Vec<String>, GraphError> {
    let mut r = csv::Reader::from_reader(reader);
    let mut rows: Vec<(usize, String)> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let id = rec.get(0).ok_or_else(|| GraphError::NodeMap("missing node_id".into()))?;
        let idx: usize = rec
            .get(1)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| GraphError::NodeMap(format!("bad index for {id:?}")))?;
        rows.push((idx, id.to_string()));
    }
    rows.sort();
    for (expected, (idx, _)) in rows.iter().enumerate() {
        if *idx != expected {
            return Err(GraphError::NodeMap("indices are not a contiguous range from 0".into()));
        }
    }
    Ok(rows.into_iter().map(|(_, id)| id).collect())
}

fn csv_err(e: csv::Error) -> GraphError {
    GraphError::NodeMap(e.to_string())
}
