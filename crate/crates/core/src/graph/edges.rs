use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use super::{Graph, GraphError};
use crate::Scalar;

/// Directed weighted edges keyed by `(source, target)`; repeated lines for
/// the same pair are summed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DirectedEdgeBag<F> {
    edges: BTreeMap<(String, String), F>,
}

impl<F: Scalar> DirectedEdgeBag<F> {
    pub fn new() -> Self {
        Self { edges: BTreeMap::new() }
    }

    pub fn add(&mut self, src: &str, dst: &str, weight: F) {
        *self.edges.entry((src.to_string(), dst.to_string())).or_insert_with(F::zero) += weight;
    }

    pub fn get(&self, src: &str, dst: &str) -> Option<F> {
        self.edges.get(&(src.to_string(), dst.to_string())).copied()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, F)> {
        self.edges.iter().map(|((s, d), &w)| (s.as_str(), d.as_str(), w))
    }
}

/// Parse `src<sep>dst<sep>weight` lines where `<sep>` is a tab or a comma.
/// Blank lines and lines starting with `#` are skipped.
pub fn load_edge_list<F: Scalar, R: BufRead>(reader: R) -> Result<DirectedEdgeBag<F>, GraphError> {
    let mut bag = DirectedEdgeBag::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let sep = if trimmed.contains('\t') { '\t' } else { ',' };
        let fields: Vec<&str> = trimmed.split(sep).map(str::trim).collect();
        if fields.len() != 3 {
            return Err(GraphError::Parse {
                line: line_no,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(GraphError::Parse { line: line_no, message: "empty node id".into() });
        }
        let weight: f64 = fields[2]
            .parse()
            .map_err(|_| GraphError::Parse { line: line_no, message: format!("invalid weight {:?}", fields[2]) })?;
        if !weight.is_finite() {
            return Err(GraphError::Parse { line: line_no, message: "weight is not finite".into() });
        }
        if weight <= 0.0 {
            return Err(GraphError::NonPositiveWeight { line: line_no, weight });
        }
        bag.add(fields[0], fields[1], F::lit(weight));
    }
    Ok(bag)
}

/// Symmetrize: the weight of `{u, v}` is the larger of the two directed
/// weights. Self-loops are dropped; nodes are ordered by id.
pub fn to_undirected_max<F: Scalar>(bag: &DirectedEdgeBag<F>) -> Graph<F> {
    let mut pairs: BTreeMap<(&str, &str), F> = BTreeMap::new();
    let mut nodes = BTreeSet::new();
    for (s, d, w) in bag.iter() {
        if s == d {
            continue;
        }
        let key = if s < d { (s, d) } else { (d, s) };
        let slot = pairs.entry(key).or_insert(w);
        if w > *slot {
            *slot = w;
        }
        nodes.insert(s);
        nodes.insert(d);
    }
    let ids: Vec<String> = nodes.iter().map(|s| s.to_string()).collect();
    let pos: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let edges = pairs.into_iter().map(|((a, b), w)| (pos[a], pos[b], w));
    Graph::from_edges(ids, edges).expect("symmetrized edges are valid")
}

/// Write the graph's undirected edges in the edge-list format, one line per
/// edge, sorted by node index.
pub fn write_edge_list<F: Scalar, W: Write>(graph: &Graph<F>, mut writer: W) -> std::io::Result<()> {
    writeln!(writer, "# src,dst,weight")?;
    for e in graph.edges() {
        writeln!(writer, "{},{},{}", graph.id(e.u), graph.id(e.v), e.weight)?;
    }
    writer.flush()
}
