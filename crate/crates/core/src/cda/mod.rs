//! Community detection: Louvain, BEC and Infomap, together with the
//! partition types and quality functions they optimize.

mod algorithm;
mod bec;
mod infomap;
mod io;
mod louvain;
mod mapeq;
mod modularity;
mod work;

pub use algorithm::{Algorithm, UnknownAlgorithm};
pub use bec::{bec, bec_traced, edge_fscore, BecTrace, EdgeFScore};
pub use infomap::infomap;
pub use io::{read_partition, write_labeled_partition, write_partition};
pub use louvain::{louvain, louvain_with_resolution};
pub use mapeq::{map_equation, map_equation_strict, MapEquationTerms};
pub use modularity::{modularity, modularity_with_resolution};

use crate::graph::Graph;
use crate::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum CdaError {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("partition covers {found} nodes but the graph has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("graph has no edges")]
    NoEdges,
    #[error("graph is disconnected ({0} components)")]
    Disconnected(usize),
    #[error("partition file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Assignment of every node to one of `m` non-empty modules `0..m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    assignment: Vec<usize>,
    module_count: usize,
}

impl Partition {
    /// Validate an assignment whose module ids must already be contiguous.
    pub fn new(assignment: Vec<usize>) -> Result<Self, CdaError> {
        let m = assignment.iter().max().map_or(0, |&x| x + 1);
        let mut seen = vec![false; m];
        for &c in &assignment {
            seen[c] = true;
        }
        if let Some(empty) = seen.iter().position(|&s| !s) {
            return Err(CdaError::InvalidPartition(format!("module {empty} is empty")));
        }
        Ok(Self { assignment, module_count: m })
    }

    /// Relabel arbitrary labels to `0..m` in order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self { assignment, module_count: map.len() }
    }

    pub fn singletons(n: usize) -> Self {
        Self { assignment: (0..n).collect(), module_count: n }
    }

    pub fn one_module(n: usize) -> Self {
        Self { assignment: vec![0; n], module_count: usize::from(n > 0) }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn module_count(&self) -> usize {
        self.module_count
    }

    pub fn module_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn module_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.module_count];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.module_count];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    pub(crate) fn check_graph<F>(&self, graph: &Graph<F>) -> Result<(), CdaError> {
        if self.len() != graph.node_count() {
            return Err(CdaError::SizeMismatch { expected: graph.node_count(), found: self.len() });
        }
        Ok(())
    }

    /// Internal weight `w_ii` and strength `w_i` of each module.
    pub fn module_weights<F: Scalar>(&self, graph: &Graph<F>) -> Result<ModuleWeights<F>, CdaError> {
        self.check_graph(graph)?;
        let mut internal = vec![F::zero(); self.module_count];
        let mut strength = vec![F::zero(); self.module_count];
        for e in graph.edges() {
            let (a, b) = (self.assignment[e.u], self.assignment[e.v]);
            if a == b {
                internal[a] += e.weight;
            }
            strength[a] += e.weight;
            strength[b] += e.weight;
        }
        Ok(ModuleWeights { internal, strength })
    }
}

/// Per-module weight totals. On an undirected graph the in- and
/// out-strength of a module coincide, so one strength vector serves both.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleWeights<F> {
    pub internal: Vec<F>,
    pub strength: Vec<F>,
}

/// A partition reduced to `n_cut - 1` ranked categories plus a catch-all.
///
/// Categories are numbered from 1; category `n_cut` collects every node
/// outside the `n_cut - 1` largest modules.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPartition {
    pub base: Partition,
    pub n_cut: u32,
    category: Vec<u32>,
    /// Base module id for categories `1..=ranked_modules.len()`.
    ranked_modules: Vec<usize>,
}

impl LabeledPartition {
    pub fn category(&self, node: usize) -> u32 {
        self.category[node]
    }

    pub fn categories(&self) -> &[u32] {
        &self.category
    }

    pub fn catch_all(&self) -> u32 {
        self.n_cut
    }

    pub fn is_catch_all(&self, node: usize) -> bool {
        self.category[node] == self.n_cut
    }

    /// Categories `1..=k` that actually hold nodes (`k <= n_cut - 1`).
    pub fn active_categories(&self) -> std::ops::RangeInclusive<u32> {
        1..=self.ranked_modules.len() as u32
    }

    pub fn module_for_category(&self, category: u32) -> Option<usize> {
        category.checked_sub(1).and_then(|c| self.ranked_modules.get(c as usize)).copied()
    }

    /// Sizes of categories `1..=n_cut`, the last entry being the catch-all.
    pub fn category_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_cut as usize];
        for &c in &self.category {
            sizes[c as usize - 1] += 1;
        }
        sizes
    }

    pub fn len(&self) -> usize {
        self.category.len()
    }

    pub fn is_empty(&self) -> bool {
        self.category.is_empty()
    }
}

/// Keep the `n_cut - 1` most populous modules as categories `1..n_cut`
/// (ties broken by smaller module id) and send every other node to the
/// catch-all category `n_cut`.
pub fn truncate_partition(partition: &Partition, n_cut: u32) -> Result<LabeledPartition, CdaError> {
    if n_cut < 2 {
        return Err(CdaError::InvalidParameter("n_cut must be at least 2"));
    }
    let sizes = partition.module_sizes();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    order.truncate(n_cut as usize - 1);

    let mut module_category = vec![n_cut; sizes.len()];
    for (rank, &module) in order.iter().enumerate() {
        module_category[module] = rank as u32 + 1;
    }
    let category = partition.assignment().iter().map(|&c| module_category[c]).collect();
    Ok(LabeledPartition { base: partition.clone(), n_cut, category, ranked_modules: order })
}
