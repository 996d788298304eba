//! Edge-classification F-score and the BEC agglomeration that optimizes it.

use std::collections::BTreeMap;

use super::{CdaError, Partition};
use crate::graph::Graph;
use crate::Scalar;

/// Precision and recall of a clustering viewed as a classifier of edges.
///
/// Precision is intra-cluster edge weight per intra-cluster node pair;
/// recall is the share of total edge weight that falls inside clusters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeFScore<F> {
    pub precision: F,
    pub recall: F,
    pub scale: F,
    pub f_score: F,
}

fn scaled_f<F: Scalar>(precision: F, recall: F, s: F) -> F {
    let s2 = s * s;
    let denom = s2 * precision + recall;
    if denom <= F::zero() {
        return F::zero();
    }
    (F::one() + s2) * precision * recall / denom
}

fn score_from_totals<F: Scalar>(intra: F, pairs: F, total: F, s: F) -> EdgeFScore<F> {
    let precision = if pairs > F::zero() { intra / pairs } else { F::one() };
    let recall = intra / total;
    EdgeFScore { precision, recall, scale: s, f_score: scaled_f(precision, recall, s) }
}

pub fn edge_fscore<F: Scalar>(graph: &Graph<F>, partition: &Partition, s: F) -> Result<EdgeFScore<F>, CdaError> {
    if !(s > F::zero() && s.is_finite()) {
        return Err(CdaError::InvalidParameter("scale s must be positive"));
    }
    let total = graph.total_weight();
    if total <= F::zero() {
        return Err(CdaError::NoEdges);
    }
    let mw = partition.module_weights(graph)?;
    let intra: F = mw.internal.iter().copied().sum();
    let pairs: F = partition
        .module_sizes()
        .into_iter()
        .map(|k| F::from_usize_lossy(k) * F::from_usize_lossy(k.saturating_sub(1)) / F::lit(2.0))
        .sum();
    Ok(score_from_totals(intra, pairs, total, s))
}

/// Bookkeeping from a BEC run.
#[derive(Debug, Clone, PartialEq)]
pub struct BecTrace<F> {
    /// Number of edges examined; equals the edge count.
    pub edge_visits: usize,
    /// F-score after each accepted merge, in acceptance order.
    pub accepted_scores: Vec<F>,
}

pub fn bec<F: Scalar>(graph: &Graph<F>, s: F) -> Result<Partition, CdaError> {
    bec_traced(graph, s).map(|(p, _)| p)
}

/// Single-pass agglomeration from singletons.
///
/// Edges are visited once each, by descending weight and then ascending
/// endpoint pair. An edge joining two different clusters merges them when
/// the scaled F-score does not decrease. Intra weight and intra pair counts
/// are maintained incrementally; inter-cluster weights live in per-cluster
/// maps merged small-into-large.
pub fn bec_traced<F: Scalar>(graph: &Graph<F>, s: F) -> Result<(Partition, BecTrace<F>), CdaError> {
    if graph.is_empty() {
        return Err(CdaError::InvalidParameter("graph is empty"));
    }
    if !(s > F::zero() && s.is_finite()) {
        return Err(CdaError::InvalidParameter("scale s must be positive"));
    }
    let n = graph.node_count();
    let total = graph.total_weight();
    if total <= F::zero() {
        return Ok((Partition::singletons(n), BecTrace { edge_visits: 0, accepted_scores: Vec::new() }));
    }

    let mut order: Vec<usize> = (0..graph.edge_count()).collect();
    let edges = graph.edges();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (&edges[a], &edges[b]);
        eb.weight.partial_cmp(&ea.weight).expect("finite weights").then((ea.u, ea.v).cmp(&(eb.u, eb.v)))
    });

    let mut parent: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut between: Vec<BTreeMap<usize, F>> = (0..n).map(|i| graph.neighbors(i).iter().copied().collect()).collect();
    let mut intra = F::zero();
    let mut pairs = F::zero();
    let mut current = F::zero();
    let mut trace = BecTrace { edge_visits: 0, accepted_scores: Vec::new() };

    for idx in order {
        trace.edge_visits += 1;
        let e = edges[idx];
        let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
        if a == b {
            continue;
        }
        let w_ab = between[a].get(&b).copied().unwrap_or_else(F::zero);
        let new_intra = intra + w_ab;
        let new_pairs = pairs + F::from_usize_lossy(size[a]) * F::from_usize_lossy(size[b]);
        let candidate = score_from_totals(new_intra, new_pairs, total, s).f_score;
        if candidate < current {
            continue;
        }
        intra = new_intra;
        pairs = new_pairs;
        current = candidate;
        trace.accepted_scores.push(candidate);

        let (root, child) = if between[a].len() >= between[b].len() { (a, b) } else { (b, a) };
        parent[child] = root;
        size[root] += size[child];
        let child_links = std::mem::take(&mut between[child]);
        between[root].remove(&child);
        for (c, w) in child_links {
            if c == root {
                continue;
            }
            *between[root].entry(c).or_insert_with(F::zero) += w;
            let other = &mut between[c];
            other.remove(&child);
            *other.entry(root).or_insert_with(F::zero) += w;
        }
    }

    let labels: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    Ok((Partition::from_labels(&labels), trace))
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}
