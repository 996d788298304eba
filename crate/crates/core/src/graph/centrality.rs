use super::{Graph, GraphError};
use crate::Scalar;

/// Eigenvector centrality: unit Euclidean norm, non-negative entries.
///
/// On a disconnected graph each component carries its own dominant
/// eigenvector, scaled to norm `sqrt(n_c / n)` for a component of `n_c`
/// nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityScores<F> {
    pub scores: Vec<F>,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Power iteration for the dominant eigenvector of the weighted adjacency
/// matrix, started from the uniform positive vector.
///
/// Each step multiplies by `A + I`. The shift leaves the eigenvectors
/// unchanged but separates the dominant eigenvalue from `-λ_max`, which
/// otherwise makes the iteration oscillate on bipartite graphs (stars, even
/// cycles). Components are normalized separately so that one component's
/// larger eigenvalue does not drive the others to zero. Iteration stops when the infinity-norm change between successive
/// normalized iterates drops below `tol`.
pub fn eigencentrality<F: Scalar>(
    graph: &Graph<F>,
    tol: F,
    max_iter: usize,
) -> Result<CentralityScores<F>, GraphError> {
    let n = graph.node_count();
    if n == 0 {
        return Err(GraphError::EmptyGraph);
    }
    if !(tol > F::zero()) {
        return Err(GraphError::InvalidParameter("tolerance must be positive"));
    }
    if max_iter == 0 {
        return Err(GraphError::InvalidParameter("max_iter must be at least 1"));
    }

    let component = graph.component_labels();
    let k = component.iter().copied().max().map_or(0, |m| m + 1);
    let mut target = vec![F::zero(); k];
    for &c in &component {
        target[c] += F::one();
    }
    let total = F::from_usize_lossy(n);
    target.iter_mut().for_each(|t| *t = (*t / total).sqrt());

    let mut x = vec![F::one() / total.sqrt(); n];
    let mut next = vec![F::zero(); n];
    let mut sq = vec![F::zero(); k];
    for iter in 1..=max_iter {
        for (i, slot) in next.iter_mut().enumerate() {
            let mut acc = x[i];
            for &(j, w) in graph.neighbors(i) {
                acc += w * x[j];
            }
            *slot = acc;
        }
        sq.iter_mut().for_each(|v| *v = F::zero());
        for (&c, &v) in component.iter().zip(&next) {
            sq[c] += v * v;
        }
        for (&c, v) in component.iter().zip(next.iter_mut()) {
            *v *= target[c] / sq[c].sqrt();
        }
        let delta = x.iter().zip(&next).map(|(&a, &b)| (a - b).abs()).fold(F::zero(), F::max);
        std::mem::swap(&mut x, &mut next);
        if delta < tol {
            return Ok(CentralityScores { scores: x, iterations_used: iter, converged: true });
        }
    }
    Ok(CentralityScores { scores: x, iterations_used: max_iter, converged: false })
}

/// Split nodes into anchors (centrality strictly above the nearest-rank
/// `q`-quantile) and tested nodes (everything else).
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSplit<F> {
    pub anchors: Vec<usize>,
    pub tested: Vec<usize>,
    pub quantile: f64,
    pub threshold: F,
    is_anchor: Vec<bool>,
}

impl<F> AnchorSplit<F> {
    pub fn is_anchor(&self, node: usize) -> bool {
        self.is_anchor[node]
    }

    pub fn node_count(&self) -> usize {
        self.is_anchor.len()
    }

    pub fn anchor_ids<'g, S>(&self, graph: &'g Graph<S>) -> Vec<&'g str> {
        self.anchors.iter().map(|&i| graph.ids[i].as_str()).collect()
    }
}

pub fn quantile_split<F: Scalar>(scores: &CentralityScores<F>, q: f64) -> Result<AnchorSplit<F>, GraphError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(GraphError::InvalidQuantile(q));
    }
    let n = scores.scores.len();
    if n == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let mut sorted = scores.scores.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite centrality"));
    let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
    let threshold = sorted[rank - 1];

    let is_anchor: Vec<bool> = scores.scores.iter().map(|&s| s > threshold).collect();
    let (anchors, tested): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| is_anchor[i]);
    Ok(AnchorSplit { anchors, tested, quantile: q, threshold, is_anchor })
}
