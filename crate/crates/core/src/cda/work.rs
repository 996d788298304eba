//! Working graph for multi-level optimizers: nodes may carry self-loops
//! after aggregation.

use crate::graph::Graph;
use crate::Scalar;

#[derive(Debug, Clone)]
pub(crate) struct WorkGraph<F> {
    /// Neighbors without self entries, sorted by index.
    pub adj: Vec<Vec<(usize, F)>>,
    /// Self-loop weight; contributes twice to the node strength.
    pub loops: Vec<F>,
    pub strength: Vec<F>,
    /// Total edge weight, each edge and loop counted once.
    pub total: F,
}

impl<F: Scalar> WorkGraph<F> {
    pub fn from_graph(g: &Graph<F>) -> Self {
        let n = g.node_count();
        Self {
            adj: (0..n).map(|i| g.neighbors(i).to_vec()).collect(),
            loops: vec![F::zero(); n],
            strength: g.strengths().to_vec(),
            total: g.total_weight(),
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    /// Collapse nodes into their modules (`membership` values in `0..m`).
    pub fn aggregate(&self, membership: &[usize], m: usize) -> Self {
        let mut loops = vec![F::zero(); m];
        let mut strength = vec![F::zero(); m];
        let mut links: Vec<(usize, usize, F)> = Vec::new();
        for (i, nbrs) in self.adj.iter().enumerate() {
            let ci = membership[i];
            loops[ci] += self.loops[i];
            strength[ci] += self.strength[i];
            for &(j, w) in nbrs {
                if j <= i {
                    continue;
                }
                let cj = membership[j];
                if ci == cj {
                    loops[ci] += w;
                } else {
                    links.push((ci.min(cj), ci.max(cj), w));
                }
            }
        }
        links.sort_by_key(|a| (a.0, a.1));
        let mut adj = vec![Vec::new(); m];
        let mut iter = links.into_iter().peekable();
        while let Some((a, b, mut w)) = iter.next() {
            while let Some(&(a2, b2, w2)) = iter.peek() {
                if (a2, b2) != (a, b) {
                    break;
                }
                w += w2;
                iter.next();
            }
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        for nbrs in &mut adj {
            nbrs.sort_by_key(|&(j, _)| j);
        }
        Self { adj, loops, strength, total: self.total }
    }
}

/// Relabel `labels` to `0..m` by first appearance; returns `m`.
pub(crate) fn compact_labels(labels: &mut [usize]) -> usize {
    let mut map = vec![usize::MAX; labels.len().max(labels.iter().copied().max().map_or(0, |x| x + 1))];
    let mut next = 0;
    for l in labels.iter_mut() {
        if map[*l] == usize::MAX {
            map[*l] = next;
            next += 1;
        }
        *l = map[*l];
    }
    next
}
