//! Multi-level greedy modularity optimization.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::work::{compact_labels, WorkGraph};
use super::{CdaError, Partition};
use crate::graph::Graph;
use crate::Scalar;

/// Louvain with multi-scale parameter `c` (resolution `1/c`).
pub fn louvain<F: Scalar>(graph: &Graph<F>, c: F, seed: u64) -> Result<Partition, CdaError> {
    if !(c > F::zero() && c.is_finite()) {
        return Err(CdaError::InvalidParameter("scale c must be positive"));
    }
    louvain_with_resolution(graph, F::one() / c, seed)
}

/// Louvain with an explicit resolution `γ`.
///
/// Each level sweeps the nodes in a seeded random order, moving each node to
/// the neighboring module with the largest strictly positive modularity
/// gain (ties to the smaller module id) until a full sweep makes no move.
/// Modules are then collapsed into nodes and the process repeats until a
/// level makes no move.
pub fn louvain_with_resolution<F: Scalar>(graph: &Graph<F>, gamma: F, seed: u64) -> Result<Partition, CdaError> {
    if graph.is_empty() {
        return Err(CdaError::InvalidParameter("graph is empty"));
    }
    if !(gamma >= F::zero() && gamma.is_finite()) {
        return Err(CdaError::InvalidParameter("resolution must be non-negative"));
    }
    let n = graph.node_count();
    if graph.total_weight() <= F::zero() {
        return Ok(Partition::singletons(n));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut work = WorkGraph::from_graph(graph);
    let mut membership: Vec<usize> = (0..n).collect();
    loop {
        let (mut local, moved) = local_moves(&work, gamma, &mut rng);
        if !moved {
            break;
        }
        let m = compact_labels(&mut local);
        for c in membership.iter_mut() {
            *c = local[*c];
        }
        work = work.aggregate(&local, m);
    }
    Ok(Partition::from_labels(&membership))
}

fn local_moves<F: Scalar>(work: &WorkGraph<F>, gamma: F, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = work.len();
    let two_w = work.total + work.total;
    let mut community: Vec<usize> = (0..n).collect();
    let mut community_strength = work.strength.clone();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    // scratch: weight from the current node into each neighboring community
    let mut link = vec![F::zero(); n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_move = false;
    loop {
        let mut moved = false;
        for &i in &order {
            let home = community[i];
            let ki = work.strength[i];
            touched.clear();
            for &(j, w) in &work.adj[i] {
                let cj = community[j];
                if link[cj] == F::zero() && !touched.contains(&cj) {
                    touched.push(cj);
                }
                link[cj] += w;
            }
            community_strength[home] -= ki;

            let gain = |c: usize, k_in: F| k_in - gamma * community_strength[c] * ki / two_w;
            let tol = F::improvement_tol() * ki.max(F::one());
            let mut best = home;
            let mut best_gain = gain(home, link[home]);
            touched.sort_unstable();
            for &c in &touched {
                if c == home {
                    continue;
                }
                let g = gain(c, link[c]);
                if g > best_gain + tol {
                    best = c;
                    best_gain = g;
                }
            }
            community_strength[best] += ki;
            if best != home {
                community[i] = best;
                moved = true;
            }
            for &c in &touched {
                link[c] = F::zero();
            }
        }
        if !moved {
            break;
        }
        any_move = true;
    }
    (community, any_move)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cda::modularity;

    fn clique_ring(cliques: usize, size: usize) -> Graph<f64> {
        let mut edges = Vec::new();
        for c in 0..cliques {
            let base = c * size;
            for a in 0..size {
                for b in a + 1..size {
                    edges.push((base + a, base + b, 1.0));
                }
            }
            let next = ((c + 1) % cliques) * size;
            edges.push((base, next + 1, 1.0));
        }
        Graph::with_nodes(cliques * size, &edges).unwrap()
    }

    #[test]
    fn single_clique_is_one_community() {
        let mut edges = Vec::new();
        for a in 0..5 {
            for b in a + 1..5 {
                edges.push((a, b, 1.0));
            }
        }
        let k5 = Graph::with_nodes(5, &edges).unwrap();
        assert_eq!(louvain(&k5, 1.0, 1).unwrap().module_count(), 1);
    }

    #[test]
    fn ring_of_cliques_recovers_cliques() {
        let g = clique_ring(8, 5);
        let truth = Partition::new((0..40).map(|i| i / 5).collect()).unwrap();
        let analytic = modularity(&g, &truth, 1.0).unwrap();
        // 8 * (10/88 - (22/176)^2)
        assert!((analytic - 8.0 * (10.0 / 88.0 - (22.0f64 / 176.0).powi(2))).abs() < 1e-12);
        for seed in 0..5 {
            let p = louvain(&g, 1.0, seed).unwrap();
            assert_eq!(p.module_count(), 8);
            let q = modularity(&g, &p, 1.0).unwrap();
            assert!((q - analytic).abs() < 1e-9);
        }
    }

    #[test]
    fn large_scale_coarsens() {
        let g = clique_ring(8, 5);
        let fine = louvain(&g, 1.0, 3).unwrap().module_count();
        let coarse = louvain(&g, 100.0, 3).unwrap().module_count();
        assert!(coarse < fine);
    }

    #[test]
    fn deterministic_for_seed() {
        let g = clique_ring(6, 4);
        assert_eq!(louvain(&g, 0.7, 11).unwrap(), louvain(&g, 0.7, 11).unwrap());
    }

    #[test]
    fn edgeless_graph_gives_singletons() {
        let g = Graph::<f64>::with_nodes(3, &[]).unwrap();
        assert_eq!(louvain(&g, 1.0, 0).unwrap().module_count(), 3);
    }

    #[test]
    fn works_in_single_precision() {
        let mut edges = Vec::new();
        for c in 0..4usize {
            for a in 0..4 {
                for b in a + 1..4 {
                    edges.push((c * 4 + a, c * 4 + b, 1.0f32));
                }
            }
            edges.push((c * 4, ((c + 1) % 4) * 4 + 1, 1.0));
        }
        let g = Graph::with_nodes(16, &edges).unwrap();
        assert_eq!(louvain(&g, 1.0f32, 0).unwrap().module_count(), 4);
    }
}
