//! Two-level map equation for undirected graphs.

use super::{CdaError, Partition};
use crate::graph::Graph;
use crate::scalar::plogp;
use crate::Scalar;

/// Terms of the two-level map equation, all entropies in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct MapEquationTerms<F> {
    /// Probability per step that the walk switches modules.
    pub q_switch: F,
    /// Exit probability of each module.
    pub exit: Vec<F>,
    /// Total within-module codebook use: exit plus node visit rates.
    pub p_circ: Vec<F>,
    /// Entropy of the module-switch codebook.
    pub h_q: F,
    /// Entropy of each module's codebook.
    pub h_p: Vec<F>,
    /// Description length `q H(Q) + Σ p_i H(P_i)` in bits per step.
    pub codelength: F,
}

/// Evaluate the map equation with visit rates proportional to node strength
/// (the stationary distribution of an unrecorded, teleport-free walk).
///
/// On a disconnected graph these rates are still stationary, with each
/// component weighted by its share of the total edge weight.
pub fn map_equation<F: Scalar>(graph: &Graph<F>, partition: &Partition) -> Result<MapEquationTerms<F>, CdaError> {
    let w = graph.total_weight();
    if w <= F::zero() {
        return Err(CdaError::NoEdges);
    }
    let mw = partition.module_weights(graph)?;
    let two_w = w + w;
    let m = partition.module_count();

    let exit: Vec<F> =
        (0..m).map(|i| ((mw.strength[i] - mw.internal[i] - mw.internal[i]) / two_w).max(F::zero())).collect();
    let q_switch: F = exit.iter().copied().sum();

    let mut p_circ = exit.clone();
    for (node, &s) in graph.strengths().iter().enumerate() {
        p_circ[partition.module_of(node)] += s / two_w;
    }

    let h_q = entropy(exit.iter().copied(), q_switch);

    let mut members_flow: Vec<Vec<F>> = vec![Vec::new(); m];
    for (node, &s) in graph.strengths().iter().enumerate() {
        members_flow[partition.module_of(node)].push(s / two_w);
    }
    let h_p: Vec<F> =
        (0..m).map(|i| entropy(std::iter::once(exit[i]).chain(members_flow[i].iter().copied()), p_circ[i])).collect();

    let codelength = q_switch * h_q + p_circ.iter().zip(&h_p).map(|(&p, &h)| p * h).sum::<F>();
    Ok(MapEquationTerms { q_switch, exit, p_circ, h_q, h_p, codelength })
}

/// As [`map_equation`], but refuses disconnected graphs.
pub fn map_equation_strict<F: Scalar>(
    graph: &Graph<F>,
    partition: &Partition,
) -> Result<MapEquationTerms<F>, CdaError> {
    let components = graph.component_count();
    if components > 1 {
        return Err(CdaError::Disconnected(components));
    }
    map_equation(graph, partition)
}

/// Shannon entropy of the distribution `weights / total`.
fn entropy<F: Scalar>(weights: impl Iterator<Item = F>, total: F) -> F {
    if total <= F::zero() {
        return F::zero();
    }
    -weights.map(|x| plogp(x / total)).sum::<F>()
}
