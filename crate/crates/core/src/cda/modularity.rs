use super::{CdaError, Partition};
use crate::graph::Graph;
use crate::Scalar;

/// Multi-scale modularity with scale `c`: resolution `γ = 1/c`, so larger
/// `c` favours coarser partitions. `c = 1` is standard modularity.
pub fn modularity<F: Scalar>(graph: &Graph<F>, partition: &Partition, c: F) -> Result<F, CdaError> {
    if !(c > F::zero() && c.is_finite()) {
        return Err(CdaError::InvalidParameter("scale c must be positive"));
    }
    modularity_with_resolution(graph, partition, F::one() / c)
}

/// `Q_γ = Σ_i [ w_ii / w − γ (w_i / 2w)² ]`.
pub fn modularity_with_resolution<F: Scalar>(graph: &Graph<F>, partition: &Partition, gamma: F) -> Result<F, CdaError> {
    if !(gamma >= F::zero() && gamma.is_finite()) {
        return Err(CdaError::InvalidParameter("resolution must be non-negative"));
    }
    let w = graph.total_weight();
    if w <= F::zero() {
        return Err(CdaError::NoEdges);
    }
    let mw = partition.module_weights(graph)?;
    let two_w = w + w;
    Ok(mw
        .internal
        .iter()
        .zip(&mw.strength)
        .map(|(&wii, &wi)| {
            let frac = wi / two_w;
            wii / w - gamma * frac * frac
        })
        .sum())
}
