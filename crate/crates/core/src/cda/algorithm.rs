//! Named algorithms with a single scalar parameter.

use std::fmt;
use std::str::FromStr;

use super::{bec, infomap, louvain, louvain_with_resolution, CdaError, Partition};
use crate::graph::Graph;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    /// Louvain with multi-scale parameter `c` (resolution `1/c`).
    Louvain,
    /// Louvain with the resolution given directly.
    LouvainGamma,
    /// Edge-F-score agglomeration with scale `s`.
    Bec,
    /// Map-equation minimization; the parameter is ignored.
    Infomap,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Self::Louvain, Self::LouvainGamma, Self::Bec, Self::Infomap];

    pub fn name(self) -> &'static str {
        match self {
            Self::Louvain => "louvain",
            Self::LouvainGamma => "louvain-gamma",
            Self::Bec => "bec",
            Self::Infomap => "infomap",
        }
    }

    pub fn run<F: Scalar>(self, graph: &Graph<F>, parameter: f64, seed: u64) -> Result<Partition, CdaError> {
        let p = F::lit(parameter);
        match self {
            Self::Louvain => louvain(graph, p, seed),
            Self::LouvainGamma => louvain_with_resolution(graph, p, seed),
            Self::Bec => bec(graph, p),
            Self::Infomap => infomap(graph, seed),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown algorithm {given:?}; supported: louvain, louvain-gamma, bec, infomap")]
pub struct UnknownAlgorithm {
    pub given: String,
}

impl FromStr for Algorithm {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownAlgorithm { given: s.to_string() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        let err = "leiden".parse::<Algorithm>().unwrap_err();
        assert!(err.to_string().contains("louvain, louvain-gamma, bec, infomap"));
    }

    #[test]
    fn louvain_parameter_is_inverse_resolution() {
        let g = Graph::<f64>::with_nodes(
            6,
            &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0), (2, 3, 1.0)],
        )
        .unwrap();
        assert_eq!(Algorithm::Louvain.run(&g, 4.0, 1).unwrap(), Algorithm::LouvainGamma.run(&g, 0.25, 1).unwrap());
    }
}
