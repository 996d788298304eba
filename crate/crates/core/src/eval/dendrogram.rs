use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::cda::{truncate_partition, Algorithm, LabeledPartition};
use crate::graph::Graph;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryNode {
    pub id: u32,
    pub size: usize,
    pub share: f64,
    pub catch_all: bool,
    pub tracked: Vec<String>,
    /// Category at the next grid value sharing the most members with this
    /// one; `None` at the last level.
    pub parent: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub parameter: f64,
    pub communities: usize,
    pub categories: Vec<CategoryNode>,
}

impl Level {
    /// Distinct non-catch-all categories holding at least one tracked user.
    pub fn tracked_categories(&self) -> usize {
        self.categories.iter().filter(|c| !c.catch_all && !c.tracked.is_empty()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub algorithm: String,
    pub grid: Vec<f64>,
    pub n_cut: u32,
    pub tracked: Vec<String>,
    /// One level per grid value, in grid order.
    pub levels: Vec<Level>,
}

/// Nested form: the last grid value is the root, each level's children are
/// the level at the preceding grid value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub parameter: f64,
    pub categories: Vec<TreeCategory>,
    pub children: Vec<TreeNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeCategory {
    pub id: u32,
    pub share: f64,
    pub tracked: Vec<String>,
    /// Categories of the child level linked to this one.
    pub merged_from: Vec<u32>,
}

impl Dendrogram {
    pub fn tracked_category_counts(&self) -> Vec<usize> {
        self.levels.iter().map(Level::tracked_categories).collect()
    }

    pub fn community_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.communities).collect()
    }

    pub fn tree(&self) -> TreeNode {
        let mut node: Option<TreeNode> = None;
        for (i, level) in self.levels.iter().enumerate() {
            let categories = level
                .categories
                .iter()
                .map(|c| TreeCategory {
                    id: c.id,
                    share: c.share,
                    tracked: c.tracked.clone(),
                    merged_from: match i {
                        0 => Vec::new(),
                        _ => self.levels[i - 1]
                            .categories
                            .iter()
                            .filter(|f| f.parent == Some(c.id))
                            .map(|f| f.id)
                            .collect(),
                    },
                })
                .collect();
            node = Some(TreeNode { parameter: level.parameter, categories, children: node.into_iter().collect() });
        }
        node.expect("at least one level")
    }

    /// `{algorithm, grid, n_cut, tracked_category_counts, tree}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "algorithm": self.algorithm,
            "grid": self.grid,
            "n_cut": self.n_cut,
            "communities": self.community_counts(),
            "tracked_category_counts": self.tracked_category_counts(),
            "tree": self.tree(),
        })
    }
}

/// For each category of `fine`, the category of `coarse` sharing the most
/// members; ties go to the larger coarse category, then the smaller id.
fn link(fine: &LabeledPartition, coarse: &LabeledPartition) -> Vec<u32> {
    let k_f = fine.n_cut as usize;
    let k_c = coarse.n_cut as usize;
    let mut overlap = vec![vec![0usize; k_c]; k_f];
    for i in 0..fine.len() {
        overlap[fine.category(i) as usize - 1][coarse.category(i) as usize - 1] += 1;
    }
    let sizes = coarse.category_sizes();
    overlap
        .iter()
        .map(|row| {
            let best = (0..k_c).max_by_key(|&j| (row[j], sizes[j], std::cmp::Reverse(j))).expect("n_cut >= 2");
            best as u32 + 1
        })
        .collect()
}

/// Run `algorithm` at every grid value, truncate at `n_cut`, and link the
/// categories of consecutive levels by maximal member overlap.
pub fn dendrogram_sweep<F: Scalar>(
    graph: &Graph<F>,
    algorithm: Algorithm,
    grid: &[f64],
    tracked: &[String],
    n_cut: u32,
    seed: u64,
) -> Result<Dendrogram, EvalError> {
    if grid.is_empty() {
        return Err(EvalError::InvalidParameter("empty parameter grid".into()));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) || grid.iter().any(|g| !g.is_finite()) {
        return Err(EvalError::InvalidParameter("grid must be finite and sorted ascending".into()));
    }
    let tracked_nodes: Vec<usize> = tracked
        .iter()
        .map(|u| graph.index_of(u).ok_or_else(|| EvalError::UnknownTrackedUser(u.clone())))
        .collect::<Result<_, _>>()?;
    let tracked_set: BTreeSet<usize> = tracked_nodes.iter().copied().collect();

    let parts = grid
        .par_iter()
        .map(|&param| {
            let p = algorithm.run(graph, param, seed)?;
            let communities = p.module_count();
            Ok((communities, truncate_partition(&p, n_cut)?))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;

    let n = graph.node_count().max(1) as f64;
    let mut levels = Vec::with_capacity(grid.len());
    for (i, (communities, lp)) in parts.iter().enumerate() {
        let sizes = lp.category_sizes();
        let parents = parts.get(i + 1).map(|(_, next)| link(lp, next));
        let categories = (1..=n_cut)
            .filter(|&c| sizes[c as usize - 1] > 0)
            .map(|c| CategoryNode {
                id: c,
                size: sizes[c as usize - 1],
                share: sizes[c as usize - 1] as f64 / n,
                catch_all: c == lp.catch_all(),
                tracked: tracked_set
                    .iter()
                    .filter(|&&u| lp.category(u) == c)
                    .map(|&u| graph.id(u).to_string())
                    .collect(),
                parent: parents.as_ref().map(|p| p[c as usize - 1]),
            })
            .collect();
        levels.push(Level { parameter: grid[i], communities: *communities, categories });
    }
    let mut tracked_ids: Vec<String> = tracked_set.iter().map(|&u| graph.id(u).to_string()).collect();
    tracked_ids.sort();
    Ok(Dendrogram { algorithm: algorithm.name().to_string(), grid: grid.to_vec(), n_cut, tracked: tracked_ids, levels })
}
