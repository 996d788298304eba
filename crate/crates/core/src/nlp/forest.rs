//! Random forest of CART trees (Gini impurity, bootstrap samples, √dim
//! candidate features per split). Trees are grown in parallel, each from
//! its own RNG stream, so the result does not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linear::{argmax, check_training};
use super::NlpError;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub trees: usize,
    /// Candidate features per split; `None` means `⌈√dim⌉`.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self { trees: 100, max_features: None, min_samples_split: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node<F> {
    Leaf { distribution: Vec<F> },
    Split { feature: usize, threshold: F, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree<F> {
    nodes: Vec<Node<F>>,
}

impl<F: Scalar> Tree<F> {
    fn leaf(&self, x: &[F]) -> &[F] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { distribution } => return distribution,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    fn depth(&self) -> usize {
        fn go<F>(nodes: &[Node<F>], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest<F> {
    dim: usize,
    classes: usize,
    trees: Vec<Tree<F>>,
}

struct Grower<'a, F> {
    x: &'a [Vec<F>],
    y: &'a [usize],
    classes: usize,
    mtry: usize,
    min_split: usize,
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

impl<F: Scalar> Grower<'_, F> {
    fn counts(&self, samples: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.classes];
        for &i in samples {
            c[self.y[i]] += 1;
        }
        c
    }

    /// Best `(feature, threshold, weighted child impurity)` over up to `mtry`
    /// non-constant features, drawn in random order. Constant features do
    /// not count toward the budget.
    fn best_split(&self, samples: &[usize], rng: &mut ChaCha8Rng) -> Option<(usize, F)> {
        let dim = self.x[0].len();
        let mut features: Vec<usize> = (0..dim).collect();
        let mut best: Option<(f64, usize, F)> = None;
        let mut informative = 0;
        let mut pairs: Vec<(F, usize)> = Vec::with_capacity(samples.len());
        let total = self.counts(samples);
        for k in 0..dim {
            if informative >= self.mtry {
                break;
            }
            let j = rng.random_range(k..dim);
            features.swap(k, j);
            let f = features[k];
            pairs.clear();
            pairs.extend(samples.iter().map(|&i| (self.x[i][f], self.y[i])));
            let first = pairs[0].0;
            if pairs.iter().all(|p| p.0 == first) {
                continue;
            }
            informative += 1;
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
            let mut left = vec![0usize; self.classes];
            let n = pairs.len();
            for s in 0..n - 1 {
                left[pairs[s].1] += 1;
                if pairs[s].0 == pairs[s + 1].0 {
                    continue;
                }
                let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
                let nl = s + 1;
                let score = nl as f64 * gini(&left, nl) + (n - nl) as f64 * gini(&right, n - nl);
                if best.as_ref().is_none_or(|b| score < b.0) {
                    let threshold = (pairs[s].0 + pairs[s + 1].0) / F::lit(2.0);
                    best = Some((score, f, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&self, samples: Vec<usize>, rng: &mut ChaCha8Rng) -> Tree<F> {
        let mut nodes: Vec<Node<F>> = vec![Node::Leaf { distribution: Vec::new() }];
        let mut stack = vec![(0usize, samples)];
        while let Some((at, samples)) = stack.pop() {
            let counts = self.counts(&samples);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let split = if pure || samples.len() < self.min_split { None } else { self.best_split(&samples, rng) };
            match split {
                None => {
                    let n = F::from_usize_lossy(samples.len());
                    let distribution = counts.iter().map(|&c| F::from_usize_lossy(c) / n).collect();
                    nodes[at] = Node::Leaf { distribution };
                }
                Some((feature, threshold)) => {
                    let (l, r): (Vec<usize>, Vec<usize>) =
                        samples.iter().partition(|&&i| self.x[i][feature] <= threshold);
                    let left = nodes.len();
                    nodes.push(Node::Leaf { distribution: Vec::new() });
                    let right = nodes.len();
                    nodes.push(Node::Leaf { distribution: Vec::new() });
                    nodes[at] = Node::Split { feature, threshold, left, right };
                    stack.push((right, r));
                    stack.push((left, l));
                }
            }
        }
        Tree { nodes }
    }
}

impl<F: Scalar> RandomForest<F> {
    pub fn train(
        x: &[Vec<F>],
        y: &[usize],
        classes: usize,
        config: &ForestConfig,
        seed: u64,
    ) -> Result<Self, NlpError> {
        let dim = check_training(x, y, classes)?;
        if config.trees == 0 {
            return Err(NlpError::InvalidConfig("forest needs at least one tree".into()));
        }
        let mtry = config.max_features.unwrap_or_else(|| (dim as f64).sqrt().ceil() as usize).clamp(1, dim);
        let grower = Grower { x, y, classes, mtry, min_split: config.min_samples_split.max(2) };
        let n = x.len();
        let trees = (0..config.trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                grower.grow(sample, &mut rng)
            })
            .collect();
        Ok(Self { dim, classes, trees })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    pub fn max_depth(&self) -> usize {
        self.trees.iter().map(Tree::depth).max().unwrap_or(0)
    }

    /// Mean of the leaf class distributions.
    pub fn probabilities(&self, x: &[F]) -> Vec<F> {
        let mut p = vec![F::zero(); self.classes];
        for t in &self.trees {
            for (a, &b) in p.iter_mut().zip(t.leaf(x)) {
                *a += b;
            }
        }
        let n = F::from_usize_lossy(self.trees.len());
        p.iter_mut().for_each(|v| *v /= n);
        p
    }

    pub fn predict(&self, x: &[F]) -> usize {
        argmax(&self.probabilities(x))
    }
}
