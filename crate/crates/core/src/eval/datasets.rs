use std::collections::{BTreeMap, HashSet};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::cda::LabeledPartition;
use crate::graph::{AnchorSplit, Graph};
use crate::nlp::{Corpus, Embedder};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainItem<F> {
    pub message_id: String,
    pub vector: Vec<F>,
    pub category: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestItem<F> {
    pub message_id: String,
    pub user_id: String,
    pub vector: Vec<F>,
    pub category: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalancedDatasets<F> {
    pub n_train_per_cat: usize,
    pub n_test_per_cat: usize,
    pub train: Vec<TrainItem<F>>,
    pub test: Vec<TestItem<F>>,
    pub train_counts: BTreeMap<u32, usize>,
    pub test_counts: BTreeMap<u32, usize>,
}

/// Leakage check between the two halves of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetAudit {
    pub train_messages: usize,
    pub test_messages: usize,
    pub shared_messages: usize,
    pub anchor_messages_in_test: usize,
}

impl DatasetAudit {
    pub fn is_clean(&self) -> bool {
        self.shared_messages == 0 && self.anchor_messages_in_test == 0
    }
}

impl<F> BalancedDatasets<F> {
    pub fn audit<G>(&self, graph: &Graph<G>, split: &AnchorSplit<G>) -> DatasetAudit {
        let train: HashSet<&str> = self.train.iter().map(|t| t.message_id.as_str()).collect();
        let shared = self.test.iter().filter(|t| train.contains(t.message_id.as_str())).count();
        let anchors =
            self.test.iter().filter(|t| graph.index_of(&t.user_id).is_none_or(|i| split.is_anchor(i))).count();
        DatasetAudit {
            train_messages: self.train.len(),
            test_messages: self.test.len(),
            shared_messages: shared,
            anchor_messages_in_test: anchors,
        }
    }
}

type Pool = BTreeMap<u32, Vec<usize>>;

/// Message indices per active category, split into anchor-authored and
/// tested-user-authored messages.
fn pools<G>(
    graph: &Graph<G>,
    corpus: &Corpus,
    lp: &LabeledPartition,
    split: &AnchorSplit<G>,
) -> Result<(Pool, Pool), EvalError> {
    let mut train_pool: Pool = lp.active_categories().map(|c| (c, Vec::new())).collect();
    let mut test_pool = train_pool.clone();
    for (i, m) in corpus.messages().iter().enumerate() {
        if corpus.is_external(&m.user_id) {
            continue;
        }
        let node = graph.index_of(&m.user_id).ok_or_else(|| EvalError::UnknownUser(m.user_id.clone()))?;
        if lp.is_catch_all(node) {
            continue;
        }
        let pool = if split.is_anchor(node) { &mut train_pool } else { &mut test_pool };
        pool.get_mut(&lp.category(node)).expect("active category").push(i);
    }
    Ok((train_pool, test_pool))
}

/// Anchor-authored messages available per active category.
pub fn anchor_message_counts<G>(
    graph: &Graph<G>,
    corpus: &Corpus,
    lp: &LabeledPartition,
    split: &AnchorSplit<G>,
) -> Result<BTreeMap<u32, usize>, EvalError> {
    Ok(pools(graph, corpus, lp, split)?.0.into_iter().map(|(c, p)| (c, p.len())).collect())
}

/// Training messages come from anchors, test messages from tested users,
/// both labeled by their author's category. Catch-all authors and users
/// flagged external are skipped. Each category is subsampled without
/// replacement to exactly `n_train` training messages (a shortfall is an
/// error) and to `min(n_test, smallest available)` test messages.
#[allow(clippy::too_many_arguments)]
pub fn build_datasets<F: Scalar, G, E: Embedder<F>>(
    graph: &Graph<G>,
    corpus: &Corpus,
    embedder: &E,
    lp: &LabeledPartition,
    split: &AnchorSplit<G>,
    n_train: usize,
    n_test: usize,
    seed: u64,
) -> Result<BalancedDatasets<F>, EvalError> {
    if n_train == 0 || n_test == 0 {
        return Err(EvalError::InvalidParameter("n_train and n_test must be at least 1".into()));
    }
    let categories: Vec<u32> = lp.active_categories().collect();
    let (train_pool, test_pool) = pools(graph, corpus, lp, split)?;

    for (&c, pool) in &train_pool {
        if pool.len() < n_train {
            return Err(EvalError::Shortfall { category: c, available: pool.len(), required: n_train });
        }
    }
    if let Some((&c, _)) = test_pool.iter().find(|(_, p)| p.is_empty()) {
        return Err(EvalError::NoTestMessages(c));
    }
    let smallest = test_pool.values().map(Vec::len).min().unwrap_or(0);
    let n_test_eff = n_test.min(smallest);
    if n_test_eff < n_test {
        log::warn!("test set reduced to {n_test_eff} messages per category (requested {n_test})");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |pool: &[usize], k: usize| -> Vec<usize> {
        let mut picked: Vec<usize> = sample(&mut rng, pool.len(), k).into_iter().map(|j| pool[j]).collect();
        picked.sort_unstable();
        picked
    };
    let mut train_sel = Vec::new();
    let mut test_sel = Vec::new();
    for &c in &categories {
        train_sel.extend(draw(&train_pool[&c], n_train).into_iter().map(|i| (i, c)));
        test_sel.extend(draw(&test_pool[&c], n_test_eff).into_iter().map(|i| (i, c)));
    }

    let messages = corpus.messages();
    let train = train_sel
        .par_iter()
        .map(|&(i, category)| {
            let m = &messages[i];
            Ok(TrainItem { message_id: m.message_id.clone(), vector: embedder.embed(m)?, category })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let test = test_sel
        .par_iter()
        .map(|&(i, category)| {
            let m = &messages[i];
            Ok(TestItem {
                message_id: m.message_id.clone(),
                user_id: m.user_id.clone(),
                vector: embedder.embed(m)?,
                category,
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let counts = |n| categories.iter().map(|&c| (c, n)).collect();
    Ok(BalancedDatasets {
        n_train_per_cat: n_train,
        n_test_per_cat: n_test_eff,
        train,
        test,
        train_counts: counts(n_train),
        test_counts: counts(n_test_eff),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cda::{truncate_partition, Partition};
    use crate::graph::{quantile_split, CentralityScores};
    use crate::nlp::{HashEmbedder, Message};

    /// Nodes 0..9 in three communities of three (node 9 alone in a
    /// fourth, the catch-all with n_cut 4). Scores make nodes 0, 3, 6 the
    /// anchors.
    fn fixture(per_user: usize) -> (Graph<f64>, Corpus, LabeledPartition, AnchorSplit<f64>) {
        let mut edges = Vec::new();
        for c in 0..3 {
            let b = 3 * c;
            edges.extend([(b, b + 1, 1.0), (b + 1, b + 2, 1.0), (b, b + 2, 1.0)]);
        }
        edges.push((8, 9, 1.0));
        let g = Graph::with_nodes(10, &edges).unwrap();
        let p = Partition::new(vec![0, 0, 0, 1, 1, 1, 2, 2, 2, 3]).unwrap();
        let lp = truncate_partition(&p, 4).unwrap();
        let scores = (0..10).map(|i| if i % 3 == 0 && i < 9 { 1.0 } else { 0.1 }).collect();
        let split = quantile_split(&CentralityScores { scores, iterations_used: 0, converged: true }, 0.6).unwrap();
        let mut msgs = Vec::new();
        for u in 0..10 {
            for t in 0..per_user {
                msgs.push(Message {
                    user_id: u.to_string(),
                    message_id: format!("{u}-{t}"),
                    text: format!("word{} x{t}", u / 3),
                });
            }
        }
        (g, Corpus::new(msgs).unwrap(), lp, split)
    }

    #[test]
    fn balanced_and_disjoint() {
        let (g, corpus, lp, split) = fixture(120);
        assert_eq!(split.anchors, vec![0, 3, 6]);
        let emb = HashEmbedder::new(32).unwrap();
        let d: BalancedDatasets<f32> = build_datasets(&g, &corpus, &emb, &lp, &split, 100, 50, 1).unwrap();
        assert_eq!(d.train.len(), 300);
        assert_eq!(d.test.len(), 150);
        assert!(d.audit(&g, &split).is_clean());
        for t in &d.train {
            let node = g.index_of(t.message_id.split('-').next().unwrap()).unwrap();
            assert!(split.is_anchor(node));
            assert_eq!(lp.category(node), t.category);
        }
        assert!(d.test.iter().all(|t| t.user_id != "9"));
        let again: BalancedDatasets<f32> = build_datasets(&g, &corpus, &emb, &lp, &split, 100, 50, 1).unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn shortfall_names_category() {
        let (g, corpus, lp, split) = fixture(40);
        let emb = HashEmbedder::new(32).unwrap();
        let r: Result<BalancedDatasets<f32>, _> = build_datasets(&g, &corpus, &emb, &lp, &split, 100, 10, 1);
        assert!(matches!(r, Err(EvalError::Shortfall { category: 1, available: 40, required: 100 })));
    }

    #[test]
    fn test_side_degrades_to_smallest_category() {
        let (g, corpus, lp, split) = fixture(20);
        let emb = HashEmbedder::new(32).unwrap();
        let d: BalancedDatasets<f32> = build_datasets(&g, &corpus, &emb, &lp, &split, 10, 1000, 1).unwrap();
        assert_eq!(d.n_test_per_cat, 40);
        assert_eq!(d.test.len(), 120);
    }

    #[test]
    fn unknown_user_unless_external() {
        let (g, corpus, lp, split) = fixture(5);
        let mut msgs = corpus.messages().to_vec();
        msgs.push(Message { user_id: "ghost".into(), message_id: "g".into(), text: String::new() });
        let mut corpus = Corpus::new(msgs).unwrap();
        let emb = HashEmbedder::new(32).unwrap();
        let r: Result<BalancedDatasets<f32>, _> = build_datasets(&g, &corpus, &emb, &lp, &split, 2, 2, 1);
        assert!(matches!(r, Err(EvalError::UnknownUser(_))));
        corpus.flag_external("ghost");
        let r: Result<BalancedDatasets<f32>, _> = build_datasets(&g, &corpus, &emb, &lp, &split, 2, 2, 1);
        assert!(r.is_ok());
    }
}
