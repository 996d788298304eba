//! Planted-partition benchmark with community-specific unigram text.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::cda::Partition;
use crate::graph::{to_undirected_max, DirectedEdgeBag, Graph};
use crate::nlp::{Corpus, Message};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub communities: usize,
    pub nodes_per_community: usize,
    pub p_in: f64,
    pub p_out: f64,
    /// Edge weight is `1 + Geometric(weight_p)`, i.e. mean `1/weight_p`.
    pub weight_p: f64,
    /// Tweets per user are `1 + Poisson(tweets_mean - 1)`.
    pub tweets_mean: f64,
    pub vocab_size: usize,
    /// Tokens per tweet are `1 + Poisson(tokens_mean - 1)`.
    pub tokens_mean: f64,
    /// Probability that a token comes from another community's vocabulary.
    pub mu_text: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            communities: 4,
            nodes_per_community: 250,
            p_in: 0.1,
            p_out: 0.002,
            weight_p: 0.5,
            tweets_mean: 50.0,
            vocab_size: 200,
            tokens_mean: 12.0,
            mu_text: 0.05,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: &str| Err(EvalError::InvalidParameter(m.to_string()));
        if self.communities == 0 || self.nodes_per_community == 0 {
            return bad("communities and nodes_per_community must be positive");
        }
        if !(0.0 <= self.p_out && self.p_out <= self.p_in && self.p_in <= 1.0) {
            return bad("need 0 <= p_out <= p_in <= 1");
        }
        if !(0.0..=1.0).contains(&self.mu_text) {
            return bad("mu_text must lie in [0, 1]");
        }
        if !(self.weight_p > 0.0 && self.weight_p <= 1.0) {
            return bad("weight_p must lie in (0, 1]");
        }
        if !(self.tweets_mean >= 1.0 && self.tokens_mean >= 1.0)
            || !self.tweets_mean.is_finite()
            || !self.tokens_mean.is_finite()
        {
            return bad("tweets_mean and tokens_mean must be finite and at least 1");
        }
        if self.vocab_size == 0 {
            return bad("vocab_size must be positive");
        }
        Ok(())
    }

    pub fn users(&self) -> usize {
        self.communities * self.nodes_per_community
    }
}

#[derive(Debug, Clone)]
pub struct Synthetic<F> {
    pub edges: DirectedEdgeBag<F>,
    /// Undirected graph over the users with at least one edge.
    pub graph: Graph<F>,
    pub corpus: Corpus,
    /// Planted community of every graph node.
    pub truth: Partition,
    /// Planted community of every user, in user order.
    pub user_communities: Vec<(String, usize)>,
}

pub fn user_id(i: usize) -> String {
    format!("u{i:05}")
}

fn sample_count(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 1.0 {
        return 1;
    }
    1 + Poisson::new(mean - 1.0).expect("positive rate").sample(rng) as usize
}

/// Generate the benchmark; identical configurations give identical output.
pub fn generate_synthetic<F: Scalar>(cfg: &SynthConfig) -> Result<Synthetic<F>, EvalError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.users();
    let community = |i: usize| i / cfg.nodes_per_community;
    let ids: Vec<String> = (0..n).map(user_id).collect();

    let weights = Geometric::new(cfg.weight_p).expect("validated");
    let mut edges = DirectedEdgeBag::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if community(i) == community(j) { cfg.p_in } else { cfg.p_out };
            if rng.random::<f64>() < p {
                let w = 1.0 + weights.sample(&mut rng) as f64;
                edges.add(&ids[i], &ids[j], F::lit(w));
            }
        }
    }
    let graph = to_undirected_max(&edges);

    let mut messages = Vec::new();
    for (i, uid) in ids.iter().enumerate() {
        let own = community(i);
        for _ in 0..sample_count(&mut rng, cfg.tweets_mean) {
            let tokens: Vec<String> = (0..sample_count(&mut rng, cfg.tokens_mean))
                .map(|_| {
                    let mut c = own;
                    if cfg.communities > 1 && rng.random::<f64>() < cfg.mu_text {
                        c = rng.random_range(0..cfg.communities - 1);
                        if c >= own {
                            c += 1;
                        }
                    }
                    format!("c{c}w{}", rng.random_range(0..cfg.vocab_size))
                })
                .collect();
            messages.push(Message {
                user_id: uid.clone(),
                message_id: format!("t{:07}", messages.len()),
                text: tokens.join(" "),
            });
        }
    }
    let corpus = Corpus::new(messages)?;
    let labels: Vec<usize> =
        graph.ids().iter().map(|id| community(id[1..].parse::<usize>().expect("generated id"))).collect();
    let truth = Partition::from_labels(&labels);
    let user_communities = ids.into_iter().enumerate().map(|(i, id)| (id, community(i))).collect();
    Ok(Synthetic { edges, graph, corpus, truth, user_communities })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            communities: 2,
            nodes_per_community: 30,
            p_in: 0.3,
            p_out: 0.0,
            tweets_mean: 5.0,
            seed: 9,
            ..Default::default()
        }
    }

    #[test]
    fn no_inter_edges_keeps_communities_apart() {
        let s = generate_synthetic::<f64>(&small()).unwrap();
        assert!(s.graph.component_count() >= 2);
        let labels = s.graph.component_labels();
        for e in s.graph.edges() {
            assert_eq!(s.truth.module_of(e.u), s.truth.module_of(e.v));
            assert_eq!(labels[e.u], labels[e.v]);
        }
    }

    #[test]
    fn deterministic() {
        let a = generate_synthetic::<f64>(&small()).unwrap();
        let b = generate_synthetic::<f64>(&small()).unwrap();
        assert_eq!(a.corpus.messages(), b.corpus.messages());
        assert_eq!(a.graph.edges(), b.graph.edges());
        let other = generate_synthetic::<f64>(&SynthConfig { seed: 10, ..small() }).unwrap();
        assert_ne!(a.graph.edges(), other.graph.edges());
    }

    #[test]
    fn ground_truth_sizes() {
        let s = generate_synthetic::<f64>(&SynthConfig { tweets_mean: 1.0, tokens_mean: 2.0, ..Default::default() })
            .unwrap();
        assert_eq!(s.user_communities.len(), 1000);
        let mut sizes = vec![0; 4];
        s.user_communities.iter().for_each(|(_, c)| sizes[*c] += 1);
        assert_eq!(sizes, vec![250; 4]);
        assert_eq!(s.truth.module_count(), 4);
    }

    #[test]
    fn text_mixing_rate() {
        let s = generate_synthetic::<f64>(&SynthConfig { mu_text: 0.2, ..small() }).unwrap();
        let (mut foreign, mut total) = (0usize, 0usize);
        for m in s.corpus.messages() {
            let own = m.user_id[1..].parse::<usize>().unwrap() / 30;
            for tok in m.text.split(' ') {
                total += 1;
                foreign += usize::from(!tok.starts_with(&format!("c{own}w")));
            }
        }
        let rate = foreign as f64 / total as f64;
        assert!((rate - 0.2).abs() < 0.03, "{rate}");
    }

    #[test]
    fn invalid_configs() {
        assert!(generate_synthetic::<f64>(&SynthConfig { p_out: 0.5, p_in: 0.1, ..small() }).is_err());
        assert!(generate_synthetic::<f64>(&SynthConfig { mu_text: 1.5, ..small() }).is_err());
    }
}
