//! Evaluation of one partition: anchor-trained ensemble against the CDA
//! categories of tested users.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    agreement_precision, anchor_message_counts, binned_agreement, build_datasets, coverage, entropy_curve, f_beta,
    user_entropy, Bin, DatasetAudit, EntropyPoint, EvalError, UserOutcome,
};
use crate::cda::{truncate_partition, LabeledPartition, Partition};
use crate::graph::{AnchorSplit, Graph};
use crate::nlp::{
    aggregate_user_votes, train_ensemble, ClassifierKind, Corpus, Embedder, Ensemble, EnsembleConfig, Vote,
};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub n_cut: u32,
    pub n_train: usize,
    /// Treat `n_train` as a cap: train on `min(n_train, m)` messages per
    /// category, `m` being the smallest anchor-message count.
    pub n_train_is_cap: bool,
    pub n_test: usize,
    pub ensemble: EnsembleConfig,
    pub betas: Vec<f64>,
    pub jackknife_blocks: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            n_cut: 5,
            n_train: 1000,
            n_train_is_cap: false,
            n_test: 1000,
            ensemble: EnsembleConfig::default(),
            betas: vec![0.1, 0.25, 0.75],
            jackknife_blocks: 50,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    /// Named seeds for every random stage.
    pub fn seeds(&self) -> BTreeMap<String, u64> {
        let mut ens = self.ensemble.clone();
        ens.seed = self.derived(2);
        let mut out = BTreeMap::from([
            ("pipeline".to_string(), self.seed),
            ("datasets".to_string(), self.derived(1)),
            ("ensemble".to_string(), ens.seed),
            ("jackknife".to_string(), self.derived(3)),
        ]);
        for (k, s) in ClassifierKind::ALL.iter().zip(ens.seeds()) {
            out.insert(k.name().to_string(), s);
        }
        out
    }

    fn derived(&self, stage: u64) -> u64 {
        self.seed.wrapping_mul(0x2545_f491_4f6c_dd1d).wrapping_add(stage.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub message_id: String,
    pub user_id: String,
    pub true_category: u32,
    pub predicted_category: u32,
    pub votes: [u32; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub algorithm: String,
    pub parameter: f64,
    #[serde(rename = "N_cut")]
    pub n_cut: u32,
    pub m: usize,
    pub precision: f64,
    pub precision_err: f64,
    pub coverage: f64,
    pub f_beta: BTreeMap<String, f64>,
    pub bins: Vec<Bin>,
    pub entropy_curve: Vec<EntropyPoint>,
    pub seeds: BTreeMap<String, u64>,
    pub audit: DatasetAudit,
    pub tested_users: usize,
    pub train_per_category: usize,
    pub test_per_category: usize,
    pub tweet_accuracy: f64,
    pub classifier_accuracy: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct EvaluationRun<F> {
    pub report: EvaluationReport,
    pub labeled: LabeledPartition,
    pub outcomes: Vec<UserOutcome>,
    pub predictions: Vec<PredictionRecord>,
    pub ensemble: Ensemble<F>,
}

fn beta_key(beta: f64) -> String {
    format!("{beta}")
}

/// Truncate `partition`, build balanced datasets from anchors and tested
/// users, train the ensemble, classify every tested user and score the
/// agreement.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_partition<F: Scalar, G: Scalar, E: Embedder<F>>(
    graph: &Graph<G>,
    corpus: &Corpus,
    embedder: &E,
    split: &AnchorSplit<G>,
    partition: &Partition,
    algorithm: &str,
    parameter: f64,
    cfg: &PipelineConfig,
) -> Result<EvaluationRun<F>, EvalError> {
    let seeds = cfg.seeds();
    let lp = truncate_partition(partition, cfg.n_cut)?;
    let mut n_train = cfg.n_train;
    if cfg.n_train_is_cap {
        let available = anchor_message_counts(graph, corpus, &lp, split)?;
        if let Some((&category, &least)) = available.iter().min_by_key(|(_, &n)| n) {
            if least == 0 {
                return Err(EvalError::Shortfall { category, available: 0, required: 1 });
            }
            if least < n_train {
                log::warn!("training set capped at {least} messages per category (category {category})");
                n_train = least;
            }
        }
    }
    let data = build_datasets::<F, G, E>(graph, corpus, embedder, &lp, split, n_train, cfg.n_test, seeds["datasets"])?;
    let audit = data.audit(graph, split);
    let (train_per_category, test_per_category) = (data.n_train_per_cat, data.n_test_per_cat);

    let (x, y): (Vec<Vec<F>>, Vec<u32>) = data.train.into_iter().map(|t| (t.vector, t.category)).unzip();
    let mut ens_cfg = cfg.ensemble.clone();
    ens_cfg.seed = seeds["ensemble"];
    let ensemble = train_ensemble(&x, &y, &ens_cfg)?;
    drop(x);

    let test_x: Vec<Vec<F>> = data.test.iter().map(|t| t.vector.clone()).collect();
    let votes = ensemble.predict_many(&test_x)?;
    drop(test_x);

    let mut per_classifier = [0usize; 4];
    let mut by_user: BTreeMap<&str, Vec<Vote>> = BTreeMap::new();
    let mut predictions = Vec::with_capacity(votes.len());
    for (t, v) in data.test.iter().zip(votes) {
        for (hit, &c) in per_classifier.iter_mut().zip(&v.choices) {
            *hit += usize::from(c == t.category);
        }
        predictions.push(PredictionRecord {
            message_id: t.message_id.clone(),
            user_id: t.user_id.clone(),
            true_category: t.category,
            predicted_category: v.category,
            votes: v.choices,
        });
        by_user.entry(t.user_id.as_str()).or_default().push(v);
    }

    let mut outcomes = Vec::with_capacity(by_user.len());
    let mut entropies = Vec::with_capacity(by_user.len());
    for (user, user_votes) in &by_user {
        let verdict = aggregate_user_votes(ensemble.categories(), user_votes)?;
        let node = graph.index_of(user).ok_or_else(|| EvalError::UnknownUser(user.to_string()))?;
        entropies.push((user_votes.len(), user_entropy(verdict.histogram.values().copied())));
        outcomes.push(UserOutcome {
            user_id: user.to_string(),
            cda: lp.category(node),
            nlpca: verdict.category,
            tweets: user_votes.len(),
        });
    }

    let agreement = agreement_precision(&outcomes, cfg.jackknife_blocks, seeds["jackknife"])?;
    let cov = coverage(&lp);
    let n_test = predictions.len().max(1) as f64;
    let tweet_accuracy = predictions.iter().filter(|p| p.true_category == p.predicted_category).count() as f64 / n_test;
    let report = EvaluationReport {
        algorithm: algorithm.to_string(),
        parameter,
        n_cut: cfg.n_cut,
        m: partition.module_count(),
        precision: agreement.precision,
        precision_err: agreement.jackknife_err,
        coverage: cov,
        f_beta: cfg.betas.iter().map(|&b| (beta_key(b), f_beta(agreement.precision, cov, b))).collect(),
        bins: binned_agreement(&outcomes),
        entropy_curve: entropy_curve(&entropies),
        seeds,
        audit,
        tested_users: outcomes.len(),
        train_per_category,
        test_per_category,
        tweet_accuracy,
        classifier_accuracy: ClassifierKind::ALL
            .iter()
            .zip(per_classifier)
            .map(|(k, h)| (k.name().to_string(), h as f64 / n_test))
            .collect(),
    };
    Ok(EvaluationRun { report, labeled: lp, outcomes, predictions, ensemble })
}
