//! Weighted vote over the four classifiers, and per-user aggregation.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{
    train_sgd, train_svm, ForestConfig, LinearModel, Mlp, MlpConfig, NlpError, RandomForest, SgdConfig, SvmConfig,
};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    Sgd,
    Svm,
    Mlp,
    Forest,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [Self::Sgd, Self::Svm, Self::Mlp, Self::Forest];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sgd => "sgd",
            Self::Svm => "svm",
            Self::Mlp => "mlp",
            Self::Forest => "forest",
        }
    }
}

/// Integer vote weights for (sgd, svm, mlp, forest); positive, summing to 7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct VoteWeights([u32; 4]);

impl VoteWeights {
    pub const TOTAL: u32 = 7;

    pub fn new(weights: [u32; 4]) -> Result<Self, NlpError> {
        if weights.contains(&0) || weights.iter().sum::<u32>() != Self::TOTAL {
            return Err(NlpError::InvalidWeights(weights.to_vec()));
        }
        Ok(Self(weights))
    }

    pub fn get(&self, kind: ClassifierKind) -> u32 {
        self.0[kind as usize]
    }

    pub fn as_array(&self) -> [u32; 4] {
        self.0
    }
}

impl Default for VoteWeights {
    fn default() -> Self {
        Self([1, 1, 3, 2])
    }
}

impl TryFrom<Vec<u32>> for VoteWeights {
    type Error = NlpError;

    fn try_from(v: Vec<u32>) -> Result<Self, NlpError> {
        let arr: [u32; 4] = v.clone().try_into().map_err(|_| NlpError::InvalidWeights(v))?;
        Self::new(arr)
    }
}

impl From<VoteWeights> for Vec<u32> {
    fn from(w: VoteWeights) -> Self {
        w.0.to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct EnsembleConfig {
    pub weights: VoteWeights,
    pub sgd: SgdConfig,
    pub svm: SvmConfig,
    pub mlp: MlpConfig,
    pub forest: ForestConfig,
    pub seed: u64,
}

impl EnsembleConfig {
    /// Per-classifier seeds derived from the master seed.
    pub fn seeds(&self) -> [u64; 4] {
        ClassifierKind::ALL.map(|k| splitmix(self.seed ^ (k as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Outcome of one weighted vote.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vote {
    pub category: u32,
    /// Category chosen by each classifier, in `ClassifierKind::ALL` order.
    pub choices: [u32; 4],
    /// Weighted count per category, aligned with the ensemble's categories.
    pub counts: Vec<u32>,
}

impl Vote {
    pub fn count_for(&self, categories: &[u32], category: u32) -> u32 {
        categories.binary_search(&category).map(|i| self.counts[i]).unwrap_or(0)
    }
}

/// Combine four classifier choices. The winner has the largest weighted
/// count; among tied categories the one backed by the heaviest single voter
/// wins, then the smaller category.
pub fn weighted_vote(categories: &[u32], weights: &VoteWeights, choices: [u32; 4]) -> Result<Vote, NlpError> {
    let mut counts = vec![0u32; categories.len()];
    let mut heaviest = vec![0u32; categories.len()];
    for (kind, &c) in ClassifierKind::ALL.iter().zip(&choices) {
        let i = categories
            .binary_search(&c)
            .map_err(|_| NlpError::InvalidConfig(format!("category {c} not in the ensemble's category set")))?;
        let w = weights.get(*kind);
        counts[i] += w;
        heaviest[i] = heaviest[i].max(w);
    }
    let mut best = 0;
    for i in 1..categories.len() {
        if (counts[i], heaviest[i]) > (counts[best], heaviest[best]) {
            best = i;
        }
    }
    Ok(Vote { category: categories[best], choices, counts })
}

/// Per-user verdict: modal message category with its histogram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserCategory {
    pub category: u32,
    pub histogram: BTreeMap<u32, usize>,
    pub vote_mass: BTreeMap<u32, u64>,
}

/// Modal category over a user's message votes; ties go to the larger total
/// weighted vote mass, then the smaller category.
pub fn aggregate_user_votes(categories: &[u32], votes: &[Vote]) -> Result<UserCategory, NlpError> {
    if votes.is_empty() {
        return Err(NlpError::Empty("user message list"));
    }
    let mut histogram = BTreeMap::new();
    let mut vote_mass: BTreeMap<u32, u64> = BTreeMap::new();
    for v in votes {
        *histogram.entry(v.category).or_insert(0) += 1;
        for (&c, &n) in categories.iter().zip(&v.counts) {
            *vote_mass.entry(c).or_insert(0) += u64::from(n);
        }
    }
    let category = histogram
        .iter()
        .map(|(&c, &n)| (n, vote_mass.get(&c).copied().unwrap_or(0), std::cmp::Reverse(c)))
        .max()
        .map(|(_, _, std::cmp::Reverse(c))| c)
        .expect("non-empty histogram");
    Ok(UserCategory { category, histogram, vote_mass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble<F> {
    dim: usize,
    categories: Vec<u32>,
    config: EnsembleConfig,
    sgd: LinearModel<F>,
    svm: LinearModel<F>,
    mlp: Mlp<F>,
    forest: RandomForest<F>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    dim: usize,
    categories: Vec<u32>,
    weights: VoteWeights,
    seeds: [u64; 4],
    config: EnsembleConfig,
    scalar: String,
}

/// Train all four classifiers on the same labeled vectors.
pub fn train_ensemble<F: Scalar>(
    x: &[Vec<F>],
    labels: &[u32],
    config: &EnsembleConfig,
) -> Result<Ensemble<F>, NlpError> {
    if x.is_empty() {
        return Err(NlpError::Empty("training set"));
    }
    if x.len() != labels.len() {
        return Err(NlpError::DimensionMismatch { expected: x.len(), found: labels.len() });
    }
    let mut categories = labels.to_vec();
    categories.sort_unstable();
    categories.dedup();
    if categories.len() < 2 {
        return Err(NlpError::SingleCategory);
    }
    if let Some(bad) = x.iter().position(|v| v.iter().any(|f| !f.is_finite())) {
        return Err(NlpError::NonFinite { row: bad });
    }
    let y: Vec<usize> = labels.iter().map(|l| categories.binary_search(l).expect("present")).collect();
    let k = categories.len();
    let [s_sgd, s_svm, s_mlp, s_forest] = config.seeds();
    let ((sgd, svm), (mlp, forest)) = rayon::join(
        || rayon::join(|| train_sgd(x, &y, k, &config.sgd, s_sgd), || train_svm(x, &y, k, &config.svm, s_svm)),
        || {
            rayon::join(
                || Mlp::train(x, &y, k, &config.mlp, s_mlp),
                || RandomForest::train(x, &y, k, &config.forest, s_forest),
            )
        },
    );
    Ok(Ensemble {
        dim: x[0].len(),
        categories,
        config: config.clone(),
        sgd: sgd?,
        svm: svm?,
        mlp: mlp?,
        forest: forest?,
    })
}

/// Predict one vector.
pub fn ensemble_predict<F: Scalar>(e: &Ensemble<F>, v: &[F]) -> Result<Vote, NlpError> {
    e.predict(v)
}

/// Predict each of a user's messages and aggregate.
pub fn classify_user<F: Scalar>(e: &Ensemble<F>, messages: &[Vec<F>]) -> Result<UserCategory, NlpError> {
    let votes = e.predict_many(messages)?;
    aggregate_user_votes(&e.categories, &votes)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), NlpError> {
    let bytes = serde_json::to_vec(value).map_err(|e| NlpError::Bundle(e.to_string()))?;
    crate::io::write_atomic(path, &bytes)?;
    Ok(())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, NlpError> {
    let bytes = fs::read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| NlpError::Bundle(format!("{}: {e}", path.display())))
}

impl<F: Scalar> Ensemble<F> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn categories(&self) -> &[u32] {
        &self.categories
    }

    pub fn weights(&self) -> VoteWeights {
        self.config.weights
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    /// Category chosen by one classifier.
    pub fn predict_with(&self, kind: ClassifierKind, v: &[F]) -> u32 {
        let i = match kind {
            ClassifierKind::Sgd => self.sgd.predict(v),
            ClassifierKind::Svm => self.svm.predict(v),
            ClassifierKind::Mlp => self.mlp.predict(v),
            ClassifierKind::Forest => self.forest.predict(v),
        };
        self.categories[i]
    }

    pub fn predict(&self, v: &[F]) -> Result<Vote, NlpError> {
        if v.len() != self.dim {
            return Err(NlpError::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(NlpError::NonFinite { row: 0 });
        }
        weighted_vote(&self.categories, &self.config.weights, ClassifierKind::ALL.map(|k| self.predict_with(k, v)))
    }

    pub fn predict_many(&self, vs: &[Vec<F>]) -> Result<Vec<Vote>, NlpError> {
        vs.par_iter().map(|v| self.predict(v)).collect()
    }

    /// Same classifiers, different vote weights.
    pub fn with_weights(mut self, weights: VoteWeights) -> Self {
        self.config.weights = weights;
        self
    }

    /// Write the bundle: one JSON file per classifier plus `manifest.json`.
    pub fn save(&self, dir: &Path) -> Result<(), NlpError> {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("sgd.json"), &self.sgd)?;
        write_json(&dir.join("svm.json"), &self.svm)?;
        write_json(&dir.join("mlp.json"), &self.mlp)?;
        write_json(&dir.join("forest.json"), &self.forest)?;
        let manifest = Manifest {
            dim: self.dim,
            categories: self.categories.clone(),
            weights: self.config.weights,
            seeds: self.config.seeds(),
            config: self.config.clone(),
            scalar: std::any::type_name::<F>().to_string(),
        };
        write_json(&dir.join("manifest.json"), &manifest)
    }

    pub fn load(dir: &Path) -> Result<Self, NlpError> {
        let m: Manifest = read_json(&dir.join("manifest.json"))?;
        if m.scalar != std::any::type_name::<F>() {
            return Err(NlpError::Bundle(format!("bundle stores {} values", m.scalar)));
        }
        let mut config = m.config;
        config.weights = m.weights;
        let e = Self {
            dim: m.dim,
            categories: m.categories,
            config,
            sgd: read_json(&dir.join("sgd.json"))?,
            svm: read_json(&dir.join("svm.json"))?,
            mlp: read_json(&dir.join("mlp.json"))?,
            forest: read_json(&dir.join("forest.json"))?,
        };
        if e.sgd.dim != e.dim || e.svm.dim != e.dim || e.mlp.dim() != e.dim || e.forest.dim() != e.dim {
            return Err(NlpError::Bundle("classifier dimensions disagree with the manifest".into()));
        }
        Ok(e)
    }
}
