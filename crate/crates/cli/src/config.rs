//! Flat `key = value` run configuration.
//!
//! Lists are comma-separated. Lines starting with `#` are comments.
//! Command-line overrides are applied on top of the file before parsing.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use commscore::cda::Algorithm;
use commscore::eval::{PipelineConfig, SynthConfig};
use commscore::nlp::{EnsembleConfig, ForestConfig, MlpConfig, SgdConfig, SvmConfig, VoteWeights};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}:{line}: expected `key = value`")]
    Syntax { path: String, line: usize },
    #[error("override {0:?}: expected key=value")]
    Override(String),
    #[error("duplicate key {0:?}")]
    Duplicate(String),
    #[error("unknown configuration key(s): {0}")]
    UnknownKeys(String),
    #[error("key {key:?}: cannot parse {value:?}")]
    Value { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read config {path}: {source}")]
    Read { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingSource {
    Hash(usize),
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub edges: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub tweets: Option<PathBuf>,
    pub embeddings: EmbeddingSource,
    pub min_degree: usize,
    pub algorithms: Vec<Algorithm>,
    pub grids: BTreeMap<Algorithm, Vec<f64>>,
    pub algorithm_seeds: BTreeMap<Algorithm, u64>,
    pub anchor_quantile: f64,
    pub centrality_tol: f64,
    pub centrality_max_iter: usize,
    pub tracked: Vec<String>,
    pub pipeline: PipelineConfig,
    pub synth: SynthConfig,
    pub out: PathBuf,
    pub seed: u64,
}

/// Parse `key = value` lines.
pub fn parse_text(text: &str, origin: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| ConfigError::Syntax { path: origin.to_string(), line: i + 1 })?;
        let key = k.trim().to_string();
        if key.is_empty() {
            return Err(ConfigError::Syntax { path: origin.to_string(), line: i + 1 });
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(ConfigError::Duplicate(key));
        }
    }
    Ok(out)
}

pub fn apply_override(map: &mut BTreeMap<String, String>, spec: &str) -> Result<(), ConfigError> {
    let (k, v) = spec.split_once('=').ok_or_else(|| ConfigError::Override(spec.to_string()))?;
    if k.trim().is_empty() {
        return Err(ConfigError::Override(spec.to_string()));
    }
    map.insert(k.trim().to_string(), v.trim().to_string());
    Ok(())
}

pub fn load_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
    parse_text(&text, &path.display().to_string())
}

/// Reads keys out of the map, remembering which were consumed.
struct Keys {
    map: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

impl Keys {
    fn raw(&mut self, key: &str) -> Option<String> {
        let v = self.map.get(key).cloned();
        if v.is_some() {
            self.used.insert(key.to_string());
        }
        v
    }

    fn get<T: FromStr>(&mut self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::Value { key: key.to_string(), value: v }),
        }
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| ConfigError::Value { key: key.to_string(), value: v.clone() }))
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }

    fn path(&mut self, key: &str) -> Option<PathBuf> {
        self.raw(key).filter(|s| !s.is_empty()).map(PathBuf::from)
    }

    fn unused(&self) -> Vec<String> {
        self.map.keys().filter(|k| !self.used.contains(*k)).cloned().collect()
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

impl RunConfig {
    pub fn from_map(map: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut k = Keys { map, used: BTreeSet::new() };
        let seed: u64 = k.get("seed", 0)?;

        let embeddings = match k.raw("embeddings") {
            None => EmbeddingSource::Hash(1024),
            Some(v) => match v.strip_prefix("builtin-hash:") {
                Some(d) => EmbeddingSource::Hash(
                    d.trim().parse().map_err(|_| ConfigError::Value { key: "embeddings".into(), value: v.clone() })?,
                ),
                None => EmbeddingSource::File(PathBuf::from(v)),
            },
        };
        if let EmbeddingSource::Hash(d) = embeddings {
            if d < 16 {
                return Err(invalid("builtin-hash dimension must be at least 16"));
            }
        }

        let names: Vec<String> = k.list("algorithms")?.unwrap_or_else(|| vec!["louvain".to_string()]);
        let mut algorithms = Vec::new();
        for n in &names {
            let a: Algorithm = n.parse().map_err(|e: commscore::cda::UnknownAlgorithm| invalid(e.to_string()))?;
            if !algorithms.contains(&a) {
                algorithms.push(a);
            }
        }
        let mut grids = BTreeMap::new();
        let mut algorithm_seeds = BTreeMap::new();
        for a in Algorithm::ALL {
            if let Some(g) = k.list::<f64>(&format!("grid.{}", a.name()))? {
                grids.insert(a, g);
            }
            if let Some(s) = k.raw(&format!("seed.{}", a.name())) {
                let v = s.parse().map_err(|_| ConfigError::Value { key: format!("seed.{}", a.name()), value: s })?;
                algorithm_seeds.insert(a, v);
            }
        }

        let weights: Vec<u32> = k.list("weights")?.unwrap_or_else(|| VoteWeights::default().as_array().to_vec());
        let weights = VoteWeights::try_from(weights.clone())
            .map_err(|_| invalid(format!("weights {weights:?} must be four positive integers summing to 7")))?;
        let sgd_default = SgdConfig::default();
        let svm_default = SvmConfig::default();
        let mlp_default = MlpConfig::default();
        let forest_default = ForestConfig::default();
        let ensemble = EnsembleConfig {
            weights,
            sgd: SgdConfig {
                epochs: k.get("sgd.epochs", sgd_default.epochs)?,
                alpha: k.get("sgd.alpha", sgd_default.alpha)?,
                eta0: k.get("sgd.eta0", sgd_default.eta0)?,
            },
            svm: SvmConfig {
                epochs: k.get("svm.epochs", svm_default.epochs)?,
                lambda: k.get("svm.lambda", svm_default.lambda)?,
            },
            mlp: MlpConfig {
                epochs: k.get("mlp.epochs", mlp_default.epochs)?,
                batch_size: k.get("mlp.batch_size", mlp_default.batch_size)?,
                learning_rate: k.get("mlp.learning_rate", mlp_default.learning_rate)?,
            },
            forest: ForestConfig {
                trees: k.get("forest.trees", forest_default.trees)?,
                max_features: match k.raw("forest.max_features") {
                    None => None,
                    Some(v) if v == "sqrt" => None,
                    Some(v) => Some(
                        v.parse().map_err(|_| ConfigError::Value { key: "forest.max_features".into(), value: v })?,
                    ),
                },
                min_samples_split: k.get("forest.min_samples_split", forest_default.min_samples_split)?,
            },
            seed,
        };

        let n_train_raw = k.raw("n_train").unwrap_or_else(|| "25000".to_string());
        let (n_train, n_train_is_cap) = match n_train_raw.strip_prefix("cap:") {
            Some(v) => (
                v.trim()
                    .parse()
                    .map_err(|_| ConfigError::Value { key: "n_train".into(), value: n_train_raw.clone() })?,
                true,
            ),
            None => (
                n_train_raw
                    .parse()
                    .map_err(|_| ConfigError::Value { key: "n_train".into(), value: n_train_raw.clone() })?,
                false,
            ),
        };
        let pipeline = PipelineConfig {
            n_cut: k.get("n_cut", 5)?,
            n_train,
            n_train_is_cap,
            n_test: k.get("n_test", n_train)?,
            ensemble,
            betas: k.list("betas")?.unwrap_or_else(|| vec![0.1, 0.25, 0.75]),
            jackknife_blocks: k.get("jackknife_blocks", 50)?,
            seed,
        };

        let d = SynthConfig::default();
        let synth = SynthConfig {
            communities: k.get("synth.communities", d.communities)?,
            nodes_per_community: k.get("synth.nodes_per_community", d.nodes_per_community)?,
            p_in: k.get("synth.p_in", d.p_in)?,
            p_out: k.get("synth.p_out", d.p_out)?,
            weight_p: k.get("synth.weight_p", d.weight_p)?,
            tweets_mean: k.get("synth.tweets_mean", d.tweets_mean)?,
            vocab_size: k.get("synth.vocab_size", d.vocab_size)?,
            tokens_mean: k.get("synth.tokens_mean", d.tokens_mean)?,
            mu_text: k.get("synth.mu_text", d.mu_text)?,
            seed: k.get("synth.seed", seed)?,
        };

        let cfg = RunConfig {
            edges: k.path("edges"),
            graph: k.path("graph"),
            tweets: k.path("tweets"),
            embeddings,
            min_degree: k.get("min_degree", 3)?,
            algorithms,
            grids,
            algorithm_seeds,
            anchor_quantile: k.get("anchor_quantile", 0.75)?,
            centrality_tol: k.get("centrality.tol", 1e-10)?,
            centrality_max_iter: k.get("centrality.max_iter", 10_000)?,
            tracked: k.list("tracked")?.unwrap_or_default(),
            pipeline,
            synth,
            out: k.path("out").unwrap_or_else(|| PathBuf::from("out")),
            seed,
        };
        let unused = k.unused();
        if !unused.is_empty() {
            return Err(ConfigError::UnknownKeys(unused.join(", ")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.pipeline;
        if p.n_cut < 2 {
            return Err(invalid("n_cut must be at least 2"));
        }
        if !(self.anchor_quantile > 0.0 && self.anchor_quantile < 1.0) {
            return Err(invalid("anchor_quantile must lie strictly between 0 and 1"));
        }
        if p.n_train == 0 || p.n_test == 0 {
            return Err(invalid("n_train and n_test must be positive"));
        }
        if p.jackknife_blocks == 0 {
            return Err(invalid("jackknife_blocks must be positive"));
        }
        if p.betas.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(invalid("betas must be non-negative"));
        }
        if self.centrality_tol <= 0.0 || self.centrality_max_iter == 0 {
            return Err(invalid("centrality.tol and centrality.max_iter must be positive"));
        }
        if p.ensemble.forest.trees == 0 || p.ensemble.mlp.batch_size == 0 || p.ensemble.mlp.learning_rate <= 0.0 {
            return Err(invalid("forest.trees, mlp.batch_size and mlp.learning_rate must be positive"));
        }
        if p.ensemble.svm.lambda <= 0.0 {
            return Err(invalid("svm.lambda must be positive"));
        }
        for (a, g) in &self.grids {
            if g.is_empty() || g.iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!("grid.{} must list finite values", a.name())));
            }
            if matches!(a, Algorithm::Louvain | Algorithm::LouvainGamma | Algorithm::Bec) && g.iter().any(|v| *v <= 0.0)
            {
                return Err(invalid(format!("grid.{} values must be positive", a.name())));
            }
        }
        self.synth.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(())
    }

    /// Parameter grid for `a`; single default value when absent.
    pub fn grid(&self, a: Algorithm) -> Vec<f64> {
        self.grids.get(&a).cloned().unwrap_or_else(|| vec![if a == Algorithm::Infomap { 0.0 } else { 1.0 }])
    }

    pub fn seed_for(&self, a: Algorithm) -> u64 {
        self.algorithm_seeds.get(&a).copied().unwrap_or(self.seed)
    }

    /// Require an input path to be set and to exist.
    pub fn require(&self, key: &str, value: &Option<PathBuf>) -> Result<PathBuf, ConfigError> {
        let p = value.clone().ok_or_else(|| invalid(format!("`{key}` is required for this command")))?;
        if !p.exists() {
            return Err(invalid(format!("{key} path {} does not exist", p.display())));
        }
        Ok(p)
    }
}
