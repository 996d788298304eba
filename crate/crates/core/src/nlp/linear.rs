//! One-vs-rest linear classifiers: hinge-loss SGD and Pegasos.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NlpError;
use crate::Scalar;

/// `classes` rows of `dim` weights plus one bias per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel<F> {
    pub dim: usize,
    pub classes: usize,
    pub weights: Vec<F>,
    pub bias: Vec<F>,
}

impl<F: Scalar> LinearModel<F> {
    fn zeros(dim: usize, classes: usize) -> Self {
        Self { dim, classes, weights: vec![F::zero(); dim * classes], bias: vec![F::zero(); classes] }
    }

    fn row(&self, k: usize) -> &[F] {
        &self.weights[k * self.dim..(k + 1) * self.dim]
    }

    fn score(&self, k: usize, x: &[F]) -> F {
        dot(self.row(k), x) + self.bias[k]
    }

    pub fn scores(&self, x: &[F]) -> Vec<F> {
        (0..self.classes).map(|k| self.score(k, x)).collect()
    }

    /// Class with the highest score; ties go to the smaller index.
    pub fn predict(&self, x: &[F]) -> usize {
        argmax(&self.scores(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub epochs: usize,
    /// L2 penalty.
    pub alpha: f64,
    pub eta0: f64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self { epochs: 15, alpha: 1e-4, eta0: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub epochs: usize,
    pub lambda: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { epochs: 15, lambda: 1e-4 }
    }
}

pub(crate) fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub(crate) fn argmax<F: Scalar>(v: &[F]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn check_training<F>(x: &[Vec<F>], y: &[usize], classes: usize) -> Result<usize, NlpError> {
    if x.is_empty() {
        return Err(NlpError::Empty("training set"));
    }
    if x.len() != y.len() {
        return Err(NlpError::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if classes < 2 {
        return Err(NlpError::SingleCategory);
    }
    let dim = x[0].len();
    if dim == 0 {
        return Err(NlpError::Empty("feature vector"));
    }
    if let Some(row) = x.iter().find(|r| r.len() != dim) {
        return Err(NlpError::DimensionMismatch { expected: dim, found: row.len() });
    }
    if let Some(&bad) = y.iter().find(|&&l| l >= classes) {
        return Err(NlpError::InvalidConfig(format!("label {bad} out of range for {classes} classes")));
    }
    Ok(dim)
}

fn sign<F: Scalar>(label: usize, k: usize) -> F {
    if label == k {
        F::one()
    } else {
        -F::one()
    }
}

/// Hinge-loss SGD with L2 decay and learning rate `eta0 / (1 + eta0·alpha·t)`.
pub fn train_sgd<F: Scalar>(
    x: &[Vec<F>],
    y: &[usize],
    classes: usize,
    config: &SgdConfig,
    seed: u64,
) -> Result<LinearModel<F>, NlpError> {
    let dim = check_training(x, y, classes)?;
    let mut model = LinearModel::zeros(dim, classes);
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = F::lit(config.alpha);
    let eta0 = F::lit(config.eta0);
    let mut t = F::zero();
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let eta = eta0 / (F::one() + eta0 * alpha * t);
            t += F::one();
            let decay = F::one() - eta * alpha;
            for k in 0..classes {
                let s: F = sign(y[i], k);
                let margin = s * model.score(k, &x[i]);
                let row = &mut model.weights[k * dim..(k + 1) * dim];
                for (w, &xi) in row.iter_mut().zip(&x[i]) {
                    *w *= decay;
                    if margin < F::one() {
                        *w += eta * s * xi;
                    }
                }
                if margin < F::one() {
                    model.bias[k] += eta * s;
                }
            }
        }
    }
    Ok(model)
}

/// Pegasos: step `1/(λt)`, projection onto the ball of radius `1/√λ`.
/// The bias is folded in as a constant feature and regularized with the
/// weights.
pub fn train_svm<F: Scalar>(
    x: &[Vec<F>],
    y: &[usize],
    classes: usize,
    config: &SvmConfig,
    seed: u64,
) -> Result<LinearModel<F>, NlpError> {
    let dim = check_training(x, y, classes)?;
    if config.lambda <= 0.0 {
        return Err(NlpError::InvalidConfig("svm lambda must be positive".into()));
    }
    let lambda = F::lit(config.lambda);
    let radius = F::one() / lambda.sqrt();
    let mut model = LinearModel::zeros(dim, classes);
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0usize;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let tf = F::from_usize_lossy(t);
            let eta = F::one() / (lambda * tf);
            let decay = F::one() - F::one() / tf;
            for k in 0..classes {
                let s: F = sign(y[i], k);
                let hit = s * model.score(k, &x[i]) < F::one();
                let row = &mut model.weights[k * dim..(k + 1) * dim];
                for (w, &xi) in row.iter_mut().zip(&x[i]) {
                    *w *= decay;
                    if hit {
                        *w += eta * s * xi;
                    }
                }
                model.bias[k] *= decay;
                if hit {
                    model.bias[k] += eta * s;
                }
                let norm = (dot(row, row) + model.bias[k] * model.bias[k]).sqrt();
                if norm > radius {
                    let scale = radius / norm;
                    row.iter_mut().for_each(|w| *w *= scale);
                    model.bias[k] *= scale;
                }
            }
        }
    }
    Ok(model)
}
