//! Small feed-forward network: input → 5 → 2 → classes, ReLU hidden units,
//! softmax output, cross-entropy loss, Adam.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linear::{argmax, check_training};
use super::NlpError;
use crate::Scalar;

const HIDDEN: [usize; 2] = [5, 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self { epochs: 50, batch_size: 32, learning_rate: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Layer<F> {
    inputs: usize,
    outputs: usize,
    weights: Vec<F>,
    bias: Vec<F>,
}

impl<F: Scalar> Layer<F> {
    fn init(inputs: usize, outputs: usize, rng: &mut ChaCha8Rng) -> Self {
        let bound = (6.0 / (inputs + outputs) as f64).sqrt();
        let mut draw = || F::lit(rng.random_range(-bound..bound));
        let weights = (0..inputs * outputs).map(|_| draw()).collect();
        let bias = (0..outputs).map(|_| draw()).collect();
        Self { inputs, outputs, weights, bias }
    }

    fn forward(&self, a: &[F], out: &mut Vec<F>) {
        out.clear();
        for o in 0..self.outputs {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            out.push(row.iter().zip(a).map(|(&w, &x)| w * x).sum::<F>() + self.bias[o]);
        }
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp<F> {
    layers: Vec<Layer<F>>,
}

fn relu<F: Scalar>(v: &mut [F]) {
    v.iter_mut().for_each(|x| *x = x.max(F::zero()));
}

fn softmax<F: Scalar>(v: &mut [F]) {
    let m = v.iter().copied().fold(F::neg_infinity(), F::max);
    let mut total = F::zero();
    for x in v.iter_mut() {
        *x = (*x - m).exp();
        total += *x;
    }
    v.iter_mut().for_each(|x| *x /= total);
}

struct Adam<F> {
    m: Vec<F>,
    v: Vec<F>,
    t: i32,
}

impl<F: Scalar> Mlp<F> {
    pub fn dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn classes(&self) -> usize {
        self.layers.last().expect("at least one layer").outputs
    }

    /// Pre-activations of every layer; hidden entries are post-ReLU.
    fn activations(&self, x: &[F]) -> Vec<Vec<F>> {
        let mut acts: Vec<Vec<F>> = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::new();
            layer.forward(if l == 0 { x } else { &acts[l - 1] }, &mut out);
            if l + 1 < self.layers.len() {
                relu(&mut out);
            } else {
                softmax(&mut out);
            }
            acts.push(out);
        }
        acts
    }

    pub fn probabilities(&self, x: &[F]) -> Vec<F> {
        self.activations(x).pop().expect("output layer")
    }

    pub fn predict(&self, x: &[F]) -> usize {
        argmax(&self.probabilities(x))
    }

    /// Mean cross-entropy over a labeled set.
    pub fn loss(&self, x: &[Vec<F>], y: &[usize]) -> F {
        let tiny = F::lit(1e-12);
        let total: F = x.iter().zip(y).map(|(v, &l)| -(self.probabilities(v)[l].max(tiny)).ln()).sum();
        total / F::from_usize_lossy(x.len())
    }

    /// Accumulate the gradient of one sample's loss into `grads`, laid out
    /// layer by layer as weights then bias.
    fn backprop(&self, x: &[F], label: usize, grads: &mut [F]) {
        let acts = self.activations(x);
        let mut delta = acts.last().expect("output").clone();
        delta[label] -= F::one();
        let offsets = self.offsets();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input: &[F] = if l == 0 { x } else { &acts[l - 1] };
            let g = &mut grads[offsets[l]..offsets[l] + layer.param_count()];
            let (gw, gb) = g.split_at_mut(layer.weights.len());
            for (o, &d) in delta.iter().enumerate() {
                if d == F::zero() {
                    continue;
                }
                let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                for (gwi, &a) in row.iter_mut().zip(input) {
                    *gwi += d * a;
                }
                gb[o] += d;
            }
            if l > 0 {
                let mut prev = vec![F::zero(); layer.inputs];
                for (o, &d) in delta.iter().enumerate() {
                    let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (p, &w) in prev.iter_mut().zip(row) {
                        *p += w * d;
                    }
                }
                for (p, &a) in prev.iter_mut().zip(&acts[l - 1]) {
                    if a <= F::zero() {
                        *p = F::zero();
                    }
                }
                delta = prev;
            }
        }
    }

    fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.layers.len());
        let mut acc = 0;
        for l in &self.layers {
            out.push(acc);
            acc += l.param_count();
        }
        out
    }

    fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    fn apply_adam(&mut self, grads: &[F], adam: &mut Adam<F>, lr: F) {
        let (b1, b2, eps) = (F::lit(0.9), F::lit(0.999), F::lit(1e-8));
        adam.t += 1;
        let c1 = F::one() - b1.powi(adam.t);
        let c2 = F::one() - b2.powi(adam.t);
        let mut i = 0;
        for layer in &mut self.layers {
            for p in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
                let g = grads[i];
                adam.m[i] = b1 * adam.m[i] + (F::one() - b1) * g;
                adam.v[i] = b2 * adam.v[i] + (F::one() - b2) * g * g;
                let mhat = adam.m[i] / c1;
                let vhat = adam.v[i] / c2;
                *p -= lr * mhat / (vhat.sqrt() + eps);
                i += 1;
            }
        }
    }

    pub fn train(x: &[Vec<F>], y: &[usize], classes: usize, config: &MlpConfig, seed: u64) -> Result<Self, NlpError> {
        let dim = check_training(x, y, classes)?;
        if config.batch_size == 0 || config.learning_rate <= 0.0 {
            return Err(NlpError::InvalidConfig("mlp batch size and learning rate must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes = [dim, HIDDEN[0], HIDDEN[1], classes];
        let layers = sizes.windows(2).map(|w| Layer::init(w[0], w[1], &mut rng)).collect();
        let mut net = Self { layers };
        let n_params = net.param_count();
        let mut adam = Adam { m: vec![F::zero(); n_params], v: vec![F::zero(); n_params], t: 0 };
        let lr = F::lit(config.learning_rate);
        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut grads = vec![F::zero(); n_params];
        for _ in 0..config.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(config.batch_size) {
                grads.iter_mut().for_each(|g| *g = F::zero());
                for &i in batch {
                    net.backprop(&x[i], y[i], &mut grads);
                }
                let scale = F::one() / F::from_usize_lossy(batch.len());
                grads.iter_mut().for_each(|g| *g *= scale);
                net.apply_adam(&grads, &mut adam, lr);
            }
        }
        Ok(net)
    }
}
