//! Fixed-topology multilayer perceptron with hand-written backpropagation
//! and Adam. Hidden layers are 64-64-64-32 with ReLU; the head is a softmax
//! over the class count. Parameters live in one flat buffer (per layer:
//! weights row-major out x in, then biases), which is also the order used by
//! the optimizer state, the on-disk format, and flat parameter indexing.

pub mod io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Hidden layer widths between the input and the class head.
pub const HIDDEN_DIMS: [usize; 4] = [64, 64, 64, 32];

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    dims: Vec<usize>,
    params: Vec<f64>,
}

/// (weights offset, biases offset) per layer in the flat buffer.
fn layer_offsets(dims: &[usize]) -> Vec<(usize, usize)> {
    let mut off = 0;
    let mut out = Vec::with_capacity(dims.len() - 1);
    for l in 0..dims.len() - 1 {
        let w = off;
        off += dims[l] * dims[l + 1];
        out.push((w, off));
        off += dims[l + 1];
    }
    out
}

fn param_count(dims: &[usize]) -> usize {
    (0..dims.len() - 1).map(|l| (dims[l] + 1) * dims[l + 1]).sum()
}

/// Numerically stable softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    out
}

impl Mlp {
    /// Glorot-uniform initialization: weights from U(-L, L) with
    /// L = sqrt(6 / (fan_in + fan_out)), biases zero. Draw order is the flat
    /// parameter order, so a seed pins the model bit for bit.
    pub fn new(input_dim: usize, n_classes: usize, seed: u64) -> Result<Mlp> {
        if input_dim == 0 {
            return Err(Error::validation("input dimension must be positive"));
        }
        if n_classes < 2 {
            return Err(Error::validation("need at least 2 classes"));
        }
        let mut dims = vec![input_dim];
        dims.extend(HIDDEN_DIMS);
        dims.push(n_classes);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; param_count(&dims)];
        for (l, &(w_off, b_off)) in layer_offsets(&dims).iter().enumerate() {
            let limit = (6.0 / (dims[l] + dims[l + 1]) as f64).sqrt();
            for w in &mut params[w_off..b_off] {
                *w = rng.gen_range(-limit..limit);
            }
        }
        Ok(Mlp { dims, params })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn n_classes(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn param(&self, i: usize) -> f64 {
        self.params[i]
    }

    pub fn set_param(&mut self, i: usize, v: f64) {
        self.params[i] = v;
    }

    fn weights(&self, l: usize) -> &[f64] {
        let (w, b) = layer_offsets(&self.dims)[l];
        &self.params[w..b]
    }

    fn biases(&self, l: usize) -> &[f64] {
        let (_, b) = layer_offsets(&self.dims)[l];
        &self.params[b..b + self.dims[l + 1]]
    }

    /// Class probabilities for one input.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.input_dim(), "input dimension mismatch");
        let n_layers = self.dims.len() - 1;
        let mut a = x.to_vec();
        for l in 0..n_layers {
            let (in_d, out_d) = (self.dims[l], self.dims[l + 1]);
            let w = self.weights(l);
            let b = self.biases(l);
            let mut z = vec![0.0; out_d];
            for o in 0..out_d {
                let row = &w[o * in_d..(o + 1) * in_d];
                let mut acc = b[o];
                for i in 0..in_d {
                    acc += row[i] * a[i];
                }
                z[o] = if l + 1 < n_layers { acc.max(0.0) } else { acc };
            }
            a = z;
        }
        softmax(&a)
    }

    /// Predicted class index; ties break toward the lowest index.
    pub fn predict(&self, x: &[f64]) -> usize {
        let probs = self.forward(x);
        let mut best = 0;
        for (i, &p) in probs.iter().enumerate().skip(1) {
            if p > probs[best] {
                best = i;
            }
        }
        best
    }

    /// Mean cross-entropy over a batch and its gradient. The head gradient
    /// uses the fused softmax + cross-entropy form (probs - onehot) / batch;
    /// ReLU units at exactly zero pass no gradient.
    pub fn loss_and_gradients(&self, xs: &[&[f64]], ys: &[usize]) -> Result<(f64, Grads)> {
        let batch = xs.len();
        if batch == 0 || ys.len() != batch {
            return Err(Error::Shape(format!(
                "batch of {} inputs with {} labels",
                batch,
                ys.len()
            )));
        }
        let n_layers = self.dims.len() - 1;
        for x in xs {
            if x.len() != self.input_dim() {
                return Err(Error::Shape(format!(
                    "input of {} values, model expects {}",
                    x.len(),
                    self.input_dim()
                )));
            }
        }
        for &y in ys {
            if y >= self.n_classes() {
                return Err(Error::validation(format!(
                    "label index {y} out of range for {} classes",
                    self.n_classes()
                )));
            }
        }

        // Forward, keeping post-activation of every layer (batch-major).
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let (in_d, out_d) = (self.dims[l], self.dims[l + 1]);
            let w = self.weights(l);
            let b = self.biases(l);
            let mut out = vec![0.0; batch * out_d];
            for s in 0..batch {
                let a_prev: &[f64] = if l == 0 {
                    xs[s]
                } else {
                    &acts[l - 1][s * in_d..(s + 1) * in_d]
                };
                let z = &mut out[s * out_d..(s + 1) * out_d];
                for o in 0..out_d {
                    let row = &w[o * in_d..(o + 1) * in_d];
                    let mut acc = b[o];
                    for i in 0..in_d {
                        acc += row[i] * a_prev[i];
                    }
                    z[o] = acc;
                }
                if l + 1 < n_layers {
                    for v in z.iter_mut() {
                        *v = v.max(0.0);
                    }
                } else {
                    let probs = softmax(z);
                    z.copy_from_slice(&probs);
                }
            }
            acts.push(out);
        }

        let n_classes = self.n_classes();
        let probs = &acts[n_layers - 1];
        let mut loss = 0.0;
        for s in 0..batch {
            loss -= probs[s * n_classes + ys[s]].max(1e-300).ln();
        }
        loss /= batch as f64;

        // Backward.
        let mut grads = Grads::zeros(&self.dims);
        let offsets = layer_offsets(&self.dims);
        let mut delta = probs.clone();
        for s in 0..batch {
            delta[s * n_classes + ys[s]] -= 1.0;
        }
        for v in &mut delta {
            *v /= batch as f64;
        }

        for l in (0..n_layers).rev() {
            let (in_d, out_d) = (self.dims[l], self.dims[l + 1]);
            let (w_off, b_off) = offsets[l];
            for s in 0..batch {
                let a_prev: &[f64] = if l == 0 {
                    xs[s]
                } else {
                    &acts[l - 1][s * in_d..(s + 1) * in_d]
                };
                let d = &delta[s * out_d..(s + 1) * out_d];
                for o in 0..out_d {
                    let dv = d[o];
                    let gw = &mut grads.params[w_off + o * in_d..w_off + (o + 1) * in_d];
                    for i in 0..in_d {
                        gw[i] += dv * a_prev[i];
                    }
                    grads.params[b_off + o] += dv;
                }
            }
            if l > 0 {
                let w = self.weights(l);
                let mut prev = vec![0.0; batch * in_d];
                for s in 0..batch {
                    let d = &delta[s * out_d..(s + 1) * out_d];
                    let p = &mut prev[s * in_d..(s + 1) * in_d];
                    for o in 0..out_d {
                        let dv = d[o];
                        let row = &w[o * in_d..(o + 1) * in_d];
                        for i in 0..in_d {
                            p[i] += dv * row[i];
                        }
                    }
                    let a_prev = &acts[l - 1][s * in_d..(s + 1) * in_d];
                    for i in 0..in_d {
                        if a_prev[i] <= 0.0 {
                            p[i] = 0.0;
                        }
                    }
                }
                delta = prev;
            }
        }

        Ok((loss, grads))
    }

    /// Minibatch training. One shuffle stream drives every epoch: indices
    /// are reshuffled in place each epoch, batches are consecutive runs of
    /// `batch_size` (the last may be short). Returns the per-epoch mean loss.
    pub fn train(
        &mut self,
        features: &[Vec<f64>],
        labels: &[usize],
        cfg: &TrainConfig,
        adam: &mut AdamState,
    ) -> Result<Vec<f64>> {
        cfg.validate()?;
        if features.is_empty() {
            return Err(Error::validation("training set is empty"));
        }
        if features.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} feature vectors with {} labels",
                features.len(),
                labels.len()
            )));
        }

        let n = features.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);
        let mut epoch_losses = Vec::with_capacity(cfg.epochs);

        for _ in 0..cfg.epochs {
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                order.swap(i, j);
            }
            let mut total = 0.0;
            for chunk in order.chunks(cfg.batch_size) {
                let xs: Vec<&[f64]> = chunk.iter().map(|&i| features[i].as_slice()).collect();
                let ys: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
                let (loss, grads) = self.loss_and_gradients(&xs, &ys)?;
                adam.step(self, &grads)?;
                total += loss * chunk.len() as f64;
            }
            epoch_losses.push(total / n as f64);
        }
        Ok(epoch_losses)
    }
}

/// Gradient buffer with the same flat layout as the model parameters.
#[derive(Debug, Clone)]
pub struct Grads {
    dims: Vec<usize>,
    params: Vec<f64>,
}

impl Grads {
    fn zeros(dims: &[usize]) -> Grads {
        Grads { dims: dims.to_vec(), params: vec![0.0; param_count(dims)] }
    }

    /// Synthetic gradient with every component equal, for optimizer checks
    /// where the update size is known in closed form.
    pub fn uniform(dims: &[usize], value: f64) -> Grads {
        let mut g = Grads::zeros(dims);
        for v in &mut g.params {
            *v = value;
        }
        g
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn param(&self, i: usize) -> f64 {
        self.params[i]
    }

    /// Gradient slice of one layer's weights.
    pub fn weight_grads(&self, l: usize) -> &[f64] {
        let (w, b) = layer_offsets(&self.dims)[l];
        &self.params[w..b]
    }

    /// Gradient slice of one layer's biases.
    pub fn bias_grads(&self, l: usize) -> &[f64] {
        let (_, b) = layer_offsets(&self.dims)[l];
        &self.params[b..b + self.dims[l + 1]]
    }
}

/// Adam with bias correction. Defaults: beta1 0.9, beta2 0.999, eps 1e-7.
#[derive(Debug, Clone)]
pub struct AdamState {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

pub const DEFAULT_LEARNING_RATE: f64 = 0.001;

impl AdamState {
    pub fn new(num_params: usize, lr: f64) -> Result<AdamState> {
        if !(lr.is_finite() && lr > 0.0) {
            return Err(Error::validation(format!("learning rate must be positive (got {lr})")));
        }
        Ok(AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-7,
            t: 0,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
        })
    }

    pub fn for_model(model: &Mlp, lr: f64) -> Result<AdamState> {
        AdamState::new(model.num_params(), lr)
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    /// One update: m and v track the gradient and its square, bias-corrected
    /// estimates drive w -= lr * mhat / (sqrt(vhat) + eps).
    pub fn step(&mut self, model: &mut Mlp, grads: &Grads) -> Result<()> {
        if grads.params.len() != model.params.len() || self.m.len() != model.params.len() {
            return Err(Error::Shape(format!(
                "optimizer over {} params, model has {}, gradient has {}",
                self.m.len(),
                model.params.len(),
                grads.params.len()
            )));
        }
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..model.params.len() {
            let g = grads.params[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mhat = self.m[i] / c1;
            let vhat = self.v[i] / c2;
            model.params[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
        Ok(())
    }
}

/// Epoch count (2 to 10), batch size, and the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig { epochs: 5, batch_size: 32, shuffle_seed: 42 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=10).contains(&self.epochs) {
            return Err(Error::validation(format!(
                "epochs must be between 2 and 10 (got {})",
                self.epochs
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::validation("batch size must be at least 1"));
        }
        Ok(())
    }
}
