//! A small feed-forward classifier trained by hand-written backpropagation.
//!
//! The network is a plain MLP: ReLU on hidden layers, softmax on the output.
//! Every hidden activation vector is exposed so callers can pick any layer
//! as the embedding space for neighbor lookup. Parameters live in f64; the
//! checkpoint format (see [`save_model`]) narrows to f32.
//!
//! Also here: Gaussian-cluster synthetic data, label-noise injection, and a
//! momentum-SGD training loop. Everything is deterministic given its seed.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tensor::{
    read_tensor, write_tensor, LabelVector, LabeledCorpus, TensorMatrix,
};

/// Checkpoint magic for serialized models.
pub const MODEL_MAGIC: [u8; 4] = *b"LSNM";

/// A feature matrix with labels, as produced by [`generate_synthetic`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: TensorMatrix,
    pub labels: LabelVector,
}

impl Dataset {
    pub fn new(features: TensorMatrix, labels: LabelVector) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::Validation(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        Ok(Self { features, labels })
    }

    pub fn rows(&self) -> usize {
        self.features.rows()
    }

    pub fn dims(&self) -> usize {
        self.features.cols()
    }

    /// Smallest and largest feature value; the attack budget is scaled
    /// from this.
    pub fn value_range(&self) -> (f32, f32) {
        let mut lo = f32::INFINITY;
        let mut hi = f32::NEG_INFINITY;
        for &v in self.features.data() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// Parameters for Gaussian-cluster data: one cluster per class, means drawn
/// uniformly from the hypercube `[-cluster_mean_scale, cluster_mean_scale]^dims`,
/// isotropic noise with `cluster_stddev`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub num_classes: u32,
    pub samples_per_class: usize,
    pub dims: usize,
    pub cluster_mean_scale: f64,
    pub cluster_stddev: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 1 || self.samples_per_class < 1 || self.dims < 1 {
            return Err(Error::Argument("all counts must be >= 1".into()));
        }
        if !(self.cluster_stddev > 0.0) {
            return Err(Error::Argument("cluster_stddev must be > 0".into()));
        }
        if !self.cluster_mean_scale.is_finite() || self.cluster_mean_scale < 0.0 {
            return Err(Error::Argument("cluster_mean_scale must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Draws a train and a test split from the same cluster layout. The two
/// splits come from disjoint stretches of one seeded stream, so they never
/// share a sample.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let c = spec.num_classes as usize;
    let mut means = vec![vec![0.0f64; spec.dims]; c];
    for mean in &mut means {
        for m in mean.iter_mut() {
            *m = rng.random_range(-spec.cluster_mean_scale..=spec.cluster_mean_scale);
        }
    }
    let draw_split = |rng: &mut ChaCha8Rng| -> Result<Dataset> {
        let mut rows = Vec::with_capacity(c * spec.samples_per_class);
        let mut labels = Vec::with_capacity(c * spec.samples_per_class);
        for (class, mean) in means.iter().enumerate() {
            for _ in 0..spec.samples_per_class {
                let row: Vec<f64> = mean
                    .iter()
                    .map(|&m| m + spec.cluster_stddev * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                rows.push(row);
                labels.push(class as u32);
            }
        }
        Dataset::new(
            TensorMatrix::from_rows_f64(&rows)?,
            LabelVector::new(labels, spec.num_classes)?,
        )
    };
    let train = draw_split(&mut rng)?;
    let test = draw_split(&mut rng)?;
    Ok((train, test))
}

/// Reassigns exactly `round(fraction * N)` labels, each to a uniformly
/// random class different from the original. Row choice and new labels are
/// deterministic given the seed.
pub fn permute_labels(labels: &LabelVector, fraction: f64, seed: u64) -> Result<LabelVector> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Argument(format!("fraction {fraction} not in [0,1]")));
    }
    let c = labels.num_classes();
    if fraction > 0.0 && c < 2 {
        return Err(Error::Argument(
            "cannot assign a different label with fewer than 2 classes".into(),
        ));
    }
    let n = labels.len();
    let count = (fraction * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    // partial Fisher-Yates: the first `count` slots become the chosen rows
    for i in 0..count {
        let j = rng.random_range(i..n);
        order.swap(i, j);
    }
    let mut out = labels.labels().to_vec();
    for &row in &order[..count] {
        let old = out[row];
        let r = rng.random_range(0..c - 1);
        out[row] = if r >= old { r + 1 } else { r };
    }
    LabelVector::new(out, c)
}

/// Per-layer activations of one forward pass. `hidden[i]` is the post-ReLU
/// vector of hidden layer i+1; these are the embedding candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    pub hidden: Vec<Vec<f64>>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
}

/// Gradients in the same shape as the model parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros_like(model: &MlpClassifier) -> Self {
        Self {
            weights: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            for v in w.iter_mut() {
                *v *= factor;
            }
        }
        for b in &mut self.biases {
            for v in b.iter_mut() {
                *v *= factor;
            }
        }
    }
}

/// MLP with ReLU hidden layers and a softmax output. Weight matrix l maps
/// layer l activations (length `layer_sizes[l]`) to layer l+1 pre-activations,
/// stored row-major as `layer_sizes[l+1] x layer_sizes[l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpClassifier {
    layer_sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl MlpClassifier {
    /// All-zero parameters; mostly useful for tests.
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        Self::check_sizes(layer_sizes)?;
        let weights = (0..layer_sizes.len() - 1)
            .map(|l| vec![0.0; layer_sizes[l + 1] * layer_sizes[l]])
            .collect();
        let biases = (0..layer_sizes.len() - 1)
            .map(|l| vec![0.0; layer_sizes[l + 1]])
            .collect();
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
        })
    }

    /// He-style initialization: weights ~ N(0, 2/fan_in), biases zero.
    pub fn random(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        let mut model = Self::zeros(layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (l, w) in model.weights.iter_mut().enumerate() {
            let scale = (2.0 / model.layer_sizes[l] as f64).sqrt();
            for v in w.iter_mut() {
                *v = scale * rng.sample::<f64, _>(StandardNormal);
            }
        }
        Ok(model)
    }

    fn check_sizes(layer_sizes: &[usize]) -> Result<()> {
        if layer_sizes.len() < 2 {
            return Err(Error::Argument(
                "need at least an input and an output layer".into(),
            ));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::Argument("layer sizes must be >= 1".into()));
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    /// Weight matrix l, row-major `layer_sizes[l+1] x layer_sizes[l]`.
    /// Panics if `l` is not a weight layer index.
    pub fn layer_weights(&self, l: usize) -> &[f64] {
        &self.weights[l]
    }

    pub fn layer_weights_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.weights[l]
    }

    pub fn layer_biases(&self, l: usize) -> &[f64] {
        &self.biases[l]
    }

    pub fn layer_biases_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.biases[l]
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn num_classes(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Hidden layers sit between input and output; a `[4, 8, 8, 3]` net
    /// has two.
    pub fn num_hidden_layers(&self) -> usize {
        self.layer_sizes.len() - 2
    }

    fn check_finite(&self) -> Result<()> {
        let finite = self
            .weights
            .iter()
            .chain(self.biases.iter())
            .all(|p| p.iter().all(|v| v.is_finite()));
        if finite {
            Ok(())
        } else {
            Err(Error::Validation("non-finite model parameter".into()))
        }
    }

    /// Full forward pass, keeping every hidden activation. Softmax uses
    /// max-subtraction, so probabilities are stable for large logits.
    pub fn forward(&self, x: &[f64]) -> Result<Activations> {
        if x.len() != self.input_dim() {
            return Err(Error::Argument(format!(
                "input length {} does not match input layer {}",
                x.len(),
                self.input_dim()
            )));
        }
        let num_weight_layers = self.weights.len();
        let mut hidden: Vec<Vec<f64>> = Vec::with_capacity(num_weight_layers - 1);
        let mut current: &[f64] = x;
        let mut logits = Vec::new();
        for l in 0..num_weight_layers {
            let (rows, cols) = (self.layer_sizes[l + 1], self.layer_sizes[l]);
            let w = &self.weights[l];
            let b = &self.biases[l];
            let mut next = vec![0.0f64; rows];
            for (j, slot) in next.iter_mut().enumerate() {
                let row = &w[j * cols..(j + 1) * cols];
                let mut acc = b[j];
                for (wv, xv) in row.iter().zip(current) {
                    acc += wv * xv;
                }
                *slot = acc;
            }
            if l + 1 < num_weight_layers {
                for v in next.iter_mut() {
                    *v = v.max(0.0);
                }
                hidden.push(next);
                current = hidden.last().unwrap();
            } else {
                logits = next;
            }
        }
        let probs = softmax(&logits);
        Ok(Activations {
            hidden,
            logits,
            probs,
        })
    }

    /// Predicted class: argmax of the output, lower index on ties.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let acts = self.forward(x)?;
        Ok(crate::combiner::argmax(&acts.logits))
    }

    /// Cross-entropy of one sample, computed via log-sum-exp rather than
    /// `ln(probs[y])` so it stays finite for extreme logits.
    pub fn loss(&self, x: &[f64], y: usize) -> Result<f64> {
        let acts = self.forward(x)?;
        if y >= acts.logits.len() {
            return Err(Error::Argument(format!("label {y} out of range")));
        }
        let max = acts.logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse: f64 = acts.logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln() + max;
        Ok(lse - acts.logits[y])
    }

    /// Mean cross-entropy over a batch.
    pub fn batch_loss(&self, xs: &[&[f64]], ys: &[usize]) -> Result<f64> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::Argument("empty or mismatched batch".into()));
        }
        let mut sum = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            sum += self.loss(x, y)?;
        }
        Ok(sum / xs.len() as f64)
    }

    /// Analytic gradient of the mean cross-entropy over a batch. ReLU uses
    /// subgradient 0 at 0, so the result is unambiguous.
    pub fn gradient(&self, xs: &[&[f64]], ys: &[usize]) -> Result<Gradients> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::Argument("empty or mismatched batch".into()));
        }
        let mut grads = Gradients::zeros_like(self);
        for (x, &y) in xs.iter().zip(ys) {
            self.backprop_into(x, y, &mut grads)?;
        }
        grads.scale(1.0 / xs.len() as f64);
        Ok(grads)
    }

    /// Accumulates one sample's parameter gradients; returns the output
    /// delta chain's final stage for reuse by input_gradient.
    fn backprop_into(&self, x: &[f64], y: usize, grads: &mut Gradients) -> Result<Vec<f64>> {
        let acts = self.forward(x)?;
        if y >= self.num_classes() {
            return Err(Error::Argument(format!("label {y} out of range")));
        }
        let mut delta: Vec<f64> = acts.probs.clone();
        delta[y] -= 1.0;
        for l in (0..self.weights.len()).rev() {
            let (rows, cols) = (self.layer_sizes[l + 1], self.layer_sizes[l]);
            let input_act: &[f64] = if l == 0 { x } else { &acts.hidden[l - 1] };
            {
                let gw = &mut grads.weights[l];
                let gb = &mut grads.biases[l];
                for j in 0..rows {
                    gb[j] += delta[j];
                    let grow = &mut gw[j * cols..(j + 1) * cols];
                    for (g, &a) in grow.iter_mut().zip(input_act) {
                        *g += delta[j] * a;
                    }
                }
            }
            let w = &self.weights[l];
            let mut prev = vec![0.0f64; cols];
            for j in 0..rows {
                let row = &w[j * cols..(j + 1) * cols];
                for (p, &wv) in prev.iter_mut().zip(row) {
                    *p += wv * delta[j];
                }
            }
            if l > 0 {
                for (p, &a) in prev.iter_mut().zip(input_act) {
                    if a <= 0.0 {
                        *p = 0.0;
                    }
                }
            }
            delta = prev;
        }
        Ok(delta)
    }

    /// Gradient of one sample's cross-entropy with respect to the input,
    /// the quantity adversarial attacks follow.
    pub fn input_gradient(&self, x: &[f64], y: usize) -> Result<Vec<f64>> {
        let mut grads = Gradients::zeros_like(self);
        self.backprop_into(x, y, &mut grads)
    }

    /// Fraction of rows whose argmax matches the label.
    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        if data.rows() == 0 {
            return Err(Error::Argument("empty dataset".into()));
        }
        let mut hits = 0usize;
        for i in 0..data.rows() {
            let x: Vec<f64> = data.features.row(i).iter().map(|&v| v as f64).collect();
            hits += (self.predict(&x)? == data.labels.get(i) as usize) as usize;
        }
        Ok(hits as f64 / data.rows() as f64)
    }

    /// Runs every row through the model and packages the chosen hidden
    /// layer as embeddings alongside the outputs and labels. `layer_index`
    /// is 1-based over hidden layers. With `raw_logits` the pre-softmax
    /// values are stored instead of probabilities.
    pub fn export_corpus(
        &self,
        data: &Dataset,
        layer_index: usize,
        raw_logits: bool,
    ) -> Result<LabeledCorpus> {
        if layer_index < 1 || layer_index > self.num_hidden_layers() {
            return Err(Error::Argument(format!(
                "layer index {layer_index} outside 1..={}",
                self.num_hidden_layers()
            )));
        }
        let mut embeddings = Vec::with_capacity(data.rows());
        let mut outputs = Vec::with_capacity(data.rows());
        for i in 0..data.rows() {
            let x: Vec<f64> = data.features.row(i).iter().map(|&v| v as f64).collect();
            let mut acts = self.forward(&x)?;
            embeddings.push(std::mem::take(&mut acts.hidden[layer_index - 1]));
            outputs.push(if raw_logits { acts.logits } else { acts.probs });
        }
        LabeledCorpus::new(
            TensorMatrix::from_rows_f64(&embeddings)?,
            TensorMatrix::from_rows_f64(&outputs)?,
            data.labels.clone(),
        )
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Training hyperparameters. The learning rate is multiplied by
/// `decay_factor` at each milestone epoch; with `milestones: None` the
/// milestones are half and three quarters of the epoch count.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub decay_factor: f64,
    pub milestones: Option<Vec<usize>>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 400,
            batch_size: 128,
            learning_rate: 0.05,
            momentum: 0.9,
            weight_decay: 0.005,
            decay_factor: 0.1,
            milestones: None,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        // lr = 0 is accepted as an explicit no-op run
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::Config("learning_rate must be finite and >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config("momentum must be in [0,1)".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if !self.decay_factor.is_finite() || self.decay_factor <= 0.0 {
            return Err(Error::Config("decay_factor must be > 0".into()));
        }
        if self.weight_decay < 0.0 || !self.weight_decay.is_finite() {
            return Err(Error::Config("weight_decay must be finite and >= 0".into()));
        }
        Ok(())
    }

    fn milestone_epochs(&self) -> Vec<usize> {
        self.milestones
            .clone()
            .unwrap_or_else(|| vec![self.epochs / 2, self.epochs * 3 / 4])
    }
}

/// Per-epoch mean training loss and accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    pub epoch_loss: Vec<f64>,
    pub epoch_accuracy: Vec<f64>,
}

/// Momentum-SGD state, one velocity buffer per parameter tensor. The step
/// rule is `g = grad + weight_decay * p; v = momentum * v + g; p -= lr * v`.
#[derive(Debug, Clone)]
pub struct SgdState {
    velocity_w: Vec<Vec<f64>>,
    velocity_b: Vec<Vec<f64>>,
    pub momentum: f64,
    pub weight_decay: f64,
}

impl SgdState {
    pub fn new(model: &MlpClassifier, momentum: f64, weight_decay: f64) -> Self {
        Self {
            velocity_w: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            velocity_b: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            momentum,
            weight_decay,
        }
    }

    /// One optimizer step at the given learning rate.
    pub fn step(&mut self, model: &mut MlpClassifier, grads: &Gradients, lr: f64) {
        let tensors = model
            .weights
            .iter_mut()
            .zip(&grads.weights)
            .zip(self.velocity_w.iter_mut())
            .chain(
                model
                    .biases
                    .iter_mut()
                    .zip(&grads.biases)
                    .zip(self.velocity_b.iter_mut()),
            );
        for ((params, grad), velocity) in tensors {
            for ((p, &g), v) in params.iter_mut().zip(grad).zip(velocity.iter_mut()) {
                let g = g + self.weight_decay * *p;
                *v = self.momentum * *v + g;
                *p -= lr * *v;
            }
        }
    }
}

/// Mini-batch SGD over shuffled epochs. The shuffle stream is seeded from
/// `config.seed`, so a rerun with identical inputs reproduces the final
/// parameters bit for bit. Aborts with a diagnostic if the loss leaves the
/// finite range.
pub fn train(
    model: &mut MlpClassifier,
    data: &Dataset,
    config: &TrainConfig,
) -> Result<TrainTrace> {
    config.validate()?;
    model.check_finite()?;
    if data.rows() == 0 {
        return Err(Error::Argument("empty training set".into()));
    }
    if data.dims() != model.input_dim() {
        return Err(Error::Argument(format!(
            "data dims {} do not match model input {}",
            data.dims(),
            model.input_dim()
        )));
    }
    if data.labels.num_classes() as usize > model.num_classes() {
        return Err(Error::Argument(format!(
            "labels need {} classes but model outputs {}",
            data.labels.num_classes(),
            model.num_classes()
        )));
    }

    let milestones = config.milestone_epochs();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut sgd = SgdState::new(model, config.momentum, config.weight_decay);
    let mut order: Vec<usize> = (0..data.rows()).collect();
    let mut trace = TrainTrace {
        epoch_loss: Vec::with_capacity(config.epochs),
        epoch_accuracy: Vec::with_capacity(config.epochs),
    };

    let rows_f64: Vec<Vec<f64>> = (0..data.rows())
        .map(|i| data.features.row(i).iter().map(|&v| v as f64).collect())
        .collect();

    for epoch in 0..config.epochs {
        let decays = milestones.iter().filter(|&&m| m <= epoch).count() as i32;
        let lr = config.learning_rate * config.decay_factor.powi(decays);
        order.shuffle(&mut rng);

        for batch in order.chunks(config.batch_size) {
            let xs: Vec<&[f64]> = batch.iter().map(|&i| rows_f64[i].as_slice()).collect();
            let ys: Vec<usize> = batch.iter().map(|&i| data.labels.get(i) as usize).collect();
            let grads = model.gradient(&xs, &ys)?;
            sgd.step(model, &grads, lr);
        }
        // end-of-epoch evaluation in natural row order, so the trace does
        // not depend on the shuffle
        let mut loss_sum = 0.0;
        let mut hits = 0usize;
        for (i, row) in rows_f64.iter().enumerate() {
            let y = data.labels.get(i) as usize;
            loss_sum += model.loss(row, y)?;
            hits += (model.predict(row)? == y) as usize;
        }
        let epoch_loss = loss_sum / data.rows() as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::Training(format!(
                "loss became non-finite in epoch {epoch} (lr {lr}); reduce the learning rate"
            )));
        }
        trace.epoch_loss.push(epoch_loss);
        trace.epoch_accuracy.push(hits as f64 / data.rows() as f64);
    }
    model.check_finite()?;
    Ok(trace)
}

/// Writes a model checkpoint: magic, version byte 1, three reserved bytes,
/// a u64 layer count, the layer sizes as u64, then one weight tensor
/// (`sizes[l+1] x sizes[l]`) and one bias tensor (`1 x sizes[l+1]`) per
/// weight layer, each a complete LSNN record. Values narrow to f32.
pub fn write_model<W: Write>(model: &MlpClassifier, sink: &mut W) -> Result<()> {
    sink.write_all(&MODEL_MAGIC)?;
    sink.write_all(&[1u8, 0, 0, 0])?;
    sink.write_all(&(model.layer_sizes.len() as u64).to_le_bytes())?;
    for &s in &model.layer_sizes {
        sink.write_all(&(s as u64).to_le_bytes())?;
    }
    for l in 0..model.weights.len() {
        let (rows, cols) = (model.layer_sizes[l + 1], model.layer_sizes[l]);
        let w = TensorMatrix::new(
            rows,
            cols,
            model.weights[l].iter().map(|&v| v as f32).collect(),
        )?;
        write_tensor(&w, sink)?;
        let b = TensorMatrix::new(
            1,
            rows,
            model.biases[l].iter().map(|&v| v as f32).collect(),
        )?;
        write_tensor(&b, sink)?;
    }
    Ok(())
}

pub fn read_model<R: Read>(source: &mut R) -> Result<MlpClassifier> {
    let mut head = [0u8; 8];
    source.read_exact(&mut head)?;
    if head[0..4] != MODEL_MAGIC {
        return Err(Error::Format("bad model magic".into()));
    }
    if head[4] != 1 {
        return Err(Error::Format(format!("unsupported model version {}", head[4])));
    }
    let mut buf8 = [0u8; 8];
    source.read_exact(&mut buf8)?;
    let count = u64::from_le_bytes(buf8) as usize;
    if count < 2 || count > 1_000 {
        return Err(Error::Format(format!("implausible layer count {count}")));
    }
    let mut layer_sizes = Vec::with_capacity(count);
    for _ in 0..count {
        source.read_exact(&mut buf8)?;
        layer_sizes.push(u64::from_le_bytes(buf8) as usize);
    }
    let mut model = MlpClassifier::zeros(&layer_sizes)?;
    for l in 0..layer_sizes.len() - 1 {
        let (rows, cols) = (layer_sizes[l + 1], layer_sizes[l]);
        let w = read_tensor(source)?;
        if w.rows() != rows || w.cols() != cols {
            return Err(Error::Format(format!(
                "weight tensor {l} is {}x{}, expected {rows}x{cols}",
                w.rows(),
                w.cols()
            )));
        }
        model.weights[l] = w.data().iter().map(|&v| v as f64).collect();
        let b = read_tensor(source)?;
        if b.rows() != 1 || b.cols() != rows {
            return Err(Error::Format(format!(
                "bias tensor {l} is {}x{}, expected 1x{rows}",
                b.rows(),
                b.cols()
            )));
        }
        model.biases[l] = b.data().iter().map(|&v| v as f64).collect();
    }
    Ok(model)
}

pub fn save_model<P: AsRef<Path>>(model: &MlpClassifier, path: P) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    write_model(model, &mut file)?;
    file.flush()?;
    Ok(())
}

pub fn load_model<P: AsRef<Path>>(path: P) -> Result<MlpClassifier> {
    let mut file = BufReader::new(File::open(path)?);
    read_model(&mut file)
}
