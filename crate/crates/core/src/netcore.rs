//! Dense feedforward networks with per-synapse masks.
//!
//! Weights and biases are stored as binary32. Forward and backward passes
//! accumulate in binary64 and sum batch contributions in sample order, so
//! training is bit-reproducible for a given seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataio::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Sigmoid,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
        }
    }
}

/// Shape of one dense layer. The activation is ignored on the final layer,
/// which is always softmax.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    #[serde(default)]
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        LayerSpec {
            in_dim,
            out_dim,
            activation,
        }
    }

    /// Builds a chain of layers from widths, e.g. `[16, 64, 32, 2]`.
    pub fn chain(widths: &[usize], activation: Activation) -> Vec<LayerSpec> {
        widths
            .windows(2)
            .map(|w| LayerSpec::new(w[0], w[1], activation))
            .collect()
    }
}

pub fn validate_spec(spec: &[LayerSpec]) -> Result<()> {
    if spec.is_empty() {
        return Err(Error::InvalidSpec("no layers".into()));
    }
    for (i, l) in spec.iter().enumerate() {
        if l.in_dim == 0 || l.out_dim == 0 {
            return Err(Error::InvalidSpec(format!("layer {i} has a zero dimension")));
        }
    }
    for (i, pair) in spec.windows(2).enumerate() {
        if pair[0].out_dim != pair[1].in_dim {
            return Err(Error::InvalidSpec(format!(
                "layer {i} out_dim {} does not match layer {} in_dim {}",
                pair[0].out_dim,
                i + 1,
                pair[1].in_dim
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Full,
    Half,
}

/// One dense layer. `weights` and `mask` are row-major `[out_dim × in_dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    pub weights: Vec<f32>,
    pub mask: Vec<bool>,
    pub bias: Vec<f32>,
}

impl DenseLayer {
    pub fn spec(&self) -> LayerSpec {
        LayerSpec::new(self.in_dim, self.out_dim, self.activation)
    }

    pub fn active_synapses(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub layers: Vec<DenseLayer>,
    pub generation: u32,
    pub precision: Precision,
}

/// Binary realisation of a network topology, one matrix per layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynapseMask {
    pub layers: Vec<LayerMask>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerMask {
    pub in_dim: usize,
    pub out_dim: usize,
    pub bits: Vec<bool>,
}

impl SynapseMask {
    pub fn count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.bits.iter().filter(|&&b| b).count())
            .sum()
    }

    pub fn of(net: &Network) -> SynapseMask {
        SynapseMask {
            layers: net
                .layers
                .iter()
                .map(|l| LayerMask {
                    in_dim: l.in_dim,
                    out_dim: l.out_dim,
                    bits: l.mask.clone(),
                })
                .collect(),
        }
    }

    fn check_congruent(&self, net: &Network) -> Result<()> {
        if self.layers.len() != net.layers.len() {
            return Err(Error::ShapeMismatch {
                expected: net.layers.len(),
                got: self.layers.len(),
            });
        }
        for (m, l) in self.layers.iter().zip(&net.layers) {
            if m.bits.len() != l.weights.len() || m.in_dim != l.in_dim || m.out_dim != l.out_dim {
                return Err(Error::ShapeMismatch {
                    expected: l.weights.len(),
                    got: m.bits.len(),
                });
            }
        }
        Ok(())
    }
}

/// Glorot-uniform ancestor: weights in ±sqrt(6/(in+out)), zero biases,
/// all synapses present.
pub fn init_network(spec: &[LayerSpec], seed: u64) -> Result<Network> {
    validate_spec(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = spec
        .iter()
        .map(|s| {
            let limit = (6.0 / (s.in_dim + s.out_dim) as f64).sqrt() as f32;
            let weights = (0..s.in_dim * s.out_dim)
                .map(|_| rng.random_range(-limit..=limit))
                .collect();
            DenseLayer {
                in_dim: s.in_dim,
                out_dim: s.out_dim,
                activation: s.activation,
                weights,
                mask: vec![true; s.in_dim * s.out_dim],
                bias: vec![0.0; s.out_dim],
            }
        })
        .collect();
    Ok(Network {
        layers,
        generation: 1,
        precision: Precision::Full,
    })
}

impl Network {
    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    pub fn spec(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(DenseLayer::spec).collect()
    }

    pub fn total_synapses(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len()).sum()
    }

    /// Copy of `self` with `mask` applied: weights outside the mask are zeroed.
    pub fn with_mask(&self, mask: &SynapseMask) -> Result<Network> {
        mask.check_congruent(self)?;
        let mut out = self.clone();
        for (layer, m) in out.layers.iter_mut().zip(&mask.layers) {
            for ((w, slot), &bit) in layer.weights.iter_mut().zip(layer.mask.iter_mut()).zip(&m.bits) {
                *slot = bit;
                if !bit {
                    *w = 0.0;
                }
            }
        }
        Ok(out)
    }

    /// Checks the structural invariants: consistent shapes, finite values and
    /// exact zeros at masked positions.
    pub fn validate(&self) -> Result<()> {
        validate_spec(&self.spec())?;
        for (i, l) in self.layers.iter().enumerate() {
            let n = l.in_dim * l.out_dim;
            if l.weights.len() != n || l.mask.len() != n || l.bias.len() != l.out_dim {
                return Err(Error::Integrity(format!("layer {i} array lengths do not match its shape")));
            }
            for (j, (&w, &m)) in l.weights.iter().zip(&l.mask).enumerate() {
                if !m && w.to_bits() != 0 {
                    return Err(Error::Integrity(format!(
                        "layer {i} synapse {j} is masked but has weight {w}"
                    )));
                }
            }
            if l.weights.iter().chain(&l.bias).any(|v| !v.is_finite()) {
                return Err(Error::NumericFailure(format!("layer {i} has a non-finite parameter")));
            }
        }
        Ok(())
    }

    fn check_input(&self, input: &[f32]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        Ok(())
    }

    /// Runs every layer, returning the input followed by each layer's output.
    /// The last entry holds the final layer's pre-softmax logits.
    fn trace(&self, input: &[f32]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(input.iter().map(|&x| x as f64).collect::<Vec<_>>());
        let last = self.layers.len() - 1;
        for (idx, layer) in self.layers.iter().enumerate() {
            let prev = &acts[idx];
            let mut out = Vec::with_capacity(layer.out_dim);
            for r in 0..layer.out_dim {
                let row = r * layer.in_dim..(r + 1) * layer.in_dim;
                let mut z = layer.bias[r] as f64;
                for ((&w, &m), &a) in layer.weights[row.clone()].iter().zip(&layer.mask[row]).zip(prev) {
                    if m {
                        z += w as f64 * a;
                    }
                }
                out.push(if idx == last { z } else { layer.activation.apply(z) });
            }
            acts.push(out);
        }
        acts
    }

    /// Pre-softmax outputs of the final layer.
    pub fn logits(&self, input: &[f32]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        Ok(self.trace(input).pop().unwrap_or_default())
    }

    /// Class probabilities for one sample.
    pub fn forward(&self, input: &[f32]) -> Result<Vec<f32>> {
        let logits = self.logits(input)?;
        Ok(softmax(&logits).into_iter().map(|p| p as f32).collect())
    }

    /// Index of the largest logit; ties go to the lowest class index.
    pub fn predict(&self, input: &[f32]) -> Result<usize> {
        let logits = self.logits(input)?;
        let mut best = 0;
        for (i, &z) in logits.iter().enumerate() {
            if z > logits[best] {
                best = i;
            }
        }
        Ok(best)
    }

    /// Mean cross-entropy over the given rows of `data`.
    pub fn mean_loss(&self, data: &Dataset, rows: &[usize]) -> Result<f64> {
        self.check_input(data.sample(0))?;
        if rows.is_empty() {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for &r in rows {
            let label = data.labels[r];
            let logits = self.trace(data.sample(r)).pop().unwrap_or_default();
            if label >= logits.len() {
                return Err(Error::InvalidLabel {
                    label,
                    n_classes: logits.len(),
                });
            }
            total += cross_entropy(&logits, label);
        }
        Ok(total / rows.len() as f64)
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn cross_entropy(logits: &[f64], label: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    lse - logits[label]
}

pub fn count_active_synapses(net: &Network) -> usize {
    net.layers.iter().map(DenseLayer::active_synapses).sum()
}

/// Multiply-accumulate count of one inference: one per active synapse plus
/// one per bias.
pub fn inference_cost(net: &Network) -> usize {
    count_active_synapses(net) + net.layers.iter().map(|l| l.out_dim).sum::<usize>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Mean cross-entropy loss over a batch and its gradient, congruent with the
/// network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub loss: f64,
    pub layers: Vec<LayerGradient>,
}

impl Gradients {
    fn zeros(net: &Network) -> Self {
        Gradients {
            loss: 0.0,
            layers: net
                .layers
                .iter()
                .map(|l| LayerGradient {
                    weights: vec![0.0; l.weights.len()],
                    bias: vec![0.0; l.out_dim],
                })
                .collect(),
        }
    }

    fn reset(&mut self) {
        self.loss = 0.0;
        for l in &mut self.layers {
            l.weights.fill(0.0);
            l.bias.fill(0.0);
        }
    }
}

pub fn gradients(net: &Network, inputs: &[&[f32]], labels: &[usize]) -> Result<Gradients> {
    if inputs.is_empty() || inputs.len() != labels.len() {
        return Err(Error::ShapeMismatch {
            expected: inputs.len().max(1),
            got: labels.len(),
        });
    }
    let mut grads = Gradients::zeros(net);
    for (x, &y) in inputs.iter().zip(labels) {
        net.check_input(x)?;
        if y >= net.output_dim() {
            return Err(Error::InvalidLabel {
                label: y,
                n_classes: net.output_dim(),
            });
        }
        accumulate(net, x, y, &mut grads);
    }
    scale(&mut grads, inputs.len());
    Ok(grads)
}

fn scale(grads: &mut Gradients, n: usize) {
    let inv = 1.0 / n as f64;
    grads.loss *= inv;
    for l in &mut grads.layers {
        l.weights.iter_mut().for_each(|g| *g *= inv);
        l.bias.iter_mut().for_each(|g| *g *= inv);
    }
}

/// Adds one sample's loss and gradient into `grads`.
fn accumulate(net: &Network, x: &[f32], label: usize, grads: &mut Gradients) {
    let acts = net.trace(x);
    let logits = &acts[acts.len() - 1];
    grads.loss += cross_entropy(logits, label);

    let mut delta = softmax(logits);
    delta[label] -= 1.0;

    for idx in (0..net.layers.len()).rev() {
        let layer = &net.layers[idx];
        let input = &acts[idx];
        let g = &mut grads.layers[idx];
        for (r, &d) in delta.iter().enumerate() {
            g.bias[r] += d;
            let base = r * layer.in_dim;
            for c in 0..layer.in_dim {
                if layer.mask[base + c] {
                    g.weights[base + c] += d * input[c];
                }
            }
        }
        if idx == 0 {
            break;
        }
        let below = net.layers[idx - 1].activation;
        let mut next = vec![0.0; layer.in_dim];
        for (r, &d) in delta.iter().enumerate() {
            let base = r * layer.in_dim;
            for (c, acc) in next.iter_mut().enumerate() {
                if layer.mask[base + c] {
                    *acc += layer.weights[base + c] as f64 * d;
                }
            }
        }
        for (acc, &a) in next.iter_mut().zip(input) {
            *acc *= below.derivative_from_output(a);
        }
        delta = next;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            momentum: 0.9,
            batch_size: 32,
            max_epochs: 200,
            patience: 10,
            validation_fraction: 0.2,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParam(m.into()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must be in [0, 1)");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if self.patience == 0 {
            return bad("patience must be positive");
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad("validation_fraction must be in (0, 1)");
        }
        Ok(())
    }
}

/// Partition of dataset rows into training and validation sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

impl Split {
    /// Shuffles `0..n` with a stream derived from `seed` and takes the first
    /// `round(n * fraction)` rows (at least one, at most `n - 1`) for
    /// validation.
    pub fn derive(n: usize, fraction: f64, seed: u64) -> Result<Split> {
        if n < 2 {
            return Err(Error::DatasetTooSmall { train: n, batch_size: 1 });
        }
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidParam("validation_fraction must be in (0, 1)".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let mut rows: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        let n_val = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
        let train = rows.split_off(n_val);
        Ok(Split { train, validation: rows })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochLog>,
    /// Epoch whose weights were returned; `None` when no epoch ran.
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
}

/// Trains with a validation split derived from `cfg.seed`.
pub fn train(net: &Network, data: &Dataset, cfg: &TrainConfig) -> Result<(Network, TrainingLog)> {
    let split = Split::derive(data.len(), cfg.validation_fraction, cfg.seed)?;
    train_on_split(net, data, &split, cfg)
}

/// Mini-batch SGD with momentum on the unmasked weights and all biases.
///
/// Stops once validation loss has not improved for `cfg.patience` epochs and
/// returns the weights from the best validation epoch.
pub fn train_on_split(
    net: &Network,
    data: &Dataset,
    split: &Split,
    cfg: &TrainConfig,
) -> Result<(Network, TrainingLog)> {
    cfg.validate()?;
    if data.n_features != net.input_dim() {
        return Err(Error::ShapeMismatch {
            expected: net.input_dim(),
            got: data.n_features,
        });
    }
    if let Some(&label) = data.labels.iter().find(|&&l| l >= net.output_dim()) {
        return Err(Error::InvalidLabel {
            label,
            n_classes: net.output_dim(),
        });
    }
    let represented = data.class_counts().iter().filter(|&&c| c > 0).count();
    if represented < 2 {
        return Err(Error::TooFewClasses(represented));
    }
    if split.train.len() < cfg.batch_size {
        return Err(Error::DatasetTooSmall {
            train: split.train.len(),
            batch_size: cfg.batch_size,
        });
    }

    let mut current = net.clone();
    current.precision = Precision::Full;
    let mut log = TrainingLog::default();
    if cfg.max_epochs == 0 {
        return Ok((current, log));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order = split.train.clone();
    let mut velocity = Gradients::zeros(&current);
    let mut grads = Gradients::zeros(&current);
    let mut best = current.clone();
    let mut best_loss = f64::INFINITY;
    let mut stale = 0;

    for epoch in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.reset();
            for &row in batch {
                accumulate(&current, data.sample(row), data.labels[row], &mut grads);
            }
            scale(&mut grads, batch.len());
            if !grads.loss.is_finite() {
                return Err(Error::NumericFailure(format!("non-finite loss in epoch {epoch}")));
            }
            epoch_loss += grads.loss * batch.len() as f64;
            sgd_step(&mut current, &mut velocity, &grads, cfg)?;
        }
        let train_loss = epoch_loss / order.len() as f64;
        let validation_loss = current.mean_loss(data, &split.validation)?;
        if !validation_loss.is_finite() {
            return Err(Error::NumericFailure(format!("non-finite validation loss in epoch {epoch}")));
        }
        log.epochs.push(EpochLog {
            epoch,
            train_loss,
            validation_loss,
        });
        if validation_loss < best_loss {
            best_loss = validation_loss;
            best.clone_from(&current);
            log.best_epoch = Some(epoch);
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                log.stopped_early = true;
                break;
            }
        }
    }
    Ok((best, log))
}

fn sgd_step(net: &mut Network, velocity: &mut Gradients, grads: &Gradients, cfg: &TrainConfig) -> Result<()> {
    for ((layer, v), g) in net.layers.iter_mut().zip(&mut velocity.layers).zip(&grads.layers) {
        for i in 0..layer.weights.len() {
            if !layer.mask[i] {
                continue;
            }
            v.weights[i] = cfg.momentum * v.weights[i] + g.weights[i];
            let w = (layer.weights[i] as f64 - cfg.learning_rate * v.weights[i]) as f32;
            if !w.is_finite() {
                return Err(Error::NumericFailure("weight diverged".into()));
            }
            layer.weights[i] = w;
        }
        for i in 0..layer.bias.len() {
            v.bias[i] = cfg.momentum * v.bias[i] + g.bias[i];
            let b = (layer.bias[i] as f64 - cfg.learning_rate * v.bias[i]) as f32;
            if !b.is_finite() {
                return Err(Error::NumericFailure("bias diverged".into()));
            }
            layer.bias[i] = b;
        }
    }
    Ok(())
}
