//! Dense feed-forward networks with unit-level pruning masks.
//!
//! A [`Network`] is a stack of [`DenseLayer`]s ending in an identity "logit"
//! layer. Pruning operates at the granularity of a *unit*: a hidden neuron
//! together with its incoming weights, bias, and outgoing weights. A
//! [`StateVector`] holds one bit per hidden unit across all maskable layers
//! (layer-major, unit-minor, see [`UnitLayout`]); bit 0 drops the unit, bit 1
//! keeps it.
//!
//! During training the mask is applied by gating activations — a dropped
//! unit's output is forced to exactly `0.0` before it feeds the next layer —
//! so weights are never modified by masking. Physical removal only happens
//! in parameter accounting ([`Network::count_params`]).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::data::Dataset;
use crate::math;
use crate::matrix::Matrix;
use crate::rng;

/// Errors from network construction, masking, and training steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetError {
    /// Input width does not match what the network expects.
    DimensionMismatch { expected: usize, got: usize },
    /// Mask length does not equal the network's prunable-unit count.
    MaskLength { expected: usize, got: usize },
    /// A batch or dataset with no samples.
    EmptyBatch,
    /// `k` exceeds the class count in a top-k query.
    InvalidTopK { k: usize, classes: usize },
    /// A target label outside `[0, C)`.
    TargetOutOfRange { target: usize, classes: usize },
    /// A loss, gradient, or weight stopped being a finite number.
    NonFinite { context: &'static str },
    /// The layer stack violates a structural invariant.
    InvalidArchitecture { reason: &'static str },
}

impl fmt::Display for NetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetError::DimensionMismatch { expected, got } => {
                write!(f, "input width {got} does not match expected {expected}")
            }
            NetError::MaskLength { expected, got } => {
                write!(f, "mask length {got} does not match prunable units {expected}")
            }
            NetError::EmptyBatch => write!(f, "empty batch or dataset"),
            NetError::InvalidTopK { k, classes } => {
                write!(f, "top-{k} requested but only {classes} classes exist")
            }
            NetError::TargetOutOfRange { target, classes } => {
                write!(f, "target class {target} out of range for {classes} classes")
            }
            NetError::NonFinite { context } => write!(f, "non-finite value in {context}"),
            NetError::InvalidArchitecture { reason } => write!(f, "invalid architecture: {reason}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for NetError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    /// Pass-through; only legal on the final (logit) layer.
    Identity,
}

/// One binary pruning mask over all prunable hidden units; a candidate
/// sub-network.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateVector {
    bits: Vec<bool>,
}

impl StateVector {
    pub fn ones(len: usize) -> Self {
        Self {
            bits: vec![true; len],
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Each bit independently 1 with probability 0.5.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self {
            bits: (0..len).map(|_| rng.gen_bool(0.5)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, d: usize) -> bool {
        self.bits[d]
    }

    pub fn set(&mut self, d: usize, value: bool) {
        self.bits[d] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn ones_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// FNV-1a over the bit string; stable fingerprint for metrics rows.
    pub fn fingerprint(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for &b in &self.bits {
            hash ^= b as u64 + 1;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        hash
    }
}

/// Maps state-vector bits onto hidden units: maskable layer `l` owns bits
/// `offsets[l] .. offsets[l] + widths[l]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitLayout {
    offsets: Vec<usize>,
    widths: Vec<usize>,
}

impl UnitLayout {
    pub fn total_units(&self) -> usize {
        self.widths.iter().sum()
    }

    pub fn layer_count(&self) -> usize {
        self.widths.len()
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Bit range owned by maskable layer `l`.
    pub fn layer_bits(&self, l: usize) -> core::ops::Range<usize> {
        self.offsets[l]..self.offsets[l] + self.widths[l]
    }
}

/// A dense layer: `y = activation(W x + b)`, weights row-major
/// `(out_dim × in_dim)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
    activation: Activation,
    maskable: bool,
}

impl DenseLayer {
    pub fn from_parts(
        in_dim: usize,
        out_dim: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        activation: Activation,
        maskable: bool,
    ) -> Result<Self, NetError> {
        if in_dim == 0 || out_dim == 0 {
            return Err(NetError::InvalidArchitecture {
                reason: "layer dimensions must be positive",
            });
        }
        if weights.len() != in_dim * out_dim || biases.len() != out_dim {
            return Err(NetError::InvalidArchitecture {
                reason: "weight or bias buffer does not match layer shape",
            });
        }
        if !weights.iter().chain(biases.iter()).all(|v| v.is_finite()) {
            return Err(NetError::NonFinite {
                context: "layer parameters",
            });
        }
        Ok(Self {
            in_dim,
            out_dim,
            weights,
            biases,
            activation,
            maskable,
        })
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    fn glorot<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        maskable: bool,
        rng: &mut R,
    ) -> Self {
        let limit = math::sqrt(6.0 / (in_dim + out_dim) as f64);
        let weights = (0..in_dim * out_dim)
            .map(|_| rng.gen_range(-limit..limit))
            .collect();
        Self {
            in_dim,
            out_dim,
            weights,
            biases: vec![0.0; out_dim],
            activation,
            maskable,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    /// Mutable parameter access; used by weight surgery and tests. Training
    /// itself goes through [`Network::sgd_step`].
    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn maskable(&self) -> bool {
        self.maskable
    }

    /// Incoming weight row of unit `u`.
    pub fn unit_row(&self, u: usize) -> &[f64] {
        &self.weights[u * self.in_dim..(u + 1) * self.in_dim]
    }

    fn forward_row(&self, input: &[f64], out: &mut [f64]) {
        for u in 0..self.out_dim {
            let row = &self.weights[u * self.in_dim..(u + 1) * self.in_dim];
            let mut z = self.biases[u];
            for (w, x) in row.iter().zip(input) {
                z += w * x;
            }
            out[u] = match self.activation {
                Activation::Relu => {
                    if z > 0.0 {
                        z
                    } else {
                        0.0
                    }
                }
                Activation::Identity => z,
            };
        }
    }
}

/// Per-layer gradient buffers matching a network's parameter shapes.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros_like(net: &Network) -> Self {
        Self {
            weights: net
                .layers
                .iter()
                .map(|l| vec![0.0; l.in_dim * l.out_dim])
                .collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.out_dim]).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(self.biases.iter())
            .all(|buf| buf.iter().all(|v| v.is_finite()))
    }
}

/// A dense classifier: ReLU hidden layers (all maskable) and an identity
/// logit layer (never maskable).
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    input_dim: usize,
    class_count: usize,
    layers: Vec<DenseLayer>,
}

impl Network {
    /// Seeded Glorot-initialized network `input_dim -> hidden... -> classes`.
    pub fn new(
        input_dim: usize,
        hidden: &[usize],
        class_count: usize,
        seed: u64,
    ) -> Result<Self, NetError> {
        if input_dim == 0 {
            return Err(NetError::InvalidArchitecture {
                reason: "input dimension must be positive",
            });
        }
        if class_count < 2 {
            return Err(NetError::InvalidArchitecture {
                reason: "class count must be at least 2",
            });
        }
        if hidden.iter().any(|&w| w == 0) {
            return Err(NetError::InvalidArchitecture {
                reason: "hidden widths must be positive",
            });
        }
        let mut rng = rng::seeded(seed);
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut in_dim = input_dim;
        for &width in hidden {
            layers.push(DenseLayer::glorot(
                in_dim,
                width,
                Activation::Relu,
                true,
                &mut rng,
            ));
            in_dim = width;
        }
        layers.push(DenseLayer::glorot(
            in_dim,
            class_count,
            Activation::Identity,
            false,
            &mut rng,
        ));
        Ok(Self {
            input_dim,
            class_count,
            layers,
        })
    }

    /// Assembles a network from explicit layers, validating the structural
    /// invariants: compatible widths, ReLU + maskable on every hidden layer,
    /// identity + non-maskable on the final layer.
    pub fn from_layers(input_dim: usize, layers: Vec<DenseLayer>) -> Result<Self, NetError> {
        if layers.is_empty() {
            return Err(NetError::InvalidArchitecture {
                reason: "network needs at least the logit layer",
            });
        }
        let mut expect = input_dim;
        for layer in &layers {
            if layer.in_dim != expect {
                return Err(NetError::InvalidArchitecture {
                    reason: "consecutive layer widths are incompatible",
                });
            }
            expect = layer.out_dim;
        }
        let last = layers.len() - 1;
        for (i, layer) in layers.iter().enumerate() {
            let is_last = i == last;
            if is_last && (layer.maskable || layer.activation != Activation::Identity) {
                return Err(NetError::InvalidArchitecture {
                    reason: "final layer must be identity and non-maskable",
                });
            }
            if !is_last && (!layer.maskable || layer.activation != Activation::Relu) {
                return Err(NetError::InvalidArchitecture {
                    reason: "hidden layers must be relu and maskable",
                });
            }
        }
        let class_count = layers[last].out_dim;
        if class_count < 2 {
            return Err(NetError::InvalidArchitecture {
                reason: "class count must be at least 2",
            });
        }
        Ok(Self {
            input_dim,
            class_count,
            layers,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layer_mut(&mut self, l: usize) -> &mut DenseLayer {
        &mut self.layers[l]
    }

    /// Bit layout over prunable units: one entry per hidden layer, in order.
    pub fn unit_layout(&self) -> UnitLayout {
        let mut offsets = Vec::new();
        let mut widths = Vec::new();
        let mut offset = 0;
        for layer in &self.layers {
            if layer.maskable {
                offsets.push(offset);
                widths.push(layer.out_dim);
                offset += layer.out_dim;
            }
        }
        UnitLayout { offsets, widths }
    }

    /// Total number of prunable hidden units (the mask length `D`).
    pub fn prunable_units(&self) -> usize {
        self.layers
            .iter()
            .filter(|l| l.maskable)
            .map(|l| l.out_dim)
            .sum()
    }

    fn check_inputs(&self, inputs: &Matrix) -> Result<(), NetError> {
        if inputs.cols() != self.input_dim {
            return Err(NetError::DimensionMismatch {
                expected: self.input_dim,
                got: inputs.cols(),
            });
        }
        Ok(())
    }

    fn check_mask(&self, mask: &StateVector) -> Result<(), NetError> {
        let expected = self.prunable_units();
        if mask.len() != expected {
            return Err(NetError::MaskLength {
                expected,
                got: mask.len(),
            });
        }
        Ok(())
    }

    /// Forward pass with no masking code path at all.
    pub fn forward(&self, inputs: &Matrix) -> Result<Matrix, NetError> {
        self.check_inputs(inputs)?;
        let batch = inputs.rows();
        let mut current = inputs.clone();
        for layer in &self.layers {
            let mut next = Matrix::zeros(batch, layer.out_dim);
            for b in 0..batch {
                layer.forward_row(current.row(b), next.row_mut(b));
            }
            current = next;
        }
        Ok(current)
    }

    /// Masked forward pass: every hidden unit whose bit is 0 has its output
    /// forced to exactly `0.0` before feeding the next layer. The logit
    /// layer is never masked and no weights are modified.
    pub fn forward_masked(&self, inputs: &Matrix, mask: &StateVector) -> Result<Matrix, NetError> {
        self.check_inputs(inputs)?;
        self.check_mask(mask)?;
        let acts = self.forward_masked_cached(inputs, mask);
        Ok(acts.into_iter().last().expect("at least one layer"))
    }

    /// Forward pass keeping every layer's (gated) activations; `out[l]` is
    /// the output of layer `l`, `out.last()` the logits.
    fn forward_masked_cached(&self, inputs: &Matrix, mask: &StateVector) -> Vec<Matrix> {
        let batch = inputs.rows();
        let mut acts: Vec<Matrix> = Vec::with_capacity(self.layers.len());
        let mut bit_offset = 0;
        for (l, layer) in self.layers.iter().enumerate() {
            let prev = if l == 0 { inputs } else { &acts[l - 1] };
            let mut next = Matrix::zeros(batch, layer.out_dim);
            for b in 0..batch {
                let row_out = next.row_mut(b);
                layer.forward_row(prev.row(b), row_out);
                if layer.maskable {
                    for u in 0..layer.out_dim {
                        if !mask.get(bit_offset + u) {
                            row_out[u] = 0.0;
                        }
                    }
                }
            }
            if layer.maskable {
                bit_offset += layer.out_dim;
            }
            acts.push(next);
        }
        acts
    }

    /// Mean softmax cross-entropy of the masked network on a batch.
    pub fn cross_entropy_loss(
        &self,
        inputs: &Matrix,
        targets: &[usize],
        mask: &StateVector,
    ) -> Result<f64, NetError> {
        let logits = self.forward_masked(inputs, mask)?;
        self.check_targets(targets, inputs.rows())?;
        Ok(mean_cross_entropy(&logits, targets))
    }

    fn check_targets(&self, targets: &[usize], batch: usize) -> Result<(), NetError> {
        if targets.is_empty() || batch == 0 {
            return Err(NetError::EmptyBatch);
        }
        if targets.len() != batch {
            return Err(NetError::DimensionMismatch {
                expected: batch,
                got: targets.len(),
            });
        }
        if let Some(&t) = targets.iter().find(|&&t| t >= self.class_count) {
            return Err(NetError::TargetOutOfRange {
                target: t,
                classes: self.class_count,
            });
        }
        Ok(())
    }

    /// Mean cross-entropy and its gradients w.r.t. every parameter, with
    /// gradients flowing only through unmasked units.
    ///
    /// Masked activations are constant zero, so the incoming weights and
    /// bias of a dropped unit receive exactly zero gradient; so do the
    /// outgoing weight entries reading from it.
    pub fn loss_and_gradients(
        &self,
        inputs: &Matrix,
        targets: &[usize],
        mask: &StateVector,
    ) -> Result<(f64, Gradients), NetError> {
        self.check_inputs(inputs)?;
        self.check_mask(mask)?;
        self.check_targets(targets, inputs.rows())?;

        let batch = inputs.rows();
        let acts = self.forward_masked_cached(inputs, mask);
        let logits = acts.last().expect("at least one layer");
        let loss = mean_cross_entropy(logits, targets);

        // delta = (softmax(logits) - onehot(target)) / batch
        let mut delta = Matrix::zeros(batch, self.class_count);
        for b in 0..batch {
            let p = softmax(logits.row(b));
            let row = delta.row_mut(b);
            row.copy_from_slice(&p);
            row[targets[b]] -= 1.0;
            for v in row.iter_mut() {
                *v /= batch as f64;
            }
        }

        let mut grads = Gradients::zeros_like(self);
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let prev_acts = if l == 0 { inputs } else { &acts[l - 1] };
            let gw = &mut grads.weights[l];
            let gb = &mut grads.biases[l];
            for b in 0..batch {
                let d_row = delta.row(b);
                let a_row = prev_acts.row(b);
                for u in 0..layer.out_dim {
                    let d = d_row[u];
                    if d == 0.0 {
                        continue;
                    }
                    gb[u] += d;
                    let w_row = &mut gw[u * layer.in_dim..(u + 1) * layer.in_dim];
                    for (g, a) in w_row.iter_mut().zip(a_row) {
                        *g += d * a;
                    }
                }
            }
            if l > 0 {
                // Backpropagate into the previous (ReLU, gated) layer. A
                // cached activation of exactly 0 means the unit was either
                // masked or inactive; both give zero derivative.
                let mut prev_delta = Matrix::zeros(batch, layer.in_dim);
                for b in 0..batch {
                    let d_row = delta.row(b);
                    let a_row = prev_acts.row(b);
                    let out = prev_delta.row_mut(b);
                    for u in 0..layer.out_dim {
                        let d = d_row[u];
                        if d == 0.0 {
                            continue;
                        }
                        let w_row = layer.unit_row(u);
                        for i in 0..layer.in_dim {
                            if a_row[i] > 0.0 {
                                out[i] += d * w_row[i];
                            }
                        }
                    }
                }
                delta = prev_delta;
            }
        }
        Ok((loss, grads))
    }

    /// One SGD step with L2 weight decay on the masked network.
    ///
    /// Returns the mean cross-entropy computed before the update. A
    /// non-finite loss, gradient, or updated parameter aborts with
    /// [`NetError::NonFinite`] to signal divergence.
    pub fn sgd_step(
        &mut self,
        inputs: &Matrix,
        targets: &[usize],
        mask: &StateVector,
        lr: f64,
        weight_decay: f64,
    ) -> Result<f64, NetError> {
        let (loss, grads) = self.loss_and_gradients(inputs, targets, mask)?;
        if !loss.is_finite() {
            return Err(NetError::NonFinite { context: "loss" });
        }
        if !grads.is_finite() {
            return Err(NetError::NonFinite {
                context: "gradients",
            });
        }
        for (l, layer) in self.layers.iter_mut().enumerate() {
            for (w, g) in layer.weights.iter_mut().zip(&grads.weights[l]) {
                *w -= lr * (g + weight_decay * *w);
                if !w.is_finite() {
                    return Err(NetError::NonFinite { context: "weights" });
                }
            }
            for (b, g) in layer.biases.iter_mut().zip(&grads.biases[l]) {
                *b -= lr * (g + weight_decay * *b);
                if !b.is_finite() {
                    return Err(NetError::NonFinite { context: "biases" });
                }
            }
        }
        Ok(loss)
    }

    /// `(kept, total)` trainable parameters under a mask.
    ///
    /// A dropped unit removes its incoming weight row, its bias, and its
    /// outgoing weight columns; a weight between two dropped units is
    /// removed once. Counted directly as kept-in × kept-out per layer.
    pub fn count_params(&self, mask: &StateVector) -> Result<(usize, usize), NetError> {
        self.check_mask(mask)?;
        let mut total = 0;
        let mut kept = 0;
        let mut bit_offset = 0;
        let mut in_kept = self.input_dim; // input features are never pruned
        for layer in &self.layers {
            total += layer.in_dim * layer.out_dim + layer.out_dim;
            let out_kept = if layer.maskable {
                let ones = (0..layer.out_dim)
                    .filter(|&u| mask.get(bit_offset + u))
                    .count();
                bit_offset += layer.out_dim;
                ones
            } else {
                layer.out_dim
            };
            kept += in_kept * out_kept + out_kept;
            in_kept = out_kept;
        }
        Ok((kept, total))
    }

    /// Fraction of samples whose target class is among the `k` largest
    /// logits; logit ties rank the lower class index first.
    pub fn topk_accuracy(
        &self,
        mask: &StateVector,
        dataset: &Dataset,
        k: usize,
    ) -> Result<f64, NetError> {
        if k == 0 || k > self.class_count {
            return Err(NetError::InvalidTopK {
                k,
                classes: self.class_count,
            });
        }
        if dataset.len() == 0 {
            return Err(NetError::EmptyBatch);
        }
        let logits = self.forward_masked(dataset.features(), mask)?;
        let mut hits = 0usize;
        for (b, &target) in dataset.labels().iter().enumerate() {
            if in_top_k(logits.row(b), target, k) {
                hits += 1;
            }
        }
        Ok(hits as f64 / dataset.len() as f64)
    }
}

/// True when `target` ranks within the first `k` classes by descending
/// logit, lower index first on ties.
pub(crate) fn in_top_k(logits: &[f64], target: usize, k: usize) -> bool {
    let t = logits[target];
    let mut ahead = 0usize;
    for (c, &v) in logits.iter().enumerate() {
        if v > t || (v == t && c < target) {
            ahead += 1;
        }
    }
    ahead < k
}

/// Numerically stable softmax (max subtraction).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&v| math::exp(v - max)).collect();
    let sum: f64 = out.iter().sum();
    for v in out.iter_mut() {
        *v /= sum;
    }
    out
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = row.iter().map(|&v| math::exp(v - max)).sum();
    max + math::ln(sum)
}

fn mean_cross_entropy(logits: &Matrix, targets: &[usize]) -> f64 {
    let mut total = 0.0;
    for (b, &t) in targets.iter().enumerate() {
        let row = logits.row(b);
        total += log_sum_exp(row) - row[t];
    }
    total / targets.len() as f64
}
