//! The two-phase pruning trainer.
//!
//! Phase one interleaves the mask search with weight updates: per batch,
//! every BDE candidate is scored by the batch energy loss of the masked
//! forward pass, one mutate/crossover/select generation runs, and the best
//! mask gates the SGD step that follows. Parent energies are carried across
//! batches (a trial on the current batch competes against its parent's
//! energy from the previous one); `reevaluate_parents` re-scores the
//! parents on the current batch first. After every epoch the population
//! spread `delta_s` (best minus mean energy) is updated; once it reaches
//! zero, or the epoch counter passes the stagnation threshold, the best
//! mask is frozen and the remaining epochs fine-tune that sub-network.
//!
//! Also here: standalone fine-tuning, a magnitude-pruning baseline that
//! drops the weakest units by L1 norm until a target kept-parameter ratio
//! is met, and the evaluation row used for reporting.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::bde::{BdeError, BdeParams, ConvergenceTracker, Population};
use crate::data::{batch_iter, Batch, DataError, Dataset};
use crate::energy;
use crate::math;
use crate::nn::{NetError, Network, StateVector, UnitLayout};
use crate::rng;

/// Sub-seed tag of the BDE machinery (population init and step streams).
const TAG_BDE: u64 = 1;
/// Shuffle tags live in their own namespace: one sub-seed per epoch.
const TAG_SHUFFLE_BASE: u64 = 1 << 32;

fn shuffle_seed(master: u64, epoch: u32) -> u64 {
    rng::derive_seed(master, TAG_SHUFFLE_BASE + epoch as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    Net(NetError),
    Bde(BdeError),
    Data(DataError),
    /// Loss, gradients, or candidate energies stopped being finite.
    Diverged { epoch: u32 },
    ClassMismatch { net: usize, data: usize },
    InvalidConfig(&'static str),
    /// The network has no maskable hidden units to prune.
    NoPrunableUnits,
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::Net(e) => write!(f, "network error: {e}"),
            TrainError::Bde(e) => write!(f, "optimizer error: {e}"),
            TrainError::Data(e) => write!(f, "data error: {e}"),
            TrainError::Diverged { epoch } => {
                write!(f, "training diverged at epoch {epoch} (non-finite values)")
            }
            TrainError::ClassMismatch { net, data } => {
                write!(f, "network has {net} classes but dataset has {data}")
            }
            TrainError::InvalidConfig(reason) => write!(f, "invalid config: {reason}"),
            TrainError::NoPrunableUnits => write!(f, "network has no prunable hidden units"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TrainError {}

impl From<NetError> for TrainError {
    fn from(e: NetError) -> Self {
        TrainError::Net(e)
    }
}

impl From<BdeError> for TrainError {
    fn from(e: BdeError) -> Self {
        TrainError::Bde(e)
    }
}

impl From<DataError> for TrainError {
    fn from(e: DataError) -> Self {
        TrainError::Data(e)
    }
}

/// Hyper-parameters of one training run. A single `seed` determines
/// everything random: weight init is the caller's (network) seed, while
/// population init, search streams, and per-epoch shuffles are derived
/// sub-seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: u32,
    pub batch_size: usize,
    pub lr: f64,
    /// Learning rate decays by `lr_gamma` every `lr_step_epochs` epochs.
    pub lr_step_epochs: u32,
    pub lr_gamma: f64,
    pub weight_decay: f64,
    /// Stagnation threshold: searching stops after this many epochs even
    /// without convergence.
    pub stagnation_threshold: u32,
    pub population_size: usize,
    /// Mutation/crossover knobs. The embedded seed is ignored; the trainer
    /// derives the search seed from `seed`.
    pub bde: BdeParams,
    pub seed: u64,
    pub topk: Vec<usize>,
    /// Re-score parents on the current batch before selection instead of
    /// comparing against their energy from the previous batch.
    pub reevaluate_parents: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 128,
            lr: 0.1,
            lr_step_epochs: 50,
            lr_gamma: 0.1,
            weight_decay: 1e-6,
            stagnation_threshold: 100,
            population_size: 8,
            bde: BdeParams::default(),
            seed: 0,
            topk: alloc::vec![1, 3, 5],
            reevaluate_parents: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.batch_size == 0 {
            return Err(TrainError::InvalidConfig("batch size must be positive"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(TrainError::InvalidConfig("learning rate must be positive"));
        }
        if self.lr_step_epochs == 0 {
            return Err(TrainError::InvalidConfig("lr step must be positive"));
        }
        if !(self.lr_gamma > 0.0 && self.lr_gamma <= 1.0) {
            return Err(TrainError::InvalidConfig("lr gamma must lie in (0, 1]"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(TrainError::InvalidConfig("weight decay must be >= 0"));
        }
        if self.stagnation_threshold > self.epochs {
            return Err(TrainError::InvalidConfig(
                "stagnation threshold must not exceed the epoch count",
            ));
        }
        if self.population_size < 4 {
            return Err(TrainError::InvalidConfig("population size must be >= 4"));
        }
        if self.topk.is_empty() || self.topk.iter().any(|&k| k == 0) {
            return Err(TrainError::InvalidConfig("topk list must hold positive ks"));
        }
        self.bde.validate().map_err(TrainError::InvalidConfig)?;
        Ok(())
    }

    /// Step-decayed learning rate for a 1-based epoch counter.
    pub fn lr_at(&self, epoch: u32) -> f64 {
        let decays = (epoch.saturating_sub(1)) / self.lr_step_epochs;
        self.lr * math::powi(self.lr_gamma, decays)
    }

    fn search_params(&self) -> BdeParams {
        BdeParams {
            seed: rng::derive_seed(self.seed, TAG_BDE),
            ..self.bde
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Search,
    Finetune,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Search => write!(f, "search"),
            Phase::Finetune => write!(f, "finetune"),
        }
    }
}

/// One epoch of run telemetry.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochRow {
    pub epoch: u32,
    pub phase: Phase,
    /// Mean cross-entropy over the epoch's batches (computed pre-update).
    pub train_loss: f64,
    /// Best/mean population energy after the epoch; NaN in runs that never
    /// have a population (standalone fine-tuning).
    pub best_energy: f64,
    pub mean_energy: f64,
    pub delta_s: f64,
    /// Kept-parameter fraction of the epoch's mask.
    pub kept_ratio: f64,
    /// Fingerprint of the epoch's mask; constant once the mask is frozen.
    pub mask_fingerprint: u64,
    /// Energy-loss evaluations spent this epoch.
    pub energy_evals: u64,
    pub train_topk: Vec<f64>,
    pub test_topk: Vec<f64>,
}

/// Per-epoch records of one run, aligned with `topk`.
#[derive(Clone, Debug, PartialEq)]
pub struct RunMetrics {
    pub topk: Vec<usize>,
    pub rows: Vec<EpochRow>,
}

impl RunMetrics {
    pub fn final_row(&self) -> Option<&EpochRow> {
        self.rows.last()
    }
}

/// Evaluation summary of one (network, mask) pair on a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalRow {
    pub loss: f64,
    /// `(k, accuracy)` pairs; ks greater than the class count count every
    /// class and therefore read 1.0.
    pub topk: Vec<(usize, f64)>,
    pub kept: usize,
    pub total: usize,
    pub kept_ratio: f64,
}

fn check_dataset(net: &Network, data: &Dataset) -> Result<(), TrainError> {
    if data.class_count() != net.class_count() {
        return Err(TrainError::ClassMismatch {
            net: net.class_count(),
            data: data.class_count(),
        });
    }
    if data.dim() != net.input_dim() {
        return Err(TrainError::Net(NetError::DimensionMismatch {
            expected: net.input_dim(),
            got: data.dim(),
        }));
    }
    Ok(())
}

/// Batch energy of one candidate mask; errors surface as NaN so the
/// optimizer can reject the step.
fn mask_energy(net: &Network, batch: &Batch, state: &StateVector) -> f64 {
    match net.forward_masked(&batch.features, state) {
        Ok(logits) => {
            energy::batch_energy_from_logits(&logits, &batch.labels).unwrap_or(f64::NAN)
        }
        Err(_) => f64::NAN,
    }
}

/// Flips one unit back on in any layer a candidate mask fully zeroes; an
/// all-dead layer would make the logits constant and gradients vanish.
fn repair_layer_annihilation(layout: &UnitLayout, state: &mut StateVector, rng: &mut ChaCha8Rng) {
    for l in 0..layout.layer_count() {
        let range = layout.layer_bits(l);
        if range.clone().all(|d| !state.get(d)) {
            let pick = range.start + rng.gen_range(0..layout.widths()[l]);
            state.set(pick, true);
        }
    }
}

fn topk_row(
    net: &Network,
    mask: &StateVector,
    data: &Dataset,
    topk: &[usize],
) -> Result<Vec<f64>, TrainError> {
    topk.iter()
        .map(|&k| {
            let k = k.min(net.class_count());
            net.topk_accuracy(mask, data, k).map_err(TrainError::Net)
        })
        .collect()
}

/// Runs the full two-phase loop on `net`, returning the final mask and the
/// per-epoch metrics. The network is trained in place.
pub fn train_epruning(
    config: &TrainConfig,
    net: &mut Network,
    train: &Dataset,
    test: &Dataset,
) -> Result<(StateVector, RunMetrics), TrainError> {
    config.validate()?;
    if config.epochs == 0 {
        return Err(TrainError::InvalidConfig("training needs at least one epoch"));
    }
    check_dataset(net, train)?;
    check_dataset(net, test)?;
    let dim = net.prunable_units();
    if dim == 0 {
        return Err(TrainError::NoPrunableUnits);
    }
    let params = config.search_params();
    let pop = Population::init(config.population_size, dim, params.seed)?;
    train_with_population(config, net, train, test, pop)
}

/// [`train_epruning`] with a caller-supplied initial population; the
/// public entry builds a Bernoulli(0.5) one.
pub(crate) fn train_with_population(
    config: &TrainConfig,
    net: &mut Network,
    train: &Dataset,
    test: &Dataset,
    mut pop: Population,
) -> Result<(StateVector, RunMetrics), TrainError> {
    let params = config.search_params();
    let layout = net.unit_layout();
    let repair = |_i: usize, state: &mut StateVector, rng: &mut ChaCha8Rng| {
        repair_layer_annihilation(&layout, state, rng)
    };
    pop.repair_states(&params, repair);

    let size = pop.size() as u64;
    let mut tracker = ConvergenceTracker::new();
    let mut converged = false;
    let mut evaluated = false;
    let mut metrics = RunMetrics {
        topk: config.topk.clone(),
        rows: Vec::with_capacity(config.epochs as usize),
    };

    for epoch in 1..=config.epochs {
        let lr = config.lr_at(epoch);
        let searching = !converged && epoch <= config.stagnation_threshold;
        let mut energy_evals: u64 = 0;
        let mut loss_sum = 0.0;
        let mut samples = 0usize;

        for batch in batch_iter(train, config.batch_size, shuffle_seed(config.seed, epoch)) {
            // The initial population energies come from the very first
            // batch only; later batches compare trials against carried
            // parent energies.
            let mut fresh_parents = false;
            if !evaluated {
                pop.evaluate(|s| mask_energy(net, &batch, s))
                    .map_err(|e| wrap_bde(e, epoch))?;
                energy_evals += size;
                evaluated = true;
                fresh_parents = true;
            }
            if searching {
                if config.reevaluate_parents && !fresh_parents {
                    pop.evaluate(|s| mask_energy(net, &batch, s))
                        .map_err(|e| wrap_bde(e, epoch))?;
                    energy_evals += size;
                }
                pop.step_with_repair(&params, |s| mask_energy(net, &batch, s), repair)
                    .map_err(|e| wrap_bde(e, epoch))?;
                energy_evals += size;
            }
            let mask = pop.best_state().clone();
            let loss = net
                .sgd_step(&batch.features, &batch.labels, &mask, lr, config.weight_decay)
                .map_err(|e| wrap_net(e, epoch))?;
            loss_sum += loss * batch.labels.len() as f64;
            samples += batch.labels.len();
        }

        // Eq-7 bookkeeping happens once per epoch, outside the batch loop.
        let status = tracker.update(&pop)?;
        if status.converged {
            converged = true;
        }

        let mask = pop.best_state().clone();
        let (kept, total) = net.count_params(&mask)?;
        metrics.rows.push(EpochRow {
            epoch,
            phase: if searching { Phase::Search } else { Phase::Finetune },
            train_loss: loss_sum / samples as f64,
            best_energy: pop.best_energy().unwrap_or(f64::NAN),
            mean_energy: pop.mean_energy().unwrap_or(f64::NAN),
            delta_s: status.delta_s,
            kept_ratio: kept as f64 / total as f64,
            mask_fingerprint: mask.fingerprint(),
            energy_evals,
            train_topk: topk_row(net, &mask, train, &config.topk)?,
            test_topk: topk_row(net, &mask, test, &config.topk)?,
        });
    }

    Ok((pop.best_state().clone(), metrics))
}

fn wrap_bde(e: BdeError, epoch: u32) -> TrainError {
    match e {
        BdeError::NonFiniteEnergy => TrainError::Diverged { epoch },
        other => TrainError::Bde(other),
    }
}

fn wrap_net(e: NetError, epoch: u32) -> TrainError {
    match e {
        NetError::NonFinite { .. } => TrainError::Diverged { epoch },
        other => TrainError::Net(other),
    }
}

/// Masked SGD with the mask held fixed; `config.epochs` epochs (zero leaves
/// the network untouched). Identical to dropout-free training of the
/// sub-network.
pub fn fine_tune(
    net: &mut Network,
    mask: &StateVector,
    config: &TrainConfig,
    train: &Dataset,
    test: Option<&Dataset>,
) -> Result<RunMetrics, TrainError> {
    config.validate()?;
    check_dataset(net, train)?;
    if let Some(test) = test {
        check_dataset(net, test)?;
    }
    let mut metrics = RunMetrics {
        topk: config.topk.clone(),
        rows: Vec::with_capacity(config.epochs as usize),
    };
    for epoch in 1..=config.epochs {
        let lr = config.lr_at(epoch);
        let mut loss_sum = 0.0;
        let mut samples = 0usize;
        for batch in batch_iter(train, config.batch_size, shuffle_seed(config.seed, epoch)) {
            let loss = net
                .sgd_step(&batch.features, &batch.labels, mask, lr, config.weight_decay)
                .map_err(|e| wrap_net(e, epoch))?;
            loss_sum += loss * batch.labels.len() as f64;
            samples += batch.labels.len();
        }
        let (kept, total) = net.count_params(mask)?;
        metrics.rows.push(EpochRow {
            epoch,
            phase: Phase::Finetune,
            train_loss: loss_sum / samples as f64,
            best_energy: f64::NAN,
            mean_energy: f64::NAN,
            delta_s: f64::NAN,
            kept_ratio: kept as f64 / total as f64,
            mask_fingerprint: mask.fingerprint(),
            energy_evals: 0,
            train_topk: topk_row(net, mask, train, &config.topk)?,
            test_topk: test
                .map(|t| topk_row(net, mask, t, &config.topk))
                .transpose()?
                .unwrap_or_default(),
        });
    }
    Ok(metrics)
}

/// Dense training: fine-tuning under the all-ones mask.
pub fn train_dense(
    net: &mut Network,
    config: &TrainConfig,
    train: &Dataset,
    test: Option<&Dataset>,
) -> Result<RunMetrics, TrainError> {
    let ones = StateVector::ones(net.prunable_units());
    fine_tune(net, &ones, config, train, test)
}

/// Outcome of the magnitude baseline; `reached_target` is false when even
/// the all-zeros mask cannot reach the requested ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct MagnitudePruneResult {
    pub mask: StateVector,
    pub reached_target: bool,
}

/// Threshold-style baseline at unit granularity: scores every prunable
/// unit by the L1 norm of its incoming weights plus bias, then drops the
/// lowest-scoring units (ties: lower layer, then lower index, first) until
/// the kept-parameter ratio first reaches `target_ratio`.
pub fn magnitude_prune_baseline(
    net: &Network,
    target_ratio: f64,
) -> Result<MagnitudePruneResult, TrainError> {
    if !(target_ratio > 0.0 && target_ratio <= 1.0) {
        return Err(TrainError::InvalidConfig(
            "target ratio must lie in (0, 1]",
        ));
    }
    let dim = net.prunable_units();
    if dim == 0 {
        return Err(TrainError::NoPrunableUnits);
    }
    let mut mask = StateVector::ones(dim);
    let (kept, total) = net.count_params(&mask)?;
    if kept as f64 / total as f64 <= target_ratio {
        return Ok(MagnitudePruneResult {
            mask,
            reached_target: true,
        });
    }

    // (score, maskable-layer ordinal, unit index, bit index)
    let mut scored: Vec<(f64, usize, usize, usize)> = Vec::with_capacity(dim);
    let mut bit = 0;
    let mut ordinal = 0;
    for layer in net.layers() {
        if !layer.maskable() {
            continue;
        }
        for u in 0..layer.out_dim() {
            let norm: f64 = layer.unit_row(u).iter().map(|&w| math::abs(w)).sum::<f64>()
                + math::abs(layer.biases()[u]);
            scored.push((norm, ordinal, u, bit + u));
        }
        bit += layer.out_dim();
        ordinal += 1;
    }
    scored.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("unit norms are finite")
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    for &(_, _, _, bit) in &scored {
        mask.set(bit, false);
        let (kept, total) = net.count_params(&mask)?;
        if kept as f64 / total as f64 <= target_ratio {
            return Ok(MagnitudePruneResult {
                mask,
                reached_target: true,
            });
        }
    }
    Ok(MagnitudePruneResult {
        mask,
        reached_target: false,
    })
}

/// Loss, top-k accuracies, and parameter accounting of one (network, mask)
/// pair. Requested ks are clamped to the class count.
pub fn evaluate(
    net: &Network,
    mask: &StateVector,
    data: &Dataset,
    topk: &[usize],
) -> Result<EvalRow, TrainError> {
    check_dataset(net, data)?;
    let loss = net.cross_entropy_loss(data.features(), data.labels(), mask)?;
    let accuracies = topk_row(net, mask, data, topk)?;
    let (kept, total) = net.count_params(mask)?;
    Ok(EvalRow {
        loss,
        topk: topk.iter().copied().zip(accuracies).collect(),
        kept,
        total,
        kept_ratio: kept as f64 / total as f64,
    })
}
