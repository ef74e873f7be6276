//! Energy-based objective over classifier logits.
//!
//! A classifier's logits define a Hamiltonian `F = -logits`: the energy of
//! class `c` is the negated logit, so the class the network favors has the
//! lowest energy. Exponentiating with an inverse temperature and
//! normalizing gives the Gibbs distribution over classes; at `beta = 1`
//! this is exactly the softmax of the logits.
//!
//! The scalar *energy loss* of a sample is the target class energy minus
//! the lowest energy among the other classes. It is negative exactly when
//! the network ranks the target first, zero on a tie, positive otherwise,
//! and it is what the mask search minimizes.

use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnergyError {
    EmptyBatch,
    TooFewClasses,
    TargetOutOfRange { target: usize, classes: usize },
    NonFiniteLogit,
    InvalidBeta,
}

impl fmt::Display for EnergyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnergyError::EmptyBatch => write!(f, "empty batch"),
            EnergyError::TooFewClasses => write!(f, "need at least two classes"),
            EnergyError::TargetOutOfRange { target, classes } => {
                write!(f, "target {target} out of range for {classes} classes")
            }
            EnergyError::NonFiniteLogit => write!(f, "non-finite logit"),
            EnergyError::InvalidBeta => write!(f, "beta must be positive"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EnergyError {}

/// Logits for one input together with its target class.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergySample {
    logits: Vec<f64>,
    target: usize,
}

impl EnergySample {
    pub fn new(logits: Vec<f64>, target: usize) -> Result<Self, EnergyError> {
        if logits.len() < 2 {
            return Err(EnergyError::TooFewClasses);
        }
        if target >= logits.len() {
            return Err(EnergyError::TargetOutOfRange {
                target,
                classes: logits.len(),
            });
        }
        if !logits.iter().all(|v| v.is_finite()) {
            return Err(EnergyError::NonFiniteLogit);
        }
        Ok(Self { logits, target })
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn target(&self) -> usize {
        self.target
    }
}

/// Inverse temperature of the Gibbs distribution; 1 reproduces softmax.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GibbsParams {
    pub beta: f64,
}

impl Default for GibbsParams {
    fn default() -> Self {
        Self { beta: 1.0 }
    }
}

/// The Hamiltonian of a sample: elementwise negated logits.
pub fn hamiltonian(sample: &EnergySample) -> Vec<f64> {
    sample.logits.iter().map(|&e| -e).collect()
}

/// Gibbs probabilities `p_c ∝ exp(-beta * F_c)`, computed with max
/// subtraction so large logits cannot overflow. Components sum to 1.
pub fn gibbs_probabilities(
    sample: &EnergySample,
    params: &GibbsParams,
) -> Result<Vec<f64>, EnergyError> {
    if !(params.beta > 0.0) {
        return Err(EnergyError::InvalidBeta);
    }
    let energies = hamiltonian(sample);
    let scaled: Vec<f64> = energies.iter().map(|&h| -params.beta * h).collect();
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = scaled.iter().map(|&v| math::exp(v - max)).collect();
    let sum: f64 = out.iter().sum();
    for v in out.iter_mut() {
        *v /= sum;
    }
    Ok(out)
}

/// Scalar energy loss: target energy minus the minimum energy among the
/// non-target classes. Negative iff the target logit strictly exceeds
/// every other logit.
pub fn energy_loss(sample: &EnergySample) -> f64 {
    energy_loss_from_logits(&sample.logits, sample.target)
}

/// [`energy_loss`] on a raw logit row. The caller guarantees
/// `logits.len() >= 2` and `target < logits.len()`.
pub fn energy_loss_from_logits(logits: &[f64], target: usize) -> f64 {
    debug_assert!(logits.len() >= 2 && target < logits.len());
    let target_energy = -logits[target];
    let mut min_other = f64::INFINITY;
    for (c, &e) in logits.iter().enumerate() {
        if c != target {
            let h = -e;
            if h < min_other {
                min_other = h;
            }
        }
    }
    target_energy - min_other
}

/// How per-sample energy losses combine over a batch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BatchReduction {
    #[default]
    Mean,
    Sum,
}

/// Mean energy loss over a batch of samples.
pub fn batch_energy_loss(samples: &[EnergySample]) -> Result<f64, EnergyError> {
    batch_energy_loss_with(samples, BatchReduction::Mean)
}

pub fn batch_energy_loss_with(
    samples: &[EnergySample],
    reduction: BatchReduction,
) -> Result<f64, EnergyError> {
    if samples.is_empty() {
        return Err(EnergyError::EmptyBatch);
    }
    let sum: f64 = samples.iter().map(energy_loss).sum();
    Ok(match reduction {
        BatchReduction::Mean => sum / samples.len() as f64,
        BatchReduction::Sum => sum,
    })
}

/// Mean energy loss straight from a logit matrix; the hot path the mask
/// search evaluates once per candidate per batch.
pub fn batch_energy_from_logits(logits: &Matrix, targets: &[usize]) -> Result<f64, EnergyError> {
    if targets.is_empty() || logits.rows() == 0 {
        return Err(EnergyError::EmptyBatch);
    }
    if logits.cols() < 2 {
        return Err(EnergyError::TooFewClasses);
    }
    if let Some(&t) = targets.iter().find(|&&t| t >= logits.cols()) {
        return Err(EnergyError::TargetOutOfRange {
            target: t,
            classes: logits.cols(),
        });
    }
    let mut sum = 0.0;
    for (b, &t) in targets.iter().enumerate() {
        sum += energy_loss_from_logits(logits.row(b), t);
    }
    Ok(sum / targets.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::softmax;
    use proptest::prelude::*;
    use rand::Rng;

    fn sample(logits: &[f64], target: usize) -> EnergySample {
        EnergySample::new(logits.to_vec(), target).unwrap()
    }

    #[test]
    fn hamiltonian_negates_logits() {
        assert_eq!(hamiltonian(&sample(&[0.0, 0.0, 0.0], 0)), &[0.0, 0.0, 0.0]);
        assert_eq!(
            hamiltonian(&sample(&[2.0, 5.0, 1.0], 0)),
            &[-2.0, -5.0, -1.0]
        );
        assert_eq!(hamiltonian(&sample(&[-1.5, 3.25], 0)), &[1.5, -3.25]);
    }

    #[test]
    fn gibbs_matches_hand_values() {
        let p = gibbs_probabilities(&sample(&[0.0, 0.0], 0), &GibbsParams::default()).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        // exp(ln 2) = 2, exp(0) = 1 -> [2/3, 1/3]
        let p = gibbs_probabilities(
            &sample(&[core::f64::consts::LN_2, 0.0], 0),
            &GibbsParams::default(),
        )
        .unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gibbs_survives_huge_logits() {
        let p = gibbs_probabilities(&sample(&[1000.0, 0.0], 0), &GibbsParams::default()).unwrap();
        assert!(p.iter().all(|v| v.is_finite()));
        assert!(p[0] > 1.0 - 1e-12 && p[1] < 1e-12);
    }

    #[test]
    fn gibbs_rejects_bad_beta() {
        let s = sample(&[1.0, 2.0], 0);
        assert!(gibbs_probabilities(&s, &GibbsParams { beta: 0.0 }).is_err());
        assert!(gibbs_probabilities(&s, &GibbsParams { beta: -1.0 }).is_err());
    }

    #[test]
    fn gibbs_at_beta_one_is_softmax() {
        let mut rng = crate::rng::seeded(5);
        for _ in 0..200 {
            let c = rng.gen_range(2..=10);
            let logits: Vec<f64> = (0..c).map(|_| rng.gen_range(-30.0..30.0)).collect();
            let p = gibbs_probabilities(&sample(&logits, 0), &GibbsParams::default()).unwrap();
            let q = softmax(&logits);
            let sum: f64 = p.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            for (a, b) in p.iter().zip(&q) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn energy_loss_hand_values() {
        // F = [-2,-5,-1]; target 1: -5 - min(-2,-1) = -3
        assert_eq!(energy_loss(&sample(&[2.0, 5.0, 1.0], 1)), -3.0);
        // target 0: -2 - (-5) = 3
        assert_eq!(energy_loss(&sample(&[2.0, 5.0, 1.0], 0)), 3.0);
        // exact tie -> 0
        assert_eq!(energy_loss(&sample(&[4.25, 4.25], 0)), 0.0);
    }

    #[test]
    fn batch_energy_examples() {
        let one = [sample(&[2.0, 5.0, 1.0], 1)];
        assert_eq!(batch_energy_loss(&one).unwrap(), -3.0);
        let pair = [sample(&[2.0, 5.0, 1.0], 1), sample(&[2.0, 5.0, 1.0], 0)];
        assert_eq!(batch_energy_loss(&pair).unwrap(), 0.0);
        // Three hand-evaluated samples: -3, 3, and [1,0] t0 -> -1 - 0 = -1.
        let trio = [
            sample(&[2.0, 5.0, 1.0], 1),
            sample(&[2.0, 5.0, 1.0], 0),
            sample(&[1.0, 0.0], 0),
        ];
        let expect = (-3.0 + 3.0 + -1.0) / 3.0;
        assert_eq!(batch_energy_loss(&trio).unwrap(), expect);
        assert_eq!(
            batch_energy_loss_with(&trio, BatchReduction::Sum).unwrap(),
            -1.0
        );
        assert!(matches!(
            batch_energy_loss(&[]),
            Err(EnergyError::EmptyBatch)
        ));
    }

    #[test]
    fn batch_energy_from_logits_matches_sample_route() {
        let m = Matrix::from_rows(&[&[2.0, 5.0, 1.0], &[0.5, -0.5, 0.0]]);
        let targets = [1, 2];
        let direct = batch_energy_from_logits(&m, &targets).unwrap();
        let via_samples = batch_energy_loss(&[
            sample(&[2.0, 5.0, 1.0], 1),
            sample(&[0.5, -0.5, 0.0], 2),
        ])
        .unwrap();
        assert_eq!(direct, via_samples);
    }

    proptest! {
        #[test]
        fn sign_law_and_shift_invariance(
            c in 2usize..10,
            seed in 0u64..5000,
            shift in -50.0f64..50.0,
        ) {
            let mut rng = crate::rng::seeded(seed);
            let logits: Vec<f64> = (0..c).map(|_| rng.gen_range(-20.0..20.0)).collect();
            let target = rng.gen_range(0..c);
            let e = energy_loss(&sample(&logits, target));
            let best_other = logits
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != target)
                .map(|(_, &v)| v)
                .fold(f64::NEG_INFINITY, f64::max);
            // Negative iff target strictly maximal, zero iff tied, positive
            // iff beaten.
            if logits[target] > best_other {
                prop_assert!(e < 0.0);
            } else if logits[target] == best_other {
                prop_assert!(e == 0.0);
            } else {
                prop_assert!(e > 0.0);
            }
            // Adding a constant to every logit leaves the loss unchanged.
            let shifted: Vec<f64> = logits.iter().map(|&v| v + shift).collect();
            let e2 = energy_loss(&sample(&shifted, target));
            prop_assert!((e - e2).abs() <= 1e-12);
        }

        #[test]
        fn raising_target_logit_never_raises_loss(
            c in 2usize..8,
            seed in 0u64..2000,
            bump in 0.0f64..10.0,
        ) {
            let mut rng = crate::rng::seeded(seed);
            let logits: Vec<f64> = (0..c).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let target = rng.gen_range(0..c);
            let before = energy_loss(&sample(&logits, target));
            let mut raised = logits.clone();
            raised[target] += bump;
            let after = energy_loss(&sample(&raised, target));
            prop_assert!(after <= before);
        }
    }
}
