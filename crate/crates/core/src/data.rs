//! Desk-scale classification datasets: seeded synthetic generators and
//! shuffled batch iteration.
//!
//! File ingestion (CSV, IDX) lives in the companion `eprune` crate; this
//! module only deals with in-memory data. Every generator is a pure
//! function of its arguments and seed.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::math;
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataError {
    Empty,
    InvalidParams(&'static str),
    LabelOutOfRange { label: usize, classes: usize },
    NonFinite,
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::Empty => write!(f, "dataset has no samples"),
            DataError::InvalidParams(reason) => write!(f, "invalid parameters: {reason}"),
            DataError::LabelOutOfRange { label, classes } => {
                write!(f, "label {label} out of range for {classes} classes")
            }
            DataError::NonFinite => write!(f, "non-finite feature value"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DataError {}

/// Labeled feature matrix with a fixed class count.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<usize>,
    class_count: usize,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<usize>, class_count: usize) -> Result<Self, DataError> {
        if features.rows() == 0 || labels.is_empty() {
            return Err(DataError::Empty);
        }
        if features.rows() != labels.len() {
            return Err(DataError::InvalidParams("feature/label count mismatch"));
        }
        if class_count < 2 {
            return Err(DataError::InvalidParams("need at least two classes"));
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= class_count) {
            return Err(DataError::LabelOutOfRange {
                label,
                classes: class_count,
            });
        }
        if !features.is_finite() {
            return Err(DataError::NonFinite);
        }
        Ok(Self {
            features,
            labels,
            class_count,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// Splits off the last `test_per_class` samples of every class into a
    /// test set, keeping the rest for training. Deterministic: generation
    /// order decides which samples move.
    pub fn split_per_class(&self, test_per_class: usize) -> Result<(Dataset, Dataset), DataError> {
        let mut seen = alloc::vec![0usize; self.class_count];
        for &l in &self.labels {
            seen[l] += 1;
        }
        if seen.iter().any(|&n| n < test_per_class + 1) {
            return Err(DataError::InvalidParams(
                "a class has too few samples for the requested test split",
            ));
        }
        let train_quota: Vec<usize> = seen.iter().map(|&n| n - test_per_class).collect();
        let mut used = alloc::vec![0usize; self.class_count];
        let mut train_rows = Vec::new();
        let mut train_labels = Vec::new();
        let mut test_rows = Vec::new();
        let mut test_labels = Vec::new();
        for (i, &l) in self.labels.iter().enumerate() {
            if used[l] < train_quota[l] {
                train_rows.push(i);
                train_labels.push(l);
            } else {
                test_rows.push(i);
                test_labels.push(l);
            }
            used[l] += 1;
        }
        let gather = |rows: &[usize]| {
            let mut data = Vec::with_capacity(rows.len() * self.dim());
            for &r in rows {
                data.extend_from_slice(self.features.row(r));
            }
            Matrix::from_vec(rows.len(), self.dim(), data)
        };
        Ok((
            Dataset::new(gather(&train_rows), train_labels, self.class_count)?,
            Dataset::new(gather(&test_rows), test_labels, self.class_count)?,
        ))
    }
}

/// `classes` Gaussian clusters in `dim` dimensions. Cluster centers are
/// seeded random directions on the unit hypersphere scaled by 3; samples
/// add isotropic noise with standard deviation `spread`. Samples are
/// emitted class-major.
pub fn gen_blobs(
    per_class: usize,
    classes: usize,
    dim: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset, DataError> {
    if classes < 2 {
        return Err(DataError::InvalidParams("need at least two classes"));
    }
    if dim == 0 {
        return Err(DataError::InvalidParams("dimension must be positive"));
    }
    if per_class == 0 {
        return Err(DataError::Empty);
    }
    if !(spread >= 0.0) || !spread.is_finite() {
        return Err(DataError::InvalidParams("spread must be finite and >= 0"));
    }
    let mut rng = rng::seeded(seed);
    let normal = StandardNormal;
    let mut centers = Vec::with_capacity(classes);
    for _ in 0..classes {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| normal.sample(&mut rng)).collect();
            let norm = math::sqrt(v.iter().map(|x| x * x).sum());
            if norm > 1e-9 {
                centers.push(v.iter().map(|x| 3.0 * x / norm).collect::<Vec<f64>>());
                break;
            }
        }
    }
    let n = per_class * classes;
    let mut data = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_class {
            for &m in center {
                let noise: f64 = normal.sample(&mut rng);
                data.push(m + spread * noise);
            }
            labels.push(c);
        }
    }
    Dataset::new(Matrix::from_vec(n, dim, data), labels, classes)
}

/// Interleaved 2-D spiral arms (2 or 3 classes) with additive Gaussian
/// noise. Arm radius runs from 0.15 to 1 so the arms stay disjoint near the
/// origin when `noise` is zero.
pub fn gen_spirals(
    per_class: usize,
    classes: usize,
    turns: f64,
    noise: f64,
    seed: u64,
) -> Result<Dataset, DataError> {
    if classes != 2 && classes != 3 {
        return Err(DataError::InvalidParams("spirals support 2 or 3 classes"));
    }
    if !(turns > 0.0) {
        return Err(DataError::InvalidParams("turns must be positive"));
    }
    if per_class == 0 {
        return Err(DataError::Empty);
    }
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(DataError::InvalidParams("noise must be finite and >= 0"));
    }
    let mut rng = rng::seeded(seed);
    let normal = StandardNormal;
    let n = per_class * classes;
    let mut data = Vec::with_capacity(n * 2);
    let mut labels = Vec::with_capacity(n);
    for c in 0..classes {
        let arm_offset = 2.0 * math::PI * c as f64 / classes as f64;
        for i in 0..per_class {
            let t = (i + 1) as f64 / per_class as f64;
            let r = 0.15 + 0.85 * t;
            let theta = arm_offset + 2.0 * math::PI * turns * t;
            let nx: f64 = normal.sample(&mut rng);
            let ny: f64 = normal.sample(&mut rng);
            data.push(r * math::cos(theta) + noise * nx);
            data.push(r * math::sin(theta) + noise * ny);
            labels.push(c);
        }
    }
    Dataset::new(Matrix::from_vec(n, 2, data), labels, classes)
}

/// One shuffled mini-batch.
#[derive(Clone, Debug)]
pub struct Batch {
    pub features: Matrix,
    pub labels: Vec<usize>,
}

/// Iterates the dataset once in a fresh seeded permutation, `batch_size`
/// samples at a time; the final short batch is included.
pub fn batch_iter(dataset: &Dataset, batch_size: usize, epoch_seed: u64) -> BatchIter<'_> {
    assert!(batch_size >= 1, "batch size must be at least 1");
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    // Fisher-Yates with the epoch's own stream.
    let mut rng = rng::seeded(epoch_seed);
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    BatchIter {
        dataset,
        order,
        batch_size,
        pos: 0,
    }
}

/// Number of batches one epoch yields: `ceil(n / batch_size)`.
pub fn num_batches(n: usize, batch_size: usize) -> usize {
    n.div_ceil(batch_size)
}

pub struct BatchIter<'a> {
    dataset: &'a Dataset,
    order: Vec<usize>,
    batch_size: usize,
    pos: usize,
}

impl Iterator for BatchIter<'_> {
    type Item = Batch;

    fn next(&mut self) -> Option<Batch> {
        if self.pos >= self.order.len() {
            return None;
        }
        let end = (self.pos + self.batch_size).min(self.order.len());
        let idx = &self.order[self.pos..end];
        self.pos = end;
        let dim = self.dataset.dim();
        let mut data = Vec::with_capacity(idx.len() * dim);
        let mut labels = Vec::with_capacity(idx.len());
        for &i in idx {
            data.extend_from_slice(self.dataset.features().row(i));
            labels.push(self.dataset.labels()[i]);
        }
        Some(Batch {
            features: Matrix::from_vec(idx.len(), dim, data),
            labels,
        })
    }
}
