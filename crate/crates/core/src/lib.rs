//! Energy-guided evolutionary pruning for dense feed-forward classifiers.
//!
//! The crate trains a small multilayer perceptron while a population of
//! binary pruning masks is evolved by binary differential evolution (BDE).
//! Each mask selects a sub-network; its fitness is an energy loss computed
//! from the logits, so the mask search and the weight updates alternate on
//! the same mini-batches. Once the population collapses onto one mask (or a
//! stagnation budget runs out) the surviving sub-network is fine-tuned.
//!
//! Everything in here is pure computation over in-memory data and works
//! without `std` (allocation required). File formats, CSV/IDX ingestion and
//! the command-line front end live in the companion `eprune` crate.
//!
//! Module map:
//!
//! - [`nn`]: masked dense networks, SGD, parameter accounting, top-k.
//! - [`energy`]: Hamiltonian, Gibbs probabilities, the energy loss.
//! - [`bde`]: binary differential evolution over pruning state vectors.
//! - [`trainer`]: the two-phase training loop, fine-tuning, a magnitude
//!   baseline, and evaluation.
//! - [`data`]: synthetic dataset generators and batch iteration.
//! - [`bench`]: pseudo-boolean objectives with a brute-force oracle for
//!   validating the optimizer.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bde;
pub mod bench;
pub mod data;
pub mod energy;
mod math;
pub mod matrix;
pub mod nn;
pub mod rng;
pub mod trainer;

pub use bde::{BdeParams, ConvergenceStatus, ConvergenceTracker, Population};
pub use data::{batch_iter, gen_blobs, gen_spirals, Batch, Dataset};
pub use matrix::Matrix;
pub use nn::{Activation, DenseLayer, Network, StateVector, UnitLayout};
pub use trainer::{EvalRow, Phase, RunMetrics, TrainConfig};
