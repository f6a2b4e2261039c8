//! Meta-learned black-box optimisation under movement costs.
//!
//! A small LSTM policy is trained by backpropagation through entire rollouts
//! on synthetic objectives (random-Fourier-feature GP samples with a random
//! convex bowl), maximising the improvement it finds divided by the distance
//! it travels. Gaussian-process baselines (EI, EI per unit cost, random
//! search) and an analytic benchmark suite provide the comparison.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bench;
pub mod cli;
pub mod diff;
pub mod error;
pub mod io;
pub mod objective;
pub mod parallel;
pub mod params;
pub mod policy;
pub mod prior;
pub mod rng;
pub mod train;

pub use error::{Error, Result};
