//! Invariance and information-bottleneck objectives on linear structural
//! equation model benchmarks.
//!
//! The crate bundles the synthetic environment generators, ERM / IRM / IB-ERM /
//! IB-IRM objectives with exact gradients, a full-batch trainer with the random
//! hyperparameter search protocol, a gradient-flow lab for the 2D toy problem,
//! and exact checks of the discrete entropy inequalities behind the variance
//! bottleneck.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` is how NaN gets rejected.

pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod numeric;
pub mod objectives;
pub mod report;
pub mod sem;
pub mod trainer;

pub use error::{Error, Result};
pub use numeric::{Matrix, Pmf, RngStream, Trajectory};
pub use objectives::{LinearModel, Loss, ObjectiveConfig};
pub use sem::{EnvDataset, EnvParams, Example, FixedWeights, GeneratorSpec, Shift, Task, XorVariant};
pub use trainer::{Method, SweepReport, SweepRow, TrainConfig, TrainResult};

/// Version string embedded in every output header.
pub const SUITE_VERSION: &str = env!("CARGO_PKG_VERSION");
