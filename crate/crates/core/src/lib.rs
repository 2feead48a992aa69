//! Deterministic simulation of federated training over a serverless edge
//! architecture.
//!
//! * [`numeric`]: dense linear algebra, loss, optimizer step and the seeded PRNG.
//! * [`models`]: MLP baseline/benchmark and the prototype network.
//! * [`data`]: IDX ingestion, client partitioning, per-round sampling, synthetic data.
//! * [`fedtrain`]: the broadcast / local-train / collect / aggregate round protocol
//!   with communication and computation accounting.
//! * [`edgesim`]: controller, QoS placement and per-round time and energy accounting.
//! * [`cli`]: experiment configs, presets and CSV output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
pub mod edgesim;
pub mod error;
pub mod fedtrain;
pub mod models;
pub mod numeric;

pub use error::{Error, Result};
