//! Federated rounds: broadcast, local training, collection and aggregation,
//! with per-client iteration budgets and overhead accounting.

mod aggregate;
mod config;
mod local;
mod metrics;
mod round;
mod transform;

pub use aggregate::{aggregate, aggregate_weighted};
pub use config::{Aggregation, FedConfig, TransformKind};
pub use local::{local_train, step_loss_grad, LocalOutcome};
pub use metrics::{
    mean_metrics, overhead_ratios, read_metrics, write_metrics, write_metrics_file, RoundMetrics, METRICS_HEADER,
};
pub use round::{run_experiment, Experiment, Federation, RoundOutcome};
pub use transform::{Direction, GaussianNoise, IdentityTransform, Transfer, UpdateTransform};
