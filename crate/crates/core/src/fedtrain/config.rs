use crate::data::SamplingStrategy;
use crate::error::{contract, Result};
use crate::models::ModelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Unweighted,
    /// Weighted by each client's shard size.
    ShardWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformKind {
    Identity,
    GaussianNoise { sigma: f64 },
}

/// Everything needed to run one federated training experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct FedConfig {
    pub model: ModelSpec,
    pub clients: usize,
    pub rounds: usize,
    /// Samples in each client's disjoint shard.
    pub shard_sizes: Vec<usize>,
    /// Per-round sample budget of every client; `None` means the whole shard.
    pub budget: Option<usize>,
    /// Local SGD iterations per round for each client.
    pub update_freq: Vec<usize>,
    pub batch_size: usize,
    pub lr: f64,
    pub sampling: SamplingStrategy,
    pub aggregation: Aggregation,
    pub transform: TransformKind,
    pub seed: u64,
}

impl FedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clients == 0 {
            return Err(contract("at least one client is required"));
        }
        if self.update_freq.len() != self.clients {
            return Err(contract(format!(
                "update_freq has {} entries for {} clients",
                self.update_freq.len(),
                self.clients
            )));
        }
        if self.shard_sizes.len() != self.clients {
            return Err(contract(format!(
                "shard_sizes has {} entries for {} clients",
                self.shard_sizes.len(),
                self.clients
            )));
        }
        if self.update_freq.contains(&0) {
            return Err(contract("every update frequency must be at least 1"));
        }
        if self.shard_sizes.contains(&0) {
            return Err(contract("every shard needs at least one sample"));
        }
        if let Some(b) = self.budget {
            let smallest = self.shard_sizes.iter().copied().min().unwrap_or(0);
            if b == 0 || b > smallest {
                return Err(contract(format!(
                    "budget {b} must be in 1..={smallest} (smallest shard)"
                )));
            }
        }
        if self.batch_size == 0 {
            return Err(contract("batch_size must be at least 1"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(contract(format!("lr {} must be positive", self.lr)));
        }
        if let TransformKind::GaussianNoise { sigma } = self.transform {
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return Err(contract("noise sigma must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// Per-round budget of client `c`.
    pub fn client_budget(&self, c: usize) -> usize {
        self.budget.unwrap_or(self.shard_sizes[c])
    }

    /// Samples client `c` processes in one round.
    pub fn client_samples(&self, c: usize) -> usize {
        self.update_freq[c] * self.batch_size.min(self.client_budget(c))
    }
}
