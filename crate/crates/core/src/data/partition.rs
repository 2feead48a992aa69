use crate::error::{contract, Error, Result};
use crate::numeric::Rng;

const PARTITION_STREAM: u64 = 0x5041_5254; // "PART"
const BUDGET_STREAM: u64 = 0x4255_4447; // "BUDG"

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingStrategy {
    /// One seeded subset drawn at round 0 and reused every round.
    FixedOnce,
    /// A fresh seeded subset at the start of every round.
    ResamplePerRound,
}

/// A client's disjoint slice of the training set plus its per-round budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientShard {
    pub client_id: usize,
    pub indices: Vec<usize>,
    pub budget_per_round: usize,
    pub strategy: SamplingStrategy,
}

impl ClientShard {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn with_budget(mut self, budget: usize, strategy: SamplingStrategy) -> Result<Self> {
        if budget == 0 || budget > self.indices.len() {
            return Err(contract(format!(
                "client {} budget {budget} must be in 1..={}",
                self.client_id,
                self.indices.len()
            )));
        }
        self.budget_per_round = budget;
        self.strategy = strategy;
        Ok(self)
    }
}

/// Shuffles `0..len` with `seed` and cuts the permutation into contiguous
/// shards of the requested sizes. Each shard's budget starts at its full size.
pub fn partition(len: usize, sizes: &[usize], seed: u64) -> Result<Vec<ClientShard>> {
    let requested: usize = sizes.iter().sum();
    if requested > len {
        return Err(Error::Capacity {
            requested,
            available: len,
        });
    }
    let mut order: Vec<usize> = (0..len).collect();
    Rng::keyed(&[seed, PARTITION_STREAM]).shuffle(&mut order);
    let mut start = 0;
    Ok(sizes
        .iter()
        .enumerate()
        .map(|(client_id, &size)| {
            let indices = order[start..start + size].to_vec();
            start += size;
            ClientShard {
                client_id,
                indices,
                budget_per_round: size,
                strategy: SamplingStrategy::FixedOnce,
            }
        })
        .collect())
}

/// The dataset indices a client may train on in `round`.
pub fn draw_budget(shard: &ClientShard, round: usize, seed: u64) -> Vec<usize> {
    let key_round = match shard.strategy {
        SamplingStrategy::FixedOnce => 0,
        SamplingStrategy::ResamplePerRound => round as u64,
    };
    let mut rng = Rng::keyed(&[seed, BUDGET_STREAM, shard.client_id as u64, key_round]);
    rng.sample_indices(shard.len(), shard.budget_per_round)
        .into_iter()
        .map(|p| shard.indices[p])
        .collect()
}
