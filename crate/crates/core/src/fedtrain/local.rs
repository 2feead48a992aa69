use crate::data::Dataset;
use crate::error::{contract, Result};
use crate::models::{mlp_loss_grad, proto_episode_loss_grad, split_episode, LossGrad, ModelSpec, ParamVector};
use crate::numeric::{sgd_step_in_place, Rng};

/// Result of one client's local training in a round.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOutcome {
    pub params: ParamVector,
    pub samples_processed: u64,
    /// Mean of the per-step batch losses.
    pub mean_loss: f64,
}

/// Loss and gradient of `model` on the given rows of `data`. Prototype models
/// treat the rows as one episode.
pub fn step_loss_grad(model: &ModelSpec, params: &ParamVector, data: &Dataset, rows: &[usize]) -> Result<LossGrad> {
    let batch = data.batch(rows);
    match model {
        ModelSpec::Mlp(spec) => mlp_loss_grad(spec, params, &batch),
        ModelSpec::Proto(spec) => {
            let (s, q) = split_episode(&batch.labels, spec);
            proto_episode_loss_grad(spec, params, &batch.subset(&s), &batch.subset(&q))
        }
    }
}

/// `iters` mini-batch SGD steps over `budget`.
///
/// Batches are consecutive slices of a seeded permutation of the budget; when
/// fewer than a full batch remain the budget is reshuffled. Each batch holds
/// `min(batch_size, budget.len())` samples.
#[allow(clippy::too_many_arguments)]
pub fn local_train(
    model: &ModelSpec,
    params: &ParamVector,
    data: &Dataset,
    budget: &[usize],
    iters: usize,
    batch_size: usize,
    lr: f64,
    rng: &mut Rng,
) -> Result<LocalOutcome> {
    if budget.is_empty() {
        return Err(contract("local training needs a non-empty budget"));
    }
    if iters == 0 || batch_size == 0 {
        return Err(contract("iterations and batch size must be at least 1"));
    }
    let b = batch_size.min(budget.len());
    let mut order = budget.to_vec();
    rng.shuffle(&mut order);
    let mut cursor = 0;
    let mut params = params.clone();
    let mut loss_sum = 0.0;
    for _ in 0..iters {
        if cursor + b > order.len() {
            rng.shuffle(&mut order);
            cursor = 0;
        }
        let step = step_loss_grad(model, &params, data, &order[cursor..cursor + b])?;
        cursor += b;
        sgd_step_in_place(&mut params, &step.grads, lr)?;
        loss_sum += step.loss;
    }
    Ok(LocalOutcome {
        params,
        samples_processed: (iters * b) as u64,
        mean_loss: loss_sum / iters as f64,
    })
}
