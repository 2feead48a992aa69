use crate::error::{contract, Result};
use crate::models::ParamVector;

use super::Matrix;

/// `weights * input + bias` for a single vector.
pub fn affine(weights: &Matrix, bias: &[f64], input: &[f64]) -> Result<Vec<f64>> {
    if weights.cols() != input.len() || weights.rows() != bias.len() {
        return Err(contract(format!(
            "affine: weights {}x{}, bias {}, input {}",
            weights.rows(),
            weights.cols(),
            bias.len(),
            input.len()
        )));
    }
    Ok((0..weights.rows())
        .map(|i| weights.row(i).iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + bias[i])
        .collect())
}

pub fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

/// 1 where `v > 0`, else 0 (the subgradient at 0 is taken as 0).
pub fn relu_grad(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| if x > 0.0 { 1.0 } else { 0.0 }).collect()
}

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let mut out = logits.to_vec();
    softmax_in_place(&mut out);
    out
}

pub(crate) fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

/// Cross-entropy of `softmax(logits)` against `label`, with the gradient
/// `p - onehot(label)` with respect to the logits.
pub fn softmax_xent(logits: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
    if label >= logits.len() {
        return Err(contract(format!(
            "label {label} out of range for {} classes",
            logits.len()
        )));
    }
    let mut grad = logits.to_vec();
    let loss = xent_in_place(&mut grad, label);
    Ok((loss, grad))
}

/// Overwrites `logits` with `softmax(logits) - onehot(label)` and returns the loss.
pub(crate) fn xent_in_place(logits: &mut [f64], label: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = logits.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    let loss = -(logits[label] - max - log_sum);
    for x in logits.iter_mut() {
        *x = (*x - max - log_sum).exp();
    }
    logits[label] -= 1.0;
    loss
}

/// `D[i][k] = ||queries_i - prototypes_k||^2`.
pub fn pairwise_sq_dist(queries: &Matrix, prototypes: &Matrix) -> Result<Matrix> {
    if queries.cols() != prototypes.cols() {
        return Err(contract(format!(
            "feature dims differ: {} vs {}",
            queries.cols(),
            prototypes.cols()
        )));
    }
    let mut out = Matrix::zeros(queries.rows(), prototypes.rows());
    for i in 0..queries.rows() {
        let q = queries.row(i);
        for k in 0..prototypes.rows() {
            let d = q.iter().zip(prototypes.row(k)).map(|(a, b)| (a - b) * (a - b)).sum();
            out.set(i, k, d);
        }
    }
    Ok(out)
}

pub fn sgd_step(params: &ParamVector, grads: &ParamVector, lr: f64) -> Result<ParamVector> {
    let mut out = params.clone();
    sgd_step_in_place(&mut out, grads, lr)?;
    Ok(out)
}

pub(crate) fn sgd_step_in_place(params: &mut ParamVector, grads: &ParamVector, lr: f64) -> Result<()> {
    if params.len() != grads.len() {
        return Err(contract(format!(
            "sgd_step: {} params vs {} grads",
            params.len(),
            grads.len()
        )));
    }
    if !(lr >= 0.0 && lr.is_finite()) {
        return Err(contract(format!("learning rate {lr} must be finite and non-negative")));
    }
    for (p, g) in params.values_mut().iter_mut().zip(grads.values()) {
        *p -= lr * g;
    }
    Ok(())
}

/// Index of the first maximum; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}
