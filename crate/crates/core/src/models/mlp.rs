use crate::error::{contract, Result};
use crate::numeric::{argmax, gemm, xent_in_place, Matrix, View};

use super::{Activation, Batch, LossGrad, MlpSpec, ParamVector};

/// Offsets of each layer's weights and bias inside the flat parameter vector.
struct LayerSlot {
    fan_in: usize,
    fan_out: usize,
    w: usize,
    b: usize,
}

fn slots(spec: &MlpSpec) -> Vec<LayerSlot> {
    let mut offset = 0;
    spec.layer_dims()
        .into_iter()
        .map(|(fan_in, fan_out)| {
            let slot = LayerSlot {
                fan_in,
                fan_out,
                w: offset,
                b: offset + fan_in * fan_out,
            };
            offset += fan_in * fan_out + fan_out;
            slot
        })
        .collect()
}

fn check_params(spec: &MlpSpec, params: &ParamVector) -> Result<()> {
    if params.len() != spec.param_count() {
        return Err(contract(format!(
            "{} parameters for a spec needing {}",
            params.len(),
            spec.param_count()
        )));
    }
    Ok(())
}

fn apply_activation(act: Activation, z: &mut [f64]) {
    if act == Activation::Relu {
        z.iter_mut().for_each(|v| *v = v.max(0.0));
    }
}

/// Forward pass keeping every layer's output; the last entry holds logits.
fn forward(spec: &MlpSpec, params: &ParamVector, inputs: &Matrix) -> Vec<Matrix> {
    let p = params.values();
    let n = inputs.rows();
    let slots = slots(spec);
    let mut outs: Vec<Matrix> = Vec::with_capacity(slots.len());
    for (l, s) in slots.iter().enumerate() {
        let prev = if l == 0 { inputs } else { &outs[l - 1] };
        let mut z = Matrix::zeros(n, s.fan_out);
        let bias = &p[s.b..s.b + s.fan_out];
        for i in 0..n {
            z.row_mut(i).copy_from_slice(bias);
        }
        let w = View::of(s.fan_out, s.fan_in, &p[s.w..s.b]);
        gemm(prev.view(), w.t(), 1.0, z.data_mut());
        if l + 1 < slots.len() {
            apply_activation(spec.activations()[l], z.data_mut());
        }
        outs.push(z);
    }
    outs
}

/// Logits for every row of `inputs`.
pub fn mlp_logits(spec: &MlpSpec, params: &ParamVector, inputs: &Matrix) -> Result<Matrix> {
    check_params(spec, params)?;
    if inputs.cols() != spec.input_dim() {
        return Err(contract(format!(
            "inputs have {} features, model expects {}",
            inputs.cols(),
            spec.input_dim()
        )));
    }
    Ok(forward(spec, params, inputs).pop().expect("at least one layer"))
}

/// Mean cross-entropy over the batch, its gradient by backpropagation, and
/// the number of correctly classified samples.
pub fn mlp_loss_grad(spec: &MlpSpec, params: &ParamVector, batch: &Batch) -> Result<LossGrad> {
    check_params(spec, params)?;
    let n = batch.len();
    if n == 0 {
        return Err(contract("empty batch"));
    }
    if batch.inputs.cols() != spec.input_dim() {
        return Err(contract(format!(
            "batch has {} features, model expects {}",
            batch.inputs.cols(),
            spec.input_dim()
        )));
    }
    let classes = spec.classes();
    if let Some(&bad) = batch.labels.iter().find(|&&l| l >= classes) {
        return Err(contract(format!("label {bad} out of range for {classes} classes")));
    }

    let mut outs = forward(spec, params, &batch.inputs);
    let mut delta = outs.pop().expect("at least one layer");
    let mut loss = 0.0;
    let mut correct = 0;
    let scale = 1.0 / n as f64;
    for (i, &label) in batch.labels.iter().enumerate() {
        let row = delta.row_mut(i);
        if argmax(row) == label {
            correct += 1;
        }
        loss += xent_in_place(row, label);
        row.iter_mut().for_each(|g| *g *= scale);
    }
    loss *= scale;

    let p = params.values();
    let mut grads = ParamVector::zeros(params.len());
    let g = grads.values_mut();
    let slots = slots(spec);
    for l in (0..slots.len()).rev() {
        let s = &slots[l];
        let prev = if l == 0 { &batch.inputs } else { &outs[l - 1] };
        gemm(delta.t(), prev.view(), 0.0, &mut g[s.w..s.b]);
        let gb = &mut g[s.b..s.b + s.fan_out];
        for i in 0..n {
            for (acc, d) in gb.iter_mut().zip(delta.row(i)) {
                *acc += d;
            }
        }
        if l == 0 {
            break;
        }
        let mut next = Matrix::zeros(n, s.fan_in);
        let w = View::of(s.fan_out, s.fan_in, &p[s.w..s.b]);
        gemm(delta.view(), w, 0.0, next.data_mut());
        if spec.activations()[l - 1] == Activation::Relu {
            for (d, a) in next.data_mut().iter_mut().zip(prev.data()) {
                if *a <= 0.0 {
                    *d = 0.0;
                }
            }
        }
        delta = next;
    }
    Ok(LossGrad { loss, grads, correct })
}
