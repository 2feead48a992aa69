//! Model architectures: the MLP baseline and single-layer benchmark, and the
//! prototype network. Every model is an immutable spec plus a flat
//! [`ParamVector`].

mod mlp;
mod params;
mod proto;
mod spec;

pub use mlp::{mlp_logits, mlp_loss_grad};
pub use params::{Layer, ParamVector};
pub use proto::{
    compute_prototypes, embed, proto_classify, proto_episode_loss_grad, proto_predict, split_episode, Prototypes,
};
pub use spec::{Activation, MlpSpec, ModelSpec, ProtoSpec, MNIST_CLASSES, MNIST_INPUT};

use crate::error::{contract, Result};
use crate::numeric::Matrix;

/// Samples (one per row) with their class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub inputs: Matrix,
    pub labels: Vec<usize>,
}

impl Batch {
    pub fn new(inputs: Matrix, labels: Vec<usize>) -> Result<Self> {
        if inputs.rows() != labels.len() {
            return Err(contract(format!(
                "{} samples but {} labels",
                inputs.rows(),
                labels.len()
            )));
        }
        Ok(Batch { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn subset(&self, rows: &[usize]) -> Batch {
        Batch {
            inputs: self.inputs.select_rows(rows),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Loss, gradient and correct-prediction count for one training step.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGrad {
    pub loss: f64,
    pub grads: ParamVector,
    pub correct: usize,
}
