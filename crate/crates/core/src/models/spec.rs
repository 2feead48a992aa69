use std::fmt;

use crate::error::{contract, Result};
use crate::numeric::Rng;

use super::ParamVector;

pub const MNIST_INPUT: usize = 784;
pub const MNIST_CLASSES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    None,
}

/// Fully connected network: `layer_sizes = [input, hidden.., output]`, one
/// activation per hidden layer. The output layer feeds softmax directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    layer_sizes: Vec<usize>,
    activations: Vec<Activation>,
}

impl MlpSpec {
    pub fn new(layer_sizes: Vec<usize>, activations: Vec<Activation>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(contract("an MLP needs at least input and output sizes"));
        }
        if layer_sizes.contains(&0) {
            return Err(contract("layer sizes must be positive"));
        }
        if activations.len() != layer_sizes.len() - 2 {
            return Err(contract(format!(
                "{} hidden layers but {} activations",
                layer_sizes.len() - 2,
                activations.len()
            )));
        }
        Ok(MlpSpec {
            layer_sizes,
            activations,
        })
    }

    /// ReLU on every hidden layer.
    pub fn relu(layer_sizes: &[usize]) -> Result<Self> {
        let hidden = layer_sizes.len().saturating_sub(2);
        MlpSpec::new(layer_sizes.to_vec(), vec![Activation::Relu; hidden])
    }

    /// Three-layer MNIST baseline, `784-512-512-10`.
    pub fn baseline() -> Self {
        MlpSpec::relu(&[MNIST_INPUT, 512, 512, MNIST_CLASSES]).expect("valid preset")
    }

    /// Single affine layer into softmax, `784-10`.
    pub fn benchmark() -> Self {
        MlpSpec::relu(&[MNIST_INPUT, MNIST_CLASSES]).expect("valid preset")
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn classes(&self) -> usize {
        *self.layer_sizes.last().expect("non-empty")
    }

    /// `(in, out)` of each affine layer.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        self.layer_sizes.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layer_dims().iter().map(|&(i, o)| i * o + o).sum()
    }
}

/// Prototype network: one affine + ReLU extractor into `feature_dim`, nearest
/// class mean by squared distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtoSpec {
    pub input_dim: usize,
    pub feature_dim: usize,
    pub support_per_class: usize,
    pub query_per_class: usize,
}

impl ProtoSpec {
    pub fn new(input_dim: usize, feature_dim: usize, support_per_class: usize, query_per_class: usize) -> Result<Self> {
        if input_dim == 0 || feature_dim == 0 {
            return Err(contract("prototype dims must be positive"));
        }
        if support_per_class == 0 {
            return Err(contract("support_per_class must be at least 1"));
        }
        Ok(ProtoSpec {
            input_dim,
            feature_dim,
            support_per_class,
            query_per_class,
        })
    }

    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        vec![(self.input_dim, self.feature_dim)]
    }

    pub fn param_count(&self) -> usize {
        self.input_dim * self.feature_dim + self.feature_dim
    }
}

impl Default for ProtoSpec {
    fn default() -> Self {
        ProtoSpec {
            input_dim: MNIST_INPUT,
            feature_dim: 10,
            support_per_class: 5,
            query_per_class: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSpec {
    Mlp(MlpSpec),
    Proto(ProtoSpec),
}

impl ModelSpec {
    pub fn param_count(&self) -> usize {
        match self {
            ModelSpec::Mlp(s) => s.param_count(),
            ModelSpec::Proto(s) => s.param_count(),
        }
    }

    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        match self {
            ModelSpec::Mlp(s) => s.layer_dims(),
            ModelSpec::Proto(s) => s.layer_dims(),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            ModelSpec::Mlp(s) => s.input_dim(),
            ModelSpec::Proto(s) => s.input_dim,
        }
    }

    pub fn init_params(&self, rng: &mut Rng) -> ParamVector {
        ParamVector::init(&self.layer_dims(), rng)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Mlp(s) => {
                let sizes: Vec<String> = s.layer_sizes.iter().map(ToString::to_string).collect();
                write!(f, "mlp[{}]", sizes.join("-"))
            }
            ModelSpec::Proto(s) => write!(f, "proto[{}->{}]", s.input_dim, s.feature_dim),
        }
    }
}
