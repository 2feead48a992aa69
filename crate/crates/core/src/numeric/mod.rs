//! Dense linear algebra, activations, loss, optimizer step and seeded
//! randomness. All values are `f64`.

mod matrix;
mod ops;
mod rng;

pub use matrix::Matrix;
pub(crate) use matrix::{gemm, View};
pub use ops::{affine, argmax, pairwise_sq_dist, relu, relu_grad, sgd_step, softmax, softmax_xent};
pub(crate) use ops::{sgd_step_in_place, xent_in_place};
pub use rng::{Rng, RNG_ALGORITHM};
