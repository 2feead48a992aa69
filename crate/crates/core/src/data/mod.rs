//! Training data: IDX ingestion, disjoint client shards, per-round sampling
//! budgets and a synthetic stand-in for MNIST.

mod idx;
mod partition;
mod synthetic;

pub use idx::{
    decode_idx, load_idx, mnist_files, mnist_test, mnist_train, parse_images, parse_labels, IMAGE_MAGIC, LABEL_MAGIC,
    MNIST_TRAIN_RECORDS,
};
pub use partition::{draw_budget, partition, ClientShard, SamplingStrategy};
pub use synthetic::{synthetic, synthetic_centers, synthetic_split, SYNTHETIC_SIGMA};

use crate::error::{contract, Result};
use crate::models::Batch;
use crate::numeric::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub images: Matrix,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn new(name: &str, images: Matrix, labels: Vec<usize>) -> Result<Self> {
        if images.rows() != labels.len() {
            return Err(contract(format!(
                "{} images but {} labels",
                images.rows(),
                labels.len()
            )));
        }
        if images.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(contract("pixel values must lie in [0, 1]"));
        }
        Ok(Dataset {
            name: name.to_string(),
            images,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.images.cols()
    }

    pub fn classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn batch(&self, indices: &[usize]) -> Batch {
        Batch {
            inputs: self.images.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}
