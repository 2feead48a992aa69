use crate::error::{contract, Result};
use crate::numeric::{Matrix, Rng};

use super::Dataset;

pub const SYNTHETIC_SIGMA: f64 = 0.1;

const CENTER_STREAM: u64 = 0x4345_4E54; // "CENT"
const TRAIN_STREAM: u64 = 1;
const TEST_STREAM: u64 = 2;

/// Seeded class centers, uniform in the unit cube.
pub fn synthetic_centers(classes: usize, dim: usize, seed: u64) -> Matrix {
    let mut rng = Rng::keyed(&[seed, CENTER_STREAM]);
    let data = (0..classes * dim).map(|_| rng.next_f64()).collect();
    Matrix::from_vec(classes, dim, data)
}

fn blobs(centers: &Matrix, per_class: usize, rng: &mut Rng, name: &str) -> Result<Dataset> {
    let classes = centers.rows();
    let dim = centers.cols();
    let n = classes * per_class;
    let mut data = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % classes;
        labels.push(class);
        data.extend(
            centers
                .row(class)
                .iter()
                .map(|&c| (c + SYNTHETIC_SIGMA * rng.normal()).clamp(0.0, 1.0)),
        );
    }
    Dataset::new(name, Matrix::new(n, dim, data)?, labels)
}

/// Isotropic Gaussian blobs (sigma 0.1) around seeded centers, clamped to
/// `[0, 1]`. Labels cycle through the classes so every class gets `per_class`.
pub fn synthetic(classes: usize, per_class: usize, dim: usize, seed: u64) -> Result<Dataset> {
    if classes == 0 || per_class == 0 || dim == 0 {
        return Err(contract("synthetic dataset counts must be at least 1"));
    }
    let centers = synthetic_centers(classes, dim, seed);
    blobs(&centers, per_class, &mut Rng::keyed(&[seed, TRAIN_STREAM]), "synthetic")
}

/// A training set identical to [`synthetic`] plus a held-out set drawn from
/// the same centers with an independent stream.
pub fn synthetic_split(
    classes: usize,
    per_class_train: usize,
    per_class_test: usize,
    dim: usize,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let train = synthetic(classes, per_class_train, dim, seed)?;
    if per_class_test == 0 {
        return Err(contract("synthetic test set needs at least 1 sample per class"));
    }
    let centers = synthetic_centers(classes, dim, seed);
    let test = blobs(
        &centers,
        per_class_test,
        &mut Rng::keyed(&[seed, TEST_STREAM]),
        "synthetic-test",
    )?;
    Ok((train, test))
}
