use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numeric::{Matrix, Rng};

/// Flat vector of every trainable parameter of one model.
///
/// Layout: for each affine layer in order, the weight matrix (`out x in`,
/// row-major) followed by its bias (`out`).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

/// One affine layer unpacked from a [`ParamVector`].
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        ParamVector(values)
    }

    pub fn zeros(len: usize) -> Self {
        ParamVector(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn flatten(layers: &[Layer]) -> ParamVector {
        let mut out = Vec::new();
        for layer in layers {
            out.extend_from_slice(layer.weights.data());
            out.extend_from_slice(&layer.bias);
        }
        ParamVector(out)
    }

    /// Splits the vector into layers with the given `(in, out)` shapes.
    pub fn unflatten(&self, dims: &[(usize, usize)]) -> Result<Vec<Layer>> {
        let expected: usize = dims.iter().map(|&(i, o)| i * o + o).sum();
        if expected != self.len() {
            return Err(Error::Contract(format!(
                "parameter vector has {} values, layout needs {expected}",
                self.len()
            )));
        }
        let mut offset = 0;
        let mut layers = Vec::with_capacity(dims.len());
        for &(fan_in, fan_out) in dims {
            let w = self.0[offset..offset + fan_in * fan_out].to_vec();
            offset += fan_in * fan_out;
            let b = self.0[offset..offset + fan_out].to_vec();
            offset += fan_out;
            layers.push(Layer {
                weights: Matrix::from_vec(fan_out, fan_in, w),
                bias: b,
            });
        }
        Ok(layers)
    }

    /// Uniform fan-based initialization: weights in `±sqrt(6 / (in + out))`, biases zero.
    pub fn init(dims: &[(usize, usize)], rng: &mut Rng) -> ParamVector {
        let mut out = Vec::new();
        for &(fan_in, fan_out) in dims {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            out.extend((0..fan_in * fan_out).map(|_| rng.uniform(-limit, limit)));
            out.extend(std::iter::repeat_n(0.0, fan_out));
        }
        ParamVector(out)
    }

    /// Little-endian `u32` length followed by little-endian `f64` values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 8 * self.len());
        out.extend_from_slice(&(self.len() as u32).to_le_bytes());
        for v in &self.0 {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<ParamVector> {
        let header: [u8; 4] = bytes
            .get(..4)
            .and_then(|h| h.try_into().ok())
            .ok_or_else(|| Error::Format {
                field: "checkpoint length",
                detail: format!("need 4 header bytes, file has {}", bytes.len()),
            })?;
        let len = u32::from_le_bytes(header) as usize;
        let body = &bytes[4..];
        if body.len() != len * 8 {
            return Err(Error::Format {
                field: "checkpoint values",
                detail: format!("header says {len} values, body holds {} bytes", body.len()),
            });
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(ParamVector(values))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ParamVector> {
        ParamVector::from_bytes(&fs::read(path)?)
    }
}
