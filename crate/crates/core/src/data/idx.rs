//! IDX reader (the MNIST distribution format): big-endian magic and
//! dimensions followed by raw unsigned bytes.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::numeric::Matrix;

use super::Dataset;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

/// Training records kept from the 60,000-record MNIST training file; the
/// remaining 5,000 are the conventional validation split.
pub const MNIST_TRAIN_RECORDS: usize = 55_000;

pub const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
pub const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
pub const TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
pub const TEST_LABELS: &str = "t10k-labels-idx1-ubyte";

fn read_u32(bytes: &[u8], offset: usize, field: &'static str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes(b.try_into().expect("4 bytes")))
        .ok_or_else(|| Error::Format {
            field,
            detail: format!("file ends at byte {} before header field", bytes.len()),
        })
}

/// Image file: returns `(count, rows, cols, pixels)`.
pub fn parse_images(bytes: &[u8]) -> Result<(usize, usize, usize, &[u8])> {
    let magic = read_u32(bytes, 0, "image magic")?;
    if magic != IMAGE_MAGIC {
        return Err(Error::Format {
            field: "image magic",
            detail: format!("expected {IMAGE_MAGIC:#010x}, found {magic:#010x}"),
        });
    }
    let count = read_u32(bytes, 4, "image count")? as usize;
    let rows = read_u32(bytes, 8, "image rows")? as usize;
    let cols = read_u32(bytes, 12, "image cols")? as usize;
    let need = count * rows * cols;
    let body = &bytes[16..];
    if body.len() != need {
        return Err(Error::Format {
            field: "image data",
            detail: format!("header promises {need} pixel bytes, file holds {}", body.len()),
        });
    }
    Ok((count, rows, cols, body))
}

pub fn parse_labels(bytes: &[u8]) -> Result<&[u8]> {
    let magic = read_u32(bytes, 0, "label magic")?;
    if magic != LABEL_MAGIC {
        return Err(Error::Format {
            field: "label magic",
            detail: format!("expected {LABEL_MAGIC:#010x}, found {magic:#010x}"),
        });
    }
    let count = read_u32(bytes, 4, "label count")? as usize;
    let body = &bytes[8..];
    if body.len() != count {
        return Err(Error::Format {
            field: "label data",
            detail: format!("header promises {count} labels, file holds {}", body.len()),
        });
    }
    Ok(body)
}

/// Decodes an image/label file pair. Pixels are scaled to `[0, 1]`; at most
/// `limit` leading records are kept.
pub fn decode_idx(images: &[u8], labels: &[u8], limit: Option<usize>, name: &str) -> Result<Dataset> {
    let (count, rows, cols, pixels) = parse_images(images)?;
    let label_bytes = parse_labels(labels)?;
    if label_bytes.len() != count {
        return Err(Error::Format {
            field: "record count",
            detail: format!("{count} images but {} labels", label_bytes.len()),
        });
    }
    let keep = limit.map_or(count, |l| l.min(count));
    let dim = rows * cols;
    let data = pixels[..keep * dim].iter().map(|&p| f64::from(p) / 255.0).collect();
    Dataset::new(
        name,
        Matrix::new(keep, dim, data)?,
        label_bytes[..keep].iter().map(|&l| usize::from(l)).collect(),
    )
}

pub fn load_idx(image_path: &Path, label_path: &Path, limit: Option<usize>) -> Result<Dataset> {
    let read = |p: &Path| -> Result<Vec<u8>> {
        if !p.exists() {
            return Err(Error::MissingData { path: p.to_path_buf() });
        }
        Ok(fs::read(p)?)
    };
    let name = image_path
        .file_name()
        .map_or_else(|| "idx".to_string(), |n| n.to_string_lossy().into_owned());
    decode_idx(&read(image_path)?, &read(label_path)?, limit, &name)
}

/// The first 55,000 training records from `dir`.
pub fn mnist_train(dir: &Path) -> Result<Dataset> {
    load_idx(
        &dir.join(TRAIN_IMAGES),
        &dir.join(TRAIN_LABELS),
        Some(MNIST_TRAIN_RECORDS),
    )
}

/// The full 10,000-record test set from `dir`.
pub fn mnist_test(dir: &Path) -> Result<Dataset> {
    load_idx(&dir.join(TEST_IMAGES), &dir.join(TEST_LABELS), None)
}

/// Paths of the four MNIST files, for presence checks and error hints.
pub fn mnist_files(dir: &Path) -> [PathBuf; 4] {
    [TRAIN_IMAGES, TRAIN_LABELS, TEST_IMAGES, TEST_LABELS].map(|f| dir.join(f))
}
