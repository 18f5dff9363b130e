//! Image descriptors and pairwise similarity.
//!
//! An encoder feature map is condensed to one value per channel by averaging
//! over its spatial extent; the cosine similarity of two such descriptors is
//! the similarity estimate between the corresponding images. Feature values
//! are required to be nonnegative at ingest (they come from a rectifying
//! nonlinearity), which is what pins every similarity into `[0, 1]`.

use rayon::prelude::*;
use thiserror::Error;

use crate::numeric::{compensated_dot, compensated_sum};

#[derive(Debug, Error, PartialEq)]
pub enum DescriptorError {
    #[error("dimension must be at least 1, got {name} = 0")]
    ZeroDimension { name: &'static str },
    #[error("expected {expected} values for the declared shape, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("negative value {value} at index {index}; feature activations must be nonnegative")]
    Negative { index: usize, value: f64 },
    #[error("descriptor dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("descriptor list is empty")]
    EmptyList,
    #[error("similarity matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("similarity entry {value} at ({row}, {col}) is outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },
    #[error("diagonal entry at {row} must be 1 (or 0 with an all-zero row), got {value}")]
    BadDiagonal { row: usize, value: f64 },
}

fn check_nonnegative_finite(values: &[f64]) -> Result<(), DescriptorError> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(DescriptorError::NonFinite { index, value });
        }
        if value < 0.0 {
            return Err(DescriptorError::Negative { index, value });
        }
    }
    Ok(())
}

/// Encoder feature map of shape `height x width x channels`, stored row-major
/// with the channel axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    height: usize,
    width: usize,
    channels: usize,
    values: Vec<f64>,
}

impl FeatureMap {
    /// Validates shape, finiteness and nonnegativity of every activation.
    pub fn new(
        height: usize,
        width: usize,
        channels: usize,
        values: Vec<f64>,
    ) -> Result<Self, DescriptorError> {
        for (name, dim) in [("height", height), ("width", width), ("channels", channels)] {
            if dim == 0 {
                return Err(DescriptorError::ZeroDimension { name });
            }
        }
        let expected = height * width * channels;
        if values.len() != expected {
            return Err(DescriptorError::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        check_nonnegative_finite(&values)?;
        Ok(Self {
            height,
            width,
            channels,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Condensed per-image feature vector: one entry per source channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    values: Vec<f64>,
}

impl Descriptor {
    pub fn new(values: Vec<f64>) -> Result<Self, DescriptorError> {
        if values.is_empty() {
            return Err(DescriptorError::ZeroDimension { name: "dims" });
        }
        check_nonnegative_finite(&values)?;
        Ok(Self { values })
    }

    pub fn dims(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// True when every entry is zero; such a descriptor represents nothing
    /// and has similarity 0 to every image, itself included.
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Symmetric matrix of pairwise similarities over an image collection, every
/// entry in `[0, 1]`, with unit diagonal for nonzero descriptors.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SimilarityMatrix {
    /// Builds a matrix from row-major entries, validating the type
    /// invariants. A zero diagonal entry is accepted only when its whole row
    /// is zero (the zero-descriptor convention).
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self, DescriptorError> {
        if n == 0 {
            return Err(DescriptorError::EmptyList);
        }
        if entries.len() != n * n {
            return Err(DescriptorError::LengthMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        for row in 0..n {
            for col in 0..n {
                let value = entries[row * n + col];
                if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                    return Err(DescriptorError::EntryOutOfRange { row, col, value });
                }
                if entries[row * n + col] != entries[col * n + row] {
                    return Err(DescriptorError::NotSymmetric { row, col });
                }
            }
            let diagonal = entries[row * n + row];
            let row_is_zero = entries[row * n..(row + 1) * n].iter().all(|&v| v == 0.0);
            if diagonal != 1.0 && !row_is_zero {
                return Err(DescriptorError::BadDiagonal {
                    row,
                    value: diagonal,
                });
            }
        }
        Ok(Self { n, entries })
    }

    /// Number of images the matrix covers.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Similarity between images `i` and `j`.
    ///
    /// # Panics
    /// Panics if either index is out of range.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.n, "similarity index out of range");
        self.entries[i * self.n + j]
    }
}

/// Channel-wise mean of a feature map: the image descriptor.
pub fn channel_mean(map: &FeatureMap) -> Descriptor {
    let channels = map.channels();
    let pixels = (map.height() * map.width()) as f64;
    let values = map.values();
    let means = (0..channels)
        .map(|channel| {
            compensated_sum(
                values
                    .iter()
                    .skip(channel)
                    .step_by(channels)
                    .copied(),
            ) / pixels
        })
        .collect();
    // Means of valid activations are finite and nonnegative.
    Descriptor::new(means).expect("channel means of a valid feature map are valid")
}

fn cosine(a: &Descriptor, b: &Descriptor) -> f64 {
    let norm_a = compensated_dot(a.values(), a.values());
    let norm_b = compensated_dot(b.values(), b.values());
    if norm_a == 0.0 || norm_b == 0.0 {
        return 0.0;
    }
    if a.values() == b.values() {
        // Exact unit similarity for identical descriptors; the computed
        // ratio can land one ulp off on either side.
        return 1.0;
    }
    let dot = compensated_dot(a.values(), b.values());
    (dot / (norm_a.sqrt() * norm_b.sqrt())).clamp(0.0, 1.0)
}

/// Cosine similarity of two descriptors, in `[0, 1]`.
///
/// A zero-norm descriptor has similarity 0 to everything, itself included.
pub fn similarity(a: &Descriptor, b: &Descriptor) -> Result<f64, DescriptorError> {
    if a.dims() != b.dims() {
        return Err(DescriptorError::DimensionMismatch {
            left: a.dims(),
            right: b.dims(),
        });
    }
    Ok(cosine(a, b))
}

/// Pairwise similarity matrix over a descriptor collection.
///
/// Rows are computed in parallel; each entry's summation order is fixed, so
/// the result is bit-identical to a sequential evaluation.
pub fn similarity_matrix(descriptors: &[Descriptor]) -> Result<SimilarityMatrix, DescriptorError> {
    let n = descriptors.len();
    if n == 0 {
        return Err(DescriptorError::EmptyList);
    }
    let dims = descriptors[0].dims();
    for d in descriptors {
        if d.dims() != dims {
            return Err(DescriptorError::DimensionMismatch {
                left: dims,
                right: d.dims(),
            });
        }
    }

    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| cosine(&descriptors[i], &descriptors[j]))
                .collect()
        })
        .collect();

    let mut entries = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (offset, &value) in row.iter().enumerate() {
            let j = i + offset;
            entries[i * n + j] = value;
            entries[j * n + i] = value;
        }
    }
    Ok(SimilarityMatrix { n, entries })
}
