//! Binary tensor interchange format.
//!
//! Layout, all little-endian:
//!
//! ```text
//! bytes 0..4   magic "SAT1"
//! bytes 4..8   ndim: u32
//! then         ndim dimension sizes, u32 each
//! then         product(dims) IEEE-754 binary32 payload values,
//!              row-major with the last dimension fastest
//! ```
//!
//! The declared size must match the file length exactly and every payload
//! value must be finite. Feature maps are three-dimensional
//! (`height x width x channels`); probability maps are two-dimensional
//! (`height x width`). Writers emit through a temp file in the target
//! directory followed by a rename, so readers never observe a partial file.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use crate::descriptor::{DescriptorError, FeatureMap};
use crate::uncertainty::{ProbabilityMap, UncertaintyError};

/// File magic for the tensor format.
pub const MAGIC: [u8; 4] = *b"SAT1";

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic {found:?} at byte offset 0, expected {MAGIC:?}")]
    BadMagic { found: [u8; 4] },
    #[error("file is {found} bytes but the header declares {expected}")]
    LengthMismatch { expected: u64, found: u64 },
    #[error("header truncated: file is {found} bytes, need at least {needed}")]
    HeaderTruncated { needed: u64, found: u64 },
    #[error("tensor must have at least one dimension")]
    EmptyDims,
    #[error("dimension {axis} is zero")]
    ZeroDim { axis: usize },
    #[error("tensor shape overflows the addressable payload size")]
    Overflow,
    #[error("non-finite payload value at index {index} (byte offset {offset})")]
    NonFinite { index: usize, offset: u64 },
    #[error("expected a {expected}-dimensional tensor, found {found} dimensions")]
    DimCount { expected: usize, found: usize },
    #[error(transparent)]
    Feature(#[from] DescriptorError),
    #[error(transparent)]
    Probability(#[from] UncertaintyError),
}

/// Raw decoded tensor: shape plus flat payload.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    values: Vec<f32>,
}

impl Tensor {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Interprets a `height x width x channels` tensor as a feature map,
    /// enforcing nonnegativity.
    pub fn into_feature_map(self) -> Result<FeatureMap, TensorError> {
        if self.dims.len() != 3 {
            return Err(TensorError::DimCount {
                expected: 3,
                found: self.dims.len(),
            });
        }
        let values = self.values.iter().map(|&v| f64::from(v)).collect();
        Ok(FeatureMap::new(
            self.dims[0],
            self.dims[1],
            self.dims[2],
            values,
        )?)
    }

    /// Interprets a `height x width` tensor as a probability map, enforcing
    /// the `[0, 1]` range.
    pub fn into_probability_map(self) -> Result<ProbabilityMap, TensorError> {
        if self.dims.len() != 2 {
            return Err(TensorError::DimCount {
                expected: 2,
                found: self.dims.len(),
            });
        }
        let values = self.values.iter().map(|&v| f64::from(v)).collect();
        Ok(ProbabilityMap::new(self.dims[0], self.dims[1], values)?)
    }
}

fn payload_offset(ndim: usize) -> u64 {
    8 + 4 * ndim as u64
}

/// Decodes a tensor file, validating magic, shape, exact length, and payload
/// finiteness.
pub fn read_tensor(path: &Path) -> Result<Tensor, TensorError> {
    let bytes = fs::read(path)?;
    decode_tensor(&bytes)
}

/// Decodes a tensor from an in-memory byte buffer.
pub fn decode_tensor(bytes: &[u8]) -> Result<Tensor, TensorError> {
    let len = bytes.len() as u64;
    if len < 8 {
        return Err(TensorError::HeaderTruncated {
            needed: 8,
            found: len,
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().expect("slice of length 4");
    if magic != MAGIC {
        return Err(TensorError::BadMagic { found: magic });
    }
    let ndim = u32::from_le_bytes(bytes[4..8].try_into().expect("slice of length 4")) as usize;
    if ndim == 0 {
        return Err(TensorError::EmptyDims);
    }
    let header_len = payload_offset(ndim);
    if len < header_len {
        return Err(TensorError::HeaderTruncated {
            needed: header_len,
            found: len,
        });
    }

    let mut dims = Vec::with_capacity(ndim);
    let mut count: u64 = 1;
    for axis in 0..ndim {
        let start = 8 + 4 * axis;
        let dim = u32::from_le_bytes(bytes[start..start + 4].try_into().expect("4 bytes"));
        if dim == 0 {
            return Err(TensorError::ZeroDim { axis });
        }
        dims.push(dim as usize);
        count = count.checked_mul(u64::from(dim)).ok_or(TensorError::Overflow)?;
    }
    let expected = header_len
        .checked_add(count.checked_mul(4).ok_or(TensorError::Overflow)?)
        .ok_or(TensorError::Overflow)?;
    if len != expected {
        return Err(TensorError::LengthMismatch {
            expected,
            found: len,
        });
    }

    let mut values = Vec::with_capacity(count as usize);
    for index in 0..count as usize {
        let start = header_len as usize + 4 * index;
        let value = f32::from_le_bytes(bytes[start..start + 4].try_into().expect("4 bytes"));
        if !value.is_finite() {
            return Err(TensorError::NonFinite {
                index,
                offset: start as u64,
            });
        }
        values.push(value);
    }
    Ok(Tensor { dims, values })
}

/// Encodes a tensor into the exact on-disk byte layout.
pub fn encode_tensor(dims: &[usize], values: &[f32]) -> Result<Vec<u8>, TensorError> {
    if dims.is_empty() {
        return Err(TensorError::EmptyDims);
    }
    let mut count: u64 = 1;
    for (axis, &dim) in dims.iter().enumerate() {
        if dim == 0 {
            return Err(TensorError::ZeroDim { axis });
        }
        if u32::try_from(dim).is_err() {
            return Err(TensorError::Overflow);
        }
        count = count
            .checked_mul(dim as u64)
            .ok_or(TensorError::Overflow)?;
    }
    if values.len() as u64 != count {
        return Err(TensorError::LengthMismatch {
            expected: payload_offset(dims.len()) + count * 4,
            found: payload_offset(dims.len()) + values.len() as u64 * 4,
        });
    }
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(TensorError::NonFinite {
                index,
                offset: payload_offset(dims.len()) + 4 * index as u64,
            });
        }
    }

    let mut bytes = Vec::with_capacity((payload_offset(dims.len()) + count * 4) as usize);
    bytes.extend_from_slice(&MAGIC);
    bytes.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &dim in dims {
        bytes.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for &value in values {
        bytes.extend_from_slice(&value.to_le_bytes());
    }
    Ok(bytes)
}

/// Writes a tensor file atomically (temp file in the same directory, then
/// rename).
pub fn write_tensor(path: &Path, dims: &[usize], values: &[f32]) -> Result<(), TensorError> {
    let bytes = encode_tensor(dims, values)?;
    write_bytes_atomically(path, &bytes)?;
    Ok(())
}

/// Reads a feature map tensor (`height x width x channels`).
pub fn read_feature_map(path: &Path) -> Result<FeatureMap, TensorError> {
    read_tensor(path)?.into_feature_map()
}

/// Reads a probability map tensor (`height x width`).
pub fn read_probability_map(path: &Path) -> Result<ProbabilityMap, TensorError> {
    read_tensor(path)?.into_probability_map()
}

/// Atomic whole-file write used for every output this crate produces.
pub fn write_bytes_atomically(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    let mut temp = tempfile::NamedTempFile::new_in(dir)?;
    temp.write_all(bytes)?;
    temp.flush()?;
    temp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
