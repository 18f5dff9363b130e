//! Ensemble disagreement as uncertainty.
//!
//! Several models trained on with-replacement resamples of the training set
//! each emit a foreground-probability map per image. The per-pixel population
//! variance across those maps is the uncertainty map, and its mean over
//! pixels is the image's uncertainty score. Variance of a `[0, 1]`-bounded
//! value never exceeds 1/4, which bounds both types.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::numeric::compensated_sum;
use crate::rng::SplitMix64;
use crate::tensor::write_bytes_atomically;

#[derive(Debug, Error, PartialEq)]
pub enum UncertaintyError {
    #[error("dimension must be at least 1, got {name} = 0")]
    ZeroDimension { name: &'static str },
    #[error("expected {expected} values for the declared shape, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("value {value} at index {index} is outside [{min}, {max}]")]
    OutOfRange {
        index: usize,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("an ensemble needs at least 2 members, got {got}")]
    TooFewMembers { got: usize },
    #[error("map {index} is {got_height}x{got_width}, expected {height}x{width}")]
    MapShapeMismatch {
        index: usize,
        got_height: usize,
        got_width: usize,
        height: usize,
        width: usize,
    },
    #[error("training set must contain at least one sample")]
    EmptyTrainingSet,
}

fn check_range(values: &[f64], min: f64, max: f64) -> Result<(), UncertaintyError> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(UncertaintyError::NonFinite { index, value });
        }
        if value < min || value > max {
            return Err(UncertaintyError::OutOfRange {
                index,
                value,
                min,
                max,
            });
        }
    }
    Ok(())
}

/// Per-pixel foreground probabilities produced by one ensemble member.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl ProbabilityMap {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self, UncertaintyError> {
        if height == 0 {
            return Err(UncertaintyError::ZeroDimension { name: "height" });
        }
        if width == 0 {
            return Err(UncertaintyError::ZeroDimension { name: "width" });
        }
        if values.len() != height * width {
            return Err(UncertaintyError::LengthMismatch {
                expected: height * width,
                got: values.len(),
            });
        }
        check_range(&values, 0.0, 1.0)?;
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Per-pixel ensemble variance; values lie in `[0, 1/4]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl UncertaintyMap {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self, UncertaintyError> {
        if height == 0 {
            return Err(UncertaintyError::ZeroDimension { name: "height" });
        }
        if width == 0 {
            return Err(UncertaintyError::ZeroDimension { name: "width" });
        }
        if values.len() != height * width {
            return Err(UncertaintyError::LengthMismatch {
                expected: height * width,
                got: values.len(),
            });
        }
        check_range(&values, 0.0, 0.25)?;
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Mean pixel uncertainty of one image, in `[0, 1/4]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct UncertaintyScore(f64);

impl UncertaintyScore {
    pub fn new(value: f64) -> Result<Self, UncertaintyError> {
        check_range(std::slice::from_ref(&value), 0.0, 0.25)?;
        Ok(Self(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// With-replacement resampling plan for training an ensemble externally.
///
/// Each of the `n_models` index lists has exactly `n_train` entries drawn
/// uniformly with replacement from `[0, n_train)`, generated by a single
/// [`SplitMix64`] stream so the plan is reproducible from the seed alone.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapPlan {
    n_models: usize,
    n_train: usize,
    seed: u64,
    index_sets: Vec<Vec<usize>>,
}

impl BootstrapPlan {
    pub fn n_models(&self) -> usize {
        self.n_models
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index_sets(&self) -> &[Vec<usize>] {
        &self.index_sets
    }

    /// Plain-text form consumed by external training code: one line per
    /// model, indices separated by single spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for set in &self.index_sets {
            for (position, index) in set.iter().enumerate() {
                if position > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{index}");
            }
            out.push('\n');
        }
        out
    }

    /// Writes the plain-text form atomically.
    pub fn write_text(&self, path: &Path) -> std::io::Result<()> {
        write_bytes_atomically(path, self.to_text().as_bytes())
    }
}

/// Draws a bootstrap resampling plan. Needs at least two models, since the
/// variance of a single model is degenerate.
pub fn bootstrap_plan(
    n_models: usize,
    n_train: usize,
    seed: u64,
) -> Result<BootstrapPlan, UncertaintyError> {
    if n_models < 2 {
        return Err(UncertaintyError::TooFewMembers { got: n_models });
    }
    if n_train == 0 {
        return Err(UncertaintyError::EmptyTrainingSet);
    }
    let mut rng = SplitMix64::new(seed);
    let index_sets = (0..n_models)
        .map(|_| {
            (0..n_train)
                .map(|_| rng.next_below(n_train as u64) as usize)
                .collect()
        })
        .collect();
    Ok(BootstrapPlan {
        n_models,
        n_train,
        seed,
        index_sets,
    })
}

/// Per-pixel population variance across an ensemble of probability maps.
///
/// The N values at each pixel are sorted before accumulation, so the result
/// is exactly invariant to the order the maps are supplied in.
pub fn pixel_uncertainty(maps: &[ProbabilityMap]) -> Result<UncertaintyMap, UncertaintyError> {
    if maps.len() < 2 {
        return Err(UncertaintyError::TooFewMembers { got: maps.len() });
    }
    let height = maps[0].height();
    let width = maps[0].width();
    for (index, map) in maps.iter().enumerate() {
        if map.height() != height || map.width() != width {
            return Err(UncertaintyError::MapShapeMismatch {
                index,
                got_height: map.height(),
                got_width: map.width(),
                height,
                width,
            });
        }
    }

    let count = maps.len() as f64;
    let mut pixel_values = vec![0.0; maps.len()];
    let variances = (0..height * width)
        .map(|pixel| {
            for (slot, map) in maps.iter().enumerate() {
                pixel_values[slot] = map.values()[pixel];
            }
            pixel_values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
            let mean = compensated_sum(pixel_values.iter().copied()) / count;
            let variance = compensated_sum(pixel_values.iter().map(|&v| {
                let dev = v - mean;
                dev * dev
            })) / count;
            variance.min(0.25)
        })
        .collect();
    Ok(UncertaintyMap {
        height,
        width,
        values: variances,
    })
}

/// Mean pixel uncertainty: the image-level score.
pub fn image_uncertainty(map: &UncertaintyMap) -> UncertaintyScore {
    let pixels = (map.height() * map.width()) as f64;
    let mean = compensated_sum(map.values().iter().copied()) / pixels;
    UncertaintyScore(mean.min(0.25))
}
