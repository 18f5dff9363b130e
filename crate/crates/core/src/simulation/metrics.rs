//! Segmentation evaluation metrics over binary label maps.

use crate::numeric::compensated_sum;

use super::SimulationError;

/// Binary segmentation mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    height: usize,
    width: usize,
    values: Vec<bool>,
}

impl LabelMap {
    pub fn new(height: usize, width: usize, values: Vec<bool>) -> Result<Self, SimulationError> {
        if height == 0 || width == 0 {
            return Err(SimulationError::EmptyLabelMap);
        }
        if values.len() != height * width {
            return Err(SimulationError::LabelLengthMismatch {
                expected: height * width,
                got: values.len(),
            });
        }
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

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn pixel_count(&self) -> usize {
        self.values.len()
    }
}

fn check_same_shape(pred: &LabelMap, truth: &LabelMap) -> Result<(), SimulationError> {
    if pred.height != truth.height || pred.width != truth.width {
        return Err(SimulationError::LabelShapeMismatch {
            pred_height: pred.height,
            pred_width: pred.width,
            truth_height: truth.height,
            truth_width: truth.width,
        });
    }
    Ok(())
}

/// Mean intersection-over-union over the background and foreground classes.
/// A class absent from both maps contributes 1.
pub fn mean_iu(pred: &LabelMap, truth: &LabelMap) -> Result<f64, SimulationError> {
    check_same_shape(pred, truth)?;
    let mut per_class = [0.0; 2];
    for (class, &positive) in [false, true].iter().enumerate() {
        let mut intersection = 0usize;
        let mut union = 0usize;
        for (&p, &t) in pred.values.iter().zip(&truth.values) {
            let p = p == positive;
            let t = t == positive;
            intersection += usize::from(p && t);
            union += usize::from(p || t);
        }
        per_class[class] = if union == 0 {
            1.0
        } else {
            intersection as f64 / union as f64
        };
    }
    Ok((per_class[0] + per_class[1]) / 2.0)
}

/// Pixel-level F1 on the foreground class. Both maps empty counts as a
/// perfect 1; exactly one empty counts as 0.
pub fn pixel_f1(pred: &LabelMap, truth: &LabelMap) -> Result<f64, SimulationError> {
    check_same_shape(pred, truth)?;
    let mut true_positive = 0usize;
    let mut pred_positive = 0usize;
    let mut truth_positive = 0usize;
    for (&p, &t) in pred.values.iter().zip(&truth.values) {
        true_positive += usize::from(p && t);
        pred_positive += usize::from(p);
        truth_positive += usize::from(t);
    }
    if pred_positive == 0 && truth_positive == 0 {
        return Ok(1.0);
    }
    if pred_positive == 0 || truth_positive == 0 {
        return Ok(0.0);
    }
    let precision = true_positive as f64 / pred_positive as f64;
    let recall = true_positive as f64 / truth_positive as f64;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

/// Average ranks with ties sharing the mean of their rank block.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite"));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Ranks are 1-based; a tie block shares its midpoint rank.
        let shared = (start + 1 + end) as f64 / 2.0;
        for &position in &order[start..end] {
            ranks[position] = shared;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation; `None` when either input is constant.
pub fn spearman_rank_correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let ranks_a = average_ranks(a);
    let ranks_b = average_ranks(b);
    let n = a.len() as f64;
    let mean_a = compensated_sum(ranks_a.iter().copied()) / n;
    let mean_b = compensated_sum(ranks_b.iter().copied()) / n;
    let cov = compensated_sum(
        ranks_a
            .iter()
            .zip(&ranks_b)
            .map(|(&x, &y)| (x - mean_a) * (y - mean_b)),
    );
    let var_a = compensated_sum(ranks_a.iter().map(|&x| (x - mean_a) * (x - mean_a)));
    let var_b = compensated_sum(ranks_b.iter().map(|&y| (y - mean_b) * (y - mean_b)));
    if var_a == 0.0 || var_b == 0.0 {
        return None;
    }
    Some(cov / (var_a.sqrt() * var_b.sqrt()))
}
