//! Compensated floating-point accumulation shared across the crate.
//!
//! Means, dot products, and objective sums all use Neumaier summation in a
//! fixed left-to-right order, which keeps descriptor-level quantities within
//! 1e-9 relative error and makes results independent of thread count.

/// Neumaier-compensated sum over an iterator, in iteration order.
pub(crate) fn compensated_sum<I>(values: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for value in values {
        let total = sum + value;
        if sum.abs() >= value.abs() {
            compensation += (sum - total) + value;
        } else {
            compensation += (value - total) + sum;
        }
        sum = total;
    }
    sum + compensation
}

/// Compensated dot product of two equally long slices.
pub(crate) fn compensated_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_exactly_representable_values() {
        assert_eq!(compensated_sum([1.0, 2.0, 3.0, 4.0]), 10.0);
        assert_eq!(compensated_sum(std::iter::empty()), 0.0);
    }

    #[test]
    fn recovers_cancellation_that_naive_summation_loses() {
        // 1 + 1e100 - 1e100 - 1 == 0; naive summation returns -1 here.
        let values = [1.0, 1e100, -1e100, -1.0];
        assert_eq!(compensated_sum(values.iter().copied()), 0.0);
    }

    #[test]
    fn dot_matches_hand_computation() {
        assert_eq!(compensated_dot(&[1.0, 2.0], &[3.0, 4.0]), 11.0);
    }
}
