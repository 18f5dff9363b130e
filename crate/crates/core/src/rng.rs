//! Seeded, portable pseudo-random number generation.
//!
//! Everything random in this crate flows through [`SplitMix64`] so that
//! bootstrap plans, random query baselines, and synthetic benchmarks are
//! reproducible bit-for-bit across platforms and reimplementable in any
//! language. The algorithm is Steele, Lea & Flood's SplitMix64: the state
//! advances by the golden-ratio increment `0x9E3779B97F4A7C15` and each
//! output is the finalizer
//!
//! ```text
//! z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//! z ^= z >> 27; z *= 0x94D049BB133111EB;
//! z ^= z >> 31;
//! ```
//!
//! Bounded draws use Lemire's multiply-shift rejection method, and floats
//! take the top 53 bits of an output, so those are portable too.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer. Bijective, so distinct inputs give distinct
/// well-mixed outputs; also used to derive decorrelated substream seeds.
pub fn mix64(value: u64) -> u64 {
    let mut z = value;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    /// Generator seeded directly with `seed` as the initial state.
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Decorrelated generator for stream `index` under a shared base seed.
    ///
    /// The index is scrambled through [`mix64`] before being folded into the
    /// seed, so consecutive indices start from unrelated states instead of
    /// adjacent points of one sequence.
    pub fn substream(seed: u64, index: u64) -> Self {
        Self::new(seed ^ mix64(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))))
    }

    /// Next 64 uniformly distributed bits.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform draw from `[0, 1)` with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased uniform draw from `[0, bound)`.
    ///
    /// Lemire's method: widen-multiply the raw draw by the bound and keep the
    /// high word, rejecting the few low-word values that would bias the
    /// result.
    ///
    /// # Panics
    /// Panics if `bound` is zero.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let mut product = u128::from(self.next_u64()) * u128::from(bound);
        let mut low = product as u64;
        if low < bound {
            let threshold = bound.wrapping_neg() % bound;
            while low < threshold {
                product = u128::from(self.next_u64()) * u128::from(bound);
                low = product as u64;
            }
        }
        (product >> 64) as u64
    }

    /// First `count` elements of a seeded Fisher-Yates shuffle of `items`.
    pub fn sample_without_replacement(&mut self, mut items: Vec<usize>, count: usize) -> Vec<usize> {
        let take = count.min(items.len());
        for slot in 0..take {
            let offset = self.next_below((items.len() - slot) as u64) as usize;
            items.swap(slot, slot + offset);
        }
        items.truncate(take);
        items
    }
}
