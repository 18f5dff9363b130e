//! Batch selection: top-K uncertainty filtering followed by greedy
//! maximization of representativeness.
//!
//! An unannotated image is represented by its most similar selected image,
//! `f(S, x) = max_{i in S} sim(i, x)`, and a selection's value is
//! `F(S) = sum_x f(S, x)` over the whole unannotated pool. With binary
//! similarities this is exactly max k-cover, so `F` is monotone submodular
//! and plain greedy achieves the usual `1 - 1/e` bound. The argmax at each
//! step compares exact floating-point gains and breaks ties toward the
//! lowest image id, which makes the whole selection reproducible across
//! platforms and thread counts.
//!
//! [`brute_force_select`] enumerates all candidate subsets as an exact
//! oracle; it refuses instances beyond its configured enumeration cap.

use rayon::prelude::*;
use thiserror::Error;

use crate::descriptor::SimilarityMatrix;
use crate::numeric::compensated_sum;
use crate::uncertainty::UncertaintyScore;

#[derive(Debug, Error, PartialEq)]
pub enum SuggestionError {
    #[error("batch size must satisfy 1 <= k <= K, got k = {batch}, K = {candidates}")]
    InvalidConfig { batch: usize, candidates: usize },
    #[error("pool has no unannotated images")]
    EmptyPool,
    #[error("image id {id} is not covered by the similarity matrix of {n} images")]
    UnknownId { id: usize, n: usize },
    #[error("duplicate unannotated id {id}")]
    DuplicateId { id: usize },
    #[error("need {expected} uncertainty scores (one per similarity row), got {got}")]
    ScoreCount { expected: usize, got: usize },
    #[error(
        "exhaustive search over C({candidates}, {batch}) = {combinations} subsets exceeds the cap \
         of {cap}; use the greedy selection instead"
    )]
    EnumerationCapExceeded {
        candidates: usize,
        batch: usize,
        combinations: u64,
        cap: u64,
    },
}

/// Tie-breaking policy applied wherever equal scores or gains compete.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Among equal values, prefer the smallest image id.
    #[default]
    LowestId,
}

/// Selection parameters: how many images to pick per stage (`k` on the
/// command line), how many top-uncertainty candidates to consider (`K`), the
/// tie-break policy, and the subset-enumeration cap for the exact oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct SuggestionConfig {
    batch_size: usize,
    candidate_count: usize,
    tie_break: TieBreak,
    enumeration_cap: u64,
}

pub const DEFAULT_ENUMERATION_CAP: u64 = 2_000_000;

impl SuggestionConfig {
    pub fn new(batch_size: usize, candidate_count: usize) -> Result<Self, SuggestionError> {
        if batch_size == 0 || batch_size > candidate_count {
            return Err(SuggestionError::InvalidConfig {
                batch: batch_size,
                candidates: candidate_count,
            });
        }
        Ok(Self {
            batch_size,
            candidate_count,
            tie_break: TieBreak::LowestId,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    pub fn with_enumeration_cap(mut self, cap: u64) -> Self {
        self.enumeration_cap = cap;
        self
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn candidate_count(&self) -> usize {
        self.candidate_count
    }

    pub fn tie_break(&self) -> TieBreak {
        self.tie_break
    }

    pub fn enumeration_cap(&self) -> u64 {
        self.enumeration_cap
    }
}

impl Default for SuggestionConfig {
    /// One suggestion stage of 8 images filtered from the 16 most uncertain.
    fn default() -> Self {
        Self::new(8, 16).expect("default configuration is valid")
    }
}

/// Selection input: the unannotated ids, an uncertainty score per image id,
/// and the similarity matrix over the whole collection.
#[derive(Debug)]
pub struct Pool<'a> {
    unannotated: Vec<usize>,
    scores: Vec<f64>,
    sim: &'a SimilarityMatrix,
}

impl<'a> Pool<'a> {
    /// `scores` must hold one entry per similarity-matrix row; entries for
    /// annotated images are ignored.
    pub fn new(
        unannotated: Vec<usize>,
        scores: &[UncertaintyScore],
        sim: &'a SimilarityMatrix,
    ) -> Result<Self, SuggestionError> {
        if scores.len() != sim.len() {
            return Err(SuggestionError::ScoreCount {
                expected: sim.len(),
                got: scores.len(),
            });
        }
        let mut seen = vec![false; sim.len()];
        for &id in &unannotated {
            if id >= sim.len() {
                return Err(SuggestionError::UnknownId { id, n: sim.len() });
            }
            if seen[id] {
                return Err(SuggestionError::DuplicateId { id });
            }
            seen[id] = true;
        }
        Ok(Self {
            unannotated,
            scores: scores.iter().map(|s| s.value()).collect(),
            sim,
        })
    }

    pub fn unannotated(&self) -> &[usize] {
        &self.unannotated
    }

    pub fn score(&self, id: usize) -> f64 {
        self.scores[id]
    }

    pub fn similarity(&self) -> &SimilarityMatrix {
        self.sim
    }
}

/// A selected batch: ids in selection order, the achieved objective
/// `F(selected, unannotated)`, and the per-step marginal gains.
#[derive(Debug, Clone, PartialEq)]
pub struct Suggestion {
    selected: Vec<usize>,
    objective: f64,
    marginal_gains: Vec<f64>,
}

impl Suggestion {
    pub fn selected_ids(&self) -> &[usize] {
        &self.selected
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn marginal_gains(&self) -> &[f64] {
        &self.marginal_gains
    }
}

/// The `count` unannotated ids with the highest uncertainty, ordered by
/// descending score with ties broken toward lower ids.
pub fn top_k_uncertain(pool: &Pool, count: usize) -> Vec<usize> {
    let mut ids = pool.unannotated().to_vec();
    ids.sort_unstable_by(|&a, &b| {
        pool.score(b)
            .partial_cmp(&pool.score(a))
            .expect("scores are finite")
            .then_with(|| a.cmp(&b))
    });
    ids.truncate(count);
    ids
}

/// How well `selected` represents one image: its best similarity to any
/// selected image, or 0 for an empty selection.
pub fn representativeness_one(selected: &[usize], target: usize, sim: &SimilarityMatrix) -> f64 {
    selected
        .iter()
        .map(|&id| sim.get(id, target))
        .fold(0.0, f64::max)
}

/// Representativeness of `selected` for the whole `universe`: the sum of
/// per-image best similarities.
pub fn representativeness(selected: &[usize], universe: &[usize], sim: &SimilarityMatrix) -> f64 {
    compensated_sum(
        universe
            .iter()
            .map(|&target| representativeness_one(selected, target, sim)),
    )
}

/// Candidate gain evaluated against the running best-similarity vector.
fn marginal_gain(candidate: usize, universe: &[usize], covered: &[f64], sim: &SimilarityMatrix) -> f64 {
    compensated_sum(universe.iter().zip(covered).map(|(&target, &best)| {
        let s = sim.get(candidate, target);
        if s > best {
            s - best
        } else {
            0.0
        }
    }))
}

/// Prefer the higher gain; on exact ties, the lower id.
fn better(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
        a
    } else {
        b
    }
}

/// Greedy batch selection: filter to the top-`K` uncertain candidates, then
/// repeatedly add the candidate with the largest marginal representativeness
/// gain until `k` images are chosen (or candidates run out).
///
/// Candidate gains within one step may be evaluated in parallel; each gain
/// uses a fixed summation order and the argmax reduction is value-then-id,
/// so the outcome is identical at any thread count.
pub fn greedy_select(pool: &Pool, config: &SuggestionConfig) -> Result<Suggestion, SuggestionError> {
    if pool.unannotated().is_empty() {
        return Err(SuggestionError::EmptyPool);
    }
    let candidates = top_k_uncertain(pool, config.candidate_count());
    let take = config.batch_size().min(candidates.len());
    let universe = pool.unannotated();
    let sim = pool.similarity();

    let mut covered = vec![0.0; universe.len()];
    let mut available = candidates;
    let mut selected = Vec::with_capacity(take);
    let mut marginal_gains = Vec::with_capacity(take);

    for _ in 0..take {
        let (gain, id) = available
            .par_iter()
            .map(|&candidate| (marginal_gain(candidate, universe, &covered, sim), candidate))
            .reduce(|| (f64::NEG_INFINITY, usize::MAX), better);
        selected.push(id);
        marginal_gains.push(gain);
        available.retain(|&c| c != id);
        for (slot, &target) in universe.iter().enumerate() {
            let s = sim.get(id, target);
            if s > covered[slot] {
                covered[slot] = s;
            }
        }
    }

    let objective = representativeness(&selected, universe, sim);
    Ok(Suggestion {
        selected,
        objective,
        marginal_gains,
    })
}

fn binomial(n: usize, k: usize) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result.checked_mul((n - i) as u128)?;
        result /= (i + 1) as u128;
        if result > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(result as u64)
}

/// Exact selection oracle: enumerates every `k`-subset of the candidate set
/// and returns one with globally maximal representativeness.
///
/// Subsets are visited in lexicographic order of ascending candidate ids and
/// replaced only on strictly larger objectives, so ties resolve to the
/// lexicographically smallest id set. Errors when the enumeration would
/// exceed the configured cap.
pub fn brute_force_select(
    pool: &Pool,
    config: &SuggestionConfig,
) -> Result<Suggestion, SuggestionError> {
    if pool.unannotated().is_empty() {
        return Err(SuggestionError::EmptyPool);
    }
    let mut candidates = top_k_uncertain(pool, config.candidate_count());
    candidates.sort_unstable();
    let take = config.batch_size().min(candidates.len());
    let combinations = binomial(candidates.len(), take);
    match combinations {
        Some(c) if c <= config.enumeration_cap() => {}
        _ => {
            return Err(SuggestionError::EnumerationCapExceeded {
                candidates: candidates.len(),
                batch: take,
                combinations: combinations.unwrap_or(u64::MAX),
                cap: config.enumeration_cap(),
            });
        }
    }

    let universe = pool.unannotated();
    let sim = pool.similarity();

    let mut picks: Vec<usize> = (0..take).collect();
    let mut best_subset: Vec<usize> = picks.iter().map(|&p| candidates[p]).collect();
    let mut best_objective = representativeness(&best_subset, universe, sim);
    while next_combination(&mut picks, candidates.len()) {
        let subset: Vec<usize> = picks.iter().map(|&p| candidates[p]).collect();
        let objective = representativeness(&subset, universe, sim);
        if objective > best_objective {
            best_objective = objective;
            best_subset = subset;
        }
    }

    // Report the winner as if added in ascending id order; monotonicity
    // keeps every step gain nonnegative.
    let mut marginal_gains = Vec::with_capacity(best_subset.len());
    let mut previous = 0.0;
    for step in 1..=best_subset.len() {
        let value = representativeness(&best_subset[..step], universe, sim);
        marginal_gains.push(value - previous);
        previous = value;
    }
    Ok(Suggestion {
        selected: best_subset,
        objective: best_objective,
        marginal_gains,
    })
}

/// Advances `picks` to the next lexicographic k-combination of `0..n`.
fn next_combination(picks: &mut [usize], n: usize) -> bool {
    let k = picks.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if picks[i] < n - (k - i) {
            picks[i] += 1;
            for j in i + 1..k {
                picks[j] = picks[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::{similarity_matrix, Descriptor};
    use crate::rng::SplitMix64;

    fn scores(values: &[f64]) -> Vec<UncertaintyScore> {
        values
            .iter()
            .map(|&v| UncertaintyScore::new(v).unwrap())
            .collect()
    }

    fn matrix(n: usize, entries: &[f64]) -> SimilarityMatrix {
        SimilarityMatrix::from_entries(n, entries.to_vec()).unwrap()
    }

    /// Random symmetric similarity matrix with unit diagonal.
    fn random_matrix(n: usize, rng: &mut SplitMix64) -> SimilarityMatrix {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
            for j in i + 1..n {
                let v = rng.next_f64();
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        SimilarityMatrix::from_entries(n, entries).unwrap()
    }

    #[test]
    fn top_k_orders_by_descending_uncertainty() {
        let sim = matrix(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let pool = Pool::new(vec![0, 1, 2], &scores(&[0.15, 0.05, 0.10]), &sim).unwrap();
        assert_eq!(top_k_uncertain(&pool, 2), vec![0, 2]);
    }

    #[test]
    fn top_k_returns_everything_when_pool_is_small() {
        let sim = matrix(2, &[1.0, 0.5, 0.5, 1.0]);
        let pool = Pool::new(vec![0, 1], &scores(&[0.1, 0.2]), &sim).unwrap();
        assert_eq!(top_k_uncertain(&pool, 10), vec![1, 0]);
    }

    #[test]
    fn top_k_breaks_ties_toward_lowest_id() {
        let sim = matrix(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let pool = Pool::new(vec![2, 0, 1], &scores(&[0.1, 0.1, 0.1]), &sim).unwrap();
        assert_eq!(top_k_uncertain(&pool, 2), vec![0, 1]);
    }

    #[test]
    fn representativeness_of_empty_selection_is_zero() {
        let sim = matrix(2, &[1.0, 0.5, 0.5, 1.0]);
        assert_eq!(representativeness_one(&[], 0, &sim), 0.0);
        assert_eq!(representativeness(&[], &[0, 1], &sim), 0.0);
    }

    #[test]
    fn selected_image_represents_itself_perfectly() {
        let sim = matrix(2, &[1.0, 0.5, 0.5, 1.0]);
        assert_eq!(representativeness_one(&[0], 0, &sim), 1.0);
    }

    #[test]
    fn representativeness_one_takes_the_maximum() {
        let sim = matrix(
            3,
            &[1.0, 0.4, 0.9, 0.4, 1.0, 0.2, 0.9, 0.2, 1.0],
        );
        // f({1, 2}, 0) = max(0.4, 0.9).
        assert_eq!(representativeness_one(&[1, 2], 0, &sim), 0.9);
    }

    #[test]
    fn representativeness_sums_per_image_values() {
        let sim = matrix(
            3,
            &[1.0, 0.2, 0.5, 0.2, 1.0, 0.3, 0.5, 0.3, 1.0],
        );
        // f({0}, .) over {0, 1, 2} = 1.0 + 0.2 + 0.5.
        assert!((representativeness(&[0], &[0, 1, 2], &sim) - 1.7).abs() < 1e-12);
    }

    #[test]
    fn binary_similarity_counts_covered_images() {
        let sim = matrix(
            4,
            &[
                1.0, 1.0, 0.0, 0.0, //
                1.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        );
        let su = [0, 1, 2, 3];
        assert_eq!(representativeness(&[0], &su, &sim), 2.0);
        assert_eq!(representativeness(&[0, 2], &su, &sim), 3.0);
    }

    #[test]
    fn greedy_with_equal_pool_and_batch_returns_top_uncertain_set() {
        let mut rng = SplitMix64::new(17);
        let sim = random_matrix(6, &mut rng);
        let raw = [0.21, 0.03, 0.17, 0.09, 0.14, 0.05];
        let pool = Pool::new((0..6).collect(), &scores(&raw), &sim).unwrap();
        let config = SuggestionConfig::new(3, 3).unwrap();
        let suggestion = greedy_select(&pool, &config).unwrap();
        let mut got = suggestion.selected_ids().to_vec();
        got.sort_unstable();
        assert_eq!(got, vec![0, 2, 4]);
    }

    #[test]
    fn greedy_avoids_duplicate_candidates() {
        // Two identical images and one orthogonal one: one duplicate plus
        // the distinct image always beats both duplicates.
        let ds = [
            Descriptor::new(vec![1.0, 0.0]).unwrap(),
            Descriptor::new(vec![1.0, 0.0]).unwrap(),
            Descriptor::new(vec![0.0, 1.0]).unwrap(),
        ];
        let sim = similarity_matrix(&ds).unwrap();
        let pool = Pool::new(vec![0, 1, 2], &scores(&[0.2, 0.2, 0.1]), &sim).unwrap();
        let config = SuggestionConfig::new(2, 3).unwrap();
        let suggestion = greedy_select(&pool, &config).unwrap();
        assert_eq!(suggestion.selected_ids(), &[0, 2]);
        assert_eq!(suggestion.objective(), 3.0);
    }

    #[test]
    fn greedy_single_pick_compares_whole_rows() {
        // F({0}) = 1 + 0.6 + 0.6 = 2.2 beats F({1}) = 0.6 + 1 + 0.2 = 1.8.
        let sim = matrix(
            3,
            &[1.0, 0.6, 0.6, 0.6, 1.0, 0.2, 0.6, 0.2, 1.0],
        );
        let pool = Pool::new(vec![0, 1, 2], &scores(&[0.2, 0.19, 0.0]), &sim).unwrap();
        let config = SuggestionConfig::new(1, 2).unwrap();
        let suggestion = greedy_select(&pool, &config).unwrap();
        assert_eq!(suggestion.selected_ids(), &[0]);
        assert!((suggestion.objective() - 2.2).abs() < 1e-12);
    }

    #[test]
    fn greedy_rejects_empty_pool() {
        let sim = matrix(1, &[1.0]);
        let pool = Pool::new(vec![], &scores(&[0.0]), &sim).unwrap();
        let config = SuggestionConfig::default();
        assert_eq!(greedy_select(&pool, &config), Err(SuggestionError::EmptyPool));
        assert_eq!(
            brute_force_select(&pool, &config),
            Err(SuggestionError::EmptyPool)
        );
    }

    #[test]
    fn greedy_marginal_gains_are_non_increasing_and_sum_to_objective() {
        let mut rng = SplitMix64::new(5);
        for _ in 0..20 {
            let n = 4 + (rng.next_below(8) as usize);
            let sim = random_matrix(n, &mut rng);
            let raw: Vec<f64> = (0..n).map(|_| rng.next_f64() * 0.25).collect();
            let pool = Pool::new((0..n).collect(), &scores(&raw), &sim).unwrap();
            let k = 1 + (rng.next_below(3) as usize);
            let config = SuggestionConfig::new(k, n).unwrap();
            let suggestion = greedy_select(&pool, &config).unwrap();
            let gains = suggestion.marginal_gains();
            for pair in gains.windows(2) {
                assert!(pair[0] >= pair[1] - 1e-9);
            }
            assert!(gains.iter().all(|&g| g >= 0.0));
            let total: f64 = gains.iter().sum();
            assert!((total - suggestion.objective()).abs() < 1e-9);
        }
    }

    #[test]
    fn greedy_is_deterministic_across_thread_counts() {
        let mut rng = SplitMix64::new(404);
        let sim = random_matrix(24, &mut rng);
        let raw: Vec<f64> = (0..24).map(|_| rng.next_f64() * 0.25).collect();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                let pool = Pool::new((0..24).collect(), &scores(&raw), &sim).unwrap();
                greedy_select(&pool, &SuggestionConfig::new(6, 12).unwrap()).unwrap()
            })
        };
        let single = run(1);
        let several = run(4);
        assert_eq!(single.selected_ids(), several.selected_ids());
        assert_eq!(
            single.objective().to_bits(),
            several.objective().to_bits()
        );
        for (a, b) in single
            .marginal_gains()
            .iter()
            .zip(several.marginal_gains())
        {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn brute_force_with_batch_equal_to_candidates_takes_everything() {
        let mut rng = SplitMix64::new(31);
        let sim = random_matrix(5, &mut rng);
        let pool = Pool::new(
            (0..5).collect(),
            &scores(&[0.1, 0.2, 0.05, 0.15, 0.0]),
            &sim,
        )
        .unwrap();
        let config = SuggestionConfig::new(3, 3).unwrap();
        let suggestion = brute_force_select(&pool, &config).unwrap();
        // Candidates are the top-3 uncertain: ids 1, 3, 0.
        assert_eq!(suggestion.selected_ids(), &[0, 1, 3]);
    }

    // Max 2-cover instance: images 0..3 stand for the sets {1,2}, {2,3} and
    // {3}; images 3..6 stand for the elements 1, 2, 3. A set image covers an
    // element image iff the element belongs to the set. Every selected image
    // also covers itself, so F = k + covered elements, and the optimum picks
    // {1,2} plus either of the sets containing 3, covering all three
    // elements.
    #[test]
    fn brute_force_solves_the_encoded_max_cover_instance() {
        let mut entries = vec![0.0; 36];
        for i in 0..6 {
            entries[i * 6 + i] = 1.0;
        }
        let memberships: [&[usize]; 3] = [&[3, 4], &[4, 5], &[5]];
        for (set, elements) in memberships.iter().enumerate() {
            for &element in elements.iter() {
                entries[set * 6 + element] = 1.0;
                entries[element * 6 + set] = 1.0;
            }
        }
        let sim = SimilarityMatrix::from_entries(6, entries).unwrap();
        // Set images carry the highest uncertainty so they form the
        // candidate set.
        let raw = [0.25, 0.24, 0.23, 0.01, 0.01, 0.01];
        let pool = Pool::new((0..6).collect(), &scores(&raw), &sim).unwrap();
        let config = SuggestionConfig::new(2, 3).unwrap();

        let suggestion = brute_force_select(&pool, &config).unwrap();
        // Exhaustive check over the three possible pairs:
        // {0,1} -> 2 + 3, {0,2} -> 2 + 3, {1,2} -> 2 + 2. Ties resolve to
        // the lexicographically smallest id set.
        assert_eq!(suggestion.objective(), 5.0);
        assert_eq!(suggestion.selected_ids(), &[0, 1]);
        assert!(suggestion.marginal_gains().iter().all(|&g| g >= 0.0));
        let gain_total: f64 = suggestion.marginal_gains().iter().sum();
        assert!((gain_total - suggestion.objective()).abs() < 1e-9);
        let covered_elements = suggestion.objective() - config.batch_size() as f64;
        assert_eq!(covered_elements, 3.0);

        // Greedy matches the classic bound trivially here: it finds an
        // optimal solution of the same value.
        let greedy = greedy_select(&pool, &config).unwrap();
        assert_eq!(greedy.objective(), 5.0);
    }

    #[test]
    fn greedy_meets_the_approximation_guarantee_on_random_instances() {
        let mut rng = SplitMix64::new(777);
        let bound = 1.0 - (-1.0f64).exp();
        for _ in 0..25 {
            let sim = random_matrix(10, &mut rng);
            let raw: Vec<f64> = (0..10).map(|_| rng.next_f64() * 0.25).collect();
            let pool = Pool::new((0..10).collect(), &scores(&raw), &sim).unwrap();
            let config = SuggestionConfig::new(3, 10).unwrap();
            let greedy = greedy_select(&pool, &config).unwrap();
            let exact = brute_force_select(&pool, &config).unwrap();
            assert!(
                greedy.objective() >= bound * exact.objective() - 1e-9,
                "greedy {} vs optimal {}",
                greedy.objective(),
                exact.objective()
            );
        }
    }

    #[test]
    fn brute_force_enforces_the_enumeration_cap() {
        let mut rng = SplitMix64::new(8);
        let sim = random_matrix(30, &mut rng);
        let raw: Vec<f64> = (0..30).map(|_| rng.next_f64() * 0.25).collect();
        let pool = Pool::new((0..30).collect(), &scores(&raw), &sim).unwrap();
        let config = SuggestionConfig::new(10, 30)
            .unwrap()
            .with_enumeration_cap(1000);
        match brute_force_select(&pool, &config) {
            Err(SuggestionError::EnumerationCapExceeded { combinations, .. }) => {
                assert_eq!(combinations, 30045015);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn config_validates_batch_and_candidate_counts() {
        assert!(SuggestionConfig::new(0, 4).is_err());
        assert!(SuggestionConfig::new(5, 4).is_err());
        assert!(SuggestionConfig::new(4, 4).is_ok());
        let default = SuggestionConfig::default();
        assert_eq!(default.batch_size(), 8);
        assert_eq!(default.candidate_count(), 16);
    }

    #[test]
    fn pool_validates_ids_and_score_counts() {
        let sim = matrix(2, &[1.0, 0.5, 0.5, 1.0]);
        assert!(matches!(
            Pool::new(vec![0, 2], &scores(&[0.1, 0.1]), &sim),
            Err(SuggestionError::UnknownId { id: 2, n: 2 })
        ));
        assert!(matches!(
            Pool::new(vec![0, 0], &scores(&[0.1, 0.1]), &sim),
            Err(SuggestionError::DuplicateId { id: 0 })
        ));
        assert!(matches!(
            Pool::new(vec![0], &scores(&[0.1]), &sim),
            Err(SuggestionError::ScoreCount {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn binomial_handles_boundaries() {
        assert_eq!(binomial(20, 8), Some(125_970));
        assert_eq!(binomial(40, 10), Some(847_660_528));
        assert_eq!(binomial(5, 0), Some(1));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(200, 100), None);
    }
}
