//! Budget-driven annotation simulation.
//!
//! Replays the full suggestion loop against a dataset whose ground truth is
//! revealed only when a strategy asks for it: train the learner on whatever
//! is revealed, score uncertainty and similarity, pick the next batch,
//! charge the revealed pixels against the budget, and record evaluation
//! metrics whenever a budget checkpoint is crossed.

mod metrics;
mod synthetic;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

pub use metrics::{mean_iu, pixel_f1, spearman_rank_correlation, LabelMap};
pub use synthetic::{synthetic_learner, NearestNeighborLearner, SyntheticSpec};

use thiserror::Error;

use crate::descriptor::{similarity_matrix, Descriptor, DescriptorError};
use crate::numeric::compensated_sum;
use crate::rng::SplitMix64;
use crate::suggestion::{greedy_select, top_k_uncertain, Pool, SuggestionConfig, SuggestionError};
use crate::uncertainty::{
    image_uncertainty, pixel_uncertainty, ProbabilityMap, UncertaintyError, UncertaintyScore,
};

/// Substream index for the random query's draws under the strategy seed.
const QUERY_STREAM: u64 = 1 << 32;

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("label map must have positive dimensions")]
    EmptyLabelMap,
    #[error("expected {expected} label values, got {got}")]
    LabelLengthMismatch { expected: usize, got: usize },
    #[error(
        "label maps differ in shape: {pred_height}x{pred_width} vs {truth_height}x{truth_width}"
    )]
    LabelShapeMismatch {
        pred_height: usize,
        pred_width: usize,
        truth_height: usize,
        truth_width: usize,
    },
    #[error("dataset contains no images")]
    EmptyDataset,
    #[error("budget list is empty")]
    NoBudgets,
    #[error("budget {value} at position {index} is outside (0, 1]")]
    BudgetOutOfRange { index: usize, value: f64 },
    #[error("budgets must be strictly increasing at position {index}")]
    BudgetsNotIncreasing { index: usize },
    #[error("budget fraction {value} is outside (0, 1]")]
    InvalidBudgetFraction { value: f64 },
    #[error("noise level {value} must lie in [0, 0.5)")]
    InvalidNoise { value: f64 },
    #[error("an ensemble needs at least 2 models, got {got}")]
    TooFewModels { got: usize },
    #[error("the uncertainty strategy requires K == k, got k = {batch}, K = {candidates}")]
    UncertaintyStrategyShape { batch: usize, candidates: usize },
    #[error("unknown strategy kind {0:?}; expected random, uncertainty or suggestive")]
    UnknownStrategyKind(String),
    #[error("image {id} was already revealed")]
    DuplicateReveal { id: usize },
    #[error("image id {id} is out of range for a dataset of {n}")]
    UnknownImage { id: usize, n: usize },
    #[error("invalid synthetic benchmark: {0}")]
    InvalidSyntheticSpec(String),
    #[error("learner broke its contract: {0}")]
    LearnerContract(String),
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: usize,
        source: Box<SimulationError>,
    },
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
    #[error(transparent)]
    Uncertainty(#[from] UncertaintyError),
    #[error(transparent)]
    Suggestion(#[from] SuggestionError),
}

/// A collection of images with known ground truth; image ids are positions.
#[derive(Debug, Clone)]
pub struct Dataset {
    labels: Vec<LabelMap>,
    total_pixels: usize,
}

impl Dataset {
    pub fn new(labels: Vec<LabelMap>) -> Result<Self, SimulationError> {
        if labels.is_empty() {
            return Err(SimulationError::EmptyDataset);
        }
        let total_pixels = labels.iter().map(LabelMap::pixel_count).sum();
        Ok(Self {
            labels,
            total_pixels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn pixel_count(&self, id: usize) -> usize {
        self.labels[id].pixel_count()
    }

    pub fn total_pixels(&self) -> usize {
        self.total_pixels
    }

    pub fn labels(&self, id: usize) -> &LabelMap {
        &self.labels[id]
    }
}

/// Annotation-cost ledger: which images have been revealed and how many
/// pixels they cost, tracked against a final budget fraction.
#[derive(Debug, Clone)]
pub struct BudgetLedger {
    budget_fraction: f64,
    total_pixels: usize,
    revealed_pixels: usize,
    revealed_ids: Vec<usize>,
    revealed_set: HashSet<usize>,
}

/// Pixel threshold at which a budget fraction counts as reached.
pub fn budget_threshold(fraction: f64, total_pixels: usize) -> usize {
    (fraction * total_pixels as f64).ceil() as usize
}

impl BudgetLedger {
    pub fn new(budget_fraction: f64, total_pixels: usize) -> Result<Self, SimulationError> {
        if !budget_fraction.is_finite() || budget_fraction <= 0.0 || budget_fraction > 1.0 {
            return Err(SimulationError::InvalidBudgetFraction {
                value: budget_fraction,
            });
        }
        Ok(Self {
            budget_fraction,
            total_pixels,
            revealed_pixels: 0,
            revealed_ids: Vec::new(),
            revealed_set: HashSet::new(),
        })
    }

    pub fn reveal(&mut self, id: usize, pixels: usize) -> Result<(), SimulationError> {
        if !self.revealed_set.insert(id) {
            return Err(SimulationError::DuplicateReveal { id });
        }
        self.revealed_ids.push(id);
        self.revealed_pixels += pixels;
        Ok(())
    }

    pub fn budget_fraction(&self) -> f64 {
        self.budget_fraction
    }

    pub fn revealed_pixels(&self) -> usize {
        self.revealed_pixels
    }

    pub fn revealed_ids(&self) -> &[usize] {
        &self.revealed_ids
    }

    pub fn contains(&self, id: usize) -> bool {
        self.revealed_set.contains(&id)
    }

    /// True once the final budget threshold has been reached.
    pub fn exhausted(&self) -> bool {
        self.revealed_pixels >= budget_threshold(self.budget_fraction, self.total_pixels)
    }
}

/// Query strategies compared by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    /// Uniform draws from the unannotated pool, ignoring the model.
    Random,
    /// Pure uncertainty ranking; the suggestion pipeline with K = k.
    Uncertainty,
    /// Uncertainty filtering plus greedy representativeness.
    Suggestive,
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            StrategyKind::Random => "random",
            StrategyKind::Uncertainty => "uncertainty",
            StrategyKind::Suggestive => "suggestive",
        };
        f.write_str(name)
    }
}

impl FromStr for StrategyKind {
    type Err = SimulationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(StrategyKind::Random),
            "uncertainty" => Ok(StrategyKind::Uncertainty),
            "suggestive" => Ok(StrategyKind::Suggestive),
            other => Err(SimulationError::UnknownStrategyKind(other.to_string())),
        }
    }
}

/// A query strategy with its selection parameters and seed.
#[derive(Debug, Clone)]
pub struct Strategy {
    kind: StrategyKind,
    config: SuggestionConfig,
    seed: u64,
}

impl Strategy {
    pub fn new(
        kind: StrategyKind,
        config: SuggestionConfig,
        seed: u64,
    ) -> Result<Self, SimulationError> {
        if kind == StrategyKind::Uncertainty && config.batch_size() != config.candidate_count() {
            return Err(SimulationError::UncertaintyStrategyShape {
                batch: config.batch_size(),
                candidates: config.candidate_count(),
            });
        }
        Ok(Self { kind, config, seed })
    }

    pub fn random(batch_size: usize, seed: u64) -> Result<Self, SimulationError> {
        Self::new(
            StrategyKind::Random,
            SuggestionConfig::new(batch_size, batch_size)?,
            seed,
        )
    }

    pub fn uncertainty(batch_size: usize, seed: u64) -> Result<Self, SimulationError> {
        Self::new(
            StrategyKind::Uncertainty,
            SuggestionConfig::new(batch_size, batch_size)?,
            seed,
        )
    }

    pub fn suggestive(config: SuggestionConfig, seed: u64) -> Result<Self, SimulationError> {
        Self::new(StrategyKind::Suggestive, config, seed)
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn config(&self) -> &SuggestionConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Everything a trained learner reports about the collection: a descriptor,
/// an ensemble of probability maps, and a point prediction per image.
#[derive(Debug, Clone)]
pub struct LearnerOutput {
    pub descriptors: Vec<Descriptor>,
    pub ensembles: Vec<Vec<ProbabilityMap>>,
    pub predictions: Vec<LabelMap>,
}

/// A trainable model stand-in. Implementations must be deterministic for a
/// fixed revealed set and seed.
pub trait Learner {
    fn train(&self, dataset: &Dataset, revealed: &[usize])
        -> Result<LearnerOutput, SimulationError>;
}

/// One evaluation checkpoint of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub budget_fraction: f64,
    pub mean_iu: f64,
    pub pixel_f1: f64,
}

/// Metric readings at successive budget checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricCurve {
    points: Vec<CurvePoint>,
}

impl MetricCurve {
    pub fn new(points: Vec<CurvePoint>) -> Result<Self, SimulationError> {
        for (index, point) in points.iter().enumerate() {
            if !point.budget_fraction.is_finite()
                || point.budget_fraction <= 0.0
                || point.budget_fraction > 1.0
            {
                return Err(SimulationError::BudgetOutOfRange {
                    index,
                    value: point.budget_fraction,
                });
            }
            if index > 0 && points[index - 1].budget_fraction >= point.budget_fraction {
                return Err(SimulationError::BudgetsNotIncreasing { index });
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    /// CSV rendering: fixed header, one row per checkpoint, six decimal
    /// places throughout.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("budget_fraction,mean_iu,pixel_f1\n");
        for point in &self.points {
            out.push_str(&format!(
                "{:.6},{:.6},{:.6}\n",
                point.budget_fraction, point.mean_iu, point.pixel_f1
            ));
        }
        out
    }
}

fn validate_budgets(budgets: &[f64]) -> Result<(), SimulationError> {
    if budgets.is_empty() {
        return Err(SimulationError::NoBudgets);
    }
    for (index, &budget) in budgets.iter().enumerate() {
        if !budget.is_finite() || budget <= 0.0 || budget > 1.0 {
            return Err(SimulationError::BudgetOutOfRange {
                index,
                value: budget,
            });
        }
        if index > 0 && budgets[index - 1] >= budget {
            return Err(SimulationError::BudgetsNotIncreasing { index });
        }
    }
    Ok(())
}

fn check_output(output: &LearnerOutput, n: usize) -> Result<(), SimulationError> {
    if output.descriptors.len() != n
        || output.ensembles.len() != n
        || output.predictions.len() != n
    {
        return Err(SimulationError::LearnerContract(format!(
            "learner reported {} descriptors, {} ensembles, {} predictions for {} images",
            output.descriptors.len(),
            output.ensembles.len(),
            output.predictions.len(),
            n
        )));
    }
    Ok(())
}

/// Dataset-wide means of mean IU and pixel F1 for the learner's current
/// predictions.
fn evaluate(dataset: &Dataset, output: &LearnerOutput) -> Result<(f64, f64), SimulationError> {
    let n = dataset.len() as f64;
    let mut iu_values = Vec::with_capacity(dataset.len());
    let mut f1_values = Vec::with_capacity(dataset.len());
    for id in 0..dataset.len() {
        iu_values.push(mean_iu(&output.predictions[id], dataset.labels(id))?);
        f1_values.push(pixel_f1(&output.predictions[id], dataset.labels(id))?);
    }
    Ok((
        compensated_sum(iu_values) / n,
        compensated_sum(f1_values) / n,
    ))
}

fn select_batch(
    strategy: &Strategy,
    output: &LearnerOutput,
    unannotated: &[usize],
    rng: &mut SplitMix64,
) -> Result<Vec<usize>, SimulationError> {
    let batch = strategy.config().batch_size();
    if strategy.kind() == StrategyKind::Random {
        return Ok(rng.sample_without_replacement(unannotated.to_vec(), batch));
    }

    let matrix = similarity_matrix(&output.descriptors)?;
    let scores = output
        .ensembles
        .iter()
        .map(|maps| Ok(image_uncertainty(&pixel_uncertainty(maps)?)))
        .collect::<Result<Vec<UncertaintyScore>, SimulationError>>()?;
    let pool = Pool::new(unannotated.to_vec(), &scores, &matrix)?;
    match strategy.kind() {
        StrategyKind::Random => unreachable!("handled above"),
        StrategyKind::Uncertainty => Ok(top_k_uncertain(&pool, batch)),
        StrategyKind::Suggestive => {
            Ok(greedy_select(&pool, strategy.config())?.selected_ids().to_vec())
        }
    }
}

fn stage_error(stage: usize) -> impl Fn(SimulationError) -> SimulationError {
    move |source| SimulationError::Stage {
        stage,
        source: Box::new(source),
    }
}

/// Runs one simulated annotation campaign and reports the metric curve, one
/// point per requested budget checkpoint.
///
/// Each stage trains the learner on everything revealed so far, selects the
/// next batch, and reveals it image by image. The reveal that crosses a
/// checkpoint completes (images are atomic), the learner is retrained on the
/// enlarged revealed set, and the evaluation is recorded; the run stops as
/// soon as the last checkpoint is recorded.
pub fn run_experiment(
    dataset: &Dataset,
    strategy: &Strategy,
    budgets: &[f64],
    learner: &dyn Learner,
) -> Result<MetricCurve, SimulationError> {
    validate_budgets(budgets)?;
    if dataset.is_empty() {
        return Err(SimulationError::EmptyDataset);
    }

    // A substream far from the learner's internal streams: sharing one user
    // seed between learner and strategy must not correlate the random query
    // with the generated data.
    let mut rng = SplitMix64::substream(strategy.seed(), QUERY_STREAM);
    let mut ledger = BudgetLedger::new(*budgets.last().expect("checked nonempty"), dataset.total_pixels())?;
    let mut unannotated: Vec<usize> = (0..dataset.len()).collect();
    let mut points = Vec::with_capacity(budgets.len());
    let mut next_checkpoint = 0;
    let mut stage = 0;

    while next_checkpoint < budgets.len() && !unannotated.is_empty() {
        let output = learner
            .train(dataset, ledger.revealed_ids())
            .map_err(stage_error(stage))?;
        check_output(&output, dataset.len()).map_err(stage_error(stage))?;
        let batch =
            select_batch(strategy, &output, &unannotated, &mut rng).map_err(stage_error(stage))?;

        for id in batch {
            ledger.reveal(id, dataset.pixel_count(id))?;
            unannotated.retain(|&other| other != id);
            while next_checkpoint < budgets.len()
                && ledger.revealed_pixels()
                    >= budget_threshold(budgets[next_checkpoint], dataset.total_pixels())
            {
                let trained = learner
                    .train(dataset, ledger.revealed_ids())
                    .map_err(stage_error(stage))?;
                check_output(&trained, dataset.len()).map_err(stage_error(stage))?;
                let (iu, f1) = evaluate(dataset, &trained).map_err(stage_error(stage))?;
                points.push(CurvePoint {
                    budget_fraction: budgets[next_checkpoint],
                    mean_iu: iu,
                    pixel_f1: f1,
                });
                next_checkpoint += 1;
            }
            if next_checkpoint >= budgets.len() {
                break;
            }
        }
        stage += 1;
    }

    MetricCurve::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label(side: usize, bits: &[u8]) -> LabelMap {
        LabelMap::new(side, side, bits.iter().map(|&b| b != 0).collect()).unwrap()
    }

    #[test]
    fn dataset_tracks_pixel_totals() {
        let dataset = Dataset::new(vec![label(2, &[1, 0, 0, 1]), label(2, &[0; 4])]).unwrap();
        assert_eq!(dataset.len(), 2);
        assert_eq!(dataset.total_pixels(), 8);
        assert_eq!(dataset.pixel_count(1), 4);
        assert!(Dataset::new(vec![]).is_err());
    }

    #[test]
    fn ledger_conserves_pixels_and_rejects_double_reveals() {
        let mut ledger = BudgetLedger::new(0.5, 100).unwrap();
        ledger.reveal(3, 30).unwrap();
        ledger.reveal(1, 25).unwrap();
        assert_eq!(ledger.revealed_pixels(), 55);
        assert_eq!(ledger.revealed_ids(), &[3, 1]);
        assert!(ledger.exhausted());
        assert!(matches!(
            ledger.reveal(3, 30),
            Err(SimulationError::DuplicateReveal { id: 3 })
        ));
        assert!(BudgetLedger::new(0.0, 100).is_err());
        assert!(BudgetLedger::new(1.5, 100).is_err());
    }

    #[test]
    fn budget_threshold_rounds_up() {
        assert_eq!(budget_threshold(0.1, 65536), 6554);
        assert_eq!(budget_threshold(1.0, 65536), 65536);
        assert_eq!(budget_threshold(0.001, 100), 1);
    }

    #[test]
    fn uncertainty_strategy_requires_equal_counts() {
        let config = SuggestionConfig::new(4, 8).unwrap();
        assert!(matches!(
            Strategy::new(StrategyKind::Uncertainty, config.clone(), 0),
            Err(SimulationError::UncertaintyStrategyShape { .. })
        ));
        assert!(Strategy::new(StrategyKind::Suggestive, config, 0).is_ok());
        assert!(Strategy::uncertainty(4, 0).is_ok());
    }

    #[test]
    fn strategy_kind_parses_and_prints() {
        for kind in [
            StrategyKind::Random,
            StrategyKind::Uncertainty,
            StrategyKind::Suggestive,
        ] {
            assert_eq!(kind.to_string().parse::<StrategyKind>().unwrap(), kind);
        }
        assert!("divination".parse::<StrategyKind>().is_err());
    }

    #[test]
    fn curve_rejects_disordered_checkpoints() {
        let point = |b| CurvePoint {
            budget_fraction: b,
            mean_iu: 0.5,
            pixel_f1: 0.5,
        };
        assert!(MetricCurve::new(vec![point(0.1), point(0.3)]).is_ok());
        assert!(MetricCurve::new(vec![point(0.3), point(0.1)]).is_err());
        assert!(MetricCurve::new(vec![point(0.0)]).is_err());
    }

    #[test]
    fn curve_csv_uses_six_decimal_places() {
        let curve = MetricCurve::new(vec![CurvePoint {
            budget_fraction: 0.1,
            mean_iu: 0.5,
            pixel_f1: 2.0 / 3.0,
        }])
        .unwrap();
        assert_eq!(
            curve.to_csv(),
            "budget_fraction,mean_iu,pixel_f1\n0.100000,0.500000,0.666667\n"
        );
    }

    #[test]
    fn full_budget_reaches_fully_trained_metrics() {
        let learner = synthetic_learner(21, 0.1).unwrap();
        let dataset = learner.dataset().unwrap();
        let strategy = Strategy::random(8, 21).unwrap();
        let curve = run_experiment(&dataset, &strategy, &[1.0], &learner).unwrap();
        let point = curve.points()[0];
        // With everything revealed, each image copies its own label.
        assert_eq!(point.mean_iu, 1.0);
        assert_eq!(point.pixel_f1, 1.0);
    }

    #[test]
    fn runs_are_deterministic_per_seed() {
        let learner = synthetic_learner(33, 0.15).unwrap();
        let dataset = learner.dataset().unwrap();
        for strategy in [
            Strategy::random(8, 5).unwrap(),
            Strategy::uncertainty(8, 5).unwrap(),
            Strategy::suggestive(SuggestionConfig::default(), 5).unwrap(),
        ] {
            let a = run_experiment(&dataset, &strategy, &[0.1, 0.3, 0.5], &learner).unwrap();
            let b = run_experiment(&dataset, &strategy, &[0.1, 0.3, 0.5], &learner).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn curves_have_one_point_per_budget_with_metrics_in_range() {
        let learner = synthetic_learner(2, 0.2).unwrap();
        let dataset = learner.dataset().unwrap();
        let strategy = Strategy::suggestive(SuggestionConfig::default(), 2).unwrap();
        let budgets = [0.1, 0.3, 0.5];
        let curve = run_experiment(&dataset, &strategy, &budgets, &learner).unwrap();
        assert_eq!(curve.points().len(), 3);
        for (point, &budget) in curve.points().iter().zip(&budgets) {
            assert_eq!(point.budget_fraction, budget);
            assert!((0.0..=1.0).contains(&point.mean_iu));
            assert!((0.0..=1.0).contains(&point.pixel_f1));
        }
    }

    #[test]
    fn learner_failures_carry_stage_context() {
        struct Broken;
        impl Learner for Broken {
            fn train(
                &self,
                _dataset: &Dataset,
                _revealed: &[usize],
            ) -> Result<LearnerOutput, SimulationError> {
                Err(SimulationError::LearnerContract("broken on purpose".into()))
            }
        }
        let dataset = Dataset::new(vec![label(2, &[1, 0, 0, 1])]).unwrap();
        let strategy = Strategy::random(1, 0).unwrap();
        match run_experiment(&dataset, &strategy, &[0.5], &Broken) {
            Err(SimulationError::Stage { stage: 0, source }) => {
                assert!(source.to_string().contains("broken on purpose"));
            }
            other => panic!("expected stage-wrapped failure, got {other:?}"),
        }
    }

    #[test]
    fn experiment_rejects_bad_budget_lists() {
        let learner = synthetic_learner(1, 0.1).unwrap();
        let dataset = learner.dataset().unwrap();
        let strategy = Strategy::random(8, 1).unwrap();
        assert!(matches!(
            run_experiment(&dataset, &strategy, &[], &learner),
            Err(SimulationError::NoBudgets)
        ));
        assert!(matches!(
            run_experiment(&dataset, &strategy, &[0.3, 0.2], &learner),
            Err(SimulationError::BudgetsNotIncreasing { index: 1 })
        ));
        assert!(matches!(
            run_experiment(&dataset, &strategy, &[0.0, 0.5], &learner),
            Err(SimulationError::BudgetOutOfRange { index: 0, .. })
        ));
    }
}
