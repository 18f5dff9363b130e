//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::Path;

use suggestor_core::descriptor::{similarity_matrix, SimilarityMatrix};
use suggestor_core::simulation::{
    mean_iu, pixel_f1, run_experiment, NearestNeighborLearner, Strategy, StrategyKind,
    SyntheticSpec,
};
use suggestor_core::suggestion::{brute_force_select, greedy_select, Pool, SuggestionConfig};
use suggestor_core::tensor::write_bytes_atomically;
use suggestor_core::uncertainty::UncertaintyScore;

use crate::config::{DatasetConfig, ExperimentConfig};
use crate::error::CliError;
use crate::inputs::{
    list_files, load_descriptors, load_label_maps, load_uncertainty_scores, NamedFile,
};

/// Runs the full descriptor/uncertainty pipeline over the two tensor
/// directories: image names in id order, pairwise similarities, and one
/// uncertainty score per image.
fn build_pool(
    features_dir: &Path,
    probs_dir: &Path,
) -> Result<(Vec<NamedFile>, SimilarityMatrix, Vec<UncertaintyScore>), CliError> {
    let features = list_files(features_dir)?;
    let descriptors = load_descriptors(&features)?;
    let scores = load_uncertainty_scores(probs_dir, &features)?;
    let matrix = similarity_matrix(&descriptors)?;
    Ok((features, matrix, scores))
}

pub fn suggest(
    features_dir: &Path,
    probs_dir: &Path,
    batch: usize,
    candidates: usize,
    out: &Path,
) -> Result<(), CliError> {
    let (features, matrix, scores) = build_pool(features_dir, probs_dir)?;
    let config = SuggestionConfig::new(batch, candidates)?;
    let pool = Pool::new((0..features.len()).collect(), &scores, &matrix)?;
    let suggestion = greedy_select(&pool, &config)?;

    let mut csv = String::from("step,image_id,image_name,marginal_gain,objective_cumulative\n");
    let mut cumulative = 0.0;
    for (step, (&id, &gain)) in suggestion
        .selected_ids()
        .iter()
        .zip(suggestion.marginal_gains())
        .enumerate()
    {
        cumulative += gain;
        let _ = writeln!(
            csv,
            "{},{},{},{:.6},{:.6}",
            step + 1,
            id,
            features[id].name,
            gain,
            cumulative
        );
    }
    write_bytes_atomically(out, csv.as_bytes())?;
    Ok(())
}

pub fn oracle(
    features_dir: &Path,
    probs_dir: &Path,
    batch: usize,
    candidates: usize,
    cap: u64,
) -> Result<(), CliError> {
    let (features, matrix, scores) = build_pool(features_dir, probs_dir)?;
    let config = SuggestionConfig::new(batch, candidates)?.with_enumeration_cap(cap);
    let pool = Pool::new((0..features.len()).collect(), &scores, &matrix)?;

    let exact = brute_force_select(&pool, &config)?;
    let greedy = greedy_select(&pool, &config)?;
    let ratio = if exact.objective() > 0.0 {
        greedy.objective() / exact.objective()
    } else {
        1.0
    };
    println!("candidates={}", candidates.min(features.len()));
    println!("optimal_objective={:.6}", exact.objective());
    println!("greedy_objective={:.6}", greedy.objective());
    println!("ratio={ratio:.6}");
    Ok(())
}

pub fn eval(pred_dir: &Path, gt_dir: &Path) -> Result<(), CliError> {
    let pred_files = list_files(pred_dir)?;
    let gt_files = list_files(gt_dir)?;
    if pred_files.len() != gt_files.len() {
        return Err(CliError::Validation(format!(
            "{} predictions but {} ground-truth maps",
            pred_files.len(),
            gt_files.len()
        )));
    }
    let predictions = load_label_maps(&pred_files)?;
    let truths = load_label_maps(&gt_files)?;

    println!("image,mean_iu,pixel_f1");
    let mut iu_total = 0.0;
    let mut f1_total = 0.0;
    for ((file, prediction), truth) in pred_files.iter().zip(&predictions).zip(&truths) {
        let iu = mean_iu(prediction, truth)
            .map_err(|e| CliError::Validation(format!("{}: {e}", file.name)))?;
        let f1 = pixel_f1(prediction, truth)
            .map_err(|e| CliError::Validation(format!("{}: {e}", file.name)))?;
        iu_total += iu;
        f1_total += f1;
        println!("{},{iu:.6},{f1:.6}", file.name);
    }
    let count = predictions.len() as f64;
    println!("aggregate,{:.6},{:.6}", iu_total / count, f1_total / count);
    Ok(())
}

pub fn simulate(config_path: &Path) -> Result<(), CliError> {
    let config = ExperimentConfig::load(config_path)?;
    let kinds = config.strategy_kinds()?;
    std::fs::create_dir_all(&config.output_dir).map_err(|e| {
        CliError::Io(format!(
            "cannot create output directory {}: {e}",
            config.output_dir.display()
        ))
    })?;

    for kind in kinds {
        for &seed in &config.seeds {
            let learner = build_learner(&config.dataset, seed, config.ensemble_size)?;
            let dataset = learner.dataset()?;
            let strategy = match kind {
                StrategyKind::Random => Strategy::random(config.k, seed)?,
                StrategyKind::Uncertainty => Strategy::uncertainty(config.k, seed)?,
                StrategyKind::Suggestive => {
                    Strategy::suggestive(SuggestionConfig::new(config.k, config.candidates)?, seed)?
                }
            };
            let curve = run_experiment(&dataset, &strategy, &config.budgets, &learner)?;
            let file = config.output_dir.join(format!("{kind}_seed{seed}.csv"));
            write_bytes_atomically(&file, curve.to_csv().as_bytes())?;
        }
    }
    Ok(())
}

fn build_learner(
    dataset: &DatasetConfig,
    seed: u64,
    ensemble_size: usize,
) -> Result<NearestNeighborLearner, CliError> {
    match dataset {
        DatasetConfig::Synthetic { noise } => Ok(NearestNeighborLearner::synthetic(
            &SyntheticSpec::default(),
            seed,
            *noise,
            ensemble_size,
        )?),
        DatasetConfig::Tensors {
            features_dir,
            labels_dir,
            noise,
        } => {
            let features = list_files(features_dir)?;
            let labels = list_files(labels_dir)?;
            if features.len() != labels.len() {
                return Err(CliError::Validation(format!(
                    "{} feature tensors but {} label tensors",
                    features.len(),
                    labels.len()
                )));
            }
            let descriptors = load_descriptors(&features)?;
            let label_maps = load_label_maps(&labels)?;
            Ok(NearestNeighborLearner::from_parts(
                descriptors,
                label_maps,
                ensemble_size,
                *noise,
                seed,
            )?)
        }
    }
}
