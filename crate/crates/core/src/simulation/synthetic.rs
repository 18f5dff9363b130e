//! Reproducible nearest-neighbor learner and the clustered benchmark it
//! runs on.
//!
//! Images live in latent clusters; an image's descriptor is its cluster
//! center plus seeded noise, and all images of a cluster share one binary
//! ground-truth mask. Training is nearest-labeled-neighbor: every image is
//! predicted by copying the label of the most similar revealed image.
//! Ensemble members re-perturb the descriptors with independent seeded noise
//! before looking up their neighbor, so they disagree exactly where no
//! revealed image is clearly closest — the images far from anything
//! annotated.

use crate::descriptor::Descriptor;
use crate::numeric::compensated_dot;
use crate::rng::SplitMix64;
use crate::uncertainty::ProbabilityMap;

use super::metrics::LabelMap;
use super::{Dataset, Learner, LearnerOutput, SimulationError};

/// Shape of a generated benchmark instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticSpec {
    /// Number of latent clusters.
    pub clusters: usize,
    /// Total images; must divide evenly into the clusters.
    pub images: usize,
    /// Images are square, `side x side` pixels.
    pub side: usize,
    /// Descriptor dimensionality; needs two dimensions per cluster.
    pub dims: usize,
    /// Size of the leading pixel block in which cluster masks differ;
    /// all masks are background outside it.
    pub ambiguous_pixels: usize,
}

impl Default for SyntheticSpec {
    /// The benchmark used throughout the tests: 8 clusters of 8 images,
    /// 32x32 pixels, 16-dimensional descriptors.
    fn default() -> Self {
        Self {
            clusters: 8,
            images: 64,
            side: 32,
            dims: 16,
            ambiguous_pixels: 256,
        }
    }
}

impl SyntheticSpec {
    fn validate(&self) -> Result<(), SimulationError> {
        if self.clusters == 0 || self.images == 0 || self.side == 0 {
            return Err(SimulationError::InvalidSyntheticSpec(
                "clusters, images and side must all be positive".into(),
            ));
        }
        if !self.images.is_multiple_of(self.clusters) {
            return Err(SimulationError::InvalidSyntheticSpec(format!(
                "{} images do not divide evenly into {} clusters",
                self.images, self.clusters
            )));
        }
        if self.dims < 2 * self.clusters {
            return Err(SimulationError::InvalidSyntheticSpec(format!(
                "{} descriptor dimensions cannot hold {} near-orthogonal centers",
                self.dims, self.clusters
            )));
        }
        if self.ambiguous_pixels == 0 || self.ambiguous_pixels > self.side * self.side {
            return Err(SimulationError::InvalidSyntheticSpec(
                "ambiguous pixel block must be positive and fit in the image".into(),
            ));
        }
        Ok(())
    }
}

// Substream indices under the user seed. Members take 1..=n_models, so the
// generation stream and the experiment's query stream (see the simulation
// module) must stay clear of that range.
const GENERATION_STREAM: u64 = 0;

/// Latent descriptors sit at `center + LATENT_NOISE_SCALE * noise * u`.
const LATENT_NOISE_SCALE: f64 = 0.25;

/// Ensemble members wiggle each descriptor entry by a symmetric draw of
/// this multiple of the base noise. Wider than the latent noise on purpose:
/// the members must disagree about which revealed image is closest wherever
/// no revealed image is clearly closest.
const MEMBER_NOISE_SCALE: f64 = 2.0;

/// How a member's wiggle lands on a latent descriptor entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Perturbation {
    /// `value + wiggle`; for generated descriptors on a unit scale.
    Additive,
    /// `value * (1 + wiggle)`; for externally supplied descriptors of
    /// unknown scale.
    Relative,
}

/// Deterministic nearest-labeled-neighbor learner over fixed per-image
/// descriptors and ground-truth labels.
#[derive(Debug, Clone)]
pub struct NearestNeighborLearner {
    latents: Vec<Vec<f64>>,
    labels: Vec<LabelMap>,
    clusters: Option<Vec<usize>>,
    n_models: usize,
    noise: f64,
    seed: u64,
    perturbation: Perturbation,
}

fn check_noise(noise: f64) -> Result<(), SimulationError> {
    if !noise.is_finite() || !(0.0..0.5).contains(&noise) {
        return Err(SimulationError::InvalidNoise { value: noise });
    }
    Ok(())
}

fn check_models(n_models: usize) -> Result<(), SimulationError> {
    if n_models < 2 {
        return Err(SimulationError::TooFewModels { got: n_models });
    }
    Ok(())
}

impl NearestNeighborLearner {
    /// Generates the clustered benchmark instance for `spec`.
    ///
    /// The seed drives everything: the image-to-cluster assignment (a
    /// Fisher-Yates shuffle), the per-cluster masks (each ambiguous pixel
    /// kept with probability 1/2), and the per-image descriptor noise.
    pub fn synthetic(
        spec: &SyntheticSpec,
        seed: u64,
        noise: f64,
        n_models: usize,
    ) -> Result<Self, SimulationError> {
        spec.validate()?;
        check_noise(noise)?;
        check_models(n_models)?;

        let mut rng = SplitMix64::substream(seed, GENERATION_STREAM);
        let per_cluster = spec.images / spec.clusters;
        let shuffled = rng.sample_without_replacement((0..spec.images).collect(), spec.images);
        let mut clusters = vec![0usize; spec.images];
        for (position, &image) in shuffled.iter().enumerate() {
            clusters[image] = position / per_cluster;
        }

        let pixels = spec.side * spec.side;
        let masks: Vec<Vec<bool>> = (0..spec.clusters)
            .map(|_| {
                (0..pixels)
                    .map(|pixel| pixel < spec.ambiguous_pixels && rng.next_u64() >> 63 == 1)
                    .collect()
            })
            .collect();

        let latents: Vec<Vec<f64>> = (0..spec.images)
            .map(|image| {
                let cluster = clusters[image];
                (0..spec.dims)
                    .map(|dim| {
                        let center = if dim == 2 * cluster {
                            1.0
                        } else if dim == 2 * cluster + 1 {
                            0.25
                        } else {
                            0.0
                        };
                        center + LATENT_NOISE_SCALE * noise * rng.next_f64()
                    })
                    .collect()
            })
            .collect();

        let labels = (0..spec.images)
            .map(|image| LabelMap::new(spec.side, spec.side, masks[clusters[image]].clone()))
            .collect::<Result<Vec<_>, _>>()?;

        Ok(Self {
            latents,
            labels,
            clusters: Some(clusters),
            n_models,
            noise,
            seed,
            perturbation: Perturbation::Additive,
        })
    }

    /// Wraps externally supplied descriptors and ground-truth labels, for
    /// driving the simulation from real feature tensors.
    pub fn from_parts(
        descriptors: Vec<Descriptor>,
        labels: Vec<LabelMap>,
        n_models: usize,
        noise: f64,
        seed: u64,
    ) -> Result<Self, SimulationError> {
        check_noise(noise)?;
        check_models(n_models)?;
        if descriptors.is_empty() {
            return Err(SimulationError::EmptyDataset);
        }
        if descriptors.len() != labels.len() {
            return Err(SimulationError::LearnerContract(format!(
                "{} descriptors but {} label maps",
                descriptors.len(),
                labels.len()
            )));
        }
        let dims = descriptors[0].dims();
        if descriptors.iter().any(|d| d.dims() != dims) {
            return Err(SimulationError::LearnerContract(
                "descriptors must share one dimensionality".into(),
            ));
        }
        Ok(Self {
            latents: descriptors.into_iter().map(|d| d.values().to_vec()).collect(),
            labels,
            clusters: None,
            n_models,
            noise,
            seed,
            perturbation: Perturbation::Relative,
        })
    }

    /// The dataset this learner was built around.
    pub fn dataset(&self) -> Result<Dataset, SimulationError> {
        Dataset::new(self.labels.clone())
    }

    /// Latent cluster of each image; only available for generated instances.
    pub fn cluster_assignment(&self) -> Option<&[usize]> {
        self.clusters.as_deref()
    }

    fn perturbed(&self, member: u64) -> Vec<Vec<f64>> {
        let mut rng = SplitMix64::substream(self.seed, member + 1);
        self.latents
            .iter()
            .map(|latent| {
                latent
                    .iter()
                    .map(|&value| {
                        let wiggle = MEMBER_NOISE_SCALE * self.noise * (2.0 * rng.next_f64() - 1.0);
                        match self.perturbation {
                            Perturbation::Additive => value + wiggle,
                            Perturbation::Relative => value * (1.0 + wiggle),
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let norm_a = compensated_dot(a, a);
    let norm_b = compensated_dot(b, b);
    if norm_a == 0.0 || norm_b == 0.0 {
        return 0.0;
    }
    compensated_dot(a, b) / (norm_a.sqrt() * norm_b.sqrt())
}

/// Most similar revealed image, ties toward the lowest id. `None` when
/// nothing is revealed yet.
fn nearest_revealed(query: &[f64], latents: &[Vec<f64>], revealed_sorted: &[usize]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &id in revealed_sorted {
        let s = cosine(query, &latents[id]);
        if best.is_none_or(|(value, _)| s > value) {
            best = Some((s, id));
        }
    }
    best.map(|(_, id)| id)
}

impl Learner for NearestNeighborLearner {
    fn train(&self, dataset: &Dataset, revealed: &[usize]) -> Result<LearnerOutput, SimulationError> {
        if dataset.len() != self.latents.len() {
            return Err(SimulationError::LearnerContract(format!(
                "learner covers {} images but the dataset has {}",
                self.latents.len(),
                dataset.len()
            )));
        }
        let mut revealed_sorted = revealed.to_vec();
        revealed_sorted.sort_unstable();
        for &id in &revealed_sorted {
            if id >= self.latents.len() {
                return Err(SimulationError::UnknownImage {
                    id,
                    n: self.latents.len(),
                });
            }
        }

        let descriptors = self
            .latents
            .iter()
            .map(|latent| Descriptor::new(latent.clone()))
            .collect::<Result<Vec<_>, _>>()?;

        let predictions: Vec<LabelMap> = (0..self.latents.len())
            .map(|image| {
                match nearest_revealed(&self.latents[image], &self.latents, &revealed_sorted) {
                    Some(neighbor) => Ok(self.labels[neighbor].clone()),
                    None => {
                        let truth = &self.labels[image];
                        LabelMap::new(
                            truth.height(),
                            truth.width(),
                            vec![false; truth.pixel_count()],
                        )
                    }
                }
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut ensembles: Vec<Vec<ProbabilityMap>> =
            (0..self.latents.len()).map(|_| Vec::with_capacity(self.n_models)).collect();
        for member in 0..self.n_models {
            let perturbed = self.perturbed(member as u64);
            for (image, query) in perturbed.iter().enumerate() {
                let label = match nearest_revealed(query, &self.latents, &revealed_sorted) {
                    Some(neighbor) => &self.labels[neighbor],
                    None => &predictions[image],
                };
                let values = label.values().iter().map(|&b| f64::from(u8::from(b))).collect();
                ensembles[image].push(ProbabilityMap::new(label.height(), label.width(), values)?);
            }
        }

        Ok(LearnerOutput {
            descriptors,
            ensembles,
            predictions,
        })
    }
}

/// The default synthetic learner: the standard benchmark shape with a
/// 4-member ensemble.
pub fn synthetic_learner(seed: u64, noise: f64) -> Result<NearestNeighborLearner, SimulationError> {
    NearestNeighborLearner::synthetic(&SyntheticSpec::default(), seed, noise, 4)
}
