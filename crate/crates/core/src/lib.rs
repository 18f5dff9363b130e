//! Annotation suggestion engine for segmentation-style labeling workflows.
//!
//! The pipeline selects which images to annotate next: an ensemble of model
//! outputs yields per-image uncertainty scores, encoder feature maps yield
//! condensed descriptors and pairwise cosine similarities, and a greedy
//! generalized max-cover step picks the batch that is both uncertain and
//! representative of the unannotated pool. A simulation harness replays the
//! whole loop against a pixel budget to compare query strategies.
//!
//! Model outputs enter through the binary tensor format in [`tensor`]; the
//! engine never trains or runs a network itself.

pub mod descriptor;
mod numeric;
pub mod rng;
pub mod simulation;
pub mod suggestion;
pub mod tensor;
pub mod uncertainty;
