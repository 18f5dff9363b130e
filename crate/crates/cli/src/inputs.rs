//! Tensor-directory ingestion shared by the subcommands.
//!
//! Image ids are assigned by the lexicographic order of file names within a
//! directory. Ensemble probability maps live in one subdirectory per image,
//! named after the image file's stem.

use std::path::{Path, PathBuf};

use suggestor_core::descriptor::{channel_mean, Descriptor};
use suggestor_core::simulation::LabelMap;
use suggestor_core::tensor::{read_feature_map, read_probability_map, read_tensor};
use suggestor_core::uncertainty::{image_uncertainty, pixel_uncertainty, UncertaintyScore};

use crate::error::CliError;

/// One directory entry in id order.
pub struct NamedFile {
    pub name: String,
    pub path: PathBuf,
}

/// Lists the regular files of `dir` sorted by name; the position in the
/// returned list is the image id.
pub fn list_files(dir: &Path) -> Result<Vec<NamedFile>, CliError> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)
        .map_err(|e| CliError::Io(format!("cannot read directory {}: {e}", dir.display())))?
    {
        let entry = entry.map_err(|e| CliError::Io(e.to_string()))?;
        if !entry
            .file_type()
            .map_err(|e| CliError::Io(e.to_string()))?
            .is_file()
        {
            continue;
        }
        let name = entry
            .file_name()
            .into_string()
            .map_err(|raw| CliError::Validation(format!("file name {raw:?} is not UTF-8")))?;
        if name.contains([',', '"', '\n']) {
            return Err(CliError::Validation(format!(
                "file name {name:?} contains characters reserved by the CSV output"
            )));
        }
        files.push(NamedFile {
            name,
            path: entry.path(),
        });
    }
    if files.is_empty() {
        return Err(CliError::Validation(format!(
            "directory {} contains no files",
            dir.display()
        )));
    }
    files.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(files)
}

fn stem_of(name: &str) -> &str {
    Path::new(name)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(name)
}

/// Feature tensors to descriptors, in id order.
pub fn load_descriptors(features: &[NamedFile]) -> Result<Vec<Descriptor>, CliError> {
    features
        .iter()
        .map(|file| {
            let map = read_feature_map(&file.path).map_err(|e| {
                annotate(e.into(), &file.name)
            })?;
            Ok(channel_mean(&map))
        })
        .collect()
}

/// Per-image uncertainty scores from the ensemble directories under
/// `probs_dir`: one subdirectory per image stem, one tensor per member.
pub fn load_uncertainty_scores(
    probs_dir: &Path,
    features: &[NamedFile],
) -> Result<Vec<UncertaintyScore>, CliError> {
    features
        .iter()
        .map(|file| {
            let member_dir = probs_dir.join(stem_of(&file.name));
            if !member_dir.is_dir() {
                return Err(CliError::Validation(format!(
                    "no ensemble directory {} for image {}",
                    member_dir.display(),
                    file.name
                )));
            }
            let members = list_files(&member_dir)?;
            let maps = members
                .iter()
                .map(|member| {
                    read_probability_map(&member.path)
                        .map_err(|e| annotate(e.into(), &member.name))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let variance = pixel_uncertainty(&maps)
                .map_err(|e| annotate(e.into(), &file.name))?;
            Ok(image_uncertainty(&variance))
        })
        .collect()
}

/// Strict binary label maps: a 2-dimensional tensor whose payload contains
/// only the values 0 and 1.
pub fn load_label_maps(files: &[NamedFile]) -> Result<Vec<LabelMap>, CliError> {
    files
        .iter()
        .map(|file| {
            let tensor = read_tensor(&file.path).map_err(|e| annotate(e.into(), &file.name))?;
            if tensor.dims().len() != 2 {
                return Err(CliError::Validation(format!(
                    "{}: expected a 2-dimensional label tensor, found {} dimensions",
                    file.name,
                    tensor.dims().len()
                )));
            }
            let (height, width) = (tensor.dims()[0], tensor.dims()[1]);
            let values = tensor
                .values()
                .iter()
                .enumerate()
                .map(|(index, &value)| {
                    if value == 0.0 {
                        Ok(false)
                    } else if value == 1.0 {
                        Ok(true)
                    } else {
                        Err(CliError::Validation(format!(
                            "{}: label value {value} at index {index} is neither 0 nor 1",
                            file.name
                        )))
                    }
                })
                .collect::<Result<Vec<bool>, _>>()?;
            LabelMap::new(height, width, values).map_err(|e| annotate(e.into(), &file.name))
        })
        .collect()
}

fn annotate(err: CliError, name: &str) -> CliError {
    match err {
        CliError::Validation(message) => CliError::Validation(format!("{name}: {message}")),
        CliError::Io(message) => CliError::Io(format!("{name}: {message}")),
    }
}
