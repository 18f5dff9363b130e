//! Fixture builders and binary invocation helpers for the CLI tests.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use suggestor_core::tensor::write_tensor;

pub fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_suggestor"))
}

#[allow(dead_code)] // each test target uses its own subset of these helpers
pub fn run_ok(args: &[&str]) -> Output {
    let output = binary().args(args).output().expect("binary runs");
    assert!(
        output.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

#[allow(dead_code)]
pub fn run_expecting(args: &[&str], code: i32) -> Output {
    let output = binary().args(args).output().expect("binary runs");
    assert_eq!(
        output.status.code(),
        Some(code),
        "command {args:?}: stderr {}",
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

/// Writes one feature tensor per image (a 1x1xC map, so the descriptor is
/// the channel vector itself) and a two-member probability ensemble whose
/// image score is `spread^2 / 4`.
pub fn write_instance(
    root: &Path,
    descriptors: &[Vec<f32>],
    spreads: &[f32],
) -> (PathBuf, PathBuf) {
    assert_eq!(descriptors.len(), spreads.len());
    let features = root.join("features");
    let probs = root.join("probs");
    std::fs::create_dir_all(&features).unwrap();
    std::fs::create_dir_all(&probs).unwrap();
    for (index, (descriptor, &spread)) in descriptors.iter().zip(spreads).enumerate() {
        let name = format!("img{index:03}");
        write_tensor(
            &features.join(format!("{name}.sat")),
            &[1, 1, descriptor.len()],
            descriptor,
        )
        .unwrap();
        let member_dir = probs.join(&name);
        std::fs::create_dir_all(&member_dir).unwrap();
        write_tensor(&member_dir.join("m0.sat"), &[1, 2], &[0.0, 0.0]).unwrap();
        write_tensor(&member_dir.join("m1.sat"), &[1, 2], &[spread, spread]).unwrap();
    }
    (features, probs)
}
