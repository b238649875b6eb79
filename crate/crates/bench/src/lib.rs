//! Shared fixtures for the benchmarks.

use std::path::PathBuf;

use subspace_reach::{parse_model, Model};

/// Path of a model shipped in `models/`.
pub fn model_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(format!("{name}.model"))
}

/// Parses a shipped model; panics when it is missing or malformed.
pub fn load(name: &str) -> Model {
    let path = model_path(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_model(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
