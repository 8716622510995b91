//! Library surface of the check harness: document parsing, check drivers and
//! report types, kept separate from the binary so tests can drive them
//! directly.

pub mod checks;
pub mod document;
pub mod report;

use std::path::Path;

use sha2::{Digest, Sha256};

use report::InputInfo;

/// Input identification for the report: path as given plus a content digest.
pub fn input_info(path: &Path) -> std::io::Result<InputInfo> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    let sha256: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok(InputInfo {
        path: path.display().to_string(),
        sha256,
    })
}
