//! Optional cross-validation against an external NuSMV binary.
//!
//! When the `UML2TS_NUSMV` environment variable points at a NuSMV
//! executable, emitted models can be run through it and the per-property
//! verdicts compared with the embedded checker's. Callers treat an absent
//! binary as "skip", not as a failure.

use std::path::{Path, PathBuf};
use std::process::Command;

use thiserror::Error;

pub const NUSMV_ENV: &str = "UML2TS_NUSMV";

#[derive(Debug, Error)]
pub enum NusmvError {
    #[error("failed to run NuSMV at {binary}: {source}")]
    Spawn {
        binary: String,
        source: std::io::Error,
    },
    #[error("NuSMV exited with {status}: {stderr}")]
    Failed { status: String, stderr: String },
    #[error("could not find any `-- specification ... is true/false` line in NuSMV output")]
    NoVerdicts,
}

/// The configured NuSMV binary, when one is set and exists.
pub fn nusmv_binary() -> Option<PathBuf> {
    let path = PathBuf::from(std::env::var_os(NUSMV_ENV)?);
    path.is_file().then_some(path)
}

/// Runs NuSMV on an `.smv` file and returns one verdict per specification
/// line, in file order.
pub fn run_nusmv(binary: &Path, smv_path: &Path) -> Result<Vec<bool>, NusmvError> {
    let output = Command::new(binary)
        .arg(smv_path)
        .output()
        .map_err(|source| NusmvError::Spawn {
            binary: binary.display().to_string(),
            source,
        })?;
    if !output.status.success() {
        return Err(NusmvError::Failed {
            status: output.status.to_string(),
            stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
        });
    }
    let stdout = String::from_utf8_lossy(&output.stdout);
    let verdicts = parse_verdicts(&stdout);
    if verdicts.is_empty() {
        return Err(NusmvError::NoVerdicts);
    }
    Ok(verdicts)
}

fn parse_verdicts(stdout: &str) -> Vec<bool> {
    stdout
        .lines()
        .filter_map(|line| {
            let line = line.trim();
            if !line.starts_with("-- specification") {
                return None;
            }
            if line.ends_with("is true") {
                Some(true)
            } else if line.ends_with("is false") {
                Some(false)
            } else {
                None
            }
        })
        .collect()
}
