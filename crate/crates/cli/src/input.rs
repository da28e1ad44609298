//! JSON input files.

use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use modal_core::operator::{HermitianOperator, MatrixJson};
use modal_core::systems::{QuantumSystem, SystemBundle};

use crate::error::CliError;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("malformed JSON in {}: {e}", path.display())))
}

/// A bare matrix or a system bundle carrying one under `H`.
#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixOrSystem {
    System(SystemBundle),
    Matrix(MatrixJson),
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "O".into())
}

pub fn read_system(path: &Path, herm_tol: f64) -> Result<QuantumSystem, CliError> {
    match read_json::<MatrixOrSystem>(path)? {
        MatrixOrSystem::System(b) => Ok(b.to_system(herm_tol)?),
        MatrixOrSystem::Matrix(m) => Ok(QuantumSystem::new(stem(path), m.to_operator("H", herm_tol)?)),
    }
}

/// A bare matrix (labelled by file name) or `{label, matrix}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum ObservableFile {
    Labelled { label: String, matrix: MatrixJson },
    Matrix(MatrixJson),
}

pub fn read_observable(path: &Path, herm_tol: f64) -> Result<HermitianOperator, CliError> {
    Ok(match read_json::<ObservableFile>(path)? {
        ObservableFile::Labelled { label, matrix } => matrix.to_operator(label, herm_tol)?,
        ObservableFile::Matrix(m) => m.to_operator(stem(path), herm_tol)?,
    })
}

/// `0.6` or `[0.6, 0.1]` for `0.6 + 0.1i`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum ComplexIn {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexIn> for Complex64 {
    fn from(z: ComplexIn) -> Self {
        match z {
            ComplexIn::Real(x) => Complex64::new(x, 0.0),
            ComplexIn::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}
