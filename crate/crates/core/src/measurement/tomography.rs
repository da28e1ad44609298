//! State reconstruction from frequency measurements of `A`, `B_ij` and `C_ij`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{
    c, sorted_eigh, spectral_decompose, trace_distance, CMatrix, CVector, Csop, DensityState,
    HermitianOperator, DEFAULT_CLUSTER_TOL, PROJECTOR_TOL,
};
use crate::propensity::{frequency_from_table, propensity_table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "observable", rename_all = "snake_case")]
pub enum Setting {
    /// `A = Σ a_i |a_i⟩⟨a_i|`, read out per eigenstate.
    A,
    /// `B_ij = ½(|a_i⟩⟨a_j| + |a_j⟩⟨a_i|)`, `⟨B_ij⟩ = Re ρ_ij`.
    B { i: usize, j: usize },
    /// `C_ij = (i/2)(|a_i⟩⟨a_j| − |a_j⟩⟨a_i|)`, `⟨C_ij⟩ = Im ρ_ij`.
    C { i: usize, j: usize },
}

/// `A`, then `B_ij`, `C_ij` for each pair `i < j`.
pub fn settings(dim: usize) -> Vec<Setting> {
    let mut out = vec![Setting::A];
    for i in 0..dim {
        for j in i + 1..dim {
            out.push(Setting::B { i, j });
            out.push(Setting::C { i, j });
        }
    }
    out
}

fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

/// The setting's observable in the computational basis.
pub fn setting_observable(setting: Setting, basis: &CMatrix) -> HermitianOperator {
    let col = |k: usize| basis.column(k).into_owned();
    match setting {
        Setting::A => {
            let n = basis.ncols();
            let values: Vec<f64> = (0..n).map(|k| k as f64).collect();
            let d = CMatrix::from_diagonal(&CVector::from_iterator(n, values.into_iter().map(c)));
            HermitianOperator::from_trusted(basis * d * basis.adjoint(), "A")
        }
        Setting::B { i, j } => {
            let m = (outer(&col(i), &col(j)) + outer(&col(j), &col(i))) * c(0.5);
            HermitianOperator::from_trusted(m, format!("B_{i}{j}"))
        }
        Setting::C { i, j } => {
            let m = (outer(&col(i), &col(j)) - outer(&col(j), &col(i))) * Complex64::new(0.0, 0.5);
            HermitianOperator::from_trusted(m, format!("C_{i}{j}"))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SettingEstimate {
    pub setting: Setting,
    /// Sample mean of the observable's eigenvalue.
    pub estimate: f64,
    pub counts: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct TomographyReport {
    /// Unrepaired estimate, computational basis.
    pub rho_hat: CMatrix,
    /// Nearest valid state after clipping negative eigenvalues.
    pub rho_repaired: DensityState,
    pub trace_distance: f64,
    pub estimates: Vec<SettingEstimate>,
    pub n_per_setting: u64,
    pub seed: u64,
}

/// Clip negative eigenvalues to 0 and renormalize the trace.
pub fn repair_positivity(m: &CMatrix) -> Result<DensityState> {
    let (vals, vecs) = sorted_eigh(m)?;
    let clipped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidState("estimate has no positive spectrum".into()));
    }
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        clipped.len(),
        clipped.iter().map(|&v| c(v / total)),
    ));
    DensityState::new(&vecs * d * vecs.adjoint())
}

/// Setting `s` draws from stream base `s`, so each setting is reproducible on its own.
pub fn tomography(
    rho_true: &DensityState,
    basis: &CMatrix,
    n_per_setting: u64,
    seed: u64,
) -> Result<TomographyReport> {
    let n = rho_true.dim();
    if basis.nrows() != n || basis.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: basis.ncols(),
        });
    }
    let defect = (basis.adjoint() * basis - CMatrix::identity(n, n)).norm();
    if defect > PROJECTOR_TOL {
        return Err(Error::InvalidArgument(format!(
            "observable basis is not orthonormal (‖U†U − I‖ = {defect:.3e})"
        )));
    }
    if n_per_setting == 0 {
        return Err(Error::InvalidArgument("n_per_setting must be at least 1".into()));
    }
    let all = settings(n);
    let estimates = all
        .par_iter()
        .enumerate()
        .map(|(s, &setting)| {
            let (csop, values) = match setting {
                Setting::A => (Csop::from_basis(basis)?, (0..n).map(|k| k as f64).collect()),
                _ => {
                    let sd = spectral_decompose(&setting_observable(setting, basis), DEFAULT_CLUSTER_TOL)?;
                    (sd.csop(), sd.eigenvalues().to_vec())
                }
            };
            let table = propensity_table(rho_true, &csop)?;
            let freq = frequency_from_table(&table, n_per_setting, seed, s as u64)?;
            let estimate = freq
                .frequencies()
                .iter()
                .zip(&values)
                .map(|(f, v)| f * v)
                .sum();
            Ok(SettingEstimate {
                setting,
                estimate,
                counts: freq.counts,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut in_basis = CMatrix::zeros(n, n);
    for e in &estimates {
        match e.setting {
            Setting::A => {
                let total = n_per_setting as f64;
                for k in 0..n {
                    in_basis[(k, k)] = c(e.counts[k] as f64 / total);
                }
            }
            Setting::B { i, j } => {
                in_basis[(i, j)].re = e.estimate;
                in_basis[(j, i)].re = e.estimate;
            }
            Setting::C { i, j } => {
                in_basis[(i, j)].im = e.estimate;
                in_basis[(j, i)].im = -e.estimate;
            }
        }
    }
    let rho_hat = basis * in_basis * basis.adjoint();
    let rho_repaired = repair_positivity(&rho_hat)?;
    Ok(TomographyReport {
        trace_distance: trace_distance(&rho_repaired, rho_true),
        rho_hat,
        rho_repaired,
        estimates,
        n_per_setting,
        seed,
    })
}
