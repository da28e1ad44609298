//! `tomography`.

use std::path::PathBuf;

use clap::Args;
use num_complex::Complex64;
use serde_json::json;

use modal_core::measurement::tomography::{tomography, Setting};
use modal_core::operator::{CMatrix, CVector, DensityState, MatrixJson};

use crate::config::Settings;
use crate::error::CliError;
use crate::input::read_json;
use crate::output::{Cell, Csv, Report};

/// Default shots per setting.
pub const DEFAULT_SHOTS: u64 = 100_000;

#[derive(Args, Debug)]
pub struct TomographyArgs {
    /// Density matrix `{dim, re, im}`; a fixed 3-level state otherwise.
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Unitary whose columns are the eigenbasis of `A`; identity otherwise.
    #[arg(long)]
    pub basis: Option<PathBuf>,
}

/// `0.6|ψ⟩⟨ψ| + 0.4·I/3`, `ψ = (1, i, 1)/√3`.
pub fn preset_state() -> DensityState {
    let s = 1.0 / 3f64.sqrt();
    let psi = CVector::from_vec(vec![
        Complex64::new(s, 0.0),
        Complex64::new(0.0, s),
        Complex64::new(s, 0.0),
    ]);
    let m = &psi * psi.adjoint() * Complex64::new(0.6, 0.0)
        + CMatrix::identity(3, 3) * Complex64::new(0.4 / 3.0, 0.0);
    DensityState::new(m).expect("preset state is valid")
}

pub fn run(args: &TomographyArgs, s: &Settings) -> Result<Report, CliError> {
    let seed = s.require_seed("tomography")?;
    let rho = match &args.state {
        Some(p) => DensityState::new(read_json::<MatrixJson>(p)?.to_matrix()?)?,
        None => preset_state(),
    };
    let basis = match &args.basis {
        Some(p) => read_json::<MatrixJson>(p)?.to_matrix()?,
        None => CMatrix::identity(rho.dim(), rho.dim()),
    };
    let n = s.trials.unwrap_or(DEFAULT_SHOTS);
    let rep = tomography(&rho, &basis, n, seed)?;
    let mut csv = Csv::new(&["setting", "i", "j", "estimate"]);
    let mut estimates = Vec::new();
    for e in &rep.estimates {
        let (name, i, j) = match e.setting {
            Setting::A => ("A", None, None),
            Setting::B { i, j } => ("B", Some(i), Some(j)),
            Setting::C { i, j } => ("C", Some(i), Some(j)),
        };
        csv.row(&[
            Cell::Text(name),
            Cell::OptNum(i.map(|x| x as f64)),
            Cell::OptNum(j.map(|x| x as f64)),
            Cell::Num(e.estimate),
        ]);
        estimates.push(json!({"setting": name, "i": i, "j": j, "estimate": e.estimate, "counts": e.counts}));
    }
    let json = json!({
        "command": "tomography",
        "dim": rho.dim(),
        "n_per_setting": rep.n_per_setting,
        "seed": rep.seed,
        "trace_distance": rep.trace_distance,
        "rho_true": MatrixJson::from_matrix(rho.matrix()),
        "rho_hat": MatrixJson::from_matrix(&rep.rho_hat),
        "rho_repaired": MatrixJson::from_matrix(rep.rho_repaired.matrix()),
        "estimates": estimates,
    });
    Ok(Report::new(json, csv.finish()))
}
