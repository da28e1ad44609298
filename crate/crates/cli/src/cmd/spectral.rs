//! `spectrum` and `context`.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use serde_json::json;

use modal_core::actualization::{is_definite_valued, preferred_context_with, ContextKind, Violation};
use modal_core::catalog::by_name;
use modal_core::operator::{spectral_decompose, HermitianOperator};
use modal_core::systems::QuantumSystem;

use crate::config::Settings;
use crate::error::CliError;
use crate::input::{read_observable, read_system};
use crate::output::{to_value, Cell, Csv, Report};

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    /// Matrix `{dim, re, im}` or system bundle `{label, dim, H}`.
    #[arg(required_unless_present = "catalog", conflicts_with = "catalog")]
    pub file: Option<PathBuf>,
    /// Use a catalog fixture's Hamiltonian instead of a file.
    #[arg(long)]
    pub catalog: Option<String>,
}

#[derive(Args, Debug)]
pub struct ContextArgs {
    /// System bundle or Hamiltonian matrix.
    #[arg(required_unless_present = "catalog", conflicts_with = "catalog")]
    pub system: Option<PathBuf>,
    /// Observable files: a matrix or `{label, matrix}`.
    pub observables: Vec<PathBuf>,
    /// Use a catalog fixture and its named observables.
    #[arg(long)]
    pub catalog: Option<String>,
}

fn load_system(file: &Option<PathBuf>, catalog: &Option<String>, s: &Settings) -> Result<QuantumSystem, CliError> {
    match (file, catalog) {
        (_, Some(name)) => Ok(by_name(name)?.system),
        (Some(p), None) => read_system(p, s.tol_herm),
        (None, None) => Err(CliError::Input("no system given".into())),
    }
}

pub fn spectrum(args: &SpectrumArgs, s: &Settings) -> Result<Report, CliError> {
    let system = load_system(&args.file, &args.catalog, s)?;
    let sd = spectral_decompose(system.hamiltonian(), s.tol_cluster)?;
    let mut csv = Csv::new(&["cluster", "eigenvalue", "multiplicity"]);
    for (k, (e, m)) in sd.eigenvalues().iter().zip(sd.multiplicities()).enumerate() {
        csv.row(&[Cell::Int(k as u64), Cell::Num(*e), Cell::Int(*m as u64)]);
    }
    let json = json!({
        "command": "spectrum",
        "label": system.label(),
        "dim": sd.dim(),
        "eigenvalues": sd.eigenvalues(),
        "multiplicities": sd.multiplicities(),
        "degenerate": sd.is_degenerate(),
        "residual": sd.residual(),
    });
    Ok(Report::new(json, csv.finish()))
}

#[derive(Serialize)]
struct VerdictOut {
    label: String,
    definite: bool,
    expected: Option<bool>,
    score: Option<f64>,
    block_score: Option<f64>,
    approximately_definite: Option<bool>,
    induced_values: Option<Vec<f64>>,
    violation: Option<&'static str>,
}

pub fn context(args: &ContextArgs, s: &Settings) -> Result<Report, CliError> {
    let (system, observables, expected) = match &args.catalog {
        Some(name) => {
            let f = by_name(name)?;
            let mut obs = f.observables.clone();
            for p in &args.observables {
                obs.push(read_observable(p, s.tol_herm)?);
            }
            (f.system, obs, f.expected)
        }
        None => {
            let system = load_system(&args.system, &None, s)?;
            let obs = args
                .observables
                .iter()
                .map(|p| read_observable(p, s.tol_herm))
                .collect::<Result<Vec<HermitianOperator>, _>>()?;
            (system, obs, Default::default())
        }
    };
    let ctx = preferred_context_with(system.hamiltonian(), s.actualization())?;
    let mut verdicts = Vec::with_capacity(observables.len());
    for o in &observables {
        let exp = expected.get(o.label()).copied();
        if ctx.has_context() {
            let v = is_definite_valued(o, &ctx)?;
            verdicts.push(VerdictOut {
                label: v.label.clone(),
                definite: v.definite,
                expected: exp,
                score: Some(v.score),
                block_score: Some(v.block_score),
                approximately_definite: Some(v.approximately_definite),
                induced_values: v.induced_values.clone(),
                violation: v.violation.as_ref().map(|x| match x {
                    Violation::Commutator { .. } => "commutator",
                    Violation::BlockStructure { .. } => "block_structure",
                }),
            });
        } else {
            verdicts.push(VerdictOut {
                label: o.label().to_string(),
                definite: false,
                expected: exp,
                score: None,
                block_score: None,
                approximately_definite: None,
                induced_values: None,
                violation: None,
            });
        }
    }
    let mut csv = Csv::new(&["label", "definite", "expected", "score", "block_score"]);
    for v in &verdicts {
        csv.row(&[
            Cell::Text(&v.label),
            Cell::Bool(v.definite),
            Cell::OptBool(v.expected),
            Cell::OptNum(v.score),
            Cell::OptNum(v.block_score),
        ]);
    }
    let message = match ctx.kind() {
        ContextKind::None => "no actualization: the Hamiltonian is a multiple of the identity",
        ContextKind::Context => "preferred context from the eigenspaces of H",
    };
    let json = json!({
        "command": "context",
        "system": system.label(),
        "dim": system.dim(),
        "kind": ctx.kind(),
        "message": message,
        "eigenvalues": ctx.eigenvalues(),
        "multiplicities": ctx.multiplicities(),
        "verdicts": to_value(&verdicts),
    });
    Ok(Report::new(json, csv.finish()))
}
