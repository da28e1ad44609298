//! `measure`: ideal, non-ideal, Hamiltonian, Stern–Gerlach and Gaussian-tail runs.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use modal_core::measurement::stern_gerlach::{stern_gerlach, POINTER_VALUES};
use modal_core::measurement::tails::{tails_overlap, Gaussian, Window};
use modal_core::measurement::{
    run_hamiltonian, run_ideal, run_nonideal, Apparatus, CorrelationMatrix, MeasurementOutcome,
    MeasurementSetup,
};
use modal_core::operator::{CMatrix, HermitianOperator, MatrixJson};
use modal_core::propensity::{frequency_from_table, FrequencyTable, PropensityTable};
use modal_core::systems::QuantumSystem;

use crate::config::Settings;
use crate::error::CliError;
use crate::input::{read_json, ComplexIn};
use crate::output::{to_value, Cell, Csv, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Ideal,
    Nonideal,
    Hamiltonian,
    SternGerlach,
    Tails,
}

#[derive(Args, Debug)]
pub struct MeasureArgs {
    #[arg(long, value_enum, default_value = "ideal")]
    pub mode: Mode,
    /// Setup JSON; each mode has a built-in preset when omitted.
    pub setup: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowIn {
    /// `null` for −∞.
    lo: Option<f64>,
    /// `null` for +∞.
    hi: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetupIn {
    coefficients: Option<Vec<ComplexIn>>,
    observable: Option<MatrixJson>,
    system_hamiltonian: Option<MatrixJson>,
    /// Rows index the system eigenstate, columns the outcome.
    correlation: Option<MatrixJson>,
    pointer_dim: Option<usize>,
    lambda: Option<f64>,
    t1: Option<f64>,
    hbar: Option<f64>,
    k: Option<f64>,
    plus: Option<Gaussian>,
    minus: Option<Gaussian>,
    window_plus: Option<WindowIn>,
    window_minus: Option<WindowIn>,
}

#[derive(Serialize)]
struct OutcomeRow {
    outcome: usize,
    pointer_index: usize,
    value: f64,
    propensity: f64,
    count: Option<u64>,
    frequency: Option<f64>,
    stderr: Option<f64>,
}

fn frequencies(
    table: &PropensityTable,
    s: &Settings,
) -> Result<Option<FrequencyTable>, CliError> {
    match s.trials {
        None | Some(0) => Ok(None),
        Some(n) => {
            let seed = s.require_seed("sampling trials")?;
            Ok(Some(frequency_from_table(table, n, seed, 0)?))
        }
    }
}

fn rows_for(
    pointer_table: &PropensityTable,
    outcome_indices: &[usize],
    values: &[f64],
    freq: &Option<FrequencyTable>,
) -> Vec<OutcomeRow> {
    outcome_indices
        .iter()
        .enumerate()
        .map(|(i, &j)| OutcomeRow {
            outcome: i,
            pointer_index: j,
            value: values[i],
            propensity: pointer_table.measures()[j],
            count: freq.as_ref().map(|f| f.counts[j]),
            frequency: freq.as_ref().map(|f| f.frequencies()[j]),
            stderr: freq.as_ref().map(|f| f.stderr()[j]),
        })
        .collect()
}

fn rows_csv(rows: &[OutcomeRow]) -> String {
    let mut csv = Csv::new(&["outcome", "pointer_index", "value", "propensity", "count", "frequency", "stderr"]);
    for r in rows {
        csv.row(&[
            Cell::Int(r.outcome as u64),
            Cell::Int(r.pointer_index as u64),
            Cell::Num(r.value),
            Cell::Num(r.propensity),
            Cell::OptNum(r.count.map(|c| c as f64)),
            Cell::OptNum(r.frequency),
            Cell::OptNum(r.stderr),
        ]);
    }
    csv.finish()
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn build_setup(input: &SetupIn, s: &Settings) -> Result<MeasurementSetup, CliError> {
    let coeffs: Vec<Complex64> = match &input.coefficients {
        Some(c) => c.iter().map(|&z| z.into()).collect(),
        None => vec![Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)],
    };
    let n = coeffs.len();
    if n == 0 {
        return Err(input_err("coefficients must not be empty"));
    }
    let observable = match &input.observable {
        Some(m) => m.to_operator("A", s.tol_herm)?,
        None => HermitianOperator::diagonal(&(0..n).map(|k| k as f64).collect::<Vec<_>>(), "A"),
    };
    let h_s = match &input.system_hamiltonian {
        Some(m) => m.to_operator("H_S", s.tol_herm)?,
        None => observable.clone().with_label("H_S"),
    };
    let apparatus = Apparatus::ladder(input.pointer_dim.unwrap_or(n + 1), 0)?;
    Ok(MeasurementSetup::new(
        QuantumSystem::new("S", h_s),
        observable,
        coeffs,
        apparatus,
    )?)
}

fn outcome_json(
    mode: Mode,
    out: &MeasurementOutcome,
    values: &[f64],
    s: &Settings,
) -> Result<(Value, String), CliError> {
    let freq = frequencies(&out.pointer_table, s)?;
    let rows = rows_for(&out.pointer_table, &out.outcome_indices, values, &freq);
    let csv = rows_csv(&rows);
    Ok((
        json!({
            "command": "measure",
            "mode": mode,
            "outcomes": to_value(&rows),
            "pointer_table": out.pointer_table.measures(),
            "reliability": to_value(&out.reliability),
            "pointer_definite": out.pointer_verdict.definite,
            "observable_definite_on_system": out.observable_definite_on_system,
            "trials": freq.as_ref().map(|f| f.n_trials),
            "seed": freq.as_ref().map(|f| f.seed),
        }),
        csv,
    ))
}

fn window(w: &Option<WindowIn>, lo: f64, hi: f64) -> Result<Window, CliError> {
    let (a, b) = match w {
        Some(w) => (w.lo.unwrap_or(f64::NEG_INFINITY), w.hi.unwrap_or(f64::INFINITY)),
        None => (lo, hi),
    };
    Ok(Window::new(a, b)?)
}

pub fn measure(args: &MeasureArgs, s: &Settings) -> Result<Report, CliError> {
    let input: SetupIn = match &args.setup {
        Some(p) => read_json(p)?,
        None => SetupIn::default(),
    };
    let opts = s.measurement();
    match args.mode {
        Mode::Ideal => {
            let setup = build_setup(&input, s)?;
            let out = run_ideal(&setup, &opts)?;
            let (json, csv) = outcome_json(args.mode, &out, setup.observable_values(), s)?;
            Ok(Report::new(json, csv))
        }
        Mode::Nonideal => {
            let setup = build_setup(&input, s)?;
            let d = match &input.correlation {
                Some(m) => CorrelationMatrix::new(m.to_matrix()?)?,
                None if setup.coefficients().len() == 2 => {
                    let c = |x: f64| Complex64::new(x, 0.0);
                    CorrelationMatrix::new(CMatrix::from_row_slice(
                        2,
                        2,
                        &[c(0.6), c(0.1), c(0.1), c(0.62f64.sqrt())],
                    ))?
                }
                None => return Err(input_err("nonideal mode needs a correlation matrix")),
            };
            let out = run_nonideal(&setup, &d, &opts)?;
            let (json, csv) = outcome_json(args.mode, &out, setup.observable_values(), s)?;
            Ok(Report::new(json, csv))
        }
        Mode::Hamiltonian => {
            let setup = build_setup(&input, s)?;
            let run = run_hamiltonian(
                &setup,
                input.lambda.unwrap_or(1.0),
                input.t1.unwrap_or(1e-3),
                input.hbar.unwrap_or(1.0),
                &opts,
            )?;
            let (mut json, csv) = outcome_json(args.mode, &run.outcome, setup.observable_values(), s)?;
            json["correlation_defect"] = json!(run.correlation_defect);
            json["table_deviation"] = json!(run.table_deviation);
            Ok(Report::new(json, csv))
        }
        Mode::SternGerlach => {
            let coeffs: Vec<Complex64> = match &input.coefficients {
                Some(c) if c.len() == 2 => c.iter().map(|&z| z.into()).collect(),
                Some(_) => return Err(input_err("stern-gerlach needs two coefficients")),
                None => vec![Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0); 2],
            };
            let d = match &input.correlation {
                Some(m) => Some(CorrelationMatrix::new(m.to_matrix()?)?),
                None => None,
            };
            let rep = stern_gerlach(coeffs[0], coeffs[1], d, input.k.unwrap_or(1.0), &opts)?;
            let which = rep.nonideal.unwrap_or(rep.ideal);
            let table = PropensityTable::from_measures(which.to_vec())?;
            let freq = frequencies(&table, s)?;
            let rows = rows_for(&table, &[0, 1, 2], &POINTER_VALUES, &freq);
            let csv = rows_csv(&rows);
            let json = json!({
                "command": "measure",
                "mode": args.mode,
                "outcomes": to_value(&rows),
                "pointer_table": which,
                "ideal": rep.ideal,
                "nonideal": rep.nonideal,
                "reliability": rep.reliability.as_ref().map(to_value),
                "pointer_definite": rep.pointer_definite,
                "observable_definite_on_system": rep.spin_sz_definite,
                "spin_context": rep.spin_context,
                "trials": freq.as_ref().map(|f| f.n_trials),
                "seed": freq.as_ref().map(|f| f.seed),
            });
            Ok(Report::new(json, csv))
        }
        Mode::Tails => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let (c1, c2) = match &input.coefficients {
                Some(c) if c.len() == 2 => (c[0].into(), c[1].into()),
                Some(_) => return Err(input_err("tails needs two coefficients")),
                None => (Complex64::new(h, 0.0), Complex64::new(h, 0.0)),
            };
            let plus = input.plus.unwrap_or(Gaussian::new(1.0, 1.0)?);
            let minus = input.minus.unwrap_or(Gaussian::new(-1.0, 1.0)?);
            let plus = Gaussian::new(plus.mu, plus.sigma)?;
            let minus = Gaussian::new(minus.mu, minus.sigma)?;
            let wp = window(&input.window_plus, 0.0, f64::INFINITY)?;
            let wm = window(&input.window_minus, f64::NEG_INFINITY, 0.0)?;
            let rep = tails_overlap(plus, minus, wp, wm, c1, c2, s.reliability_threshold)?;
            let mut csv = Csv::new(&["quantity", "value"]);
            for (k, v) in [
                ("p_up_plus", rep.p_up_plus),
                ("p_up_minus", rep.p_up_minus),
                ("p_down_plus", rep.p_down_plus),
                ("p_down_minus", rep.p_down_minus),
                ("pointer_plus", rep.pointer_plus),
                ("pointer_minus", rep.pointer_minus),
                ("cross_fraction_up", rep.cross_fraction_up),
                ("cross_fraction_down", rep.cross_fraction_down),
            ] {
                csv.row(&[Cell::Text(k), Cell::Num(v)]);
            }
            let json = json!({
                "command": "measure",
                "mode": args.mode,
                "tails": to_value(&rep),
            });
            Ok(Report::new(json, csv.finish()))
        }
    }
}
