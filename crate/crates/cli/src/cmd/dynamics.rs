//! `decohere` and `wigner`.

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use modal_core::decoherence::wigner::{
    classical_limit_check, cosine_bump, wigner_transform, EnergyDensity, PhaseHamiltonian,
    PositionGrid,
};
use modal_core::decoherence::{
    decoherence_profile, expectation_evolution, gaussian_model, revival, single_frequency_model,
    GaussianProfile,
};
use modal_core::operator::CMatrix;

use crate::config::Settings;
use crate::error::CliError;
use crate::output::{to_value, Cell, Csv, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoherePreset {
    Gaussian,
    Single,
}

#[derive(Args, Debug)]
pub struct DecohereArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub preset: DecoherePreset,
    /// Energy grid size.
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// Spread of the off-diagonal profile in `ω − ω′`.
    #[arg(long, default_value_t = 0.01)]
    pub sigma: f64,
    /// Number of output times.
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    /// Output span in recurrence times.
    #[arg(long, default_value_t = 1.1)]
    pub span: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WignerPreset {
    /// Oscillator ground state.
    Ground,
    /// Energy-shell concentration over an ħ ladder.
    Classical,
}

#[derive(Args, Debug)]
pub struct WignerArgs {
    #[arg(long, value_enum, default_value = "ground")]
    pub preset: WignerPreset,
    /// Grid points (even).
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Box length; defaults to 16 (ground) or 8 (classical).
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    /// Decreasing ħ values for the classical preset.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05")]
    pub ladder: Vec<f64>,
}

#[derive(Serialize)]
struct SeriesRow {
    t: f64,
    re_expectation: f64,
    envelope: f64,
}

pub fn decohere(args: &DecohereArgs, _s: &Settings) -> Result<Report, CliError> {
    if args.points < 2 || !(args.span > 0.0) {
        return Err(CliError::Input("--points must be ≥ 2 and --span positive".into()));
    }
    let dw = 1.0 / args.n.max(2) as f64;
    let model = match args.preset {
        DecoherePreset::Gaussian => gaussian_model(&GaussianProfile {
            n: args.n,
            delta_omega: dw,
            sigma: args.sigma,
            ..GaussianProfile::default()
        })?,
        DecoherePreset::Single => single_frequency_model(args.n, dw, args.n / 2, 0.5, 1.0)?,
    };
    let rec = model.recurrence_time();
    let times: Vec<f64> = (0..args.points)
        .map(|k| k as f64 * args.span * rec / (args.points - 1) as f64)
        .collect();
    let window: Vec<f64> = times.iter().copied().filter(|&t| t < 0.5 * rec).collect();
    let profile = decoherence_profile(&model, &window)?;
    let rows: Vec<SeriesRow> = times
        .iter()
        .map(|&t| SeriesRow {
            t,
            re_expectation: expectation_evolution(&model, t).re,
            envelope: model.envelope(t),
        })
        .collect();
    let mut csv = Csv::new(&["t", "re_expectation", "envelope"]);
    for r in &rows {
        csv.row(&[Cell::Num(r.t), Cell::Num(r.re_expectation), Cell::Num(r.envelope)]);
    }
    let json = json!({
        "command": "decohere",
        "preset": args.preset,
        "n": model.len(),
        "delta_omega": model.delta_omega(),
        "sigma": matches!(args.preset, DecoherePreset::Gaussian).then_some(args.sigma),
        "hbar": model.hbar(),
        "recurrence_time": rec,
        "diagonal_value": profile.diagonal_value,
        "initial_envelope": profile.initial_envelope,
        "t_d": profile.t_d,
        "revival": to_value(&revival(&model)),
        "series": to_value(&rows),
    });
    Ok(Report::new(json, csv.finish()))
}

/// `ψ(x) ∝ e^{−x²/2ħ}` on the grid, as a density matrix.
fn ground_state(grid: &PositionGrid, hbar: f64) -> CMatrix {
    let psi: Vec<f64> = grid.points().iter().map(|x| (-x * x / (2.0 * hbar)).exp()).collect();
    let norm: f64 = psi.iter().map(|v| v * v).sum();
    CMatrix::from_fn(grid.n, grid.n, |a, b| Complex64::new(psi[a] * psi[b] / norm, 0.0))
}

pub fn wigner(args: &WignerArgs, _s: &Settings) -> Result<Report, CliError> {
    match args.preset {
        WignerPreset::Ground => {
            let grid = PositionGrid::centered(args.length.unwrap_or(16.0), args.n)?;
            let w = wigner_transform(&ground_state(&grid, args.hbar), &grid, args.hbar)?;
            let pref = 1.0 / (std::f64::consts::PI * args.hbar);
            let mut max_err = 0.0f64;
            let mut csv = Csv::new(&["q", "p", "w"]);
            let mut rows = Vec::with_capacity(w.q.len());
            for (i, &q) in w.q.iter().enumerate() {
                let mut row = Vec::with_capacity(w.p.len());
                for (m, &p) in w.p.iter().enumerate() {
                    let v = w.w[(i, m)];
                    let exact = pref * (-(q * q + p * p) / args.hbar).exp();
                    max_err = max_err.max((v - exact).abs());
                    csv.row(&[Cell::Num(q), Cell::Num(p), Cell::Num(v)]);
                    row.push(v);
                }
                rows.push(row);
            }
            let json = json!({
                "command": "wigner",
                "preset": args.preset,
                "n": grid.n,
                "hbar": args.hbar,
                "dq": w.dq,
                "dp": w.dp,
                "normalization": w.normalization(),
                "max_imaginary": w.max_imaginary,
                "closed_form_max_error": max_err,
                "q": w.q,
                "p": w.p,
                "w": rows,
            });
            Ok(Report::new(json, csv.finish()))
        }
        WignerPreset::Classical => {
            let grid = PositionGrid::centered(args.length.unwrap_or(8.0), args.n)?;
            let v = |q: f64| 0.5 * q * q;
            let h = PhaseHamiltonian {
                mass: 1.0,
                potential: &v,
                omega_char: 1.0,
            };
            let bump = cosine_bump(2.0, 0.5);
            let rho = EnergyDensity {
                density: &bump,
                support: (1.5, 2.5),
            };
            let rep = classical_limit_check(&h, &rho, &grid, &args.ladder)?;
            let mut csv = Csv::new(&["hbar", "concentration", "levels_used", "normalization"]);
            for st in &rep.steps {
                csv.row(&[
                    Cell::Num(st.hbar),
                    Cell::Num(st.concentration),
                    Cell::Int(st.levels_used as u64),
                    Cell::Num(st.normalization),
                ]);
            }
            let json = json!({
                "command": "wigner",
                "preset": args.preset,
                "n": grid.n,
                "steps": to_value(&rep.steps),
                "monotone": rep.monotone,
            });
            Ok(Report::new(json, csv.finish()))
        }
    }
}
