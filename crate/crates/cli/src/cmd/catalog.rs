//! `catalog` regression runs and the `born-oppenheimer` scan.

use clap::Args;
use serde_json::json;

use modal_core::catalog::{
    all_fixtures, born_oppenheimer_scan, by_name, CatalogReport, ScenarioFixture,
};
use modal_core::decoherence::wigner::PositionGrid;

use crate::config::Settings;
use crate::error::CliError;
use crate::output::{to_value, Cell, Csv, Report};

#[derive(Args, Debug)]
pub struct CatalogArgs {
    /// Fixture name; every fixture when omitted.
    #[arg(conflicts_with = "all")]
    pub name: Option<String>,
    #[arg(long)]
    pub all: bool,
    /// Print fixture bundles instead of checking them.
    #[arg(long)]
    pub export: bool,
}

#[derive(Args, Debug)]
pub struct BornOppenheimerArgs {
    /// Masses to scan.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64,128,256,512,1024,2048,4096")]
    pub masses: Vec<f64>,
    #[arg(long, default_value_t = 48)]
    pub n: usize,
    #[arg(long, default_value_t = 10.0)]
    pub length: f64,
}

fn selected(args: &CatalogArgs) -> Result<Vec<ScenarioFixture>, CliError> {
    Ok(match &args.name {
        Some(n) => vec![by_name(n)?],
        None => all_fixtures()?,
    })
}

pub fn catalog(args: &CatalogArgs, s: &Settings) -> Result<Report, CliError> {
    let fixtures = selected(args)?;
    if args.export {
        let mut csv = Csv::new(&["fixture", "observable", "expected"]);
        for f in &fixtures {
            for o in &f.observables {
                csv.row(&[Cell::Text(&f.name), Cell::Text(o.label()), Cell::OptBool(f.expected.get(o.label()).copied())]);
            }
        }
        let bundles: Vec<_> = fixtures.iter().map(|f| to_value(&f.to_bundle())).collect();
        return Ok(Report::new(
            json!({"command": "catalog_export", "fixtures": bundles}),
            csv.finish(),
        ));
    }
    let reports = fixtures
        .iter()
        .map(|f| f.check(s.actualization()))
        .collect::<Result<Vec<_>, _>>()?;
    let pass = reports.iter().all(|r| r.pass);
    let rep = CatalogReport {
        fixtures: reports,
        pass,
    };
    let mut csv = Csv::new(&["fixture", "observable", "expected", "actual", "pass"]);
    for f in &rep.fixtures {
        for r in &f.rows {
            csv.row(&[
                Cell::Text(&f.name),
                Cell::Text(&r.label),
                Cell::OptBool(r.expected),
                Cell::Bool(r.actual),
                Cell::Bool(r.pass),
            ]);
        }
    }
    let mut json = to_value(&rep);
    json["command"] = json!("catalog");
    let mut report = Report::new(json, csv.finish());
    if !pass {
        let failed: Vec<&str> = rep.fixtures.iter().filter(|f| !f.pass).map(|f| f.name.as_str()).collect();
        report.failure = Some(format!("catalog verdicts differ for: {}", failed.join(", ")));
    }
    Ok(report)
}

pub fn born_oppenheimer(args: &BornOppenheimerArgs, s: &Settings) -> Result<Report, CliError> {
    let grid = PositionGrid::centered(args.length, args.n)?;
    let rep = born_oppenheimer_scan(&args.masses, &grid, s.actualization())?;
    let mut csv = Csv::new(&["mass", "q_score", "p2_score", "q_approximately_definite"]);
    for st in &rep.steps {
        csv.row(&[
            Cell::Num(st.mass),
            Cell::Num(st.q_score),
            Cell::Num(st.p2_score),
            Cell::Bool(st.q_approximately_definite),
        ]);
    }
    let mut json = to_value(&rep);
    json["command"] = json!("born_oppenheimer");
    Ok(Report::new(json, csv.finish()))
}
