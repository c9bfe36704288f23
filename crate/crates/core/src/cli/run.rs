use serde::Serialize;

use super::config::{Command, OutputFormat, RunConfig};
use super::output::{csv_line, fmt_sig, json_report, scan_csv};
use crate::analysis::{diamagnetic_audit, perimeter_limit_scan, perimeter_ps};
use crate::asym::{bbm_constant, cns_normalization, extrapolate, ms_constant, scan, Endpoint};
use crate::error::{FracError, Result};
use crate::quad::energy;

pub const CONSTANTS_HEADER: &str = "n,p,s,ms_constant,bbm_constant,cns_normalization";
pub const ENERGY_HEADER: &str = "method,energy,stat_error,trunc_error,r_min,r_max,samples,evaluations";
pub const PERIMETER_HEADER: &str = "s,cross,cross_error,interaction,interaction_error,perimeter";
pub const AUDIT_HEADER: &str = "samples,violations,worst_margin,seed";

fn render<T: Serialize>(config: &RunConfig, csv: String, result: T) -> String {
    match config.format {
        OutputFormat::Csv => csv,
        OutputFormat::Json => json_report(config, result),
    }
}

/// Output text of a validated non-verify command.
pub fn execute(config: &RunConfig) -> Result<String> {
    config.validate()?;
    match config.command {
        Command::Constants => constants(config),
        Command::Energy => single_energy(config),
        Command::Scan => scan_command(config),
        Command::Perimeter => perimeter(config),
        Command::Audit => audit(config),
        Command::Verify => Err(FracError::Config("verify is run by the driver, not execute".into())),
    }
}

#[derive(Serialize)]
struct ConstantsRow {
    n: usize,
    p: f64,
    s: Option<f64>,
    ms_constant: f64,
    bbm_constant: f64,
    cns_normalization: Option<f64>,
}

fn constants(config: &RunConfig) -> Result<String> {
    let ss = config.s_values();
    let s_list: Vec<Option<f64>> = if ss.is_empty() { vec![None] } else { ss.into_iter().map(Some).collect() };
    let mut rows = Vec::new();
    for s in s_list {
        rows.push(ConstantsRow {
            n: config.n,
            p: config.p,
            s,
            ms_constant: ms_constant(config.n, config.p),
            bbm_constant: bbm_constant(config.p, config.n),
            cns_normalization: s.map(|s| cns_normalization(config.n, s)).transpose()?,
        });
    }
    let mut csv = format!("{CONSTANTS_HEADER}\n");
    for r in &rows {
        let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n,
            fmt_sig(r.p),
            opt(r.s),
            fmt_sig(r.ms_constant),
            fmt_sig(r.bbm_constant),
            opt(r.cns_normalization)
        ));
    }
    Ok(render(config, csv, rows))
}

fn single_energy(config: &RunConfig) -> Result<String> {
    let field = config.field.build(config.n)?;
    let potential = config.potential.build(config.n)?;
    let s = config.s.expect("validated");
    let e = energy(&field, &potential, &config.params(s)?, &config.engine)?;
    let csv = format!(
        "{ENERGY_HEADER}\n{},{},{},{}\n",
        e.method.as_str(),
        csv_line(&[e.value, e.stat_error, e.trunc_error, e.r_min, e.r_max]),
        e.budget.samples,
        e.budget.evaluations
    );
    Ok(render(config, csv, e))
}

fn scan_command(config: &RunConfig) -> Result<String> {
    let field = config.field.build(config.n)?;
    let potential = config.potential.build(config.n)?;
    let base = config.params(config.s_grid.first().copied().unwrap_or(0.5))?;
    let rows = scan(&field, &potential, &base, &config.s_grid, &config.engine)?;
    let csv = scan_csv(&rows);
    match config.format {
        OutputFormat::Csv => Ok(csv),
        OutputFormat::Json => {
            let endpoint = Endpoint::infer(&config.s_grid)?;
            let fit = if rows.len() >= 3 { Some(extrapolate(&rows, endpoint, config.model)?) } else { None };
            #[derive(Serialize)]
            struct ScanResult<'a> {
                endpoint: &'a str,
                rows: &'a [crate::asym::ScanRow],
                fit: Option<crate::model::LimitFit>,
            }
            Ok(json_report(config, ScanResult { endpoint: endpoint.as_str(), rows: &rows, fit }))
        }
    }
}

fn perimeter(config: &RunConfig) -> Result<String> {
    let region = config.field.region().expect("validated").build(config.n)?;
    let potential = config.potential.build(config.n)?;
    if let Some(s) = config.s {
        let e = perimeter_ps(&region, &potential, s, &config.engine)?;
        let csv = format!(
            "{PERIMETER_HEADER}\n{}\n",
            csv_line(&[s, e.cross, e.cross_error, e.interaction, e.interaction_error, e.total.value])
        );
        return Ok(render(config, csv, e));
    }
    let rep = perimeter_limit_scan(&region, &potential, &config.s_grid, &config.engine, config.model)?;
    let mut csv = scan_csv(&rep.rows);
    csv.push_str(&format!(
        "# limit={} limit_error={} implied={} displayed={} verdict={}\n",
        fmt_sig(rep.fit.limit),
        fmt_sig(rep.fit.limit_error),
        fmt_sig(rep.implied_limit),
        fmt_sig(rep.displayed_limit),
        serde_json::to_value(rep.verdict).expect("verdict serializes").as_str().unwrap_or_default()
    ));
    Ok(render(config, csv, rep))
}

fn audit(config: &RunConfig) -> Result<String> {
    let field = config.field.build(config.n)?;
    let potential = config.potential.build(config.n)?;
    let r = diamagnetic_audit(&field, &potential, config.n, config.samples, config.engine.seed)?;
    let csv = format!("{AUDIT_HEADER}\n{},{},{},{}\n", r.samples, r.violations, fmt_sig(r.worst_margin), r.seed);
    Ok(render(config, csv, r))
}
