use serde::Serialize;

use super::config::RunConfig;
use crate::asym::ScanRow;

pub const SCAN_HEADER: &str = "s,energy,stat_error,trunc_error,scaled";

/// 12 significant digits, '.' as separator; exponent form outside [1e-4, 1e12).
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let mag = v.abs().log10().floor() as i32;
    if (-4..12).contains(&mag) {
        let decimals = (11 - mag).max(0) as usize;
        let text = format!("{v:.decimals$}");
        // rounding can carry into a new leading digit; one more pass fixes the count
        let digits = text.chars().filter(|c| c.is_ascii_digit()).collect::<String>();
        if digits.trim_start_matches('0').len() > 12 && decimals > 0 {
            let decimals = decimals - 1;
            return format!("{v:.decimals$}");
        }
        text
    } else {
        format!("{v:.11e}")
    }
}

pub fn csv_line(values: &[f64]) -> String {
    values.iter().map(|v| fmt_sig(*v)).collect::<Vec<_>>().join(",")
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from(SCAN_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&csv_line(&[r.s, r.energy.value, r.energy.stat_error, r.energy.trunc_error, r.scaled]));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    config: &'a RunConfig,
    result: T,
}

/// JSON report carrying the full config echo.
pub fn json_report<T: Serialize>(config: &RunConfig, result: T) -> String {
    let mut text = serde_json::to_string_pretty(&Report { config, result }).expect("report serializes");
    text.push('\n');
    text
}
