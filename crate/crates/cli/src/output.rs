//! Rendering and emission helpers shared by the subcommands.

use std::fs;
use std::path::PathBuf;

use crate::commands::CliError;

/// Writes the finished report to the chosen destination. Reports always end
/// with exactly one newline so repeated runs are byte-comparable.
pub fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError {
            code: 2,
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Shortest exact decimal rendering, for human-facing report lines.
pub fn short(value: f64) -> String {
    format!("{value}")
}

/// Full-precision rendering for machine-facing CSV cells.
pub fn full(value: f64) -> String {
    osearch_core::formats::fmt_full(value)
}

pub fn join_prices(prices: &[f64]) -> String {
    prices
        .iter()
        .map(|&p| short(p))
        .collect::<Vec<_>>()
        .join(",")
}

/// Minimal CSV field quoting: strings are always quoted, quotes doubled.
pub fn csv_quote(field: &str) -> String {
    format!("\"{}\"", field.replace('"', "\"\""))
}

/// Renders `key,value` CSV with a header line.
pub fn kv_csv(rows: &[(&str, String)]) -> String {
    let mut out = String::from("key,value\n");
    for (key, value) in rows {
        out.push_str(key);
        out.push(',');
        out.push_str(value);
        out.push('\n');
    }
    out
}

pub fn pretty_json(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report JSON always serializes");
    text.push('\n');
    text
}
