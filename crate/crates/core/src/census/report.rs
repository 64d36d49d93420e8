//! CSV and JSON serialization of census tables and fits.

use serde_json::json;

use super::{CensusTable, HeuristicFit};
use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

pub fn table_csv(table: &CensusTable) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record([
        "m", "disc", "total", "h_plus", "kernel_order", "omega", "is_prime", "structure", "flags",
    ])
    .map_err(csv_err)?;
    for r in &table.rows {
        w.write_record([
            r.m.to_string(),
            r.disc.to_string(),
            r.total.to_string(),
            r.h_plus.to_string(),
            r.kernel_order.to_string(),
            r.omega.to_string(),
            r.is_prime.to_string(),
            r.structure.clone().unwrap_or_default(),
            r.flags.join(";"),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(csv_err)?;
    String::from_utf8(bytes).map_err(csv_err)
}

/// `wall_time_seconds` is the only field that varies between runs.
pub fn table_json(table: &CensusTable, wall_time_seconds: f64) -> Result<String> {
    let v = json!({
        "meta": {
            "version": VERSION,
            "range": [table.range.0.to_string(), table.range.1.to_string()],
            "wall_time_seconds": wall_time_seconds,
        },
        "total": table.total(),
        "strata": super::strata_totals(table)
            .into_iter()
            .map(|(s, n)| (s.name().to_string(), json!(n)))
            .collect::<serde_json::Map<_, _>>(),
        "rows": table.rows.iter().map(|r| json!({
            "m": r.m.to_string(),
            "disc": r.disc.to_string(),
            "total": r.total,
            "h_plus": r.h_plus,
            "kernel_order": r.kernel_order,
            "omega": r.omega,
            "is_prime": r.is_prime,
            "structure": r.structure,
            "flags": r.flags,
        })).collect::<Vec<_>>(),
    });
    serde_json::to_string_pretty(&v).map_err(|e| Error::InvalidArgument(e.to_string()))
}

pub fn fit_csv(fit: &HeuristicFit) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in &fit.rows {
        w.serialize(r).map_err(csv_err)?;
    }
    if fit.rows.is_empty() {
        w.write_record(["X", "stratum", "observed", "reference", "ratio"])
            .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(csv_err)?;
    String::from_utf8(bytes).map_err(csv_err)
}
