//! Observed totals against the reference growth curves.

use serde::Serialize;

use super::CensusTable;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitRow {
    #[serde(rename = "X")]
    pub x: u64,
    pub stratum: &'static str,
    pub observed: u64,
    pub reference: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeuristicFit {
    pub checkpoints: Vec<u64>,
    pub rows: Vec<FitRow>,
}

impl HeuristicFit {
    /// Ratios for one stratum, in checkpoint order.
    pub fn ratios(&self, stratum: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.stratum == stratum)
            .map(|r| r.ratio)
            .collect()
    }
}

/// For each checkpoint `X`, sums over `0 < |m| <= X`:
///
/// | stratum     | which `m`                 | reference        |
/// |-------------|---------------------------|------------------|
/// | `total`     | all                       | `X^{3/2}`        |
/// | `pos_prime` | `m = p`                   | `X^{3/2}/log X`  |
/// | `neg_prime` | `m = -p`                  | `X log X`        |
/// | `not_prime` | `|m|` not prime           | `X log X`        |
///
/// The table must cover `[-X, X]` for the largest checkpoint.
pub fn heuristic_fit(table: &CensusTable, checkpoints: &[u64]) -> Result<HeuristicFit> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("checkpoints must be strictly ascending".into()));
    }
    if let Some(&last) = checkpoints.last() {
        if last < 2 {
            return Err(Error::InvalidArgument("checkpoints must be at least 2".into()));
        }
        let x = last as i128;
        if table.range.0 > -x || table.range.1 < x {
            return Err(Error::InvalidArgument(format!(
                "census range [{}, {}] does not cover [-{x}, {x}]",
                table.range.0, table.range.1
            )));
        }
    }
    let mut rows = Vec::with_capacity(4 * checkpoints.len());
    for &x in checkpoints {
        let xi = x as i128;
        let mut sums = [0u64; 4];
        for r in table.rows.iter().filter(|r| r.m.abs() <= xi) {
            sums[0] += r.total;
            let k = match (r.is_prime, r.m > 0) {
                (true, true) => 1,
                (true, false) => 2,
                (false, _) => 3,
            };
            sums[k] += r.total;
        }
        let xf = x as f64;
        let refs = [
            xf.powf(1.5),
            xf.powf(1.5) / xf.ln(),
            xf * xf.ln(),
            xf * xf.ln(),
        ];
        for (i, name) in ["total", "pos_prime", "neg_prime", "not_prime"].into_iter().enumerate() {
            rows.push(FitRow {
                x,
                stratum: name,
                observed: sums[i],
                reference: refs[i],
                ratio: sums[i] as f64 / refs[i],
            });
        }
    }
    Ok(HeuristicFit {
        checkpoints: checkpoints.to_vec(),
        rows,
    })
}
