//! Range aggregation: per-`m` rows, strata totals, the Gauss and Siegel
//! sums, local densities, lattice counts in the fundamental domain and
//! heuristic-fit ratio tables.

mod fit;
mod lattice;
mod report;

pub use fit::{heuristic_fit, FitRow, HeuristicFit};
pub use lattice::{lattice_count_s_d, local_density, mertens_product, LocalDensity};
pub use report::{fit_csv, table_csv, table_json, VERSION};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::classgroup::{class_number_plus, regulator, ClassGroup, OrientedClassGroup};
use crate::error::{Error, Result};
use crate::localize::{knot_count_with, MAX_ABS_M};
use crate::qform::{DiscKind, Discriminant};
use crate::sieve::{FactorSieve, Factorizer};

/// Largest `|m|` a single census run accepts.
pub const CENSUS_BOUND: i128 = 5_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    pub m: i128,
    pub disc: i128,
    pub total: u64,
    /// `h+(1 - 4m)` of the content-1 stratum.
    pub h_plus: u64,
    /// Kernel order in the content-1 stratum.
    pub kernel_order: u64,
    pub omega: u32,
    pub is_prime: bool,
    pub is_prime_power: bool,
    /// Invariant factors of `Cl+(1 - 4m)`, when computed.
    pub structure: Option<String>,
    pub flags: Vec<&'static str>,
}

pub const SPLIT_FLAG: &str = "split_stratum_unquotiented";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CensusTable {
    pub range: (i128, i128),
    pub rows: Vec<CensusRow>,
}

impl CensusTable {
    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.total).sum()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CensusOptions {
    /// Worker threads; `0` uses rayon's default.
    pub workers: usize,
    /// Also compute the structure of `Cl+(1 - 4m)` (slower).
    pub structure: bool,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            workers: 0,
            structure: true,
        }
    }
}

/// One row per nonzero `m` in `[lo, hi]`, ordered by `m`. The result does not
/// depend on the number of workers.
pub fn census(lo: i128, hi: i128, opts: &CensusOptions) -> Result<CensusTable> {
    if lo > hi {
        return Err(Error::InvalidArgument(format!("empty range [{lo}, {hi}]")));
    }
    let bound = lo.abs().max(hi.abs());
    if bound > CENSUS_BOUND {
        return Err(Error::Capacity {
            what: "|m| in census",
            value: bound,
            bound: CENSUS_BOUND,
        });
    }
    let sieve = FactorSieve::new(4 * bound as u64 + 1);
    let ms: Vec<i128> = (lo..=hi).filter(|&m| m != 0).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let rows = pool.install(|| {
        ms.par_iter()
            .map(|&m| census_row(m, &sieve, opts.structure))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(CensusTable {
        range: (lo, hi),
        rows,
    })
}

pub fn census_row(m: i128, fz: &dyn Factorizer, structure: bool) -> Result<CensusRow> {
    debug_assert!(m.abs() <= MAX_ABS_M);
    let count = knot_count_with(m, fz)?;
    let first = &count.strata[0];
    let factors = fz.factor(m.unsigned_abs() as u64);
    let split = count.has_split_stratum();
    let structure = if structure && !first.split {
        let g = ClassGroup::with_factorizer(&Discriminant::new(count.disc)?, fz)?;
        Some(OrientedClassGroup::from_group(g).structure_string())
    } else {
        None
    };
    Ok(CensusRow {
        m,
        disc: count.disc,
        total: count.total,
        h_plus: first.h_plus,
        kernel_order: first.kernel_order,
        omega: count.omega,
        is_prime: factors.len() == 1 && factors[0].1 == 1,
        is_prime_power: factors.len() == 1,
        structure,
        flags: if split { vec![SPLIT_FLAG] } else { Vec::new() },
    })
}

/// The partition of nonzero `m` by sign, `omega(m)` and primality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    /// `|m| = 1`.
    Unit,
    PosPrime,
    NegPrime,
    /// `|m| = p^e` with `e > 1`, either sign.
    PrimePower,
    PosOmega2,
    PosOmega3Plus,
    NegOmega2Plus,
}

impl Stratum {
    pub const ALL: [Stratum; 7] = [
        Stratum::Unit,
        Stratum::PosPrime,
        Stratum::NegPrime,
        Stratum::PrimePower,
        Stratum::PosOmega2,
        Stratum::PosOmega3Plus,
        Stratum::NegOmega2Plus,
    ];

    pub fn of(row: &CensusRow) -> Stratum {
        match (row.m > 0, row.omega) {
            (_, 0) => Stratum::Unit,
            (true, 1) if row.is_prime => Stratum::PosPrime,
            (false, 1) if row.is_prime => Stratum::NegPrime,
            (_, 1) => Stratum::PrimePower,
            (true, 2) => Stratum::PosOmega2,
            (true, _) => Stratum::PosOmega3Plus,
            (false, _) => Stratum::NegOmega2Plus,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Stratum::Unit => "unit",
            Stratum::PosPrime => "pos_prime",
            Stratum::NegPrime => "neg_prime",
            Stratum::PrimePower => "prime_power",
            Stratum::PosOmega2 => "pos_omega2",
            Stratum::PosOmega3Plus => "pos_omega3plus",
            Stratum::NegOmega2Plus => "neg_omega2plus",
        }
    }
}

/// Sum of knot counts per stratum; every stratum is present, possibly 0.
pub fn strata_totals(table: &CensusTable) -> BTreeMap<Stratum, u64> {
    let mut out: BTreeMap<Stratum, u64> = Stratum::ALL.iter().map(|s| (*s, 0)).collect();
    for r in &table.rows {
        *out.entry(Stratum::of(r)).or_default() += r.total;
    }
    out
}

/// `sum_{0 < m <= X} h+(1 - 4m)`.
pub fn gauss_total(x: u64) -> Result<u64> {
    capacity_check(x)?;
    let sieve = FactorSieve::new(4 * x + 1);
    let terms = (1..=x as i128)
        .into_par_iter()
        .map(|m| class_number_plus(&Discriminant::for_m(m)?, &sieve))
        .collect::<Result<Vec<u64>>>()?;
    Ok(terms.into_iter().sum())
}

/// `sum h+(D) r(D)` over non-square `0 < D <= X` with `D = 1 mod 4`.
pub fn siegel_total(x: u64) -> Result<f64> {
    capacity_check(x / 4)?;
    let sieve = FactorSieve::new(x + 1);
    let terms = (1..=x as i128)
        .into_par_iter()
        .filter(|d| d % 4 == 1)
        .map(|d| -> Result<f64> {
            let disc = Discriminant::new(d)?;
            if !matches!(disc.kind(), DiscKind::IndefiniteNonSquare) {
                return Ok(0.0);
            }
            Ok(class_number_plus(&disc, &sieve)? as f64 * regulator(&disc)?.r)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(terms.into_iter().sum())
}

fn capacity_check(x: u64) -> Result<()> {
    if x as i128 > CENSUS_BOUND {
        return Err(Error::Capacity {
            what: "X",
            value: x as i128,
            bound: CENSUS_BOUND,
        });
    }
    Ok(())
}
