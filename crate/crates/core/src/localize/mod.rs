//! Forms over `Z[1/m]`: the kernel of `Cl+(Z[gamma_m]) -> Cl+(R_m)`, content
//! strata, and the number of genus-1 simple knots with Alexander polynomial
//! `m t^2 + (1 - 2m) t + m`.

mod oracle;

pub use oracle::{brute_force_localized_equivalent, localized_reach, LocalWitness};

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::arith::{divisors, mod_inverse, totient};
use crate::classgroup::{class_number_plus, compose, power};
use crate::error::{Error, Result};
use crate::qform::{DiscKind, Discriminant, QuadForm};
use crate::sieve::{Factorizer, TrialDivision};

/// Largest `|m|` accepted by [`knot_count`].
pub const MAX_ABS_M: i128 = 100_000_000;

/// `R_m = Z[1/m, gamma_m]` with `gamma_m = (1 + sqrt(1 - 4m))/2`, described by
/// `m`, its discriminant and the factorization of `|m|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalRing {
    m: i128,
    disc: Discriminant,
    factors: Vec<(u64, u32)>,
}

impl LocalRing {
    pub fn new(m: i128) -> Result<Self> {
        Self::with_factorizer(m, &TrialDivision)
    }

    pub fn with_factorizer(m: i128, fz: &dyn Factorizer) -> Result<Self> {
        let disc = Discriminant::for_m(m)?;
        if m.abs() > MAX_ABS_M {
            return Err(Error::Capacity {
                what: "|m|",
                value: m.abs(),
                bound: MAX_ABS_M,
            });
        }
        Ok(LocalRing {
            m,
            disc,
            factors: fz.factor(m.unsigned_abs() as u64),
        })
    }

    pub fn m(&self) -> i128 {
        self.m
    }

    pub fn disc(&self) -> Discriminant {
        self.disc
    }

    /// `(p, v_p(m))` for the primes dividing `m`, ascending.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    /// Content strata: every `d >= 1` with `d^2 | 1 - 4m`, ascending.
    pub fn strata(&self, fz: &dyn Factorizer) -> Vec<u64> {
        let sq: Vec<(u64, u32)> = fz
            .factor(self.disc.value().unsigned_abs() as u64)
            .into_iter()
            .filter(|&(_, e)| e >= 2)
            .map(|(p, e)| (p, e / 2))
            .collect();
        let mut ds = divisors(&sq);
        ds.sort_unstable();
        ds
    }
}

/// The number of divisors of `m >= 1` that are at most `r`.
pub fn tau_below(m: u64, r: f64) -> u64 {
    divisors(&crate::arith::factor_trial(m))
        .into_iter()
        .filter(|&s| s as f64 <= r)
        .count() as u64
}

/// `tau_below(m, m^(1/4))`, decided exactly by `s^4 <= m`.
pub fn tau_quarter(factors: &[(u64, u32)], m: u64) -> u64 {
    divisors(factors)
        .into_iter()
        .filter(|&s| (s as u128).pow(4) <= m as u128)
        .count() as u64
}

/// The form `(p, b, (b^2 - D')/4p)` of the prime of norm `p` containing
/// `gamma_m` in the order of discriminant `D' = (1 - 4m)/d^2`. Since
/// `gamma_m = (1 - d)/2 + d (1 + sqrt(D'))/2`, that prime has
/// `b = d^(-1) mod 2p`; for `d = 1` this is `(p, 1, m/p)`.
pub fn oriented_prime_form(disc: &Discriminant, p: u64, d: u64) -> Result<QuadForm> {
    let dv = disc.value();
    let pi = p as i128;
    let two_p = 2 * pi;
    let b = mod_inverse(d as i128, two_p)
        .ok_or_else(|| Error::InvalidArgument(format!("{d} is not invertible mod {two_p}")))?;
    let b = if (b - dv).rem_euclid(2) == 0 { b } else { (b + pi) % two_p };
    let num = b * b - dv;
    if num % (4 * pi) != 0 {
        return Err(Error::InertPrime { p, disc: dv });
    }
    QuadForm::new(pi, b, num / (4 * pi))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelGenerator {
    pub p: u64,
    pub v: u32,
    /// Form of the prime of norm `p` containing `gamma_m`.
    pub prime_form: QuadForm,
    /// Canonical form of its square, the class `g_p`.
    pub class: QuadForm,
}

/// `ker(Cl+(O_{D'}) -> Cl+(O_{D'}[1/m]))` for `D' = (1 - 4m)/d^2`, generated
/// by the classes `g_p`. Elements are canonical forms with positive
/// orientation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelSubgroup {
    pub d: u64,
    pub disc: i128,
    pub generators: Vec<KernelGenerator>,
    pub elements: Vec<QuadForm>,
}

impl KernelSubgroup {
    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn contains(&self, f: &QuadForm) -> bool {
        self.elements.binary_search(f).is_ok()
    }

    /// `prod g_p^(v_p(m))`, which is the principal class.
    pub fn relation_product(&self) -> Result<QuadForm> {
        let d = Discriminant::new(self.disc)?;
        let mut acc = QuadForm::principal(&d);
        for g in &self.generators {
            acc = compose(&d, &acc, &power(&g.class, g.v as u64)?)?;
        }
        Ok(acc)
    }
}

pub fn kernel_generators(ring: &LocalRing, d: u64) -> Result<KernelSubgroup> {
    let dv = ring.disc.value();
    let d2 = (d as i128) * (d as i128);
    if d == 0 || dv % d2 != 0 {
        return Err(Error::InvalidArgument(format!("{d}^2 does not divide {dv}")));
    }
    let disc = Discriminant::new(dv / d2)?;
    if let DiscKind::Split { .. } = disc.kind() {
        return Err(Error::SquareDiscriminant(disc.value()));
    }
    let mut generators = Vec::with_capacity(ring.factors.len());
    for &(p, v) in &ring.factors {
        let prime_form = oriented_prime_form(&disc, p, d)?;
        let class = compose(&disc, &prime_form, &prime_form)?;
        generators.push(KernelGenerator {
            p,
            v,
            prime_form,
            class,
        });
    }
    let principal = crate::qform::canonical(&QuadForm::principal(&disc))?;
    let mut seen = BTreeSet::from([principal]);
    let mut queue = VecDeque::from([principal]);
    while let Some(x) = queue.pop_front() {
        for g in &generators {
            let y = compose(&disc, &x, &g.class)?;
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    Ok(KernelSubgroup {
        d,
        disc: disc.value(),
        generators,
        elements: seen.into_iter().collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StratumCount {
    pub d: u64,
    pub disc: i128,
    pub h_plus: u64,
    pub kernel_order: u64,
    pub orbits: u64,
    /// Square discriminant: `SL2(Z)`-classes reported without the `Z[1/m]`
    /// quotient.
    #[serde(rename = "split_flag")]
    pub split: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalizedCount {
    pub m: i128,
    #[serde(rename = "D")]
    pub disc: i128,
    pub strata: Vec<StratumCount>,
    pub total: u64,
    pub omega: u32,
    pub tau_quarter: u64,
}

impl LocalizedCount {
    pub fn stratum(&self, d: u64) -> Option<&StratumCount> {
        self.strata.iter().find(|s| s.d == d)
    }

    pub fn has_split_stratum(&self) -> bool {
        self.strata.iter().any(|s| s.split)
    }
}

/// The number of `SL2(Z[1/m])`-classes of forms of discriminant `1 - 4m`,
/// stratified by content.
pub fn knot_count(m: i128) -> Result<LocalizedCount> {
    knot_count_with(m, &TrialDivision)
}

pub fn knot_count_with(m: i128, fz: &dyn Factorizer) -> Result<LocalizedCount> {
    let ring = LocalRing::with_factorizer(m, fz)?;
    let mut strata = Vec::new();
    for d in ring.strata(fz) {
        let d2 = (d as i128) * (d as i128);
        let disc = Discriminant::new(ring.disc.value() / d2)?;
        let s = match disc.kind() {
            DiscKind::Split { root } => {
                let h = totient(&fz.factor(root as u64));
                StratumCount {
                    d,
                    disc: disc.value(),
                    h_plus: h,
                    kernel_order: 1,
                    orbits: h,
                    split: true,
                }
            }
            _ => {
                let h_plus = class_number_plus(&disc, fz)?;
                let k = kernel_generators(&ring, d)?.order();
                debug_assert_eq!(h_plus % k, 0);
                StratumCount {
                    d,
                    disc: disc.value(),
                    h_plus,
                    kernel_order: k,
                    orbits: h_plus / k,
                    split: false,
                }
            }
        };
        strata.push(s);
    }
    let total = strata.iter().map(|s| s.orbits).sum();
    Ok(LocalizedCount {
        m,
        disc: ring.disc.value(),
        total,
        omega: ring.omega(),
        tau_quarter: tau_quarter(&ring.factors, m.unsigned_abs() as u64),
        strata,
    })
}

/// Canonical orbit label of a form under `SL2(Z[1/m])`, as predicted by the
/// kernel: `(content, least canonical form in the coset class * K)`.
/// Forms in split strata are labelled by their `SL2(Z)` class.
pub fn orbit_label(f: &QuadForm, m: i128) -> Result<(i128, QuadForm)> {
    let ring = LocalRing::new(m)?;
    if f.disc() != ring.disc.value() {
        return Err(Error::DiscriminantMismatch(f.disc(), ring.disc.value()));
    }
    let g = f.content()?;
    let prim = f.divide(g)?;
    let disc = prim.discriminant()?;
    if let DiscKind::Split { .. } = disc.kind() {
        return Ok((g, crate::qform::canonical(&prim)?));
    }
    let kernel = kernel_generators(&ring, g as u64)?;
    let label = kernel
        .elements
        .iter()
        .map(|k| compose(&disc, &prim, k))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min()
        .expect("kernel contains the identity");
    Ok((g, label))
}
