//! Truncated Cohen-Lenstra distributions `mu^u` over finite abelian groups:
//! exact weight tables, quotient and constrained sampling, and surjection
//! moments.

mod group;

pub use group::{surjection_count, FiniteAbelianGroup};

use std::collections::{BTreeMap, HashMap};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{factor_trial, is_prime};
use crate::classgroup::{merge_invariants, ClassGroup};
use crate::error::{Error, Result};
use crate::qform::Discriminant;
use crate::sieve::FactorSieve;

/// Largest truncation bound accepted by the builders.
pub const MAX_BOUND: u64 = 1_000_000;

/// Which groups carry mass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Every group of order at most the bound.
    Order(u64),
    /// Only `p`-groups of order at most `bound`: the `p`-primary marginal.
    Primary { p: u64, bound: u64 },
}

impl Truncation {
    pub fn bound(&self) -> u64 {
        match *self {
            Truncation::Order(b) | Truncation::Primary { bound: b, .. } => b,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CLDistribution {
    u: u32,
    truncation: Truncation,
    entries: Vec<(FiniteAbelianGroup, f64)>,
    sampler: WeightedIndex<f64>,
}

/// `mu^u` over all groups of order at most `b`.
pub fn build_distribution(u: u32, b: u64) -> Result<CLDistribution> {
    CLDistribution::new(u, Truncation::Order(b))
}

/// `mu^u` restricted to `p`-groups of order at most `b`.
pub fn build_primary_distribution(u: u32, p: u64, b: u64) -> Result<CLDistribution> {
    CLDistribution::new(u, Truncation::Primary { p, bound: b })
}

/// Partitions of `n` as ascending part lists.
fn partitions(n: u32) -> Vec<Vec<u32>> {
    fn go(rest: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            let mut v = cur.clone();
            v.reverse();
            out.push(v);
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            cur.push(part);
            go(rest - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Every isomorphism class of abelian group of order `n`.
pub fn groups_of_order(n: u64) -> Vec<FiniteAbelianGroup> {
    let mut out: Vec<BTreeMap<u64, Vec<u32>>> = vec![BTreeMap::new()];
    for (p, e) in factor_trial(n) {
        let parts = partitions(e);
        out = out
            .into_iter()
            .flat_map(|m| {
                parts.iter().map(move |part| {
                    let mut m2 = m.clone();
                    m2.insert(p, part.clone());
                    m2
                })
            })
            .collect();
    }
    out.iter().map(FiniteAbelianGroup::from_primary).collect()
}

impl CLDistribution {
    pub fn new(u: u32, truncation: Truncation) -> Result<Self> {
        let b = truncation.bound();
        if b == 0 {
            return Err(Error::InvalidArgument("truncation bound must be at least 1".into()));
        }
        if b > MAX_BOUND {
            return Err(Error::Capacity {
                what: "Cohen-Lenstra truncation bound",
                value: b as i128,
                bound: MAX_BOUND as i128,
            });
        }
        let groups: Vec<FiniteAbelianGroup> = match truncation {
            Truncation::Order(b) => (1..=b).flat_map(groups_of_order).collect(),
            Truncation::Primary { p, bound } => {
                if !is_prime(p) {
                    return Err(Error::NotPrime(p));
                }
                let mut out = Vec::new();
                let mut q = 1u64;
                while q <= bound {
                    out.extend(groups_of_order(q));
                    q = match q.checked_mul(p) {
                        Some(v) => v,
                        None => break,
                    };
                }
                out
            }
        };
        let raw: Vec<f64> = groups
            .iter()
            .map(|g| 1.0 / (g.aut_order_f64() * (g.order() as f64).powi(u as i32)))
            .collect();
        let total: f64 = raw.iter().sum();
        let entries: Vec<(FiniteAbelianGroup, f64)> =
            groups.into_iter().zip(raw.into_iter().map(|w| w / total)).collect();
        let sampler = WeightedIndex::new(entries.iter().map(|e| e.1))
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(CLDistribution {
            u,
            truncation,
            entries,
            sampler,
        })
    }

    pub fn u(&self) -> u32 {
        self.u
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// `(group, normalized weight)`, ordered by group order.
    pub fn entries(&self) -> &[(FiniteAbelianGroup, f64)] {
        &self.entries
    }

    /// Normalized weight; zero for groups outside the truncation.
    pub fn weight(&self, g: &FiniteAbelianGroup) -> f64 {
        self.entries
            .iter()
            .find(|(h, _)| h == g)
            .map_or(0.0, |e| e.1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &FiniteAbelianGroup {
        &self.entries[self.sampler.sample(rng)].0
    }

    /// `E[f(G)]` under the truncated weights.
    pub fn expectation(&self, f: impl Fn(&FiniteAbelianGroup) -> Result<f64>) -> Result<f64> {
        self.entries.iter().map(|(g, w)| Ok(w * f(g)?)).sum()
    }

    /// `group,order,weight` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("group,order,weight\n");
        for (g, w) in &self.entries {
            s.push_str(&format!("{g},{},{w:e}\n", g.order()));
        }
        s
    }
}

/// `E[#Sur(G, A)]` under the truncated distribution.
pub fn moment(dist: &CLDistribution, target: &FiniteAbelianGroup) -> Result<f64> {
    dist.expectation(|g| Ok(surjection_count(g, target)? as f64))
}

/// `|A|^{-u}`, the untruncated value of [`moment`].
pub fn limit_moment(u: u32, target: &FiniteAbelianGroup) -> f64 {
    (target.order() as f64).powi(-(u as i32))
}

fn random_element<R: Rng + ?Sized>(g: &FiniteAbelianGroup, rng: &mut R) -> Vec<u64> {
    g.invariants().iter().map(|&d| rng.gen_range(0..d)).collect()
}

/// Draws `G` from `dist` and `k` uniform elements, and returns the quotient.
pub fn sample_quotient<R: Rng + ?Sized>(dist: &CLDistribution, k: usize, rng: &mut R) -> FiniteAbelianGroup {
    let g = dist.sample(rng);
    let gens: Vec<Vec<u64>> = (0..k).map(|_| random_element(g, rng)).collect();
    g.quotient(&gens)
}

/// Draws `G` from `dist`, then `(g_1, ..., g_k)` uniformly among tuples with
/// `sum n_i g_i = 0` (by rejection), and returns `G / <g_1, ..., g_k>`.
pub fn constrained_sample<R: Rng + ?Sized>(
    dist: &CLDistribution,
    exponents: &[u64],
    rng: &mut R,
) -> Result<FiniteAbelianGroup> {
    if exponents.contains(&0) {
        return Err(Error::InvalidArgument("constraint exponents must be positive".into()));
    }
    let g = dist.sample(rng);
    let inv = g.invariants();
    loop {
        let gens: Vec<Vec<u64>> = exponents.iter().map(|_| random_element(g, rng)).collect();
        let holds = inv.iter().enumerate().all(|(j, &d)| {
            let s: u128 = gens
                .iter()
                .zip(exponents)
                .map(|(x, &n)| x[j] as u128 * n as u128)
                .sum();
            s.is_multiple_of(d as u128)
        });
        if holds {
            return Ok(g.quotient(&gens));
        }
    }
}

/// `n` draws of [`sample_quotient`] from a ChaCha8 stream seeded with `seed`.
pub fn sample_quotients(dist: &CLDistribution, k: usize, n: usize, seed: u64) -> Vec<FiniteAbelianGroup> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sample_quotient(dist, k, &mut rng)).collect()
}

/// `n` draws of [`constrained_sample`] from a ChaCha8 stream seeded with `seed`.
pub fn constrained_samples(
    dist: &CLDistribution,
    exponents: &[u64],
    n: usize,
    seed: u64,
) -> Result<Vec<FiniteAbelianGroup>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| constrained_sample(dist, exponents, &mut rng)).collect()
}

/// Largest `sum |G|^k` over the support that [`quotient_law`] will enumerate.
pub const QUOTIENT_LAW_WORK: u128 = 50_000_000;

/// The exact law of `G / <g_1, ..., g_k>` for `G` drawn from `dist` and
/// uniform `g_i`, by enumerating every tuple.
pub fn quotient_law(dist: &CLDistribution, k: usize) -> Result<HashMap<FiniteAbelianGroup, f64>> {
    let work: u128 = dist
        .entries()
        .iter()
        .map(|(g, _)| (g.order() as u128).saturating_pow(k as u32))
        .fold(0u128, u128::saturating_add);
    if work > QUOTIENT_LAW_WORK {
        return Err(Error::Capacity {
            what: "tuples enumerated for the quotient law",
            value: work.min(i128::MAX as u128) as i128,
            bound: QUOTIENT_LAW_WORK as i128,
        });
    }
    let mut out: HashMap<FiniteAbelianGroup, f64> = HashMap::new();
    for (g, w) in dist.entries() {
        let inv = g.invariants();
        let tuples = (g.order() as u128).pow(k as u32);
        let mass = w / tuples as f64;
        // Odometer over k elements, each a vector of residues.
        let mut gens = vec![vec![0u64; inv.len()]; k];
        for _ in 0..tuples {
            *out.entry(g.quotient(&gens)).or_default() += mass;
            'carry: for x in gens.iter_mut() {
                for (xj, &dj) in x.iter_mut().zip(inv) {
                    *xj += 1;
                    if *xj < dj {
                        break 'carry;
                    }
                    *xj = 0;
                }
            }
        }
    }
    Ok(out)
}

/// Total-variation distance between two laws on finite abelian groups.
pub fn total_variation_between(
    p: &HashMap<FiniteAbelianGroup, f64>,
    q: &HashMap<FiniteAbelianGroup, f64>,
) -> f64 {
    let mut tv: f64 = p.iter().map(|(g, x)| (x - q.get(g).copied().unwrap_or(0.0)).abs()).sum();
    tv += q.iter().filter(|(g, _)| !p.contains_key(*g)).map(|(_, y)| y).sum::<f64>();
    tv / 2.0
}

/// Empirical frequencies of a sample.
pub fn empirical(samples: &[FiniteAbelianGroup]) -> HashMap<FiniteAbelianGroup, f64> {
    let mut counts: HashMap<FiniteAbelianGroup, f64> = HashMap::new();
    for g in samples {
        *counts.entry(g.clone()).or_default() += 1.0;
    }
    let n = samples.len() as f64;
    counts.values_mut().for_each(|c| *c /= n);
    counts
}

/// Total-variation distance between an empirical law and `dist`.
pub fn total_variation(freq: &HashMap<FiniteAbelianGroup, f64>, dist: &CLDistribution) -> f64 {
    let mut tv: f64 = dist
        .entries()
        .iter()
        .map(|(g, w)| (freq.get(g).copied().unwrap_or(0.0) - w).abs())
        .sum();
    tv += freq
        .iter()
        .filter(|(g, _)| dist.weight(g) == 0.0)
        .map(|(_, f)| f)
        .sum::<f64>();
    tv / 2.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GerthReport {
    pub x: u64,
    pub target: String,
    /// Primes `p <= X` with `1 - 4p` squarefree that were used.
    pub samples: u64,
    pub skipped_non_squarefree: u64,
    pub mean: f64,
    pub mu0_limit: f64,
}

/// Average of `#Sur(Cl+(1 - 4p)^2, A)` over primes `p <= X` with `1 - 4p`
/// squarefree, next to the `mu^0` value 1. Reported, not asserted.
pub fn gerth_comparison(x: u64, target: &FiniteAbelianGroup) -> Result<GerthReport> {
    let sieve = FactorSieve::new(4 * x + 1);
    let (mut samples, mut skipped, mut sum) = (0u64, 0u64, 0f64);
    for p in (2..=x).filter(|&p| sieve.is_prime(p)) {
        let n = 4 * p - 1;
        if crate::sieve::Factorizer::factor(&sieve, n).iter().any(|&(_, e)| e > 1) {
            skipped += 1;
            continue;
        }
        let g = ClassGroup::with_factorizer(&Discriminant::for_m(p as i128)?, &sieve)?;
        let plus = FiniteAbelianGroup::from_cyclic_factors(&merge_invariants(g.invariant_factors(), &[2]))?;
        sum += surjection_count(&plus.multiple(2), target)? as f64;
        samples += 1;
    }
    Ok(GerthReport {
        x,
        target: target.to_string(),
        samples,
        skipped_non_squarefree: skipped,
        mean: if samples == 0 { 0.0 } else { sum / samples as f64 },
        mu0_limit: 1.0,
    })
}
