//! Sieve-side quantities: local densities of `ac = b(b+1)`, exact lattice
//! counts in the truncated fundamental domain and the Mertens-type product.

use num_rational::Ratio;
use serde::Serialize;

use crate::arith::{divisors, factor_trial, gcd, isqrt, is_prime, mod_inverse, totient};
use crate::error::{Error, Result};

/// Largest `X` accepted by [`lattice_count_s_d`].
pub const LATTICE_BOUND: u64 = 1 << 40;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalDensity {
    pub d: u64,
    /// Solutions `(a, b, c)` in `(Z/d)^3` of `ac = b(b+1)`.
    pub count: u64,
    #[serde(serialize_with = "ratio_string")]
    pub rho: Ratio<u64>,
}

fn ratio_string<S: serde::Serializer>(r: &Ratio<u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Number of `(a, c)` in `(Z/d)^2` with `ac = n`, for `g = gcd(n, d)`:
/// sum over `e | g` of `e * phi(d/e)`.
fn product_solutions(d: u64, g: u64) -> u64 {
    divisors(&factor_trial(g))
        .into_iter()
        .map(|e| e * totient(&factor_trial(d / e)))
        .sum()
}

/// Count the solutions of `ac = b(b+1)` modulo a squarefree `d` by summing
/// over `b`, alongside `rho(d) = prod (p+1)/p^2`.
pub fn local_density(d: u64) -> Result<LocalDensity> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    let factors = factor_trial(d);
    if factors.iter().any(|&(_, e)| e > 1) {
        return Err(Error::NotSquarefree(d));
    }
    let mut by_gcd = std::collections::HashMap::new();
    let mut count = 0u64;
    for b in 0..d {
        let n = ((b as u128 * (b as u128 + 1)) % d as u128) as u64;
        let g = crate::arith::gcd_u64(n, d);
        count += *by_gcd.entry(g).or_insert_with(|| product_solutions(d, g));
    }
    let rho = factors
        .iter()
        .fold(Ratio::from_integer(1u64), |acc, &(p, _)| acc * Ratio::new(p + 1, p * p));
    Ok(LocalDensity { d, count, rho })
}

/// Integer points `(a, b', c)` with `X <= ac - b'(b'+1) <= 2X` divisible by
/// `d`, where `(a, 2b'+1, c)` is a reduced positive definite form: `|b| <= a <= c`
/// and `b > 0` whenever `|b| = a` or `a = c`. Reduced points already satisfy
/// `c <= 2X`, so no extra truncation is applied.
pub fn lattice_count_s_d(x: u64, d: u64) -> Result<u64> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    if x > LATTICE_BOUND {
        return Err(Error::Capacity {
            what: "X in lattice count",
            value: x as i128,
            bound: LATTICE_BOUND as i128,
        });
    }
    let (x, d) = (x as i128, d as i128);
    // 4ac >= 4ac - (b^2 - 1) + ... gives a^2 <= ac <= 4(2X)/3 + 1/3.
    let a_max = isqrt(((8 * x + 1) / 3) as u128) as i128;
    let mut total = 0u64;
    for a in 1..=a_max {
        for b in (-a..=a).filter(|b| b & 1 == 1) {
            let bp = (b - 1) / 2;
            let t = bp * (bp + 1);
            let lo = a.max(ceil_div(x + t, a));
            let hi = (2 * x + t) / a;
            if lo > hi {
                continue;
            }
            let mut n = count_congruent(a, t, d, lo, hi);
            if b < 0 {
                if -b == a {
                    n = 0;
                } else if lo == a && (a * a - t) % d == 0 {
                    n -= 1;
                }
            }
            total += n as u64;
        }
    }
    Ok(total)
}

fn ceil_div(n: i128, k: i128) -> i128 {
    -((-n).div_euclid(k))
}

/// `#{c in [lo, hi] : a c = t mod d}`.
fn count_congruent(a: i128, t: i128, d: i128, lo: i128, hi: i128) -> i128 {
    if d == 1 {
        return hi - lo + 1;
    }
    let g = gcd(a, d);
    if t.rem_euclid(g) != 0 {
        return 0;
    }
    let step = d / g;
    let c0 = if step == 1 {
        0
    } else {
        let inv = mod_inverse(a / g, step).expect("a/g is a unit mod d/g");
        ((t / g).rem_euclid(step) * inv).rem_euclid(step)
    };
    let first = lo + (c0 - lo).rem_euclid(step);
    if first > hi {
        0
    } else {
        (hi - first) / step + 1
    }
}

/// `prod_{p < Z} (1 - rho(p))`.
pub fn mertens_product(z: u64) -> Result<f64> {
    if z < 3 {
        return Err(Error::InvalidArgument(format!("Z = {z} must be at least 3")));
    }
    let mut prod = 1.0f64;
    for p in (2..z).filter(|&p| is_prime(p)) {
        let p = p as f64;
        prod *= 1.0 - (p + 1.0) / (p * p);
    }
    Ok(prod)
}
