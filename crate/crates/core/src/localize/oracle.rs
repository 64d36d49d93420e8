//! Direct search for `SL2(Z[1/m])`-equivalences, independent of class groups.
//!
//! Every `X` in `SL2(Z[1/m])` is `U / m^k` with `U` integral of determinant
//! `m^(2k)`, and `U = H V` with `V` in `SL2(Z)` and `H = [[alpha, beta],
//! [0, delta]]`, `alpha delta = m^(2k)`, `0 <= beta < alpha`. Since
//! `Q o U = (Q o H) o V`, the classes reachable from `Q` at level `k` are the
//! classes of `(Q o H) / m^(2k)` for the integral ones among these `H`.

use std::collections::HashMap;

use crate::arith::{divisors, gcd};
use crate::error::{CheckedExt, Error, Result};
use crate::qform::{canonical, equivalence_witness, substitute, DiscKind, GLTransform, QuadForm};

/// `X = u / m^k`, with `Q1 o X = Q2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalWitness {
    pub u: GLTransform,
    pub k: u32,
}

/// For every `SL2(Z)`-class reachable from `q` with `k <= k_max` and Hermite
/// entries at most `height_max`: its canonical form, mapped to the first
/// `(H, k)` found.
pub fn localized_reach(
    q: &QuadForm,
    m: i128,
    k_max: u32,
    height_max: i128,
) -> Result<HashMap<QuadForm, (GLTransform, u32)>> {
    if m == 0 {
        return Err(Error::ZeroM);
    }
    if let DiscKind::Split { .. } = q.discriminant()?.kind() {
        return Err(Error::SquareDiscriminant(q.disc()));
    }
    let mfac = crate::arith::factor_trial(m.unsigned_abs() as u64);
    let mut out = HashMap::new();
    for k in 0..=k_max {
        let n = m
            .checked_pow(2 * k)
            .filter(|n| *n <= 1 << 100)
            .or_overflow("m^(2k)")?;
        let nfac: Vec<(u64, u32)> = mfac.iter().map(|&(p, e)| (p, e * 2 * k)).collect();
        let mut alphas: Vec<u64> = if k == 0 { vec![1] } else { divisors_u128(&nfac, height_max) };
        alphas.sort_unstable();
        for alpha in alphas {
            let alpha = alpha as i128;
            let delta = n / alpha;
            if delta > height_max {
                continue;
            }
            // Integrality of the middle coefficient forces delta | 2 a beta.
            let step = delta / gcd(2 * q.a(), delta).max(1);
            let mut beta = 0i128;
            while beta < alpha && beta <= height_max {
                let h = GLTransform::new(alpha, beta, 0, delta);
                if let Some(g) = scaled(q, &h, n)? {
                    out.entry(canonical(&g)?).or_insert((h, k));
                }
                beta += step;
            }
        }
    }
    Ok(out)
}

fn divisors_u128(factors: &[(u64, u32)], bound: i128) -> Vec<u64> {
    let mut divs = vec![1u128];
    for &(p, e) in factors {
        let len = divs.len();
        let mut pk = 1u128;
        for _ in 0..e {
            pk *= p as u128;
            if pk > bound as u128 {
                break;
            }
            for i in 0..len {
                let v = divs[i] * pk;
                if v <= bound as u128 {
                    divs.push(v);
                }
            }
        }
    }
    let _ = divisors;
    divs.into_iter().map(|v| v as u64).collect()
}

/// `(Q o H) / n` when integral.
fn scaled(q: &QuadForm, h: &GLTransform, n: i128) -> Result<Option<QuadForm>> {
    let g = substitute(q, h)?;
    if g.a() % n != 0 || g.b() % n != 0 || g.c() % n != 0 {
        return Ok(None);
    }
    Ok(Some(g.divide(n)?))
}

/// Searches for `X` in `SL2(Z[1/m])` with `q1 o X = q2`. `Some` carries a
/// verified witness; `None` only means none exists inside the search box.
pub fn brute_force_localized_equivalent(
    q1: &QuadForm,
    q2: &QuadForm,
    m: i128,
    k_max: u32,
    height_max: i128,
) -> Result<Option<LocalWitness>> {
    if q1.disc() != q2.disc() {
        return Err(Error::DiscriminantMismatch(q1.disc(), q2.disc()));
    }
    let reach = localized_reach(q1, m, k_max, height_max)?;
    match reach.get(&canonical(q2)?) {
        None => Ok(None),
        Some(&(h, k)) => witness(q1, q2, m, h, k).map(Some),
    }
}

/// Completes `(H, k)` to an exact witness and checks it.
pub(crate) fn witness(q1: &QuadForm, q2: &QuadForm, m: i128, h: GLTransform, k: u32) -> Result<LocalWitness> {
    let n = m.checked_pow(2 * k).or_overflow("m^(2k)")?;
    let g = scaled(q1, &h, n)?.expect("reach only records integral images");
    let v = equivalence_witness(&g, q2)?.expect("reach records the class of the image");
    let u = h.mul(&v)?;
    let image = substitute(q1, &u)?;
    assert_eq!(image.divide(n)?, *q2, "witness check");
    Ok(LocalWitness { u, k })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(a: i128, b: i128, c: i128) -> QuadForm {
        QuadForm::new(a, b, c).unwrap()
    }

    #[test]
    fn identity_at_level_zero() {
        for q in [f(2, 1, 3), f(1, 1, -1), f(-2, 1, -3)] {
            let m = (1 - q.disc()) / 4;
            let w = brute_force_localized_equivalent(&q, &q, m, 2, 10 * m * m).unwrap().unwrap();
            assert_eq!(w.k, 0);
        }
    }

    #[test]
    fn m6_identifies_all_positive_classes() {
        let forms = [f(1, 1, 6), f(2, 1, 3), f(2, -1, 3)];
        for x in &forms {
            for y in &forms {
                let w = brute_force_localized_equivalent(x, y, 6, 2, 360).unwrap();
                let w = w.unwrap_or_else(|| panic!("{x} vs {y}"));
                assert!(w.k <= 1);
            }
            let neg = brute_force_localized_equivalent(x, &f(-1, 1, -6), 6, 2, 360).unwrap();
            assert!(neg.is_none());
        }
    }

    #[test]
    fn prime_m_identifies_nothing() {
        // m = 23: D = -91 = -7 * 13, h = 2.
        let w = brute_force_localized_equivalent(&f(1, 1, 23), &f(5, 3, 5), 23, 2, 10 * 23 * 23).unwrap();
        assert!(w.is_none());
    }
}
