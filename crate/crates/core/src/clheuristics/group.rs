//! Finite abelian groups in invariant-factor form.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::factor_trial;
use crate::classgroup::{merge_invariants, structure_string};
use crate::error::{Error, Result};

/// `Z/d_1 x ... x Z/d_k` with `1 < d_1 | d_2 | ... | d_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct FiniteAbelianGroup {
    invariants: Vec<u64>,
}

impl FiniteAbelianGroup {
    pub fn trivial() -> Self {
        FiniteAbelianGroup { invariants: Vec::new() }
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::from_cyclic_factors(&[n])
    }

    /// Normal form of `Z/n_1 x ... x Z/n_r` for arbitrary positive `n_i`.
    pub fn from_cyclic_factors(factors: &[u64]) -> Result<Self> {
        if factors.contains(&0) {
            return Err(Error::InvalidGroup("cyclic factor 0 is infinite".into()));
        }
        Ok(FiniteAbelianGroup {
            invariants: merge_invariants(factors, &[]),
        })
    }

    /// Exponents of the `p`-primary parts, each sorted ascending.
    pub fn from_primary(parts: &BTreeMap<u64, Vec<u32>>) -> Self {
        let cyclic: Vec<u64> = parts
            .iter()
            .flat_map(|(&p, es)| es.iter().map(move |&e| p.pow(e)))
            .collect();
        FiniteAbelianGroup {
            invariants: merge_invariants(&cyclic, &[]),
        }
    }

    pub fn invariants(&self) -> &[u64] {
        &self.invariants
    }

    pub fn order(&self) -> u64 {
        self.invariants.iter().product()
    }

    pub fn rank(&self) -> usize {
        self.invariants.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.invariants.is_empty()
    }

    pub fn exponent(&self) -> u64 {
        self.invariants.last().copied().unwrap_or(1)
    }

    /// `p -> ascending exponents` of the `p`-primary component.
    pub fn primary_parts(&self) -> BTreeMap<u64, Vec<u32>> {
        let mut parts: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
        for &d in &self.invariants {
            for (p, e) in factor_trial(d) {
                parts.entry(p).or_default().push(e);
            }
        }
        parts
    }

    pub fn primary_component(&self, p: u64) -> FiniteAbelianGroup {
        let mut parts = BTreeMap::new();
        if let Some(es) = self.primary_parts().remove(&p) {
            parts.insert(p, es);
        }
        Self::from_primary(&parts)
    }

    /// The subgroup `nG`.
    pub fn multiple(&self, n: u64) -> FiniteAbelianGroup {
        let cyclic: Vec<u64> = self
            .invariants
            .iter()
            .map(|&d| d / crate::arith::gcd_u64(d, n))
            .collect();
        FiniteAbelianGroup {
            invariants: merge_invariants(&cyclic, &[]),
        }
    }

    pub fn product(&self, other: &FiniteAbelianGroup) -> FiniteAbelianGroup {
        FiniteAbelianGroup {
            invariants: merge_invariants(&self.invariants, &other.invariants),
        }
    }

    /// `G / <gens>`; each generator is a coordinate vector against the
    /// invariant factors.
    pub fn quotient(&self, gens: &[Vec<u64>]) -> FiniteAbelianGroup {
        let n = self.rank();
        let mut rows: Vec<Vec<i128>> = Vec::with_capacity(n + gens.len());
        for (i, &d) in self.invariants.iter().enumerate() {
            let mut r = vec![0i128; n];
            r[i] = d as i128;
            rows.push(r);
        }
        for g in gens {
            debug_assert_eq!(g.len(), n);
            rows.push(g.iter().map(|&x| x as i128).collect());
        }
        let diag = diagonalize(rows, n);
        let cyclic: Vec<u64> = diag.into_iter().map(|x| x as u64).collect();
        FiniteAbelianGroup {
            invariants: merge_invariants(&cyclic, &[]),
        }
    }

    /// `|Aut G|`, or an overflow error past `u128`.
    pub fn aut_order(&self) -> Result<u128> {
        let mut acc: u128 = 1;
        for (p, es) in self.primary_parts() {
            for f in aut_factors_p(p, &es) {
                acc = acc.checked_mul(f).ok_or(Error::Overflow("automorphism count"))?;
            }
        }
        Ok(acc)
    }

    /// `|Aut G|` in floating point; never overflows for groups that fit in
    /// memory.
    pub fn aut_order_f64(&self) -> f64 {
        self.primary_parts()
            .into_iter()
            .flat_map(|(p, es)| aut_factors_p(p, &es))
            .map(|f| f as f64)
            .product()
    }
}

/// Hillar-Rhea: for `Z/p^{e_1} x ... x Z/p^{e_n}` with `e` ascending,
/// `|Aut| = prod_k (p^{d_k} - p^{k-1}) * prod_j p^{e_j (n - d_j)} * prod_i p^{(e_i - 1)(n - c_i + 1)}`
/// with `d_k = max{l : e_l = e_k}` and `c_k = min{l : e_l = e_k}` (1-based).
/// Returned as a list of factors, each below `p^n`.
fn aut_factors_p(p: u64, es: &[u32]) -> Vec<u128> {
    let n = es.len();
    let p = p as u128;
    let mut out = Vec::new();
    for k in 0..n {
        let d = (0..n).rev().find(|&l| es[l] == es[k]).unwrap() + 1;
        let c = (0..n).find(|&l| es[l] == es[k]).unwrap() + 1;
        out.push(p.pow(d as u32) - p.pow(k as u32));
        out.extend(std::iter::repeat_n(p.pow(es[k]), n - d));
        out.extend(std::iter::repeat_n(p.pow(es[k] - 1), n - c + 1));
    }
    out
}

/// Row and column operations until the matrix is diagonal; returns the
/// absolute diagonal. The rows must span a full-rank sublattice.
fn diagonalize(mut rows: Vec<Vec<i128>>, n: usize) -> Vec<i128> {
    let mut diag = Vec::with_capacity(n);
    for t in 0..n {
        loop {
            let pivot = rows[t..]
                .iter()
                .enumerate()
                .flat_map(|(i, r)| r[t..].iter().enumerate().map(move |(j, &x)| (x.abs(), i + t, j + t)))
                .filter(|&(x, _, _)| x != 0)
                .min();
            let Some((_, pi, pj)) = pivot else {
                panic!("relation lattice is not of full rank");
            };
            rows.swap(t, pi);
            for r in rows.iter_mut() {
                r.swap(t, pj);
            }
            let pv = rows[t][t];
            let mut clean = true;
            for i in t + 1..rows.len() {
                let q = rows[i][t].div_euclid(pv);
                if q != 0 {
                    for j in t..n {
                        rows[i][j] -= q * rows[t][j];
                    }
                }
                clean &= rows[i][t] == 0;
            }
            for j in t + 1..n {
                let q = rows[t][j].div_euclid(pv);
                if q != 0 {
                    for r in rows.iter_mut() {
                        r[j] -= q * r[t];
                    }
                }
                clean &= rows[t][j] == 0;
            }
            if clean {
                break;
            }
        }
        diag.push(rows[t][t].abs());
    }
    diag
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&structure_string(&self.invariants))
    }
}

/// Accepts `1`, `Z/2xZ/4`, or a comma-separated list of cyclic orders such as
/// `2,4`.
impl FromStr for FiniteAbelianGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "1" || s == "0" {
            return Ok(Self::trivial());
        }
        let parts: std::result::Result<Vec<u64>, _> = s
            .split(['x', ',', '*'])
            .map(|t| t.trim().trim_start_matches("Z/").parse::<u64>())
            .collect();
        let parts = parts.map_err(|_| Error::InvalidGroup(format!("cannot parse group {s:?}")))?;
        Self::from_cyclic_factors(&parts)
    }
}

impl TryFrom<Vec<u64>> for FiniteAbelianGroup {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        Self::from_cyclic_factors(&v)
    }
}

impl From<FiniteAbelianGroup> for Vec<u64> {
    fn from(g: FiniteAbelianGroup) -> Vec<u64> {
        g.invariants
    }
}

/// Largest number of spanning-state transitions `surjection_count` will
/// attempt.
const SURJECTION_WORK: u128 = 50_000_000;

/// `#Sur(G, A)`. Per prime, a tuple of images generates `A_p` iff it spans
/// `A_p / pA_p = F_p^s`; the image of `A_p[p^e]` there is the coordinate
/// subspace of summands with exponent at most `e`, hit uniformly.
pub fn surjection_count(g: &FiniteAbelianGroup, a: &FiniteAbelianGroup) -> Result<u128> {
    let gp = g.primary_parts();
    let mut total: u128 = 1;
    for (p, a_exps) in a.primary_parts() {
        let g_exps = gp.get(&p).cloned().unwrap_or_default();
        let s = a_exps.len();
        if g_exps.len() < s {
            return Ok(0);
        }
        let field = (p as u128).checked_pow(s as u32).ok_or(Error::Overflow("target rank"))?;
        let work = field
            .checked_mul(field)
            .and_then(|w| w.checked_mul(g_exps.len() as u128))
            .ok_or(Error::Overflow("surjection count"))?;
        if work > SURJECTION_WORK {
            return Err(Error::Capacity {
                what: "surjection count work",
                value: work.min(i128::MAX as u128) as i128,
                bound: SURJECTION_WORK as i128,
            });
        }
        let mut kernel_factor: u128 = 1;
        let mut dims = Vec::with_capacity(g_exps.len());
        for &e in &g_exps {
            // |A[p^e]| = prod_j p^{min(e, a_j)}; its image mod p has dimension
            // #{j : a_j <= e}.
            let dim = a_exps.iter().filter(|&&aj| aj <= e).count();
            let log_size: u32 = a_exps.iter().map(|&aj| aj.min(e)).sum();
            let fibre = (p as u128)
                .checked_pow(log_size - dim as u32)
                .ok_or(Error::Overflow("surjection count"))?;
            kernel_factor = kernel_factor.checked_mul(fibre).ok_or(Error::Overflow("surjection count"))?;
            dims.push(dim);
        }
        let spanning = spanning_tuples(p, s, &dims);
        total = total
            .checked_mul(kernel_factor)
            .and_then(|t| t.checked_mul(spanning))
            .ok_or(Error::Overflow("surjection count"))?;
    }
    Ok(total)
}

/// Tuples `(v_1, ..., v_n)` with `v_i` in the span of the first `dims[i]`
/// coordinates of `F_p^s` that span all of `F_p^s`. Coordinates are ordered
/// by ascending exponent, so the subspaces are nested.
fn spanning_tuples(p: u64, s: usize, dims: &[usize]) -> u128 {
    if s == 0 {
        return 1;
    }
    let vectors: Vec<Vec<u64>> = all_vectors(p, s);
    let mut states: HashMap<Vec<Vec<u64>>, u128> = HashMap::from([(Vec::new(), 1)]);
    for &dim in dims {
        let mut next: HashMap<Vec<Vec<u64>>, u128> = HashMap::new();
        for (basis, count) in &states {
            for v in vectors.iter().filter(|v| v[dim..].iter().all(|&x| x == 0)) {
                let nb = extend_basis(basis, v, p);
                *next.entry(nb).or_default() += count;
            }
        }
        states = next;
    }
    states
        .into_iter()
        .filter(|(b, _)| b.len() == s)
        .map(|(_, c)| c)
        .sum()
}

fn all_vectors(p: u64, s: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..s {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..p).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Reduced row echelon basis of `span(basis) + <v>` over `F_p`.
fn extend_basis(basis: &[Vec<u64>], v: &[u64], p: u64) -> Vec<Vec<u64>> {
    let mut rows: Vec<Vec<u64>> = basis.to_vec();
    rows.push(v.to_vec());
    let s = v.len();
    let inv = |x: u64| crate::arith::pow_mod(x, p - 2, p);
    let mut r = 0;
    for col in 0..s {
        let Some(piv) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, piv);
        let k = if p == 2 { 1 } else { inv(rows[r][col]) };
        for x in rows[r].iter_mut() {
            *x = *x * k % p;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][col] != 0 {
                let f = rows[i][col];
                for j in 0..s {
                    rows[i][j] = (rows[i][j] + (p - f) * rows[r][j]) % p;
                }
            }
        }
        r += 1;
    }
    rows.truncate(r);
    rows
}
