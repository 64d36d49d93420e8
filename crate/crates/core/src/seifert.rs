//! Seifert matrices, their Alexander polynomials, the Trotter trace and the
//! passage to binary quadratic forms.

use std::fmt;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, factor_trial, isqrt};
use crate::error::{CheckedExt, Error, Result};
use crate::localize::{brute_force_localized_equivalent, orbit_label, LocalWitness};
use crate::qform::{canonical, DiscKind, GLTransform, QuadForm};

/// Largest matrix entry accepted, keeping all determinants inside `i128`.
pub const MAX_ENTRY: i128 = 1 << 24;

/// A `2g x 2g` integer matrix `P` with `det(P - P^T) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i128>>", into = "Vec<Vec<i128>>")]
pub struct SeifertMatrix {
    rows: Vec<Vec<i128>>,
}

impl SeifertMatrix {
    pub fn new(rows: Vec<Vec<i128>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || !n.is_multiple_of(2) || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidSeifert(format!("need a square matrix of even size, got {n} rows")));
        }
        if rows.iter().flatten().any(|x| x.abs() > MAX_ENTRY) {
            return Err(Error::Capacity {
                what: "Seifert matrix entry",
                value: rows.iter().flatten().map(|x| x.abs()).max().unwrap_or(0),
                bound: MAX_ENTRY,
            });
        }
        let skew: Vec<Vec<i128>> = (0..n)
            .map(|i| (0..n).map(|j| rows[i][j] - rows[j][i]).collect())
            .collect();
        let d = int_det(skew)?;
        if d != 1 {
            return Err(Error::InvalidSeifert(format!("det(P - P^T) = {d}, expected 1")));
        }
        Ok(SeifertMatrix { rows })
    }

    /// `[[a, b], [b - 1, c]]`, determinant `ac - b(b - 1)`.
    pub fn genus_one(a: i128, b: i128, c: i128) -> Result<Self> {
        Self::new(vec![vec![a, b], vec![b - 1, c]])
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i128>] {
        &self.rows
    }

    pub fn det(&self) -> Result<i128> {
        int_det(self.rows.clone())
    }

    /// `p_12 - p_21` for a 2x2 matrix: `+1` or `-1`.
    pub fn skew_sign(&self) -> Result<i128> {
        self.require_2x2()?;
        Ok(self.rows[0][1] - self.rows[1][0])
    }

    pub fn transpose(&self) -> SeifertMatrix {
        let n = self.size();
        SeifertMatrix {
            rows: (0..n).map(|i| (0..n).map(|j| self.rows[j][i]).collect()).collect(),
        }
    }

    fn require_2x2(&self) -> Result<()> {
        if self.size() != 2 {
            return Err(Error::InvalidSeifert(format!("expected 2x2, got {0}x{0}", self.size())));
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<i128>>> for SeifertMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<i128>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<SeifertMatrix> for Vec<Vec<i128>> {
    fn from(p: SeifertMatrix) -> Self {
        p.rows
    }
}

impl fmt::Display for SeifertMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

/// Integer coefficients, constant term first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlexanderPolynomial(pub Vec<i128>);

impl AlexanderPolynomial {
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    /// Palindromic up to an overall sign.
    pub fn is_symmetric(&self) -> bool {
        let rev: Vec<i128> = self.0.iter().rev().copied().collect();
        rev == self.0 || rev.iter().zip(&self.0).all(|(x, y)| *x == -*y)
    }

    pub fn eval(&self, t: i128) -> Option<i128> {
        self.0
            .iter()
            .rev()
            .try_fold(0i128, |acc, &c| acc.checked_mul(t)?.checked_add(c))
    }

    /// `Some(m)` when this is `m t^2 + (1 - 2m) t + m`.
    pub fn genus_one_m(&self) -> Option<i128> {
        match self.0[..] {
            [m, mid, m2] if m == m2 && mid == 1 - 2 * m => Some(m),
            _ => None,
        }
    }
}

impl fmt::Display for AlexanderPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| **c != 0)
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("{c}t"),
                _ => format!("{c}t^{i}"),
            })
            .collect();
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + ").replace("+ -", "- "))
        }
    }
}

/// The genus-one Alexander polynomial `m t^2 + (1 - 2m) t + m`.
pub fn delta(m: i128) -> AlexanderPolynomial {
    AlexanderPolynomial(vec![m, 1 - 2 * m, m])
}

type Poly = Vec<i128>;

fn trim(mut p: Poly) -> Poly {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
    p
}

fn poly_is_zero(p: &Poly) -> bool {
    p.iter().all(|&c| c == 0)
}

fn poly_mul(x: &Poly, y: &Poly) -> Result<Poly> {
    let mut out = vec![0i128; x.len() + y.len() - 1];
    for (i, &a) in x.iter().enumerate() {
        for (j, &b) in y.iter().enumerate() {
            let t = a.checked_mul(b).or_overflow("polynomial product")?;
            out[i + j] = out[i + j].checked_add(t).or_overflow("polynomial product")?;
        }
    }
    Ok(trim(out))
}

fn poly_sub(x: &Poly, y: &Poly) -> Result<Poly> {
    let mut out = vec![0i128; x.len().max(y.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let a = x.get(i).copied().unwrap_or(0);
        let b = y.get(i).copied().unwrap_or(0);
        *o = a.checked_sub(b).or_overflow("polynomial difference")?;
    }
    Ok(trim(out))
}

/// Exact quotient `x / y`; the division must be exact over `Z`.
fn poly_div_exact(x: &Poly, y: &Poly) -> Result<Poly> {
    let y = trim(y.clone());
    let mut r = trim(x.clone());
    if poly_is_zero(&r) {
        return Ok(vec![0]);
    }
    let (dy, ly) = (y.len() - 1, *y.last().unwrap());
    if r.len() - 1 < dy {
        return Err(Error::InvalidArgument("inexact polynomial division".into()));
    }
    let mut q = vec![0i128; r.len() - dy];
    for k in (0..q.len()).rev() {
        let lead = r[k + dy];
        if lead % ly != 0 {
            return Err(Error::InvalidArgument("inexact polynomial division".into()));
        }
        let c = lead / ly;
        q[k] = c;
        for (j, &yc) in y.iter().enumerate() {
            r[k + j] = r[k + j]
                .checked_sub(c.checked_mul(yc).or_overflow("polynomial division")?)
                .or_overflow("polynomial division")?;
        }
    }
    if !poly_is_zero(&r) {
        return Err(Error::InvalidArgument("inexact polynomial division".into()));
    }
    Ok(trim(q))
}

/// Bareiss fraction-free determinant over `Z[t]`.
fn poly_det(mut a: Vec<Vec<Poly>>) -> Result<Poly> {
    let n = a.len();
    let mut sign = 1i128;
    let mut prev: Poly = vec![1];
    for k in 0..n {
        let Some(piv) = (k..n).find(|&i| !poly_is_zero(&a[i][k])) else {
            return Ok(vec![0]);
        };
        if piv != k {
            a.swap(piv, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = poly_sub(&poly_mul(&a[i][j], &a[k][k])?, &poly_mul(&a[i][k], &a[k][j])?)?;
                a[i][j] = poly_div_exact(&num, &prev)?;
            }
        }
        prev = a[k][k].clone();
    }
    Ok(a[n - 1][n - 1].iter().map(|c| sign * c).collect())
}

/// Bareiss integer determinant.
fn int_det(a: Vec<Vec<i128>>) -> Result<i128> {
    let p: Vec<Vec<Poly>> = a.into_iter().map(|r| r.into_iter().map(|x| vec![x]).collect()).collect();
    Ok(poly_det(p)?[0])
}

/// Rank over `Q`, by fraction-free elimination.
fn int_rank(mut a: Vec<Vec<i128>>) -> Result<usize> {
    let (n, m) = (a.len(), a.first().map_or(0, Vec::len));
    let mut rank = 0;
    for col in 0..m {
        let Some(piv) = (rank..n).find(|&i| a[i][col] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        for i in rank + 1..n {
            let (f, g) = (a[i][col], a[rank][col]);
            for j in 0..m {
                a[i][j] = a[i][j]
                    .checked_mul(g)
                    .and_then(|x| x.checked_sub(f.checked_mul(a[rank][j])?))
                    .or_overflow("rank elimination")?;
            }
            let content = a[i].iter().fold(0, |acc, &x| crate::arith::gcd(acc, x));
            if content > 1 {
                a[i].iter_mut().for_each(|x| *x /= content);
            }
        }
        rank += 1;
    }
    Ok(rank)
}

/// `det(tP - P^T) / t^(dim ker P)`.
pub fn alexander_polynomial(p: &SeifertMatrix) -> Result<AlexanderPolynomial> {
    let n = p.size();
    let m: Vec<Vec<Poly>> = (0..n)
        .map(|i| (0..n).map(|j| trim(vec![-p.rows[j][i], p.rows[i][j]])).collect())
        .collect();
    let det = poly_det(m)?;
    let nullity = n - int_rank(p.rows.clone())?;
    if det.len() <= nullity || det[..nullity].iter().any(|&c| c != 0) {
        return Err(Error::InvalidSeifert(format!(
            "det(tP - P^T) is not divisible by t^{nullity}"
        )));
    }
    Ok(AlexanderPolynomial(det[nullity..].to_vec()))
}

/// The form with matrix `(P + P^T)/2`: `(p11, p12 + p21, p22)`.
pub fn seifert_to_form(p: &SeifertMatrix) -> Result<QuadForm> {
    p.require_2x2()?;
    let r = &p.rows;
    QuadForm::new(r[0][0], r[0][1] + r[1][0], r[1][1])
}

/// `T((a + bt) / Delta_m) = b / m`.
pub fn trotter_trace(_a: i128, b: i128, m: i128) -> Result<Ratio<i128>> {
    if m == 0 {
        return Err(Error::ZeroM);
    }
    Ok(Ratio::new(b, m))
}

fn same_family(p1: &SeifertMatrix, p2: &SeifertMatrix) -> Result<i128> {
    let (m1, m2) = (p1.det()?, p2.det()?);
    if m1 != m2 {
        return Err(Error::InvalidSeifert(format!(
            "determinants differ ({m1} vs {m2}): different Alexander polynomials"
        )));
    }
    if m1 == 0 {
        return Err(Error::ZeroM);
    }
    Ok(m1)
}

/// `P1 = X P2 X^T` for some `X` in `SL2(Z[1/m])`, decided through the orbit
/// labels of the associated forms. `X P X^T` keeps the skew part
/// `P - P^T` fixed, so matrices with opposite skew signs are never
/// equivalent.
pub fn s_equivalent(p1: &SeifertMatrix, p2: &SeifertMatrix) -> Result<bool> {
    let m = same_family(p1, p2)?;
    if p1.skew_sign()? != p2.skew_sign()? {
        return Ok(false);
    }
    let (q1, q2) = (seifert_to_form(p1)?, seifert_to_form(p2)?);
    Ok(orbit_label(&q1, m)? == orbit_label(&q2, m)?)
}

/// `X = u / m^k` with `m^(2k) P1 = u P2 u^T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeifertWitness {
    pub u: GLTransform,
    pub k: u32,
}

/// Searches the oracle box for an explicit congruence `P1 = X P2 X^T`; the
/// returned witness has been checked entrywise.
pub fn s_equivalence_witness(
    p1: &SeifertMatrix,
    p2: &SeifertMatrix,
    k_max: u32,
    height_max: i128,
) -> Result<Option<SeifertWitness>> {
    let m = same_family(p1, p2)?;
    if p1.skew_sign()? != p2.skew_sign()? {
        return Ok(None);
    }
    let (q1, q2) = (seifert_to_form(p1)?, seifert_to_form(p2)?);
    if let DiscKind::Split { .. } = q1.discriminant()?.kind() {
        return Err(Error::SquareDiscriminant(q1.disc()));
    }
    // q2 o Y = q1 gives S1 = Y^T S2 Y, so X = Y^T.
    let Some(LocalWitness { u, k }) = brute_force_localized_equivalent(&q2, &q1, m, k_max, height_max)? else {
        return Ok(None);
    };
    let x = GLTransform::new(u.p, u.r, u.q, u.s);
    let scale = m.checked_pow(2 * k).or_overflow("m^(2k)")?;
    let xm = [[x.p, x.q], [x.r, x.s]];
    let p2r = &p2.rows;
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = 0i128;
            for a in 0..2 {
                for b in 0..2 {
                    let t = xm[i][a]
                        .checked_mul(p2r[a][b])
                        .and_then(|t| t.checked_mul(xm[j][b]))
                        .or_overflow("congruence check")?;
                    acc = acc.checked_add(t).or_overflow("congruence check")?;
                }
            }
            let want = p1.rows[i][j].checked_mul(scale).or_overflow("congruence check")?;
            assert_eq!(acc, want, "Seifert witness check");
        }
    }
    Ok(Some(SeifertWitness { u: x, k }))
}

/// `count` matrices `[[a, b], [b - 1, c]]` of determinant `m`, deterministic in
/// `(m, count, seed)`: `b` is drawn near `sqrt|m|`, then `a` among the signed
/// divisors of `m + b(b - 1)`.
pub fn random_seifert(m: i128, count: usize, seed: u64) -> Result<Vec<SeifertMatrix>> {
    if m == 0 {
        return Err(Error::ZeroM);
    }
    if m.abs() > MAX_ENTRY {
        return Err(Error::Capacity {
            what: "|m| for random Seifert matrices",
            value: m.abs(),
            bound: MAX_ENTRY,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = 2 * (isqrt(m.unsigned_abs()) as i128 + 2);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let b = rng.gen_range(-spread..=spread);
        let n = m + b * (b - 1);
        if n == 0 {
            continue;
        }
        let divs = divisors(&factor_trial(n.unsigned_abs() as u64));
        let a = *divs.choose(&mut rng).expect("1 divides everything") as i128;
        let a = if rng.gen_bool(0.5) { -a } else { a };
        out.push(SeifertMatrix::genus_one(a, b, n / a)?);
    }
    Ok(out)
}

/// The JSON-facing summary of a 2x2 Seifert matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeifertReport {
    #[serde(rename = "P")]
    pub p: SeifertMatrix,
    pub m: i128,
    pub alexander: AlexanderPolynomial,
    pub form: QuadForm,
    /// Canonical `SL2(Z)` representative.
    pub class_id: String,
    /// Content and least canonical form of the `SL2(Z[1/m])` orbit.
    pub orbit_id: String,
}

pub fn seifert_report(p: &SeifertMatrix) -> Result<SeifertReport> {
    let m = p.det()?;
    let form = seifert_to_form(p)?;
    let (content, label) = orbit_label(&form, m)?;
    Ok(SeifertReport {
        p: p.clone(),
        m,
        alexander: alexander_polynomial(p)?,
        form,
        class_id: canonical(&form)?.to_string(),
        orbit_id: format!("{content}:{label}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localize::knot_count;
    use crate::qform::{enumerate_classes, equivalent, Discriminant};

    fn sm(rows: [[i128; 2]; 2]) -> SeifertMatrix {
        SeifertMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn alexander_examples() {
        assert_eq!(alexander_polynomial(&sm([[1, 1], [0, 1]])).unwrap(), delta(1));
        assert_eq!(alexander_polynomial(&sm([[1, 2], [1, 1]])).unwrap().0, vec![-1, 3, -1]);
        assert_eq!(alexander_polynomial(&sm([[0, 1], [0, 0]])).unwrap().0, vec![1]);
        assert_eq!(delta(1).to_string(), "1t^2 - 1t + 1");
        assert!(SeifertMatrix::new(vec![vec![1, 2], vec![0, 1]]).is_err());
        assert!(SeifertMatrix::new(vec![vec![1]]).is_err());
    }

    /// Expansion along the first row, over `Z[t]`.
    fn laplace(m: &[Vec<Poly>]) -> Poly {
        if m.len() == 1 {
            return m[0][0].clone();
        }
        let mut acc: Poly = vec![0];
        for j in 0..m.len() {
            let minor: Vec<Vec<Poly>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
                .collect();
            let term = poly_mul(&m[0][j], &laplace(&minor)).unwrap();
            acc = if j % 2 == 0 { poly_sub(&acc, &term.iter().map(|c| -c).collect()).unwrap() } else { poly_sub(&acc, &term).unwrap() };
        }
        acc
    }

    #[test]
    fn genus_two_matches_laplace_expansion() {
        // A block sum of genus-one matrices, conjugated by a unimodular matrix.
        let p = [vec![2, 1, 0, 0],
            vec![0, 3, 0, 0],
            vec![0, 0, 1, 1],
            vec![0, 0, 0, -1]];
        let g: [[i128; 4]; 4] = [[1, 1, 0, 0], [0, 1, 2, 0], [0, 0, 1, -1], [0, 0, 0, 1]];
        let mut gp = vec![vec![0i128; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for a in 0..4 {
                    for b in 0..4 {
                        gp[i][j] += g[i][a] * p[a][b] * g[j][b];
                    }
                }
            }
        }
        let q = SeifertMatrix::new(gp.clone()).unwrap();
        let poly = alexander_polynomial(&q).unwrap();
        let m: Vec<Vec<Poly>> = (0..4)
            .map(|i| (0..4).map(|j| trim(vec![-gp[j][i], gp[i][j]])).collect())
            .collect();
        assert_eq!(poly.0, trim(laplace(&m)));
        let prod = poly_mul(&delta(6).0, &delta(-1).0).unwrap();
        assert_eq!(poly.0, prod);
        assert!(poly.is_symmetric());
        assert_eq!(poly.eval(1), Some(1));
    }

    #[test]
    fn degenerate_rank_drops_degree() {
        let p = SeifertMatrix::new(vec![
            vec![0, 1, 0, 0],
            vec![0, 0, 0, 0],
            vec![0, 0, 2, 1],
            vec![0, 0, 0, 3],
        ])
        .unwrap();
        assert_eq!(alexander_polynomial(&p).unwrap(), delta(6));
    }

    #[test]
    fn form_examples() {
        let f = |a, b, c| QuadForm::new(a, b, c).unwrap();
        assert_eq!(seifert_to_form(&sm([[1, 1], [0, 1]])).unwrap(), f(1, 1, 1));
        assert_eq!(seifert_to_form(&sm([[2, 1], [0, 3]])).unwrap(), f(2, 1, 3));
        let p = sm([[1, 0], [-1, -1]]);
        assert_eq!(seifert_to_form(&p).unwrap(), f(1, -1, -1));
        assert_eq!(p.det().unwrap(), -1);
    }

    #[test]
    fn trotter_examples() {
        assert_eq!(trotter_trace(1, 0, 9).unwrap(), Ratio::from_integer(0));
        assert_eq!(trotter_trace(0, 1, 5).unwrap(), Ratio::new(1, 5));
        assert_eq!(trotter_trace(3, 7, 7).unwrap(), Ratio::from_integer(1));
        assert!(trotter_trace(0, 1, 0).is_err());
    }

    #[test]
    fn s_equivalence_examples() {
        let p = sm([[2, 1], [0, 3]]);
        assert!(s_equivalent(&p, &p).unwrap());
        assert!(s_equivalent(&p, &sm([[1, 1], [0, 6]])).unwrap());
        assert!(s_equivalent(&sm([[2, 0], [-1, 3]]), &sm([[1, 1], [0, 6]])).unwrap());
        // m = 23, disc -91 = -7 * 13: h = 2, kernel trivial for a prime.
        let q = sm([[1, 1], [0, 23]]);
        let r = sm([[5, 2], [1, 5]]);
        assert_eq!(r.det().unwrap(), 23);
        assert!(!equivalent(&seifert_to_form(&q).unwrap(), &seifert_to_form(&r).unwrap()).unwrap());
        assert!(!s_equivalent(&q, &r).unwrap());
        assert!(s_equivalent(&p, &q).is_err());
        // The transpose flips the skew sign.
        assert!(!s_equivalent(&p, &p.transpose()).unwrap());
    }

    #[test]
    fn witnesses_are_congruences() {
        let p = sm([[2, 1], [0, 3]]);
        let q = sm([[1, 1], [0, 6]]);
        let w = s_equivalence_witness(&p, &q, 2, 360).unwrap().unwrap();
        assert!(w.k >= 1);
        assert!(s_equivalence_witness(&sm([[1, 1], [0, 23]]), &sm([[5, 2], [1, 5]]), 2, 5290)
            .unwrap()
            .is_none());
    }

    #[test]
    fn random_matrices() {
        assert!(random_seifert(5, 0, 1).unwrap().is_empty());
        for m in [-30i128, -1, 1, 6, 23, 100] {
            let ps = random_seifert(m, 50, 9).unwrap();
            assert_eq!(ps, random_seifert(m, 50, 9).unwrap());
            for p in &ps {
                assert_eq!(p.det().unwrap(), m);
                assert_eq!(alexander_polynomial(p).unwrap(), delta(m));
                assert_eq!(seifert_to_form(p).unwrap().disc(), 1 - 4 * m);
            }
        }
    }

    #[test]
    fn s_equivalence_classes_match_knot_count() {
        for m in [6i128, 10, 21, 30, -5, -15] {
            let d = Discriminant::for_m(m).unwrap();
            let mut labels = std::collections::BTreeSet::new();
            for f in enumerate_classes(&d, false).unwrap() {
                // Every form (a, 2b-1, c) comes from [[a, b], [b-1, c]].
                let p = SeifertMatrix::genus_one(f.a(), (f.b() + 1) / 2, f.c()).unwrap();
                labels.insert(seifert_report(&p).unwrap().orbit_id);
            }
            assert_eq!(labels.len() as u64, knot_count(m).unwrap().total, "m={m}");
        }
    }
}
