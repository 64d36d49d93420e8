//! Composition of primitive forms, class groups and their oriented variant,
//! prime forms, genus characters and regulators of real discriminants.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::arith::{exact_sqrt, factor_trial, is_prime, legendre, sqrt_mod_prime, totient, xgcd};
use crate::error::{CheckedExt, Error, Result};
use crate::qform::{
    canonical, indefinite_cycles, positive_definite_classes, reduce_to_cycle, DiscKind,
    Discriminant, GLTransform, QuadForm,
};
use crate::sieve::{Factorizer, TrialDivision};

/// Largest `|D|` for which [`group_structure`] builds a full group.
pub const STRUCTURE_BOUND: i128 = 1_000_000_000;

fn check_primitive(f: &QuadForm) -> Result<()> {
    if f.is_primitive() {
        Ok(())
    } else {
        Err(Error::Imprimitive(f.to_string()))
    }
}

/// A form in the product class of two primitive forms with nonzero leading
/// coefficients (Shanks' arrangement of Dirichlet composition). Not reduced.
pub(crate) fn compose_raw(f1: &QuadForm, f2: &QuadForm) -> Result<QuadForm> {
    let (a1, b1, _) = f1.coeffs();
    let (a2, b2, c2) = f2.coeffs();
    let e = || Error::Overflow("composition");
    let s = (b1 + b2) / 2;
    let n = b2 - s;
    let (d, y1) = if a2 % a1 == 0 {
        (a1.abs(), 0)
    } else {
        let (g, u, _) = xgcd(a2, a1);
        (g, u)
    };
    let (d1, x2, y2) = if s % d == 0 {
        (d, 0, -1)
    } else {
        let (g, u, v) = xgcd(s, d);
        (g, u, -v)
    };
    let v1 = a1 / d1;
    let v2 = a2 / d1;
    let t1 = y1.checked_mul(y2).and_then(|v| v.checked_mul(n)).ok_or_else(e)?;
    let t2 = x2.checked_mul(c2).ok_or_else(e)?;
    let r = t1.checked_sub(t2).ok_or_else(e)?.rem_euclid(v1.abs());
    let b3 = v2
        .checked_mul(2)
        .and_then(|v| v.checked_mul(r))
        .and_then(|v| v.checked_add(b2))
        .ok_or_else(e)?;
    let a3 = v1.checked_mul(v2).ok_or_else(e)?;
    let num = b3.checked_mul(b3).and_then(|v| v.checked_sub(f1.disc())).ok_or_else(e)?;
    QuadForm::new(a3, b3, num / (4 * a3))
}

/// The reduced form used as a hash key: canonical for negative
/// discriminants, first reduced cycle member for positive ones.
fn class_key(f: &QuadForm) -> Result<QuadForm> {
    if f.disc() < 0 {
        canonical(f)
    } else {
        Ok(reduce_to_cycle(f)?.0)
    }
}

/// A form with leading coefficient nonzero in the class of `f`.
fn nonzero_leading(f: &QuadForm) -> Result<QuadForm> {
    if f.a() != 0 {
        Ok(*f)
    } else {
        class_key(f)
    }
}

/// Canonical representative of the product of the classes of `q1` and `q2`.
///
/// For negative discriminants the sign of a definite form is its orientation:
/// a negative definite `(-a, b, -c)` stands for the class of `(a, b, c)` with
/// orientation `-1`, and orientations multiply.
pub fn compose(d: &Discriminant, q1: &QuadForm, q2: &QuadForm) -> Result<QuadForm> {
    for q in [q1, q2] {
        if q.disc() != d.value() {
            return Err(Error::DiscriminantMismatch(q.disc(), d.value()));
        }
        check_primitive(q)?;
    }
    match d.kind() {
        DiscKind::Split { .. } => Err(Error::SquareDiscriminant(d.value())),
        DiscKind::NegativeDefinite => {
            let lift = |q: &QuadForm| if q.a() < 0 { (q.mirror(), -1) } else { (*q, 1) };
            let ((p1, s1), (p2, s2)) = (lift(q1), lift(q2));
            let r = canonical(&compose_raw(&p1, &p2)?)?;
            Ok(if s1 * s2 < 0 { r.mirror() } else { r })
        }
        DiscKind::IndefiniteNonSquare => {
            canonical(&compose_raw(&nonzero_leading(q1)?, &nonzero_leading(q2)?)?)
        }
    }
}

/// `f^e` by square-and-multiply, each step reduced to a class key.
fn power_key(f: &QuadForm, mut e: u64, identity: QuadForm) -> Result<QuadForm> {
    let mut acc = identity;
    let mut base = class_key(f)?;
    while e > 0 {
        if e & 1 == 1 {
            acc = class_key(&compose_raw(&acc, &base)?)?;
        }
        e >>= 1;
        if e > 0 {
            base = class_key(&compose_raw(&base, &base)?)?;
        }
    }
    Ok(acc)
}

/// Canonical representative of the `e`-th power of the class of a primitive
/// positive definite or indefinite form.
pub fn power(f: &QuadForm, e: u64) -> Result<QuadForm> {
    check_primitive(f)?;
    let d = f.discriminant()?;
    if f.disc() < 0 && f.a() < 0 {
        return Err(Error::InvalidArgument(format!("{f} is negative definite")));
    }
    if let DiscKind::Split { .. } = d.kind() {
        return Err(Error::SquareDiscriminant(d.value()));
    }
    canonical(&power_key(&nonzero_leading(f)?, e, QuadForm::principal(&d))?)
}

/// `SL2(Z)`-classes of primitive forms of one non-square discriminant (the
/// positive definite ones when `D < 0`), with a finite abelian group structure.
#[derive(Debug, Clone)]
pub struct ClassGroup {
    disc: Discriminant,
    reps: Vec<QuadForm>,
    lookup: HashMap<QuadForm, usize>,
    orders: Vec<u64>,
    invariants: Vec<u64>,
    generators: Vec<usize>,
}

/// Builds the class group of `d`, including its invariant factors.
pub fn group_structure(d: &Discriminant) -> Result<ClassGroup> {
    ClassGroup::new(d)
}

impl ClassGroup {
    pub fn new(d: &Discriminant) -> Result<Self> {
        Self::with_factorizer(d, &TrialDivision)
    }

    pub fn with_factorizer(d: &Discriminant, fz: &dyn Factorizer) -> Result<Self> {
        if d.value().abs() > STRUCTURE_BOUND {
            return Err(Error::Capacity {
                what: "|discriminant| for class group structure",
                value: d.value().abs(),
                bound: STRUCTURE_BOUND,
            });
        }
        let (reps, lookup) = match d.kind() {
            DiscKind::Split { .. } => return Err(Error::SquareDiscriminant(d.value())),
            DiscKind::NegativeDefinite => {
                let reps = positive_definite_classes(d, true, fz);
                let lookup = reps.iter().enumerate().map(|(i, f)| (*f, i)).collect();
                (reps, lookup)
            }
            DiscKind::IndefiniteNonSquare => {
                let cycles = indefinite_cycles(d, true, fz)?;
                let mut lookup = HashMap::new();
                for (i, c) in cycles.iter().enumerate() {
                    lookup.extend(c.iter().map(|f| (*f, i)));
                }
                (cycles.into_iter().map(|c| c[0]).collect(), lookup)
            }
        };
        let mut g = ClassGroup {
            disc: *d,
            reps,
            lookup,
            orders: Vec::new(),
            invariants: Vec::new(),
            generators: Vec::new(),
        };
        g.compute_structure()?;
        Ok(g)
    }

    pub fn discriminant(&self) -> Discriminant {
        self.disc
    }

    pub fn order(&self) -> u64 {
        self.reps.len() as u64
    }

    /// Canonical representatives; index 0 is the principal class.
    pub fn reps(&self) -> &[QuadForm] {
        &self.reps
    }

    pub fn rep(&self, id: usize) -> QuadForm {
        self.reps[id]
    }

    pub fn identity(&self) -> usize {
        0
    }

    /// Class index of a primitive form of this discriminant (positive
    /// definite when `D < 0`).
    pub fn id_of(&self, f: &QuadForm) -> Result<usize> {
        if f.disc() != self.disc.value() {
            return Err(Error::DiscriminantMismatch(f.disc(), self.disc.value()));
        }
        check_primitive(f)?;
        if f.disc() < 0 && f.a() < 0 {
            return Err(Error::InvalidArgument(format!("{f} is negative definite")));
        }
        self.lookup_key(&class_key(f)?)
    }

    fn lookup_key(&self, k: &QuadForm) -> Result<usize> {
        self.lookup
            .get(k)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("{k} is not a reduced class form")))
    }

    pub fn mul(&self, x: usize, y: usize) -> Result<usize> {
        self.lookup_key(&class_key(&compose_raw(&self.reps[x], &self.reps[y])?)?)
    }

    pub fn inverse(&self, x: usize) -> Result<usize> {
        let (a, b, c) = self.reps[x].coeffs();
        self.lookup_key(&class_key(&QuadForm::new(a, -b, c)?)?)
    }

    pub fn pow(&self, x: usize, e: u64) -> Result<usize> {
        let id = QuadForm::principal(&self.disc);
        self.lookup_key(&power_key(&self.reps[x], e, id)?)
    }

    pub fn element_order(&self, x: usize) -> u64 {
        self.orders[x]
    }

    /// Invariant factors `d_1 | d_2 | ...`, each at least 2; empty for the
    /// trivial group.
    pub fn invariant_factors(&self) -> &[u64] {
        &self.invariants
    }

    /// One generator per invariant factor, with matching orders.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// `Z/3`, `Z/2xZ/4`, or `1` for the trivial group.
    pub fn structure_string(&self) -> String {
        structure_string(&self.invariants)
    }

    /// Indices of the classes that are squares.
    pub fn squares(&self) -> Result<HashSet<usize>> {
        (0..self.reps.len()).map(|x| self.mul(x, x)).collect()
    }

    fn compute_structure(&mut self) -> Result<()> {
        let h = self.order();
        let hf = factor_trial(h);
        let mut orders = Vec::with_capacity(self.reps.len());
        for x in 0..self.reps.len() {
            let mut o = h;
            for &(p, _) in &hf {
                while o.is_multiple_of(p) && self.pow(x, o / p)? == 0 {
                    o /= p;
                }
            }
            orders.push(o);
        }
        self.orders = orders;
        // A basis of each Sylow subgroup, largest cyclic factor first.
        let mut sylow_bases: Vec<Vec<(usize, u64)>> = Vec::new();
        for &(p, _) in &hf {
            sylow_bases.push(self.sylow_basis(p)?);
        }
        let rank = sylow_bases.iter().map(Vec::len).max().unwrap_or(0);
        let mut invariants = Vec::with_capacity(rank);
        let mut generators = Vec::with_capacity(rank);
        for i in 0..rank {
            let mut ord = 1u64;
            let mut g = 0usize;
            for basis in &sylow_bases {
                if let Some(&(x, o)) = basis.get(i) {
                    g = self.mul(g, x)?;
                    ord *= o;
                }
            }
            invariants.push(ord);
            generators.push(g);
        }
        invariants.reverse();
        generators.reverse();
        self.invariants = invariants;
        self.generators = generators;
        Ok(())
    }

    /// Greedy basis of the `p`-Sylow subgroup: repeatedly take the smallest
    /// representative of largest order modulo the span so far, corrected so
    /// that the new cyclic factor meets the span trivially.
    fn sylow_basis(&self, p: u64) -> Result<Vec<(usize, u64)>> {
        let sylow: Vec<usize> = (0..self.reps.len())
            .filter(|&x| is_power_of(self.orders[x], p))
            .collect();
        let mut span: HashSet<usize> = HashSet::from([0]);
        let mut basis = Vec::new();
        while span.len() < sylow.len() {
            let mut best: Option<(u64, usize)> = None;
            for &x in &sylow {
                let mut o = 1u64;
                let mut y = x;
                while !span.contains(&y) {
                    y = self.pow(y, p)?;
                    o *= p;
                }
                if best.is_none_or(|(bo, _)| o > bo) {
                    best = Some((o, x));
                }
            }
            let (o, x) = best.expect("span is a proper subgroup");
            let target = self.pow(x, o)?;
            let mut corrected = None;
            let mut span_sorted: Vec<usize> = span.iter().copied().collect();
            span_sorted.sort_unstable();
            for &h in &span_sorted {
                if self.pow(h, o)? == target {
                    corrected = Some(self.mul(x, self.inverse(h)?)?);
                    break;
                }
            }
            let g = corrected.expect("maximal order element admits a correction");
            let mut new_span = HashSet::with_capacity(span.len() * o as usize);
            let mut gk = 0usize;
            for _ in 0..o {
                for &s in &span {
                    new_span.insert(self.mul(s, gk)?);
                }
                gk = self.mul(gk, g)?;
            }
            span = new_span;
            basis.push((g, o));
        }
        Ok(basis)
    }
}

fn is_power_of(mut n: u64, p: u64) -> bool {
    while n.is_multiple_of(p) {
        n /= p;
    }
    n == 1
}

pub fn structure_string(invariants: &[u64]) -> String {
    if invariants.is_empty() {
        return "1".to_string();
    }
    invariants
        .iter()
        .map(|d| format!("Z/{d}"))
        .collect::<Vec<_>>()
        .join("x")
}

/// An element of `Cl+`: a class of the underlying group together with an
/// orientation sign (always `+1` for positive discriminants, where the narrow
/// class already carries the orientation).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedClass {
    pub class: usize,
    pub sign: i8,
}

/// `Cl+(O_D)`: `Cl(D) x {+1, -1}` for `D < 0`, the narrow class group for
/// `D > 0`.
#[derive(Debug, Clone)]
pub struct OrientedClassGroup {
    group: ClassGroup,
}

pub fn oriented_class_group(d: &Discriminant) -> Result<OrientedClassGroup> {
    Ok(OrientedClassGroup {
        group: ClassGroup::new(d)?,
    })
}

impl OrientedClassGroup {
    pub fn from_group(group: ClassGroup) -> Self {
        OrientedClassGroup { group }
    }

    pub fn group(&self) -> &ClassGroup {
        &self.group
    }

    fn signed(&self) -> bool {
        self.group.disc.value() < 0
    }

    pub fn order(&self) -> u64 {
        if self.signed() {
            2 * self.group.order()
        } else {
            self.group.order()
        }
    }

    pub fn identity(&self) -> OrientedClass {
        OrientedClass { class: 0, sign: 1 }
    }

    pub fn elements(&self) -> Vec<OrientedClass> {
        let signs: &[i8] = if self.signed() { &[1, -1] } else { &[1] };
        signs
            .iter()
            .flat_map(|&sign| (0..self.group.reps.len()).map(move |class| OrientedClass { class, sign }))
            .collect()
    }

    pub fn class_of(&self, f: &QuadForm) -> Result<OrientedClass> {
        if self.signed() && f.a() < 0 {
            Ok(OrientedClass {
                class: self.group.id_of(&f.mirror())?,
                sign: -1,
            })
        } else {
            Ok(OrientedClass {
                class: self.group.id_of(f)?,
                sign: 1,
            })
        }
    }

    /// Canonical form of an oriented class; negative orientation mirrors it.
    pub fn form_of(&self, x: OrientedClass) -> QuadForm {
        let f = self.group.rep(x.class);
        if x.sign < 0 {
            f.mirror()
        } else {
            f
        }
    }

    pub fn mul(&self, x: OrientedClass, y: OrientedClass) -> Result<OrientedClass> {
        Ok(OrientedClass {
            class: self.group.mul(x.class, y.class)?,
            sign: x.sign * y.sign,
        })
    }

    pub fn is_square(&self, x: OrientedClass) -> Result<bool> {
        Ok(x.sign > 0 && self.group.squares()?.contains(&x.class))
    }

    /// `Z/2` factor first for `D < 0`, then the underlying invariants.
    pub fn structure_string(&self) -> String {
        let mut inv = self.group.invariants.clone();
        if self.signed() {
            inv = merge_invariants(&inv, &[2]);
        }
        structure_string(&inv)
    }
}

/// Invariant factors of the direct product of two groups given by their
/// invariant factors.
pub fn merge_invariants(x: &[u64], y: &[u64]) -> Vec<u64> {
    let mut parts: HashMap<u64, Vec<u64>> = HashMap::new();
    for &d in x.iter().chain(y) {
        for (p, e) in factor_trial(d) {
            parts.entry(p).or_default().push(p.pow(e));
        }
    }
    let rank = parts.values().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![1u64; rank];
    for v in parts.values_mut() {
        v.sort_unstable_by(|a, b| b.cmp(a));
        for (i, q) in v.iter().enumerate() {
            out[rank - 1 - i] *= q;
        }
    }
    out
}

/// `h+(D)`: `2 h(D)` for `D < 0`, the number of cycles for `D > 0`
/// non-square, `phi(k)` for `D = k^2`.
pub fn class_number_plus(d: &Discriminant, fz: &dyn Factorizer) -> Result<u64> {
    Ok(match d.kind() {
        DiscKind::NegativeDefinite => 2 * positive_definite_classes(d, true, fz).len() as u64,
        DiscKind::IndefiniteNonSquare => indefinite_cycles(d, true, fz)?.len() as u64,
        DiscKind::Split { root } => totient(&fz.factor(root as u64)),
    })
}

/// `(p, b, (b^2 - D)/4p)` with `0 < b < 2p`, `b = D mod 2` and the smaller of
/// the two admissible roots.
pub fn prime_form(d: &Discriminant, p: u64) -> Result<QuadForm> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let dv = d.value();
    let pi = p as i128;
    if dv % pi == 0 {
        return Err(Error::InvalidArgument(format!("{p} divides the discriminant {dv}")));
    }
    let b = prime_form_roots(dv, p)
        .ok_or(Error::InertPrime { p, disc: dv })?
        .0;
    QuadForm::new(pi, b, (b * b - dv) / (4 * pi))
}

/// Both `b` in `(0, 2p)` with `b = D mod 2` and `b^2 = D mod 4p`, smaller
/// first, or `None` when `p` is inert.
pub(crate) fn prime_form_roots(dv: i128, p: u64) -> Option<(i128, i128)> {
    let pi = p as i128;
    if p == 2 {
        return (dv.rem_euclid(8) == 1).then_some((1, 3));
    }
    let r = sqrt_mod_prime(dv, p)? as i128;
    let lift = |x: i128| if (x - dv).rem_euclid(2) == 0 { x } else { x + pi };
    let (b1, b2) = (lift(r), lift((pi - r) % pi));
    Some((b1.min(b2), b1.max(b2)))
}

/// Values of the genus characters `chi_q` for the odd primes `q | D`, in
/// ascending order of `q`.
pub fn genus_characters(f: &QuadForm) -> Result<Vec<i8>> {
    check_primitive(f)?;
    let primes: Vec<u64> = factor_trial(f.disc().unsigned_abs() as u64)
        .into_iter()
        .map(|(q, _)| q)
        .filter(|&q| q != 2)
        .collect();
    Ok(genus_characters_at(f, &primes))
}

pub(crate) fn genus_characters_at(f: &QuadForm, primes: &[u64]) -> Vec<i8> {
    let (a, b, c) = f.coeffs();
    primes
        .iter()
        .map(|&q| {
            let qi = q as i128;
            let n = [a, c, a + b + c, a - b + c]
                .into_iter()
                .find(|v| v % qi != 0)
                .expect("a primitive form represents a unit mod q");
            legendre(n, q)
        })
        .collect()
}

/// Membership in the principal genus for odd discriminants: every genus
/// character is `+1`, and for `D < 0` the form is positive definite.
pub fn in_principal_genus(f: &QuadForm) -> Result<bool> {
    if f.disc() < 0 && f.a() < 0 {
        return Ok(false);
    }
    Ok(genus_characters(f)?.iter().all(|&x| x == 1))
}

/// The regulator `log(eps)` of the order of discriminant `D`, where `eps > 1`
/// is the fundamental unit, and the norm of `eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Regulator {
    pub disc: i128,
    pub r: f64,
    pub fundamental_unit_norm: i8,
    /// `(t, u)` with `eps = (t + u sqrt(D))/2`, when it fits in `i128`.
    pub unit: Option<(i128, i128)>,
}

pub fn regulator(d: &Discriminant) -> Result<Regulator> {
    if !matches!(d.kind(), DiscKind::IndefiniteNonSquare) {
        return Err(Error::NotRealQuadratic(d.value()));
    }
    let dv = d.value();
    let s = d.isqrt();
    let b0 = if (s - dv).rem_euclid(2) == 0 { s } else { s - 1 };
    let start = QuadForm::new(1, b0, (b0 * b0 - dv) / 4)?;
    let root = (dv as f64).sqrt();
    let mut sum = 0.0f64;
    let mut norm = 1i8;
    let mut auto = Some(GLTransform::IDENTITY);
    let mut g = start;
    loop {
        let (a, b, c) = g.coeffs();
        if a == -1 {
            norm = -1;
        }
        sum += ((b as f64 + root) / (2.0 * c.abs() as f64)).ln();
        let (n, t) = step(&g, dv, s)?;
        auto = auto.and_then(|w| w.mul(&GLTransform::new(0, -1, 1, t)).ok());
        g = n;
        if g == start {
            break;
        }
    }
    let unit = auto.and_then(|w| unit_from_automorph(&w, dv, norm));
    let r = if norm < 0 { sum / 2.0 } else { sum };
    Ok(Regulator {
        disc: dv,
        r,
        fundamental_unit_norm: norm,
        unit,
    })
}

fn step(g: &QuadForm, dv: i128, s: i128) -> Result<(QuadForm, i128)> {
    let (_, b, c) = g.coeffs();
    let ac = c.abs();
    let nb = s - (s + b).rem_euclid(2 * ac);
    let nc = nb.checked_mul(nb).and_then(|v| v.checked_sub(dv)).or_overflow("regulator")? / (4 * c);
    Ok((QuadForm::new(c, nb, nc)?, (b + nb) / (2 * c)))
}

/// The automorph of the principal form over one full cycle has trace
/// `t+` where `eps+ = (t+ + u+ sqrt(D))/2` is the smallest totally positive
/// unit; for norm `-1`, `eps^2 = eps+`.
fn unit_from_automorph(w: &GLTransform, dv: i128, norm: i8) -> Option<(i128, i128)> {
    let tp = w.p.checked_add(w.s)?.abs();
    let (t, u2) = if norm > 0 {
        (tp, tp.checked_mul(tp)?.checked_sub(4)? / dv)
    } else {
        let t = exact_sqrt(tp - 2)?;
        (t, (tp + 2) / dv)
    };
    let u = exact_sqrt(u2)?;
    let check = t.checked_mul(t)?.checked_sub(dv.checked_mul(u)?.checked_mul(u)?)?;
    (check == 4 * norm as i128).then_some((t, u))
}

impl fmt::Display for OrientedClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}{}]", if self.sign < 0 { "-" } else { "+" }, self.class)
    }
}
