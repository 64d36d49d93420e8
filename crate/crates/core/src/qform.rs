//! Binary quadratic forms `ax^2 + bxy + cy^2` over the integers.
//!
//! Every form carries a discriminant `D = b^2 - 4ac` that fits in `i128`.
//! Reduction returns a canonical representative of the `SL2(Z)`-class together
//! with a unimodular witness, for all three kinds of discriminant.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{divisors, exact_sqrt, gcd, isqrt, xgcd};
use crate::error::{CheckedExt, Error, Result};
use crate::sieve::{Factorizer, TrialDivision};

/// Largest `|D|` accepted by [`Discriminant::new`].
pub const MAX_ABS_DISC: i128 = 1 << 80;

/// Largest `|D|` for which [`enumerate_classes`] runs.
pub const ENUMERATION_BOUND: i128 = 1 << 34;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "[i128; 3]", try_from = "[i128; 3]")]
pub struct QuadForm {
    a: i128,
    b: i128,
    c: i128,
}

impl QuadForm {
    /// Fails if `b^2 - 4ac` does not fit in `i128`.
    pub fn new(a: i128, b: i128, c: i128) -> Result<Self> {
        disc_checked(a, b, c)?;
        Ok(QuadForm { a, b, c })
    }

    /// Caller guarantees the discriminant fits.
    pub(crate) const fn raw(a: i128, b: i128, c: i128) -> Self {
        QuadForm { a, b, c }
    }

    /// The principal form of discriminant `d`: `(1, d mod 2, (d mod 2 - d)/4)`.
    pub fn principal(d: &Discriminant) -> Self {
        let b = d.value().rem_euclid(2);
        QuadForm::raw(1, b, (b - d.value()) / 4)
    }

    pub fn a(&self) -> i128 {
        self.a
    }

    pub fn b(&self) -> i128 {
        self.b
    }

    pub fn c(&self) -> i128 {
        self.c
    }

    pub fn coeffs(&self) -> (i128, i128, i128) {
        (self.a, self.b, self.c)
    }

    pub fn disc(&self) -> i128 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn discriminant(&self) -> Result<Discriminant> {
        Discriminant::new(self.disc())
    }

    pub fn content(&self) -> Result<i128> {
        match gcd(gcd(self.a, self.b), self.c) {
            0 => Err(Error::ZeroForm),
            g => Ok(g),
        }
    }

    pub fn is_primitive(&self) -> bool {
        self.content() == Ok(1)
    }

    /// `Q / g` for a common divisor `g` of the coefficients.
    pub fn divide(&self, g: i128) -> Result<Self> {
        if g == 0 || self.a % g != 0 || self.b % g != 0 || self.c % g != 0 {
            return Err(Error::InvalidArgument(format!("{g} does not divide {self}")));
        }
        Ok(QuadForm::raw(self.a / g, self.b / g, self.c / g))
    }

    /// `(-a, b, -c)`: the positive definite partner of a negative definite form.
    pub fn mirror(&self) -> Self {
        QuadForm::raw(-self.a, self.b, -self.c)
    }

    pub fn eval(&self, x: i128, y: i128) -> Result<i128> {
        let t1 = self.a.checked_mul(x).and_then(|v| v.checked_mul(x));
        let t2 = self.b.checked_mul(x).and_then(|v| v.checked_mul(y));
        let t3 = self.c.checked_mul(y).and_then(|v| v.checked_mul(y));
        t1.zip(t2)
            .and_then(|(u, v)| u.checked_add(v))
            .zip(t3)
            .and_then(|(u, v)| u.checked_add(v))
            .or_overflow("form evaluation")
    }

    /// Is this the representative [`canonical`] returns?
    pub fn is_canonical(&self) -> Result<bool> {
        Ok(canonical(self)? == *self)
    }

    /// Reducedness in the usual sense for the form's discriminant kind.
    pub fn is_reduced(&self) -> Result<bool> {
        let d = self.discriminant()?;
        Ok(match d.kind() {
            DiscKind::NegativeDefinite => {
                let p = if self.a < 0 { self.mirror() } else { *self };
                is_reduced_definite(p.a, p.b, p.c)
            }
            DiscKind::IndefiniteNonSquare => is_reduced_indefinite(self, d.isqrt()),
            DiscKind::Split { root } => self.c == 0 && self.b == root && (0..root).contains(&self.a),
        })
    }
}

impl From<QuadForm> for [i128; 3] {
    fn from(q: QuadForm) -> Self {
        [q.a, q.b, q.c]
    }
}

impl TryFrom<[i128; 3]> for QuadForm {
    type Error = Error;

    fn try_from(v: [i128; 3]) -> Result<Self> {
        QuadForm::new(v[0], v[1], v[2])
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.a, self.b, self.c)
    }
}

impl FromStr for QuadForm {
    type Err = Error;

    /// Parses `a,b,c` (surrounding parentheses and spaces are tolerated).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = t.split(',').map(str::trim).collect();
        let bad = || Error::InvalidArgument(format!("malformed form {s:?}, expected a,b,c"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let mut v = [0i128; 3];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p.parse().map_err(|_| bad())?;
        }
        QuadForm::try_from(v)
    }
}

fn disc_checked(a: i128, b: i128, c: i128) -> Result<i128> {
    let bb = b.checked_mul(b);
    let ac4 = a.checked_mul(c).and_then(|v| v.checked_mul(4));
    bb.zip(ac4)
        .and_then(|(x, y)| x.checked_sub(y))
        .or_overflow("discriminant")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiscKind {
    NegativeDefinite,
    IndefiniteNonSquare,
    Split { root: i128 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Discriminant {
    value: i128,
}

impl Discriminant {
    pub fn new(d: i128) -> Result<Self> {
        if d == 0 || !matches!(d.rem_euclid(4), 0 | 1) {
            return Err(Error::InvalidDiscriminant(d));
        }
        if d.abs() > MAX_ABS_DISC {
            return Err(Error::Capacity {
                what: "|discriminant|",
                value: d.abs(),
                bound: MAX_ABS_DISC,
            });
        }
        Ok(Discriminant { value: d })
    }

    /// The discriminant `1 - 4m` of `m t^2 + (1 - 2m) t + m`.
    pub fn for_m(m: i128) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroM);
        }
        let d = m.checked_mul(4).and_then(|v| 1i128.checked_sub(v));
        Discriminant::new(d.or_overflow("1 - 4m")?)
    }

    pub fn value(&self) -> i128 {
        self.value
    }

    pub fn kind(&self) -> DiscKind {
        if self.value < 0 {
            DiscKind::NegativeDefinite
        } else if let Some(root) = exact_sqrt(self.value) {
            DiscKind::Split { root }
        } else {
            DiscKind::IndefiniteNonSquare
        }
    }

    /// `floor(sqrt(|D|))`.
    pub fn isqrt(&self) -> i128 {
        isqrt(self.value.unsigned_abs()) as i128
    }
}

impl fmt::Display for Discriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.fmt(f)
    }
}

/// An integer 2x2 matrix `[[p, q], [r, s]]` acting by `Q(px + qy, rx + sy)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GLTransform {
    pub p: i128,
    pub q: i128,
    pub r: i128,
    pub s: i128,
}

impl GLTransform {
    pub const IDENTITY: GLTransform = GLTransform::new(1, 0, 0, 1);
    /// `[[0, -1], [1, 0]]`, sending `(a, b, c)` to `(c, -b, a)`.
    pub const SWAP: GLTransform = GLTransform::new(0, -1, 1, 0);

    pub const fn new(p: i128, q: i128, r: i128, s: i128) -> Self {
        GLTransform { p, q, r, s }
    }

    /// `[[1, t], [0, 1]]`.
    pub const fn translate(t: i128) -> Self {
        GLTransform::new(1, t, 0, 1)
    }

    pub fn det(&self) -> Result<i128> {
        let x = self.p.checked_mul(self.s);
        let y = self.q.checked_mul(self.r);
        x.zip(y)
            .and_then(|(x, y)| x.checked_sub(y))
            .or_overflow("determinant")
    }

    pub fn is_unimodular(&self) -> bool {
        self.det() == Ok(1)
    }

    /// Matrix product `self * rhs`; acting by the product equals acting by
    /// `self` first and then by `rhs`.
    pub fn mul(&self, rhs: &GLTransform) -> Result<GLTransform> {
        let dot = |x: i128, y: i128, u: i128, v: i128| {
            x.checked_mul(y)
                .zip(u.checked_mul(v))
                .and_then(|(l, r)| l.checked_add(r))
                .or_overflow("matrix product")
        };
        Ok(GLTransform::new(
            dot(self.p, rhs.p, self.q, rhs.r)?,
            dot(self.p, rhs.q, self.q, rhs.s)?,
            dot(self.r, rhs.p, self.s, rhs.r)?,
            dot(self.r, rhs.q, self.s, rhs.s)?,
        ))
    }

    /// Inverse of a determinant `+-1` matrix.
    pub fn inverse(&self) -> Result<GLTransform> {
        match self.det()? {
            1 => Ok(GLTransform::new(self.s, -self.q, -self.r, self.p)),
            -1 => Ok(GLTransform::new(-self.s, self.q, self.r, -self.p)),
            d => Err(Error::NotUnimodular(d)),
        }
    }

    pub fn max_abs_entry(&self) -> i128 {
        [self.p, self.q, self.r, self.s].iter().map(|v| v.abs()).max().unwrap_or(0)
    }
}

/// The `SL2(Z)` action. Rejects matrices of determinant other than 1.
pub fn apply(q: &QuadForm, m: &GLTransform) -> Result<QuadForm> {
    let d = m.det()?;
    if d != 1 {
        return Err(Error::NotUnimodular(d));
    }
    substitute(q, m)
}

/// `Q(px + qy, rx + sy)` for an arbitrary integer matrix.
pub fn substitute(f: &QuadForm, m: &GLTransform) -> Result<QuadForm> {
    let (a, b, c) = f.coeffs();
    let GLTransform { p, q, r, s } = *m;
    let e = || Error::Overflow("substitution");
    let mul = |x: i128, y: i128| x.checked_mul(y).ok_or_else(e);
    let add = |x: i128, y: i128| x.checked_add(y).ok_or_else(e);
    let na = add(add(mul(mul(a, p)?, p)?, mul(mul(b, p)?, r)?)?, mul(mul(c, r)?, r)?)?;
    let ps_qr = add(mul(p, s)?, mul(q, r)?)?;
    let nb = add(
        add(mul(mul(mul(a, 2)?, p)?, q)?, mul(b, ps_qr)?)?,
        mul(mul(mul(c, 2)?, r)?, s)?,
    )?;
    let nc = add(add(mul(mul(a, q)?, q)?, mul(mul(b, q)?, s)?)?, mul(mul(c, s)?, s)?)?;
    QuadForm::new(na, nb, nc)
}

/// Accumulates the witness of a reduction, or ignores it when not wanted.
trait Track {
    fn push(&mut self, m: GLTransform) -> Result<()>;
}

struct NoTrack;

impl Track for NoTrack {
    #[inline]
    fn push(&mut self, _: GLTransform) -> Result<()> {
        Ok(())
    }
}

struct Witness(GLTransform);

impl Track for Witness {
    fn push(&mut self, m: GLTransform) -> Result<()> {
        self.0 = self.0.mul(&m)?;
        Ok(())
    }
}

fn is_reduced_definite(a: i128, b: i128, c: i128) -> bool {
    b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
}

/// Reduction of a positive definite form of discriminant `d`.
fn reduce_positive<T: Track>(f: QuadForm, d: i128, w: &mut T) -> Result<QuadForm> {
    let (mut a, mut b, mut c) = f.coeffs();
    loop {
        if b <= -a || b > a {
            let t = (a - b).div_euclid(2 * a);
            b += 2 * a * t;
            c = (b * b - d) / (4 * a);
            w.push(GLTransform::translate(t))?;
        }
        if a > c {
            (a, b, c) = (c, -b, a);
            w.push(GLTransform::SWAP)?;
            continue;
        }
        break;
    }
    if a == c && b < 0 {
        b = -b;
        w.push(GLTransform::SWAP)?;
    }
    Ok(QuadForm::raw(a, b, c))
}

fn reduce_definite<T: Track>(f: &QuadForm, w: &mut T) -> Result<QuadForm> {
    let d = f.disc();
    if f.a > 0 {
        return reduce_positive(*f, d, w);
    }
    // Q = -Q'(x, -y) with Q' = mirror(Q); conjugating by diag(1, -1) carries
    // the witness for Q' over to Q.
    let mut inner = Witness(GLTransform::IDENTITY);
    let r = reduce_positive(f.mirror(), d, &mut inner)?;
    let m = inner.0;
    w.push(GLTransform::new(m.p, -m.q, -m.r, m.s))?;
    Ok(r.mirror())
}

fn is_reduced_indefinite(f: &QuadForm, s: i128) -> bool {
    let a2 = 2 * f.a.abs();
    f.b > 0 && f.b <= s && a2 - f.b <= s && a2 + f.b > s
}

/// One reduction step `(a, b, c) -> (c, b', c')`, via `[[0, -1], [1, t]]`.
fn rho(f: &QuadForm, d: i128, s: i128) -> Result<(QuadForm, i128)> {
    let (_, b, c) = f.coeffs();
    let ac = c.abs();
    let m = 2 * ac;
    let nb = if ac <= s {
        s - (s + b).rem_euclid(m)
    } else {
        let r = (-b).rem_euclid(m);
        if r > ac {
            r - m
        } else {
            r
        }
    };
    let num = nb.checked_mul(nb).and_then(|v| v.checked_sub(d)).or_overflow("reduction step")?;
    let nc = num / (4 * c);
    let t = (b + nb) / (2 * c);
    Ok((QuadForm::raw(c, nb, nc), t))
}

fn rho_matrix(t: i128) -> GLTransform {
    GLTransform::new(0, -1, 1, t)
}

fn to_cycle<T: Track>(f: &QuadForm, w: &mut T) -> Result<QuadForm> {
    let d = f.disc();
    let s = isqrt(d as u128) as i128;
    let mut g = *f;
    while !is_reduced_indefinite(&g, s) {
        if g.c == 0 {
            return Err(Error::SquareDiscriminant(d));
        }
        let (n, t) = rho(&g, d, s)?;
        w.push(rho_matrix(t))?;
        g = n;
    }
    Ok(g)
}

/// The first reduced form reached by iterated reduction steps from an
/// indefinite form of non-square discriminant.
pub fn reduce_to_cycle(f: &QuadForm) -> Result<(QuadForm, GLTransform)> {
    indefinite_guard(f)?;
    let mut w = Witness(GLTransform::IDENTITY);
    let r = to_cycle(f, &mut w)?;
    Ok((r, w.0))
}

fn indefinite_guard(f: &QuadForm) -> Result<()> {
    match f.discriminant()?.kind() {
        DiscKind::IndefiniteNonSquare => Ok(()),
        _ => Err(Error::NotRealQuadratic(f.disc())),
    }
}

/// The reduced forms in the cycle of the reduced form `f`, starting at `f`,
/// each with the `t` of the step leading to the next one.
fn cycle_steps(f: &QuadForm) -> Result<Vec<(QuadForm, i128)>> {
    let d = f.disc();
    let s = isqrt(d as u128) as i128;
    let mut out = Vec::new();
    let mut g = *f;
    loop {
        let (n, t) = rho(&g, d, s)?;
        out.push((g, t));
        if n == *f {
            return Ok(out);
        }
        g = n;
    }
}

/// The reduction cycle containing the reduced indefinite form `f`.
pub fn cycle(f: &QuadForm) -> Result<Vec<QuadForm>> {
    indefinite_guard(f)?;
    let s = isqrt(f.disc() as u128) as i128;
    if !is_reduced_indefinite(f, s) {
        return Err(Error::InvalidArgument(format!("{f} is not reduced")));
    }
    Ok(cycle_steps(f)?.into_iter().map(|(g, _)| g).collect())
}

/// Ordering used to pick the canonical member of a cycle: positive leading
/// coefficient first, then `|a|`, `b`, `c`.
fn cycle_key(f: &QuadForm) -> (bool, i128, i128, i128) {
    (f.a < 0, f.a.abs(), f.b, f.c)
}

fn canonical_indefinite(f: &QuadForm) -> Result<QuadForm> {
    let first = to_cycle(f, &mut NoTrack)?;
    let steps = cycle_steps(&first)?;
    Ok(steps
        .into_iter()
        .map(|(g, _)| g)
        .min_by_key(cycle_key)
        .expect("cycles are nonempty"))
}

/// A primitive vector `(x, y)` with `Q(x, y) = 0`, one per isotropic line.
fn isotropic_vectors(f: &QuadForm, k: i128) -> [(i128, i128); 2] {
    let (a, b, c) = f.coeffs();
    let prim = |x: i128, y: i128| {
        let g = gcd(x, y);
        (x / g, y / g)
    };
    if a == 0 {
        [(1, 0), prim(c, -b)]
    } else {
        [prim(k - b, 2 * a), prim(-k - b, 2 * a)]
    }
}

fn reduce_split<T: Track>(f: &QuadForm, k: i128, w: &mut T) -> Result<QuadForm> {
    for (x, y) in isotropic_vectors(f, k) {
        // Complete (x, y) to a unimodular matrix with it as second column.
        let (_, u, v) = xgcd(y, x);
        let m = GLTransform::new(u, x, -v, y);
        let g = substitute(f, &m)?;
        if g.c != 0 || g.b != k {
            continue;
        }
        let t = -g.a.div_euclid(k);
        w.push(m)?;
        w.push(GLTransform::new(1, 0, t, 1))?;
        return Ok(QuadForm::raw(g.a + k * t, k, 0));
    }
    unreachable!("one isotropic line of {f} yields middle coefficient +{k}")
}

/// A reduced representative of the `SL2(Z)`-class of `f` and a determinant-1
/// witness `M` with `apply(f, M)` equal to it. Definite and square
/// discriminants get the canonical representative; for indefinite forms this
/// is the first reduced form reached, a member of the reduction cycle. Use
/// [`canonical`] to compare classes.
pub fn reduce(f: &QuadForm) -> Result<(QuadForm, GLTransform)> {
    let d = f.discriminant()?;
    let mut w = Witness(GLTransform::IDENTITY);
    let r = match d.kind() {
        DiscKind::NegativeDefinite => reduce_definite(f, &mut w)?,
        DiscKind::IndefiniteNonSquare => to_cycle(f, &mut w)?,
        DiscKind::Split { root } => reduce_split(f, root, &mut w)?,
    };
    Ok((r, w.0))
}

/// The canonical representative of the class of `f`: the reduced form for
/// definite and square discriminants, and for indefinite ones the least
/// cycle member under (a < 0, |a|, b, c).
pub fn canonical(f: &QuadForm) -> Result<QuadForm> {
    let d = f.discriminant()?;
    match d.kind() {
        DiscKind::NegativeDefinite => reduce_definite(f, &mut NoTrack),
        DiscKind::IndefiniteNonSquare => canonical_indefinite(f),
        DiscKind::Split { root } => reduce_split(f, root, &mut NoTrack),
    }
}

/// Whether two forms of equal discriminant are `SL2(Z)`-equivalent. Decided
/// on canonical representatives, so it never needs a witness.
pub fn equivalent(q1: &QuadForm, q2: &QuadForm) -> Result<bool> {
    if q1.disc() != q2.disc() {
        return Err(Error::DiscriminantMismatch(q1.disc(), q2.disc()));
    }
    Ok(canonical(q1)? == canonical(q2)?)
}

/// `Some(M)` with `apply(q1, M) == q2` when the forms are equivalent. For
/// indefinite forms with a large regulator the witness may not fit in
/// `i128`, which is reported as an overflow.
pub fn equivalence_witness(q1: &QuadForm, q2: &QuadForm) -> Result<Option<GLTransform>> {
    if q1.disc() != q2.disc() {
        return Err(Error::DiscriminantMismatch(q1.disc(), q2.disc()));
    }
    let (r1, w1) = reduce(q1)?;
    let (r2, w2) = reduce(q2)?;
    let mut path = Witness(w1);
    if let DiscKind::IndefiniteNonSquare = q1.discriminant()?.kind() {
        let steps = cycle_steps(&r1)?;
        let Some(pos) = steps.iter().position(|(g, _)| *g == r2) else {
            return Ok(None);
        };
        for &(_, t) in &steps[..pos] {
            path.push(rho_matrix(t))?;
        }
    } else if r1 != r2 {
        return Ok(None);
    }
    Ok(Some(path.0.mul(&w2.inverse()?)?))
}

/// One canonical representative per `SL2(Z)`-class of discriminant `d`,
/// restricted to primitive classes when asked.
pub fn enumerate_classes(d: &Discriminant, primitive_only: bool) -> Result<Vec<QuadForm>> {
    enumerate_classes_with(d, primitive_only, &TrialDivision)
}

pub fn enumerate_classes_with(
    d: &Discriminant,
    primitive_only: bool,
    fz: &dyn Factorizer,
) -> Result<Vec<QuadForm>> {
    if d.value().abs() > ENUMERATION_BOUND {
        return Err(Error::Capacity {
            what: "|discriminant| for enumeration",
            value: d.value().abs(),
            bound: ENUMERATION_BOUND,
        });
    }
    Ok(match d.kind() {
        DiscKind::NegativeDefinite => {
            let pos = positive_definite_classes(d, primitive_only, fz);
            let neg: Vec<QuadForm> = pos.iter().map(QuadForm::mirror).collect();
            pos.into_iter().chain(neg).collect()
        }
        DiscKind::IndefiniteNonSquare => indefinite_cycles(d, primitive_only, fz)?
            .into_iter()
            .map(|c| c[0])
            .collect(),
        DiscKind::Split { root } => (0..root)
            .filter(|&a| !primitive_only || gcd(a, root) == 1)
            .map(|a| QuadForm::raw(a, root, 0))
            .collect(),
    })
}

/// Reduced positive definite forms of negative discriminant `d`, sorted by
/// `(a, |b|, b < 0)`.
pub fn positive_definite_classes(
    d: &Discriminant,
    primitive_only: bool,
    fz: &dyn Factorizer,
) -> Vec<QuadForm> {
    let dv = d.value();
    debug_assert!(dv < 0);
    let bmax = isqrt((dv.unsigned_abs()) / 3) as i128;
    let mut out = Vec::new();
    let mut b = dv.rem_euclid(2);
    while b <= bmax {
        let n = (b * b - dv) / 4;
        for a in divisors(&fz.factor(n as u64)) {
            let a = a as i128;
            if a < b.max(1) || a * a > n {
                continue;
            }
            let c = n / a;
            if primitive_only && gcd(gcd(a, b), c) != 1 {
                continue;
            }
            out.push(QuadForm::raw(a, b, c));
            if b > 0 && b < a && a < c {
                out.push(QuadForm::raw(a, -b, c));
            }
        }
        b += 2;
    }
    out.sort_by_key(|f| (f.a, f.b.abs(), f.b < 0));
    out
}

/// Reduced forms of positive non-square discriminant `d`, grouped into
/// cycles. Each cycle starts at its canonical member; cycles are sorted by
/// that member.
pub fn indefinite_cycles(
    d: &Discriminant,
    primitive_only: bool,
    fz: &dyn Factorizer,
) -> Result<Vec<Vec<QuadForm>>> {
    let dv = d.value();
    let s = d.isqrt();
    let mut reduced = Vec::new();
    let mut b = if dv % 2 == 0 { 2 } else { 1 };
    while b <= s {
        let n = (dv - b * b) / 4;
        for a in divisors(&fz.factor(n as u64)) {
            let a = a as i128;
            if 2 * a + b <= s || 2 * a - b > s {
                continue;
            }
            if primitive_only && gcd(gcd(a, b), n / a) != 1 {
                continue;
            }
            reduced.push(QuadForm::raw(a, b, -n / a));
            reduced.push(QuadForm::raw(-a, b, n / a));
        }
        b += 2;
    }
    let mut seen: HashMap<QuadForm, ()> = HashMap::with_capacity(reduced.len());
    let mut cycles = Vec::new();
    for f in reduced {
        if seen.contains_key(&f) {
            continue;
        }
        let mut cyc = cycle_steps(&f)?.into_iter().map(|(g, _)| g).collect::<Vec<_>>();
        for g in &cyc {
            seen.insert(*g, ());
        }
        let best = (0..cyc.len()).min_by_key(|&i| cycle_key(&cyc[i])).unwrap_or(0);
        cyc.rotate_left(best);
        cycles.push(cyc);
    }
    cycles.sort_by_key(|c| cycle_key(&c[0]));
    Ok(cycles)
}
