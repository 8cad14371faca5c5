//! Exact reals over a formal parameter basis.
//!
//! A [`ParamScalar`] is a rational vector `(q0, q1, ..)` standing for
//! `q0 * 1 + q1 * a1 + ..` where `a1, a2, ..` are the non-constant entries of a
//! [`ParamBasis`]. The basis entries are assumed Q-linearly independent
//! together with 1, so equality is decided on coordinates; strict order is
//! decided by refining rational enclosures of the difference.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int<T: Into<BigInt>>(n: T) -> Rational {
    Rational::from_integer(n.into())
}

/// `2^-bits` as an exact rational.
pub fn dyadic_width(bits: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << bits)
}

/// A closed rational interval `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval bounds out of order");
        Interval { lo, hi }
    }

    pub fn point(q: Rational) -> Self {
        Interval {
            lo: q.clone(),
            hi: q,
        }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / rat_int(2)
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    fn scaled(&self, q: &Rational) -> Interval {
        let a = &self.lo * q;
        let b = &self.hi * q;
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    fn plus(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Source of rational enclosures for an externally supplied parameter.
///
/// Asked for width `w`, an oracle must return an interval of width at most `w`
/// containing the parameter. Implementations must be reentrant.
pub trait EnclosureOracle: Send + Sync + fmt::Debug {
    fn enclose(&self, width: &Rational) -> Result<Interval>;
}

#[derive(Clone, Debug)]
pub enum ParamKind {
    /// The constant 1; always entry 0.
    Unit,
    SqrtInteger(u64),
    External {
        id: String,
        oracle: Arc<dyn EnclosureOracle>,
    },
}

#[derive(Clone, Debug)]
pub struct ParamEntry {
    pub name: String,
    pub kind: ParamKind,
}

/// Registry used to resolve `external-oracle` entries when reading basis files.
pub type OracleRegistry = HashMap<String, Arc<dyn EnclosureOracle>>;

/// Ordered list of formal parameters; entry 0 is the constant 1.
#[derive(Clone, Debug)]
pub struct ParamBasis {
    entries: Vec<ParamEntry>,
}

impl PartialEq for ParamBasis {
    fn eq(&self, other: &Self) -> bool {
        self.to_text() == other.to_text()
    }
}

impl Eq for ParamBasis {}

fn square_free_part(mut k: u64) -> u64 {
    let mut out = 1u64;
    let mut p = 2u64;
    while p * p <= k {
        let mut e = 0;
        while k.is_multiple_of(p) {
            k /= p;
            e += 1;
        }
        if e % 2 == 1 {
            out *= p;
        }
        p += 1;
    }
    out * k
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Default for ParamBasis {
    fn default() -> Self {
        Self::unit()
    }
}

impl ParamBasis {
    /// The basis containing only the constant 1 (purely rational scalars).
    pub fn unit() -> Self {
        ParamBasis {
            entries: vec![ParamEntry {
                name: "one".to_string(),
                kind: ParamKind::Unit,
            }],
        }
    }

    /// `{1, sqrt p1, sqrt p2, ..}` with entries named `sqrt<p>`.
    pub fn sqrt_primes(primes: &[u64]) -> Result<Self> {
        let mut b = Self::unit();
        for &p in primes {
            b.push_sqrt(&format!("sqrt{p}"), p)?;
        }
        Ok(b)
    }

    fn check_new_name(&self, name: &str) -> Result<()> {
        if !valid_name(name) {
            return Err(Error::InvalidBasis(format!("invalid entry name `{name}`")));
        }
        if self.index_of(name).is_some() {
            return Err(Error::InvalidBasis(format!(
                "duplicate entry name `{name}`"
            )));
        }
        Ok(())
    }

    pub fn push_sqrt(&mut self, name: &str, k: u64) -> Result<usize> {
        self.check_new_name(name)?;
        if k == 0 || k.sqrt() * k.sqrt() == k {
            return Err(Error::InvalidBasis(format!(
                "sqrt({k}) is rational and cannot be a formal parameter"
            )));
        }
        let sf = square_free_part(k);
        for e in &self.entries {
            if let ParamKind::SqrtInteger(other) = e.kind {
                if square_free_part(other) == sf {
                    return Err(Error::InvalidBasis(format!(
                        "sqrt({k}) and sqrt({other}) are rationally dependent"
                    )));
                }
            }
        }
        self.entries.push(ParamEntry {
            name: name.to_string(),
            kind: ParamKind::SqrtInteger(k),
        });
        Ok(self.entries.len() - 1)
    }

    /// Adds a parameter backed by a caller-supplied oracle. Independence from
    /// the other entries is the caller's responsibility.
    pub fn push_external(
        &mut self,
        name: &str,
        id: &str,
        oracle: Arc<dyn EnclosureOracle>,
    ) -> Result<usize> {
        self.check_new_name(name)?;
        self.entries.push(ParamEntry {
            name: name.to_string(),
            kind: ParamKind::External {
                id: id.to_string(),
                oracle,
            },
        });
        Ok(self.entries.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn entries(&self) -> &[ParamEntry] {
        &self.entries
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.entries[i].name
    }

    /// The scalar equal to basis entry `i`.
    pub fn param(&self, i: usize) -> ParamScalar {
        ParamScalar::unit_vector(i)
    }

    fn check_scalar(&self, s: &ParamScalar) -> Result<()> {
        if s.coords.len() > self.entries.len() {
            return Err(Error::BasisMismatch(format!(
                "scalar has {} coordinates, basis has {} entries",
                s.coords.len(),
                self.entries.len()
            )));
        }
        Ok(())
    }

    /// Enclosure of basis entry `i` with width at most `width`.
    pub fn enclose_entry(&self, i: usize, width: &Rational) -> Result<Interval> {
        match &self.entries[i].kind {
            ParamKind::Unit => Ok(Interval::point(Rational::one())),
            ParamKind::SqrtInteger(k) => Ok(sqrt_enclosure(*k, width)),
            ParamKind::External { id, oracle } => {
                let iv = oracle.enclose(width)?;
                if iv.width() > *width {
                    return Err(Error::Oracle(format!(
                        "oracle `{id}` returned width {} above requested {width}",
                        iv.width()
                    )));
                }
                Ok(iv)
            }
        }
    }

    /// Interval of width at most `width` containing the value of `s`.
    pub fn eval(&self, s: &ParamScalar, width: &Rational) -> Result<Interval> {
        if !width.is_positive() {
            return Err(Error::InvalidConfig(
                "enclosure width must be positive".into(),
            ));
        }
        self.check_scalar(s)?;
        let constant = s.coord(0);
        let terms: Vec<(usize, &Rational)> = s
            .coords
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, q)| !q.is_zero())
            .collect();
        let mut acc = Interval::point(constant);
        if terms.is_empty() {
            return Ok(acc);
        }
        let k = rat_int(terms.len() as u64);
        for (i, q) in terms {
            let w = width / (&k * q.abs());
            let iv = self.enclose_entry(i, &w)?;
            acc = acc.plus(&iv.scaled(q));
        }
        Ok(acc)
    }

    /// Sign of `s`, refined until the enclosure excludes zero.
    pub fn sign(&self, s: &ParamScalar, max_width: &Rational) -> Result<Ordering> {
        if let Some(q) = s.as_rational() {
            return Ok(q.cmp(&Rational::zero()));
        }
        self.check_scalar(s)?;
        let mut width = dyadic_width(16);
        loop {
            let last = width <= *max_width;
            let w = if last {
                max_width.clone()
            } else {
                width.clone()
            };
            let iv = self.eval(s, &w)?;
            if iv.lo.is_positive() {
                return Ok(Ordering::Greater);
            }
            if iv.hi.is_negative() {
                return Ok(Ordering::Less);
            }
            if last {
                return Err(Error::Indeterminate(format!(
                    "sign of {} not separated at width {}",
                    s, max_width
                )));
            }
            width = &width * &width;
        }
    }

    /// Compares `s` and `t`: `Equal` exactly when the coordinates agree.
    pub fn compare(
        &self,
        s: &ParamScalar,
        t: &ParamScalar,
        max_width: &Rational,
    ) -> Result<Ordering> {
        self.check_scalar(s)?;
        self.check_scalar(t)?;
        self.sign(&(s - t), max_width)
    }

    pub fn less(&self, s: &ParamScalar, t: &ParamScalar, max_width: &Rational) -> Result<bool> {
        Ok(self.compare(s, t, max_width)? == Ordering::Less)
    }

    /// `floor(s)`, certified.
    pub fn floor(&self, s: &ParamScalar, max_width: &Rational) -> Result<BigInt> {
        if let Some(q) = s.as_rational() {
            return Ok(q.floor().to_integer());
        }
        let mut width = Rational::one();
        loop {
            let last = width <= *max_width;
            let w = if last {
                max_width.clone()
            } else {
                width.clone()
            };
            let iv = self.eval(s, &w)?;
            // s is irrational, so it lies strictly inside the enclosure.
            let fl = iv.lo.floor().to_integer();
            if iv.hi.ceil().to_integer() - &fl == BigInt::one() {
                return Ok(fl);
            }
            if last {
                return Err(Error::Indeterminate(format!("floor of {s} not separated")));
            }
            width = &width * dyadic_width(16);
        }
    }

    /// Rational `l` with `0 < l <= s` and `l >= (1 - 1/64) s`; fails if `s <= 0`.
    pub fn positive_lower_bound(&self, s: &ParamScalar, max_width: &Rational) -> Result<Rational> {
        if self.sign(s, max_width)? != Ordering::Greater {
            return Err(Error::InconsistentMeasure(format!("{s} is not positive")));
        }
        if let Some(q) = s.as_rational() {
            return Ok(q);
        }
        let mut width = dyadic_width(16);
        loop {
            let iv = self.eval(s, &width)?;
            if iv.lo.is_positive() && iv.width() * rat_int(64) <= iv.lo {
                return Ok(iv.lo);
            }
            if width <= *max_width {
                return Err(Error::Indeterminate(format!("lower bound of {s}")));
            }
            width = &width * &width;
        }
    }

    /// The rational `q` of smallest denominator, then smallest absolute
    /// numerator, with `lo < s + q < hi` (or `<= hi` when `hi_closed`).
    pub fn rational_shift_into(
        &self,
        s: &ParamScalar,
        lo: &Rational,
        hi: &Rational,
        hi_closed: bool,
        max_width: &Rational,
    ) -> Result<Rational> {
        if lo >= hi {
            return Err(Error::InvalidConfig(format!("empty window ({lo}, {hi})")));
        }
        let mut d = BigInt::one();
        loop {
            let dq = Rational::from_integer(d.clone());
            let low = (&ParamScalar::rational(lo.clone()) - s).scale(&dq);
            let high = (&ParamScalar::rational(hi.clone()) - s).scale(&dq);
            let p_min: BigInt = self.floor(&low, max_width)? + 1;
            let p_max = if hi_closed {
                self.floor(&high, max_width)?
            } else {
                -self.floor(&-&high, max_width)? - 1
            };
            if p_min <= p_max {
                let p = if p_min.is_positive() {
                    p_min
                } else if p_max.is_negative() {
                    p_max
                } else {
                    BigInt::zero()
                };
                return Ok(Rational::new(p, d));
            }
            d += 1;
        }
    }

    /// Parses a linear expression such as `2*sqrt2 + 1/3` or `sqrt3/2 - 1`.
    pub fn parse_expr(&self, text: &str) -> Result<ParamScalar> {
        let err = |detail: &str| Error::ParseExpr {
            expr: text.to_string(),
            detail: detail.to_string(),
        };
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err("empty expression"));
        }
        let mut terms = Vec::new();
        let mut current = String::new();
        for (idx, c) in compact.char_indices() {
            let prev = compact[..idx].chars().last();
            if (c == '+' || c == '-') && idx > 0 && !matches!(prev, Some('*') | Some('/')) {
                terms.push(std::mem::take(&mut current));
            }
            current.push(c);
        }
        terms.push(current);

        let mut acc = ParamScalar::zero();
        for term in terms {
            let (sign, body) = match term.strip_prefix('-') {
                Some(rest) => (-Rational::one(), rest),
                None => (Rational::one(), term.strip_prefix('+').unwrap_or(&term)),
            };
            if body.is_empty() {
                return Err(err("dangling sign"));
            }
            let mut coeff = sign;
            let mut param: Option<usize> = None;
            for factor in body.split('*') {
                let mut parts = factor.split('/');
                let head = parts.next().unwrap_or_default();
                let (head_sign, head) = match head.strip_prefix('-') {
                    Some(h) => (-Rational::one(), h),
                    None => (Rational::one(), head),
                };
                coeff *= head_sign;
                if let Ok(n) = head.parse::<BigInt>() {
                    coeff *= Rational::from_integer(n);
                } else if let Some(i) = self.index_of(head) {
                    if param.is_some() {
                        return Err(err("product of two parameters is not linear"));
                    }
                    param = Some(i);
                } else {
                    return Err(err(&format!("unknown parameter `{head}`")));
                }
                for d in parts {
                    let d: BigInt = d.parse().map_err(|_| err("bad denominator"))?;
                    if d.is_zero() {
                        return Err(err("division by zero"));
                    }
                    coeff /= Rational::from_integer(d);
                }
            }
            acc = &acc + &ParamScalar::unit_vector(param.unwrap_or(0)).scale(&coeff);
        }
        Ok(acc)
    }

    /// Renders a scalar as an expression over entry names.
    pub fn format_expr(&self, s: &ParamScalar) -> String {
        let mut parts = Vec::new();
        for (i, q) in s.coords.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let name = self.entries.get(i).map(|e| e.name.as_str()).unwrap_or("?");
            if i == 0 {
                parts.push(q.to_string());
            } else if q.is_one() {
                parts.push(name.to_string());
            } else {
                parts.push(format!("{q}*{name}"));
            }
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join("+").replace("+-", "-")
        }
    }

    /// Reads the textual basis format: one `name kind args` entry per line.
    pub fn parse(text: &str, registry: Option<&OracleRegistry>) -> Result<Self> {
        let mut basis: Option<ParamBasis> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |m: &str| Error::InvalidBasis(format!("line {}: {m}", lineno + 1));
            if fields.len() != 3 {
                return Err(bad("expected `name kind args`"));
            }
            let (name, kind, arg) = (fields[0], fields[1], fields[2]);
            match basis.as_mut() {
                None => {
                    if kind != "const-rational" || arg != "1" {
                        return Err(bad("entry 0 must be `<name> const-rational 1`"));
                    }
                    if !valid_name(name) {
                        return Err(bad("invalid entry name"));
                    }
                    basis = Some(ParamBasis {
                        entries: vec![ParamEntry {
                            name: name.to_string(),
                            kind: ParamKind::Unit,
                        }],
                    });
                }
                Some(b) => match kind {
                    "sqrt-integer" => {
                        let k: u64 = arg.parse().map_err(|_| bad("sqrt-integer needs a u64"))?;
                        b.push_sqrt(name, k).map_err(|e| bad(&e.to_string()))?;
                    }
                    "external-oracle" => {
                        let oracle = registry
                            .and_then(|r| r.get(arg))
                            .ok_or_else(|| bad(&format!("no oracle registered for `{arg}`")))?;
                        b.push_external(name, arg, oracle.clone())?;
                    }
                    "const-rational" => {
                        return Err(bad("only entry 0 may be a rational constant"));
                    }
                    other => return Err(bad(&format!("unknown kind `{other}`"))),
                },
            }
        }
        basis.ok_or_else(|| Error::InvalidBasis("empty basis file".into()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let line = match &e.kind {
                ParamKind::Unit => format!("{} const-rational 1", e.name),
                ParamKind::SqrtInteger(k) => format!("{} sqrt-integer {k}", e.name),
                ParamKind::External { id, .. } => format!("{} external-oracle {id}", e.name),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

/// Dyadic enclosure `[s/2^t, (s+1)/2^t]` of `sqrt(k)` with `2^-t <= width`.
fn sqrt_enclosure(k: u64, width: &Rational) -> Interval {
    let mut t: u64 = (width.denom().bits()).saturating_sub(width.numer().bits());
    while Rational::new(BigInt::one(), BigInt::one() << t) > *width {
        t += 1;
    }
    let scaled = BigUint::from(k) << (2 * t);
    let s = scaled.sqrt();
    let denom = BigInt::one() << t;
    let s = BigInt::from(s);
    if &s * &s == BigInt::from(BigUint::from(k) << (2 * t)) {
        return Interval::point(Rational::new(s, denom));
    }
    Interval {
        lo: Rational::new(s.clone(), denom.clone()),
        hi: Rational::new(s + 1, denom),
    }
}

/// Exact real `q0 + q1 a1 + ..` over a [`ParamBasis`]; trailing zero
/// coordinates are trimmed so structural equality is formal equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ParamScalar {
    coords: Vec<Rational>,
}

impl ParamScalar {
    pub fn zero() -> Self {
        ParamScalar { coords: Vec::new() }
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    pub fn rational(q: Rational) -> Self {
        Self::from_coords(vec![q])
    }

    pub fn integer<T: Into<BigInt>>(n: T) -> Self {
        Self::rational(rat_int(n))
    }

    pub fn unit_vector(i: usize) -> Self {
        let mut coords = vec![Rational::zero(); i + 1];
        coords[i] = Rational::one();
        ParamScalar { coords }
    }

    pub fn from_coords(mut coords: Vec<Rational>) -> Self {
        while coords.last().is_some_and(|q| q.is_zero()) {
            coords.pop();
        }
        ParamScalar { coords }
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> Rational {
        self.coords.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    /// Coordinates padded with zeros to `len` entries.
    pub fn padded(&self, len: usize) -> Vec<Rational> {
        let mut v = self.coords.clone();
        v.resize(len.max(v.len()), Rational::zero());
        v
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self.coords.len() {
            0 => Some(Rational::zero()),
            1 => Some(self.coords[0].clone()),
            _ => None,
        }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        Self::from_coords(self.coords.iter().map(|c| c * q).collect())
    }

    /// Rational linear combination `sum q_i s_i`; the empty sum is zero.
    pub fn combine<'a, I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (&'a Rational, &'a ParamScalar)>,
    {
        let mut coords: Vec<Rational> = Vec::new();
        for (q, s) in terms {
            if coords.len() < s.coords.len() {
                coords.resize(s.coords.len(), Rational::zero());
            }
            for (c, x) in coords.iter_mut().zip(&s.coords) {
                *c += q * x;
            }
        }
        Self::from_coords(coords)
    }

    /// Comma-separated coordinates padded to `len`, as written in GSQ files.
    pub fn coords_text(&self, len: usize) -> String {
        self.padded(len)
            .iter()
            .map(|q| q.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse_coords(text: &str) -> Option<Self> {
        let coords = text
            .split(',')
            .map(|t| t.trim().parse::<Rational>().ok())
            .collect::<Option<Vec<_>>>()?;
        Some(Self::from_coords(coords))
    }

    /// Rough floating value for human-readable reports only.
    pub fn approx(&self, basis: &ParamBasis) -> f64 {
        basis
            .eval(self, &dyadic_width(60))
            .ok()
            .and_then(|iv| iv.lo.to_f64())
            .unwrap_or(f64::NAN)
    }
}

impl fmt::Display for ParamScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.coords_text(1))
    }
}

impl Add for &ParamScalar {
    type Output = ParamScalar;
    fn add(self, rhs: &ParamScalar) -> ParamScalar {
        let one = Rational::one();
        ParamScalar::combine([(&one, self), (&one, rhs)])
    }
}

impl Sub for &ParamScalar {
    type Output = ParamScalar;
    fn sub(self, rhs: &ParamScalar) -> ParamScalar {
        let one = Rational::one();
        let minus = -Rational::one();
        ParamScalar::combine([(&one, self), (&minus, rhs)])
    }
}

impl Neg for &ParamScalar {
    type Output = ParamScalar;
    fn neg(self) -> ParamScalar {
        self.scale(&-Rational::one())
    }
}

impl Mul<&Rational> for &ParamScalar {
    type Output = ParamScalar;
    fn mul(self, rhs: &Rational) -> ParamScalar {
        self.scale(rhs)
    }
}

/// Default comparison precision, `2^-bits` with `bits` from
/// `SADIC_PRECISION_BITS` (512 when unset or unparsable).
pub fn default_precision() -> Rational {
    let bits = std::env::var("SADIC_PRECISION_BITS")
        .ok()
        .and_then(|v| v.parse::<u32>().ok())
        .unwrap_or(512);
    dyadic_width(bits)
}

/// Names appearing in a basis, as a set (used for duplicate checks by callers).
pub fn basis_names(basis: &ParamBasis) -> HashSet<&str> {
    basis.entries.iter().map(|e| e.name.as_str()).collect()
}

/// `n mod m` for possibly negative `n`, as a nonnegative integer.
pub fn modulo(n: &BigInt, m: &BigInt) -> BigInt {
    n.mod_floor(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis() -> ParamBasis {
        ParamBasis::sqrt_primes(&[2, 3]).unwrap()
    }

    fn ps(c: &[(i64, i64)]) -> ParamScalar {
        ParamScalar::from_coords(c.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    #[test]
    fn combine_coordinatewise() {
        let s = ps(&[(1, 1), (0, 1)]);
        let t = ps(&[(0, 1), (1, 1)]);
        let r = ParamScalar::combine([(&rat(1, 2), &s), (&rat(1, 3), &t)]);
        assert_eq!(r, ps(&[(1, 2), (1, 3)]));
        assert!(ParamScalar::combine(std::iter::empty()).is_zero());
        let u = ps(&[(3, 7), (-2, 5)]);
        assert!(ParamScalar::combine([(&rat(1, 1), &u), (&rat(-1, 1), &u)]).is_zero());
    }

    #[test]
    fn compare_examples() {
        let b = basis();
        let p = default_precision();
        let half = ps(&[(1, 2)]);
        let half_sqrt2 = ps(&[(0, 1), (1, 2)]);
        assert_eq!(b.compare(&half, &half_sqrt2, &p).unwrap(), Ordering::Less);
        assert_eq!(b.compare(&half, &half, &p).unwrap(), Ordering::Equal);
        let sqrt2 = ps(&[(0, 1), (1, 1)]);
        assert_eq!(
            b.compare(&sqrt2, &ParamScalar::zero(), &p).unwrap(),
            Ordering::Greater
        );
    }

    #[test]
    fn compare_reports_indeterminate() {
        let b = basis();
        // sqrt2 - 1414213/1000000 is about 5.6e-7; a coarse precision cannot separate it.
        let s = ps(&[(-1414213, 1000000), (1, 1)]);
        let err = b.sign(&s, &rat(1, 1000)).unwrap_err();
        assert!(err.is_indeterminate());
        assert_eq!(b.sign(&s, &default_precision()).unwrap(), Ordering::Greater);
    }

    #[test]
    fn eval_examples() {
        let b = basis();
        let c = ps(&[(3, 4)]);
        assert_eq!(b.eval(&c, &rat(1, 10)).unwrap(), Interval::point(rat(3, 4)));
        assert_eq!(
            b.eval(&ParamScalar::zero(), &rat(1, 10)).unwrap(),
            Interval::point(rat(0, 1))
        );
        let iv = b.eval(&ps(&[(0, 1), (1, 1)]), &rat(1, 100)).unwrap();
        assert!(iv.width() <= rat(1, 100));
        // Independent check: lo^2 <= 2 <= hi^2.
        assert!(&iv.lo * &iv.lo <= rat(2, 1));
        assert!(&iv.hi * &iv.hi >= rat(2, 1));
    }

    #[test]
    fn eval_rejects_foreign_scalar() {
        let b = ParamBasis::unit();
        assert!(matches!(
            b.eval(&ps(&[(0, 1), (1, 1)]), &rat(1, 2)),
            Err(Error::BasisMismatch(_))
        ));
    }

    #[test]
    fn floor_of_irrationals() {
        let b = basis();
        let p = default_precision();
        assert_eq!(
            b.floor(&ps(&[(0, 1), (100, 1)]), &p).unwrap(),
            BigInt::from(141)
        );
        assert_eq!(
            b.floor(&ps(&[(0, 1), (-1, 1)]), &p).unwrap(),
            BigInt::from(-2)
        );
        assert_eq!(b.floor(&ps(&[(7, 2)]), &p).unwrap(), BigInt::from(3));
    }

    #[test]
    fn expressions_round_trip() {
        let b = basis();
        let s = b.parse_expr("2*sqrt2 + 1/3").unwrap();
        assert_eq!(s, ps(&[(1, 3), (2, 1)]));
        assert_eq!(
            b.parse_expr("sqrt3/2 - 1").unwrap(),
            ps(&[(-1, 1), (0, 1), (1, 2)])
        );
        assert_eq!(b.parse_expr("-sqrt2").unwrap(), ps(&[(0, 1), (-1, 1)]));
        assert_eq!(b.parse_expr(&b.format_expr(&s)).unwrap(), s);
        assert!(b.parse_expr("sqrt7").is_err());
        assert!(b.parse_expr("sqrt2*sqrt3").is_err());
    }

    #[test]
    fn basis_text_round_trip() {
        let b = basis();
        let back = ParamBasis::parse(&b.to_text(), None).unwrap();
        assert_eq!(b, back);
        assert!(ParamBasis::parse("x sqrt-integer 2\n", None).is_err());
        assert!(ParamBasis::parse(
            "one const-rational 1\na sqrt-integer 2\nb sqrt-integer 8\n",
            None
        )
        .is_err());
        assert!(ParamBasis::parse("one const-rational 1\na sqrt-integer 4\n", None).is_err());
        assert!(ParamBasis::parse("one const-rational 1\na external-oracle pi\n", None).is_err());
    }

    #[derive(Debug)]
    struct Fixed;
    impl EnclosureOracle for Fixed {
        fn enclose(&self, width: &Rational) -> Result<Interval> {
            // Encloses 1/3 + 1/7 without revealing it is rational.
            let v = rat(10, 21);
            Ok(Interval::new(
                &v - width / rat_int(2),
                &v + width / rat_int(2),
            ))
        }
    }

    #[test]
    fn external_oracle_entries() {
        let mut reg = OracleRegistry::new();
        reg.insert("fixed".into(), Arc::new(Fixed) as Arc<dyn EnclosureOracle>);
        let b = ParamBasis::parse(
            "one const-rational 1\nx external-oracle fixed\n",
            Some(&reg),
        )
        .unwrap();
        let iv = b.eval(&b.param(1), &rat(1, 1000)).unwrap();
        assert!(iv.contains(&rat(10, 21)));
        assert!(b.to_text().contains("external-oracle fixed"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_rat() -> impl Strategy<Value = Rational> {
            (-50i64..50, 1i64..20).prop_map(|(n, d)| rat(n, d))
        }

        fn scalar() -> impl Strategy<Value = ParamScalar> {
            proptest::collection::vec(small_rat(), 0..4).prop_map(ParamScalar::from_coords)
        }

        proptest! {
            #[test]
            fn combine_is_bilinear(a in small_rat(), b in small_rat(), s in scalar(), t in scalar()) {
                let lhs = ParamScalar::combine([(&a, &s), (&b, &t)]);
                let rhs = &s.scale(&a) + &t.scale(&b);
                prop_assert_eq!(lhs.clone(), rhs);
                let twice = ParamScalar::combine([(&rat(2, 1), &lhs)]);
                prop_assert_eq!(twice, &lhs + &lhs);
            }

            #[test]
            fn rational_compare_matches_exact(a in small_rat(), b in small_rat()) {
                let basis = ParamBasis::unit();
                let got = basis.compare(&ParamScalar::rational(a.clone()), &ParamScalar::rational(b.clone()), &rat(1, 1 << 20)).unwrap();
                prop_assert_eq!(got, a.cmp(&b));
            }

            #[test]
            fn equal_iff_zero_difference(s in scalar(), t in scalar()) {
                let basis = ParamBasis::sqrt_primes(&[2, 3, 5]).unwrap();
                let ord = basis.compare(&s, &t, &default_precision()).unwrap();
                prop_assert_eq!(ord == Ordering::Equal, (&s - &t).is_zero());
            }

            #[test]
            fn eval_intervals_nest(s in scalar(), bits in 1u32..40) {
                let basis = ParamBasis::sqrt_primes(&[2, 3, 5]).unwrap();
                let wide = basis.eval(&s, &dyadic_width(bits)).unwrap();
                let narrow = basis.eval(&s, &dyadic_width(bits + 7)).unwrap();
                prop_assert!(wide.width() <= dyadic_width(bits));
                prop_assert!(narrow.width() <= dyadic_width(bits + 7));
                prop_assert!(wide.intersects(&narrow));
            }
        }
    }
}
