//! Certified comparisons and check helpers shared by the engine verifiers.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{to_q, ZMatrix};
use crate::measures::MeasureVector;
use crate::report::{Status, VerifyReport};
use crate::scalars::{ParamBasis, ParamScalar, Rational};
use crate::toeplitz::agreement_count;
use crate::words::GeneratingSequence;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Certifier<'a> {
    pub basis: &'a ParamBasis,
    pub prec: &'a Rational,
}

impl<'a> Certifier<'a> {
    pub fn new(basis: &'a ParamBasis, prec: &'a Rational) -> Self {
        Certifier { basis, prec }
    }

    pub fn sign(&self, s: &ParamScalar) -> Result<Ordering> {
        self.basis.sign(s, self.prec)
    }

    pub fn lt(&self, a: &ParamScalar, b: &ParamScalar) -> Result<bool> {
        Ok(self.basis.compare(a, b, self.prec)? == Ordering::Less)
    }

    pub fn le(&self, a: &ParamScalar, b: &ParamScalar) -> Result<bool> {
        Ok(self.basis.compare(a, b, self.prec)? != Ordering::Greater)
    }

    /// `|a| < e` (or `<= e` when not `strict`).
    pub fn abs_within(&self, a: &ParamScalar, e: &Rational, strict: bool) -> Result<bool> {
        let e = ParamScalar::rational(e.clone());
        let ne = -&e;
        if strict {
            Ok(self.lt(&ne, a)? && self.lt(a, &e)?)
        } else {
            Ok(self.le(&ne, a)? && self.le(a, &e)?)
        }
    }

    pub fn in_open_unit(&self, s: &ParamScalar) -> Result<bool> {
        Ok(self.sign(s)? == Ordering::Greater && self.lt(s, &ParamScalar::one())?)
    }
}

/// `Ok(None)` passes, `Ok(Some(detail))` fails; precision exhaustion makes the
/// check unverifiable rather than aborting the report.
pub(crate) fn judge(r: Result<Option<String>>) -> Result<Status> {
    match r {
        Ok(None) => Ok(Status::Pass),
        Ok(Some(d)) => Ok(Status::Fail(d)),
        Err(e) if e.is_indeterminate() => Ok(Status::Unverifiable(e.to_string())),
        Err(e) => Err(e),
    }
}

pub(crate) fn q(n: &BigInt, d: &BigInt) -> Rational {
    Rational::new(n.clone(), d.clone())
}

pub(crate) fn identity_z(n: usize) -> ZMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| BigInt::from(u8::from(i == j))).collect())
        .collect()
}

/// Records the per-level structure checks common to both engines.
pub(crate) fn structure_checks(
    report: &mut VerifyReport,
    gs: &GeneratingSequence,
    n: usize,
    prefix: &str,
) -> Result<()> {
    let s = gs.level_structure(n)?;
    let items = [
        ("constant-length", &s.constant_length),
        ("proper", &s.proper),
        ("primitive", &s.primitive),
        ("recognizable-marker", &s.marker),
    ];
    for (name, finding) in items {
        let status = match finding {
            None => Status::Pass,
            Some((w, d)) => Status::Fail(format!("word {w}: {d}")),
        };
        report.push(n, &format!("{prefix}:{name}"), status);
    }
    Ok(())
}

/// Agreement of level `n` at least `(1 - 1/n) h_n`.
pub(crate) fn agreement_check(
    report: &mut VerifyReport,
    gs: &GeneratingSequence,
    n: usize,
    label: &str,
) -> Result<()> {
    let h = gs.h(n)?;
    let agree = agreement_count(gs, n)?;
    let nn = BigInt::from(n);
    let ok = &agree * &nn >= h * (&nn - 1);
    report.check(n, label, ok, || {
        format!("agreement {agree} of {h} positions is below 1 - 1/{n}")
    });
    Ok(())
}

/// Exact `sum_i c_{n,i} = 1/h_n`.
pub(crate) fn mass_check(c: &[ParamScalar], h: &BigInt) -> Option<String> {
    let one = Rational::from_integer(1.into());
    let mass = ParamScalar::combine(c.iter().map(|s| (&one, s)));
    let target = ParamScalar::rational(q(&BigInt::from(1), h));
    (mass != target).then(|| format!("sum of c is {mass}, expected 1/{h}"))
}

/// Exact `c_{n-1} = T^{n-1}_n c_n`.
pub(crate) fn recurrence_check(
    t: &ZMatrix,
    prev: &[ParamScalar],
    c: &[ParamScalar],
) -> Option<String> {
    let tq = to_q(t);
    for (j, row) in tq.iter().enumerate() {
        let rhs = ParamScalar::combine(row.iter().zip(c));
        if rhs != prev[j] {
            return Some(format!("row {j}: T c = {rhs} but c_prev = {}", prev[j]));
        }
    }
    None
}

/// `|T^{m,j}_{n,j'} / h_n - c_{m,j}|` below `bound(m)` for every `m < n`
/// with recorded measures.
pub(crate) fn frequency_check(
    cert: &Certifier<'_>,
    gs: &GeneratingSequence,
    mv: &MeasureVector,
    n: usize,
    bound: &dyn Fn(usize) -> Result<Rational>,
    strict: bool,
) -> Result<Option<String>> {
    let h = gs.h(n)?;
    for m in gs.first_level()..n {
        let Some(cm) = mv.level(m) else { continue };
        let t = gs.occurrence_matrix(m, n)?;
        let b = bound(m)?;
        for (j, row) in t.iter().enumerate() {
            for (jp, x) in row.iter().enumerate() {
                let diff = &ParamScalar::rational(q(x, h)) - &cm[j];
                if !cert.abs_within(&diff, &b, strict)? {
                    return Ok(Some(format!(
                        "level {m} word {j} in word {jp}: deviation exceeds {b}"
                    )));
                }
            }
        }
    }
    Ok(None)
}

/// Positions common to all words of level `n` number at least `L/n`.
pub(crate) fn aligned_check(gs: &GeneratingSequence, n: usize) -> Result<Option<String>> {
    let l = gs.h(n)? / gs.h(n - 1)?;
    let k = BigInt::from(gs.aligned_columns(n)?);
    let nn = BigInt::from(n);
    Ok((&k * &nn < l).then(|| format!("only {k} aligned columns of {l}")))
}

pub(crate) fn annotate(e: Error, level: usize, state: impl FnOnce() -> String) -> Error {
    match e {
        Error::Indeterminate(msg) => {
            Error::Indeterminate(format!("level {level}: {msg}; state: {}", state()))
        }
        other => other,
    }
}

pub(crate) fn is_even(x: &BigInt) -> bool {
    (x % 2u8).is_zero()
}
