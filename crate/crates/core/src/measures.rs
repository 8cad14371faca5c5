//! Cylinder measures, Kakutani-Rohlin towers and frequency bounds.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{rank, to_q, transpose};
use crate::scalars::{Interval, ParamBasis, ParamScalar, Rational};
use crate::words::GeneratingSequence;

/// Measures `c[n][i]` of the cylinders of level-`n` words, for a prefix of
/// the levels of a generating sequence starting at `first_level`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MeasureVector {
    pub first_level: usize,
    pub levels: Vec<Vec<ParamScalar>>,
}

impl MeasureVector {
    pub fn new(first_level: usize, levels: Vec<Vec<ParamScalar>>) -> Self {
        MeasureVector {
            first_level,
            levels,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn last_level(&self) -> Option<usize> {
        (!self.levels.is_empty()).then(|| self.first_level + self.levels.len() - 1)
    }

    pub fn covers(&self, n: usize) -> bool {
        n >= self.first_level && n < self.first_level + self.levels.len()
    }

    pub fn level(&self, n: usize) -> Option<&[ParamScalar]> {
        self.covers(n)
            .then(|| self.levels[n - self.first_level].as_slice())
    }

    pub fn get(&self, n: usize, i: usize) -> Option<&ParamScalar> {
        self.level(n).and_then(|l| l.get(i))
    }

    pub fn get_mut(&mut self, n: usize, i: usize) -> Option<&mut ParamScalar> {
        if !self.covers(n) {
            return None;
        }
        self.levels[n - self.first_level].get_mut(i)
    }

    /// Largest coordinate count among the stored scalars.
    pub fn coord_len(&self) -> usize {
        self.levels
            .iter()
            .flatten()
            .map(|s| s.coords().len())
            .max()
            .unwrap_or(0)
    }

    fn require(&self, n: usize) -> Result<&[ParamScalar]> {
        self.level(n).ok_or_else(|| {
            Error::InconsistentMeasure(format!("no measures recorded for level {n}"))
        })
    }
}

fn check_shape(gs: &GeneratingSequence, mv: &MeasureVector) -> Result<()> {
    if mv.is_empty() {
        return Ok(());
    }
    if mv.first_level != gs.first_level() {
        return Err(Error::DimensionMismatch(format!(
            "measures start at level {}, system at level {}",
            mv.first_level,
            gs.first_level()
        )));
    }
    for (k, level) in mv.levels.iter().enumerate() {
        let n = mv.first_level + k;
        if n > gs.last_level() {
            return Err(Error::DimensionMismatch(format!(
                "measures given for level {n} beyond last level {}",
                gs.last_level()
            )));
        }
        let words = gs.word_count(n)?;
        if level.len() != words {
            return Err(Error::DimensionMismatch(format!(
                "level {n}: {} measures for {words} words",
                level.len()
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeasureCheckKind {
    Mass,
    Recurrence,
    Positivity,
}

impl fmt::Display for MeasureCheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureCheckKind::Mass => "mass",
            MeasureCheckKind::Recurrence => "recurrence",
            MeasureCheckKind::Positivity => "positivity",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureViolation {
    pub level: usize,
    pub word: Option<usize>,
    pub kind: MeasureCheckKind,
    pub detail: String,
}

impl fmt::Display for MeasureViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.word {
            Some(w) => write!(
                f,
                "{} violated at level {} word {}: {}",
                self.kind, self.level, w, self.detail
            ),
            None => write!(
                f,
                "{} violated at level {}: {}",
                self.kind, self.level, self.detail
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MeasureReport {
    pub checked_levels: Vec<usize>,
    /// Levels of the system with no recorded measures.
    pub unverifiable_levels: Vec<usize>,
    pub violations: Vec<MeasureViolation>,
}

impl MeasureReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&MeasureViolation> {
        self.violations.first()
    }
}

impl fmt::Display for MeasureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "measure consistency: {}",
            if self.ok() { "pass" } else { "fail" }
        )?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        if !self.unverifiable_levels.is_empty() {
            let ls: Vec<String> = self
                .unverifiable_levels
                .iter()
                .map(|l| l.to_string())
                .collect();
            writeln!(f, "  unverifiable levels (no measures): {}", ls.join(","))?;
        }
        Ok(())
    }
}

/// Checks total mass, the one-step recurrence and positivity, exactly.
pub fn check_measure_consistency(
    gs: &GeneratingSequence,
    mv: &MeasureVector,
    basis: &ParamBasis,
    precision: &Rational,
) -> Result<MeasureReport> {
    check_shape(gs, mv)?;
    let mut report = MeasureReport::default();
    for n in gs.level_numbers() {
        let Some(c) = mv.level(n) else {
            report.unverifiable_levels.push(n);
            continue;
        };
        report.checked_levels.push(n);
        let h = gs.h(n)?;
        let one = Rational::one();
        let mass = ParamScalar::combine(c.iter().map(|s| (&one, s)));
        let target = ParamScalar::rational(Rational::new(BigInt::one(), h.clone()));
        if mass != target {
            report.violations.push(MeasureViolation {
                level: n,
                word: None,
                kind: MeasureCheckKind::Mass,
                detail: format!("sum {} differs from 1/{h}", basis.format_expr(&mass)),
            });
        }
        for (i, s) in c.iter().enumerate() {
            if basis.sign(s, precision)? != Ordering::Greater {
                report.violations.push(MeasureViolation {
                    level: n,
                    word: Some(i),
                    kind: MeasureCheckKind::Positivity,
                    detail: format!("c = {} is not positive", basis.format_expr(s)),
                });
            }
        }
        if n > gs.first_level() {
            if let Some(prev) = mv.level(n - 1) {
                let t = to_q(&gs.incidence(n)?);
                for (j, row) in t.iter().enumerate() {
                    let rhs = ParamScalar::combine(row.iter().zip(c));
                    if rhs != prev[j] {
                        report.violations.push(MeasureViolation {
                            level: n,
                            word: Some(j),
                            kind: MeasureCheckKind::Recurrence,
                            detail: format!(
                                "c[{}][{j}] = {} but sum of T c[{n}] = {}",
                                n - 1,
                                basis.format_expr(&prev[j]),
                                basis.format_expr(&rhs)
                            ),
                        });
                    }
                }
            }
        }
    }
    report.violations.sort_by_key(|v| (v.level, v.word));
    Ok(report)
}

fn freq_row(gs: &GeneratingSequence, n: usize, i: usize, m: usize) -> Result<Vec<Rational>> {
    if n >= m {
        return Err(Error::LevelOutOfRange {
            level: m,
            first: n + 1,
            last: gs.last_level(),
        });
    }
    let count = gs.word_count(n)?;
    if i >= count {
        return Err(Error::WordOutOfRange {
            level: n,
            word: i,
            count,
        });
    }
    let t = gs.occurrence_matrix(n, m)?;
    let h = gs.h(m)?;
    Ok(t[i]
        .iter()
        .map(|x| Rational::new(x.clone(), h.clone()))
        .collect())
}

/// `[min_j T^{n,i}_{m,j} / h_m, max_j T^{n,i}_{m,j} / h_m]`.
pub fn frequency_bounds(gs: &GeneratingSequence, n: usize, i: usize, m: usize) -> Result<Interval> {
    let row = freq_row(gs, n, i, m)?;
    let lo = row.iter().min().cloned().unwrap_or_else(Rational::zero);
    let hi = row.iter().max().cloned().unwrap_or_else(Rational::zero);
    Ok(Interval::new(lo, hi))
}

/// Whether `lo <= s <= hi` for a frequency interval and an exact scalar.
pub fn interval_contains(
    basis: &ParamBasis,
    iv: &Interval,
    s: &ParamScalar,
    precision: &Rational,
) -> Result<bool> {
    let lo = ParamScalar::rational(iv.lo.clone());
    let hi = ParamScalar::rational(iv.hi.clone());
    Ok(basis.compare(&lo, s, precision)? != Ordering::Greater
        && basis.compare(s, &hi, precision)? != Ordering::Greater)
}

/// One summand of a step function: `weight * 1_{shift of [v_{level,word}]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepTerm {
    pub level: usize,
    pub word: usize,
    pub shift: BigInt,
    pub weight: BigInt,
}

/// Integral of a step function over shifted cylinders.
pub fn integrate_step_function(
    gs: &GeneratingSequence,
    mv: &MeasureVector,
    terms: &[StepTerm],
) -> Result<ParamScalar> {
    check_shape(gs, mv)?;
    let mut coeffs = Vec::with_capacity(terms.len());
    let mut scalars = Vec::with_capacity(terms.len());
    for t in terms {
        let len = gs.length(t.level, t.word)?;
        if t.shift.is_negative() || &t.shift >= len {
            return Err(Error::ShiftOutOfRange {
                level: t.level,
                word: t.word,
                shift: t.shift.to_string(),
                length: len.to_string(),
            });
        }
        let c = mv.get(t.level, t.word).ok_or_else(|| {
            Error::InconsistentMeasure(format!("no measure for level {} word {}", t.level, t.word))
        })?;
        coeffs.push(Rational::from_integer(t.weight.clone()));
        scalars.push(c);
    }
    Ok(ParamScalar::combine(coeffs.iter().zip(scalars)))
}

/// A Kakutani-Rohlin partition: `(base measure, height)` per tower.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KRPartition {
    pub towers: Vec<(ParamScalar, BigInt)>,
}

impl KRPartition {
    /// `sum height * base measure`.
    pub fn total_mass(&self) -> ParamScalar {
        let hs: Vec<Rational> = self
            .towers
            .iter()
            .map(|(_, h)| Rational::from_integer(h.clone()))
            .collect();
        ParamScalar::combine(hs.iter().zip(self.towers.iter().map(|(b, _)| b)))
    }
}

impl fmt::Display for KRPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (b, h)) in self.towers.iter().enumerate() {
            writeln!(f, "tower {k}: height={h} base={}", b.coords_text(1))?;
        }
        Ok(())
    }
}

/// Towers over the level-`n` cylinders; fails unless the masses sum to one.
pub fn kr_from_level(gs: &GeneratingSequence, mv: &MeasureVector, n: usize) -> Result<KRPartition> {
    check_shape(gs, mv)?;
    let c = mv.require(n)?;
    let towers: Vec<(ParamScalar, BigInt)> = c
        .iter()
        .enumerate()
        .map(|(i, s)| Ok((s.clone(), gs.length(n, i)?.clone())))
        .collect::<Result<_>>()?;
    let kr = KRPartition { towers };
    let total = kr.total_mass();
    if total != ParamScalar::one() {
        return Err(Error::InconsistentMeasure(format!(
            "level {n}: towers carry total mass {total}, not 1"
        )));
    }
    Ok(kr)
}

/// Rank over Q of the normalized columns of `T^n_m`.
pub fn ergodic_dim_bound(gs: &GeneratingSequence, n: usize, m: usize) -> Result<usize> {
    if n >= m {
        return Err(Error::LevelOutOfRange {
            level: m,
            first: n + 1,
            last: gs.last_level(),
        });
    }
    let t = gs.occurrence_matrix(n, m)?;
    Ok(rank(transpose(&to_q(&t))))
}

/// Largest spread `max_j - min_j` of `T^{n,i}_{m,j} / h_m` over the rows `i`.
pub fn column_spread(gs: &GeneratingSequence, n: usize, m: usize) -> Result<Rational> {
    let mut best = Rational::zero();
    for i in 0..gs.word_count(n)? {
        let iv = frequency_bounds(gs, n, i, m)?;
        if iv.width() > best {
            best = iv.width();
        }
    }
    Ok(best)
}

/// Report lines `c[n][i] = <coords>` and `freq[n][i]@m = [lo, hi]`.
pub fn measure_report(
    gs: &GeneratingSequence,
    mv: &MeasureVector,
    basis: &ParamBasis,
    depth: Option<usize>,
) -> Result<String> {
    check_shape(gs, mv)?;
    let width = basis.len();
    let mut out = String::new();
    for n in gs.level_numbers() {
        if let Some(c) = mv.level(n) {
            for (i, s) in c.iter().enumerate() {
                out.push_str(&format!("c[{n}][{i}] = {}\n", s.coords_text(width)));
            }
        }
    }
    let m = depth.unwrap_or(gs.last_level());
    for n in gs.first_level()..m.min(gs.last_level()) {
        for i in 0..gs.word_count(n)? {
            let iv = frequency_bounds(gs, n, i, m)?;
            out.push_str(&format!("freq[{n}][{i}]@{m} = [{}, {}]\n", iv.lo, iv.hi));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{default_precision, rat};
    use crate::words::Level;

    fn toy() -> GeneratingSequence {
        GeneratingSequence::new(
            vec!['0', '1'],
            0,
            vec![
                Level {
                    buildings: vec![vec![0], vec![1]],
                    ..Default::default()
                },
                Level {
                    buildings: vec![vec![0, 1, 0, 0], vec![0, 1, 0, 1]],
                    ..Default::default()
                },
            ],
        )
        .unwrap()
    }

    fn r(n: i64, d: i64) -> ParamScalar {
        ParamScalar::rational(rat(n, d))
    }

    #[test]
    fn toy_frequencies() {
        let gs = toy();
        assert_eq!(
            frequency_bounds(&gs, 0, 0, 1).unwrap(),
            Interval::new(rat(1, 2), rat(3, 4))
        );
        assert_eq!(ergodic_dim_bound(&gs, 0, 1).unwrap(), 2);
        assert!(frequency_bounds(&gs, 1, 0, 1).is_err());
    }

    #[test]
    fn toy_measures() {
        let gs = toy();
        // c1 = (1/8, 1/8): c0 = T c1 = (5/8, 3/8).
        let mv = MeasureVector::new(0, vec![vec![r(5, 8), r(3, 8)], vec![r(1, 8), r(1, 8)]]);
        let b = ParamBasis::unit();
        let p = default_precision();
        assert!(check_measure_consistency(&gs, &mv, &b, &p).unwrap().ok());
        let kr = kr_from_level(&gs, &mv, 1).unwrap();
        assert_eq!(kr.total_mass(), ParamScalar::one());

        let mut bad = mv.clone();
        *bad.get_mut(1, 0).unwrap() = &r(1, 8) + &r(1, 1000);
        let rep = check_measure_consistency(&gs, &bad, &b, &p).unwrap();
        assert_eq!(rep.first_violation().unwrap().level, 1);

        let uniform = MeasureVector::new(0, vec![vec![r(1, 2), r(1, 2)], vec![r(1, 4), r(1, 4)]]);
        assert!(kr_from_level(&gs, &uniform, 1).is_err());
    }

    #[test]
    fn level_zero_only() {
        let gs = toy();
        let mv = MeasureVector::new(0, vec![vec![r(1, 3), r(2, 3)]]);
        let rep =
            check_measure_consistency(&gs, &mv, &ParamBasis::unit(), &default_precision()).unwrap();
        assert!(rep.ok());
        assert_eq!(rep.unverifiable_levels, vec![1]);
    }

    #[test]
    fn step_functions() {
        let gs = toy();
        let mv = MeasureVector::new(0, vec![vec![r(5, 8), r(3, 8)], vec![r(1, 8), r(1, 8)]]);
        let t = |level, word, shift: i64, weight: i64| StepTerm {
            level,
            word,
            shift: BigInt::from(shift),
            weight: BigInt::from(weight),
        };
        let zero = integrate_step_function(&gs, &mv, &[t(1, 0, 0, 2), t(1, 0, 3, -2)]).unwrap();
        assert!(zero.is_zero());
        let all: Vec<StepTerm> = (0..2)
            .flat_map(|w| (0..4).map(move |s| t(1, w, s, 1)))
            .collect();
        assert_eq!(
            integrate_step_function(&gs, &mv, &all).unwrap(),
            ParamScalar::one()
        );
        assert!(integrate_step_function(&gs, &mv, &[t(1, 0, 4, 1)]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn integration_is_linear(a in -5i64..5, b in -5i64..5, s in 0i64..4) {
                let gs = toy();
                let mv = MeasureVector::new(0, vec![vec![r(5, 8), r(3, 8)], vec![r(1, 8), r(1, 8)]]);
                let t = |w: usize, weight: i64| StepTerm { level: 1, word: w, shift: BigInt::from(s), weight: BigInt::from(weight) };
                let whole = integrate_step_function(&gs, &mv, &[t(0, a), t(1, b)]).unwrap();
                let parts = &integrate_step_function(&gs, &mv, &[t(0, a)]).unwrap() + &integrate_step_function(&gs, &mv, &[t(1, b)]).unwrap();
                prop_assert_eq!(whole, parts);
            }
        }
    }
}
