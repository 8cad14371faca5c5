//! Finite-window Toeplitz diagnostics.
//!
//! Periodicity here is always verified inside a finite window, which is only a
//! necessary condition for periodicity of the bi-infinite point.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalars::Rational;
use crate::words::GeneratingSequence;

fn check_period(len: usize, p: usize) -> Result<()> {
    if p == 0 || p > len {
        return Err(Error::InvalidConfig(format!(
            "period {p} out of range for window of length {len}"
        )));
    }
    Ok(())
}

/// Residues `r mod p` whose positions in `w` all carry one letter.
pub fn per_p_window(w: &str, p: usize) -> Result<BTreeSet<usize>> {
    let letters: Vec<char> = w.chars().collect();
    check_period(letters.len(), p)?;
    Ok((0..p)
        .filter(|&r| letters[r..].iter().step_by(p).all(|&c| c == letters[r]))
        .collect())
}

/// Window p-skeleton: letters at verified residues, holes elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletonWord {
    pub letters: Vec<Option<char>>,
    pub period: usize,
}

impl fmt::Display for SkeletonWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.letters {
            write!(f, "{}", c.unwrap_or('_'))?;
        }
        Ok(())
    }
}

pub fn skeleton_window(w: &str, p: usize) -> Result<SkeletonWord> {
    let residues = per_p_window(w, p)?;
    Ok(SkeletonWord {
        letters: w
            .chars()
            .enumerate()
            .map(|(k, c)| residues.contains(&(k % p)).then_some(c))
            .collect(),
        period: p,
    })
}

/// Counts positions where all words of a set agree, one level at a time.
struct Agreement<'a> {
    gs: &'a GeneratingSequence,
    memo: HashMap<(usize, Vec<u32>), BigInt>,
}

impl Agreement<'_> {
    fn count(&mut self, n: usize, set: Vec<u32>) -> Result<BigInt> {
        if set.len() == 1 {
            return Ok(self.gs.length(n, set[0] as usize)?.clone());
        }
        if n == self.gs.first_level() {
            return Ok(BigInt::zero());
        }
        if let Some(v) = self.memo.get(&(n, set.clone())) {
            return Ok(v.clone());
        }
        let builds: Vec<&[u32]> = set
            .iter()
            .map(|&i| self.gs.building(n, i as usize))
            .collect::<Result<_>>()?;
        let len = builds[0].len();
        let aligned = self.gs.is_constant_length(n - 1)? && builds.iter().all(|b| b.len() == len);
        let total = if aligned {
            let mut columns: HashMap<Vec<u32>, u64> = HashMap::new();
            for k in 0..len {
                let mut col: Vec<u32> = builds.iter().map(|b| b[k]).collect();
                col.sort_unstable();
                col.dedup();
                *columns.entry(col).or_default() += 1;
            }
            let mut columns: Vec<_> = columns.into_iter().collect();
            columns.sort();
            let mut total = BigInt::zero();
            for (col, mult) in columns {
                total += self.count(n - 1, col)? * mult;
            }
            total
        } else {
            let ex: Vec<_> = set
                .iter()
                .map(|&i| self.gs.expand_indices(n, i as usize))
                .collect::<Result<_>>()?;
            let len = ex.iter().map(|e| e.len()).min().unwrap_or(0);
            BigInt::from(
                (0..len)
                    .filter(|&k| ex.iter().all(|e| e[k] == ex[0][k]))
                    .count(),
            )
        };
        self.memo.insert((n, set), total.clone());
        Ok(total)
    }
}

/// Number of positions `j < h_m` at which all level-`m` words carry the same letter.
pub fn agreement_count(gs: &GeneratingSequence, m: usize) -> Result<BigInt> {
    let count = gs.word_count(m)?;
    if !gs.is_constant_length(m)? {
        return Err(Error::NotConstantLength { level: m });
    }
    let mut a = Agreement {
        gs,
        memo: HashMap::new(),
    };
    a.count(m, (0..count as u32).collect())
}

/// Fraction of positions of level `m` where all words agree, exactly.
pub fn agreement_fraction(gs: &GeneratingSequence, m: usize) -> Result<Rational> {
    let c = agreement_count(gs, m)?;
    Ok(Rational::new(c, gs.h(m)?.clone()))
}

/// One line of the regularity profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularityEntry {
    pub level: usize,
    pub p: BigInt,
    pub delta_lb: Rational,
}

impl fmt::Display for RegularityEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "p={} delta_lb={} verified-in-window",
            self.p, self.delta_lb
        )
    }
}

/// `(h_m, agreement_fraction(m))` for every built level `m >= 1`.
pub fn regularity_profile(gs: &GeneratingSequence) -> Result<Vec<RegularityEntry>> {
    if gs.last_level() == gs.first_level() {
        return Err(Error::InvalidConfig(
            "regularity profile needs at least two levels".into(),
        ));
    }
    let mut a = Agreement {
        gs,
        memo: HashMap::new(),
    };
    let mut out = Vec::new();
    for m in gs.level_numbers().filter(|&m| m >= 1) {
        let count = gs.word_count(m)?;
        let h = gs.h(m)?.clone();
        let c = a.count(m, (0..count as u32).collect())?;
        out.push(RegularityEntry {
            level: m,
            p: h.clone(),
            delta_lb: Rational::new(c, h),
        });
    }
    Ok(out)
}

/// Whether each bound of the profile is at least the one before it.
pub fn profile_nondecreasing(profile: &[RegularityEntry]) -> bool {
    profile.windows(2).all(|w| w[0].delta_lb <= w[1].delta_lb)
}

/// `1 - 1/m` as an exact rational.
pub fn regularity_target(m: usize) -> Rational {
    Rational::one() - Rational::new(BigInt::one(), BigInt::from(m.max(1)))
}

/// Residue set density `|residues| / p` for ad-hoc windows.
pub fn residue_density(residues: &BTreeSet<usize>, p: usize) -> Rational {
    Rational::new(BigInt::from(residues.len()), BigInt::from(p))
}

/// Toeplitz residues of the expansion of word `(n, i)` at period `p`, when the
/// expansion is small enough to materialize.
pub fn word_residues(
    gs: &GeneratingSequence,
    n: usize,
    i: usize,
    p: &BigInt,
) -> Result<BTreeSet<usize>> {
    let w = gs.expand_word(n, i)?;
    let p = p
        .to_usize()
        .ok_or_else(|| Error::InvalidConfig(format!("period {p} too large")))?;
    per_p_window(&w, p)
}
