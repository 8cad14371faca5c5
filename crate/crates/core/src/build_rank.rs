//! Uniquely ergodic Toeplitz sequences over `N` letters with measure group
//! `Q + Q x_1 + .. + Q x_{N-1}`, hence of topological rank exactly `N` when
//! the `x_i` are independent over Q together with `1`.
//!
//! Every level has `N` words. Word `i` of level `n + 1` holds `k_j` copies of
//! each previous word `j` plus `r` extra copies of word `i`, and
//! `c_{n+1,i} = (c_{n,i} - k_i / h_{n+1}) / r`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::certify::{
    agreement_check, aligned_check, annotate, frequency_check, identity_z, judge, mass_check, q,
    recurrence_check, structure_checks, Certifier,
};
use crate::error::{Error, Result};
use crate::gamma::gamma_from_system;
use crate::layout::canonical_layout;
use crate::linalg::{mul_z, rank, ZMatrix};
use crate::measures::MeasureVector;
use crate::report::{Status, VerifyReport};
use crate::scalars::{default_precision, rat, rat_int, ParamBasis, ParamScalar, Rational};
use crate::words::{GeneratingSequence, Header, Level, LevelMeta};

pub const ENGINE: &str = "rank";

/// Candidate lengths tried per level before giving up.
const MAX_LENGTH_TRIES: usize = 1 << 20;

#[derive(Clone, Debug)]
pub struct RankConfig {
    pub basis: ParamBasis,
    /// Alphabet size `N`.
    pub n: usize,
    /// The `x_1, .., x_{N-1}`.
    pub params: Vec<ParamScalar>,
    /// Last level built (levels run from 0).
    pub levels: usize,
    pub precision: Rational,
    /// Forces `h_1` instead of searching for the smallest admissible length.
    pub first_length: Option<BigInt>,
}

impl RankConfig {
    pub fn new(basis: ParamBasis, n: usize, params: Vec<ParamScalar>, levels: usize) -> Self {
        RankConfig {
            basis,
            n,
            params,
            levels,
            precision: default_precision(),
            first_length: None,
        }
    }

    /// Config from parameter expressions such as `2*sqrt2+1/3`.
    pub fn from_exprs(basis: ParamBasis, n: usize, exprs: &[&str], levels: usize) -> Result<Self> {
        let params = exprs
            .iter()
            .map(|e| basis.parse_expr(e))
            .collect::<Result<Vec<_>>>()?;
        Ok(RankConfig::new(basis, n, params, levels))
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=35).contains(&self.n) {
            return Err(Error::InvalidConfig(format!(
                "N = {} outside 2..=35",
                self.n
            )));
        }
        if self.params.len() + 1 != self.n {
            return Err(Error::InvalidConfig(format!(
                "{} parameters given, N - 1 = {} expected",
                self.params.len(),
                self.n - 1
            )));
        }
        if let Some(p) = self
            .params
            .iter()
            .find(|p| p.coords().len() > self.basis.len())
        {
            return Err(Error::BasisMismatch(format!(
                "parameter {p} exceeds the basis"
            )));
        }
        if let Some(h) = &self.first_length {
            if !h.is_positive() {
                return Err(Error::InvalidConfig("first length must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Letters `1`, `2`, .. for an `N`-letter alphabet.
pub fn rank_alphabet(n: usize) -> Vec<char> {
    (1..=n as u32)
        .filter_map(|i| char::from_digit(i, 36))
        .collect()
}

/// `y_i = x_i + q_i` with `0 < y_i <= 1/N`, `q_i` of smallest denominator.
pub fn shifted_params(cfg: &RankConfig) -> Result<Vec<ParamScalar>> {
    let top = rat(1, cfg.n as i64);
    cfg.params
        .iter()
        .map(|x| {
            let s =
                cfg.basis
                    .rational_shift_into(x, &Rational::zero(), &top, true, &cfg.precision)?;
            Ok(x + &ParamScalar::rational(s))
        })
        .collect()
}

/// Largest multiple of `step` strictly below `s`.
fn multiple_below(cert: &Certifier<'_>, s: &ParamScalar, step: &BigInt) -> Result<BigInt> {
    let scaled = s.scale(&Rational::new(BigInt::one(), step.clone()));
    let f = cert.basis.floor(&scaled, cert.prec)?;
    let exact = scaled.as_rational() == Some(Rational::from_integer(f.clone()));
    Ok(if exact { f - 1 } else { f } * step)
}

struct RankStep {
    h: BigInt,
    k: Vec<BigInt>,
    r: BigInt,
    eps: Rational,
}

/// Window check `c - e/N < k/h` for every word, plus `k >= 6`.
fn window_holds(
    cert: &Certifier<'_>,
    c: &[ParamScalar],
    k: &[BigInt],
    h: &BigInt,
    e: &Rational,
) -> Result<bool> {
    let n = c.len() as u64;
    for (ci, ki) in c.iter().zip(k) {
        if ki < &BigInt::from(6) {
            return Ok(false);
        }
        let low = ci - &ParamScalar::rational(e / rat_int(n));
        if !cert.lt(&low, &ParamScalar::rational(q(ki, h)))? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn first_step(cert: &Certifier<'_>, cfg: &RankConfig, c0: &[ParamScalar]) -> Result<RankStep> {
    let two = BigInt::from(2);
    let e = rat(1, 2);
    let attempt = |h: &BigInt| -> Result<Option<RankStep>> {
        let hq = Rational::from_integer(h.clone());
        let k = c0
            .iter()
            .map(|c| multiple_below(cert, &c.scale(&hq), &two))
            .collect::<Result<Vec<_>>>()?;
        if !window_holds(cert, c0, &k, h, &e)? {
            return Ok(None);
        }
        let r = h - k.iter().sum::<BigInt>();
        if !r.is_positive() || &r * 2 >= *h {
            return Ok(None);
        }
        Ok(Some(RankStep {
            h: h.clone(),
            k,
            r,
            eps: e.clone(),
        }))
    };
    if let Some(h) = &cfg.first_length {
        return attempt(h)?.ok_or_else(|| Error::Infeasible {
            level: 1,
            state: format!("h_1 = {h} admits no even k window with 0 < r < h/2"),
        });
    }
    let step = BigInt::from(2 * cfg.n);
    let mut h = step.clone();
    for _ in 0..MAX_LENGTH_TRIES {
        if let Some(s) = attempt(&h)? {
            return Ok(s);
        }
        h += &step;
    }
    Err(Error::Infeasible {
        level: 1,
        state: "no admissible h_1".into(),
    })
}

fn next_step(
    cert: &Certifier<'_>,
    cfg: &RankConfig,
    gs: &GeneratingSequence,
    measures: &[Vec<ParamScalar>],
    cum: &[ZMatrix],
    n: usize,
) -> Result<RankStep> {
    let big_n = cfg.n;
    let c = &measures[n];
    let h_n = gs.h(n)?.clone();
    let pow = BigInt::one() << (n + 1);
    let mut eps = Rational::new(BigInt::one(), pow.clone());
    for t in cum.iter().take(n) {
        for row in t {
            let mj: BigInt = row.iter().sum();
            let b = Rational::new(BigInt::one(), &pow * mj);
            if b < eps {
                eps = b;
            }
        }
    }
    for ci in c {
        let l = cert.basis.positive_lower_bound(ci, cert.prec)? / rat_int(4);
        if l < eps {
            eps = l;
        }
    }
    let eps = eps / rat_int(2);
    let m = BigInt::from(2 * (n + 1));
    let step = BigInt::from(2 * (n + 1) * (n + 1) * big_n);
    let next = n + 1;
    let mut l = step.clone();
    for _ in 0..MAX_LENGTH_TRIES {
        let h = &l * &h_n;
        let hq = Rational::from_integer(h.clone());
        let k = c
            .iter()
            .map(|ci| multiple_below(cert, &ci.scale(&hq), &m))
            .collect::<Result<Vec<_>>>()?;
        let sum: BigInt = k.iter().sum();
        let r = &l - &sum;
        let ok = window_holds(cert, c, &k, &h, &eps)?
            && r.is_positive()
            && &sum * BigInt::from(next) >= l
            && frequency_ok(cert, measures, cum, c, &k, &r, &h, next)?;
        if ok {
            return Ok(RankStep { h, k, r, eps });
        }
        l += &step;
    }
    Err(Error::Infeasible {
        level: next,
        state: format!("no admissible length below {l} h_{n} with eps = {eps}"),
    })
}

fn incidence_from(k: &[BigInt], r: &BigInt) -> ZMatrix {
    (0..k.len())
        .map(|j| {
            (0..k.len())
                .map(|i| if i == j { &k[j] + r } else { k[j].clone() })
                .collect()
        })
        .collect()
}

fn next_measures(c: &[ParamScalar], k: &[BigInt], r: &BigInt, h: &BigInt) -> Vec<ParamScalar> {
    let inv_r = Rational::new(BigInt::one(), r.clone());
    c.iter()
        .zip(k)
        .map(|(ci, ki)| (ci - &ParamScalar::rational(q(ki, h))).scale(&inv_r))
        .collect()
}

/// Bound `1/2^{next}` on every frequency deviation from levels `m <= n`.
#[allow(clippy::too_many_arguments)]
fn frequency_ok(
    cert: &Certifier<'_>,
    measures: &[Vec<ParamScalar>],
    cum: &[ZMatrix],
    c: &[ParamScalar],
    k: &[BigInt],
    r: &BigInt,
    h: &BigInt,
    next: usize,
) -> Result<bool> {
    let t = incidence_from(k, r);
    let bound = Rational::new(BigInt::one(), BigInt::one() << next);
    let new_c = next_measures(c, k, r, h);
    for (cm, base) in measures.iter().zip(cum) {
        let tm = mul_z(base, &t);
        for (j, row) in tm.iter().enumerate() {
            for x in row {
                let diff = &ParamScalar::rational(q(x, h)) - &cm[j];
                if !cert.abs_within(&diff, &bound, false)? {
                    return Ok(false);
                }
            }
        }
    }
    for ci in &new_c {
        if cert.sign(ci)? != Ordering::Greater {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn build_rank_subshift(cfg: &RankConfig) -> Result<(GeneratingSequence, MeasureVector)> {
    cfg.validate()?;
    let cert = Certifier::new(&cfg.basis, &cfg.precision);
    let big_n = cfg.n;
    let ys = shifted_params(cfg)?;
    let one = Rational::one();
    let mut c0 = ys.clone();
    let total = ParamScalar::combine(ys.iter().map(|y| (&one, y)));
    c0.push(&ParamScalar::one() - &total);
    let base = Level {
        buildings: (0..big_n as u32).map(|i| vec![i]).collect(),
        meta: LevelMeta::default(),
    };
    let mut gs = GeneratingSequence::new(rank_alphabet(big_n), 0, vec![base])?;
    gs.header = Header {
        basis: None,
        engine: Some(ENGINE.into()),
        pairing: None,
        params: Some(
            cfg.params
                .iter()
                .map(|p| cfg.basis.format_expr(p))
                .collect::<Vec<_>>()
                .join(","),
        ),
    };
    let mut measures = vec![c0];
    // cum[m] = T^m_n
    let mut cum: Vec<ZMatrix> = vec![identity_z(big_n)];
    for n in 0..cfg.levels {
        let dump = || {
            let cs: Vec<String> = measures[n]
                .iter()
                .map(|c| cfg.basis.format_expr(c))
                .collect();
            format!("c[{n}]=[{}]", cs.join("; "))
        };
        let step = if n == 0 {
            first_step(&cert, cfg, &measures[0])
        } else {
            next_step(&cert, cfg, &gs, &measures, &cum, n)
        }
        .map_err(|e| annotate(e, n + 1, dump))?;
        let t = incidence_from(&step.k, &step.r);
        let buildings = canonical_layout(&t).map_err(|state| Error::Infeasible {
            level: n + 1,
            state,
        })?;
        let c = next_measures(&measures[n], &step.k, &step.r, &step.h);
        gs.push_level(Level {
            buildings,
            meta: LevelMeta {
                k: Some(step.k),
                r: Some(step.r),
                eps: vec![("e".into(), step.eps.to_string())],
            },
        })?;
        for m in cum.iter_mut() {
            *m = mul_z(m, &t);
        }
        cum.push(identity_z(big_n));
        measures.push(c);
    }
    Ok((gs, MeasureVector::new(0, measures)))
}

/// Whether `1, x_1, .., x_{N-1}` are independent over Q.
pub fn params_independent(params: &[ParamScalar]) -> bool {
    let dim = params
        .iter()
        .map(|p| p.coords().len())
        .max()
        .unwrap_or(1)
        .max(1);
    let mut rows: Vec<Vec<Rational>> = params.iter().map(|p| p.padded(dim)).collect();
    rows.push(ParamScalar::one().padded(dim));
    rank(rows) == params.len() + 1
}

fn check_rank_shape(gs: &GeneratingSequence, mv: &MeasureVector) -> Result<usize> {
    let big_n = gs.alphabet().len();
    if gs.first_level() != 0 || big_n < 2 {
        return Err(Error::DimensionMismatch(
            "expected at least two letters and levels starting at 0".into(),
        ));
    }
    for n in gs.level_numbers() {
        let count = gs.word_count(n)?;
        if count != big_n {
            return Err(Error::DimensionMismatch(format!(
                "level {n} has {count} words, expected {big_n}"
            )));
        }
        if let Some(c) = mv.level(n) {
            if c.len() != count {
                return Err(Error::DimensionMismatch(format!(
                    "level {n} has {} measures for {count} words",
                    c.len()
                )));
            }
        }
    }
    if !mv.is_empty() && mv.first_level != 0 {
        return Err(Error::DimensionMismatch(
            "measures must start at level 0".into(),
        ));
    }
    Ok(big_n)
}

/// Checks every level of an engine-shaped sequence and issues the rank
/// certificate. `params` (the `x_i`) enables the level-0 coset checks.
pub fn verify_rank_invariants(
    gs: &GeneratingSequence,
    mv: &MeasureVector,
    basis: &ParamBasis,
    params: Option<&[ParamScalar]>,
    precision: &Rational,
) -> Result<VerifyReport> {
    let big_n = check_rank_shape(gs, mv)?;
    let cert = Certifier::new(basis, precision);
    let mut report = VerifyReport::default();
    verify_base(&cert, mv, params, big_n, &mut report)?;
    for n in 1..=gs.last_level() {
        verify_level(&cert, gs, mv, n, &mut report)?;
    }
    certify_rank(gs, mv, basis, params, big_n, &mut report)?;
    Ok(report)
}

fn verify_base(
    cert: &Certifier<'_>,
    mv: &MeasureVector,
    params: Option<&[ParamScalar]>,
    big_n: usize,
    report: &mut VerifyReport,
) -> Result<()> {
    let Some(c0) = mv.level(0) else {
        report.push(
            0,
            "c0:mass",
            Status::Unverifiable("no measures for level 0".into()),
        );
        return Ok(());
    };
    report.push(
        0,
        "c0:mass",
        mass_check(c0, &BigInt::one()).map_or(Status::Pass, Status::Fail),
    );
    let Some(xs) = params else {
        report.push(0, "c0:y", Status::Unverifiable("parameters unknown".into()));
        return Ok(());
    };
    if xs.len() + 1 != big_n {
        report.push(
            0,
            "c0:y",
            Status::Fail(format!("{} parameters for N = {big_n}", xs.len())),
        );
        return Ok(());
    }
    let top = ParamScalar::rational(rat(1, big_n as i64));
    let st = judge((|| {
        for (i, (y, x)) in c0.iter().zip(xs).enumerate() {
            if (y - x).as_rational().is_none() {
                return Ok(Some(format!("c[0][{i}] - x_{} is not rational", i + 1)));
            }
            if cert.sign(y)? != Ordering::Greater || !cert.le(y, &top)? {
                return Ok(Some(format!("c[0][{i}] outside (0, 1/{big_n}]")));
            }
        }
        Ok(None)
    })())?;
    report.push(0, "c0:y", st);
    Ok(())
}

fn verify_level(
    cert: &Certifier<'_>,
    gs: &GeneratingSequence,
    mv: &MeasureVector,
    n: usize,
    report: &mut VerifyReport,
) -> Result<()> {
    report.push(n, "hyp(1)", Status::Pass);
    structure_checks(report, gs, n, "hyp(2)")?;
    let s = gs.level_structure(n)?;
    let as_status = |f: &Option<(usize, String)>| match f {
        None => Status::Pass,
        Some((w, d)) => Status::Fail(format!("word {w}: {d}")),
    };
    report.push(n, "(a)", as_status(&s.constant_length));
    report.push(n, "(g)", as_status(&s.marker));
    if s.constant_length.is_some() {
        return Ok(());
    }
    let h = gs.h(n)?.clone();
    let hp = gs.h(n - 1)?.clone();
    let nn = BigInt::from(n);
    agreement_check(report, gs, n, "hyp(3)")?;
    report.check(n, "(b)", (&h % (&hp * &nn)).is_zero(), || {
        format!("h = {h} is not a multiple of {n} * {hp}")
    });
    let l = &h / &hp;
    let t = gs.incidence(n)?;
    let meta = &gs.level(n)?.meta;
    let mult = BigInt::from(2 * n);
    match (&meta.k, &meta.r) {
        (Some(k), Some(r)) if k.len() == t.len() => {
            let expected = incidence_from(k, r);
            let bad = (0..t.len())
                .flat_map(|j| (0..t.len()).map(move |i| (j, i)))
                .find(|&(j, i)| t[j][i] != expected[j][i]);
            let f = || match bad {
                Some((j, i)) => Status::Fail(format!(
                    "word {i} holds {} copies of word {j}, k + r delta gives {}",
                    t[j][i], expected[j][i]
                )),
                None => Status::Pass,
            };
            report.push(n, "(f)", f());
            report.push(n, "hyp(4):counts", f());
            let sum: BigInt = k.iter().sum();
            let d_ok = r == &(&l - &sum) && r.is_positive() && (r % &mult).is_zero();
            report.check(n, "(d)", d_ok, || {
                format!("r = {r}, expected positive multiple of {mult} equal to {l} - {sum}")
            });
            report.check(
                n,
                "hyp(5):multiples",
                (&h % &nn).is_zero() && (r % &nn).is_zero(),
                || format!("h = {h} or r = {r} is not a multiple of {n}"),
            );
            if n == 1 {
                report.check(n, "r1<h1/2", r.is_positive() && r * 2 < h, || {
                    format!("r = {r} is not in (0, {h}/2)")
                });
            }
            let bad_k = k
                .iter()
                .position(|x| !x.is_positive() || !(x % &mult).is_zero());
            match (mv.level(n - 1), bad_k) {
                (_, Some(i)) => report.push(
                    n,
                    "(c)",
                    Status::Fail(format!(
                        "k[{i}] = {} is not a positive multiple of {mult}",
                        k[i]
                    )),
                ),
                (Some(prev), None) => {
                    let e = meta.eps_value("e").and_then(|s| s.parse::<Rational>().ok());
                    let st = judge(k_window(cert, prev, k, &h, e.as_ref()))?;
                    report.push(n, "(c)", st);
                }
                (None, None) => report.push(
                    n,
                    "(c)",
                    Status::Unverifiable(format!("no measures for level {}", n - 1)),
                ),
            }
            match (mv.level(n - 1), mv.level(n)) {
                (Some(prev), Some(c)) => {
                    let want = next_measures(prev, k, r, &h);
                    let bad = c.iter().zip(&want).position(|(a, b)| a != b);
                    let f = || match bad {
                        Some(i) => Status::Fail(format!(
                            "c[{n}][{i}] = {} but (c - k/h)/r = {}",
                            c[i], want[i]
                        )),
                        None => Status::Pass,
                    };
                    report.push(n, "(e)", f());
                    report.push(n, "hyp(4):measures", f());
                }
                _ => {
                    for hyp in ["(e)", "hyp(4):measures"] {
                        report.push(n, hyp, Status::Unverifiable("measures missing".into()));
                    }
                }
            }
        }
        _ => {
            for hyp in [
                "(f)",
                "hyp(4):counts",
                "(d)",
                "hyp(5):multiples",
                "(c)",
                "(e)",
                "hyp(4):measures",
            ] {
                report.push(
                    n,
                    hyp,
                    Status::Unverifiable(format!("meta k/r missing at level {n}")),
                );
            }
        }
    }
    match mv.level(n) {
        Some(c) => {
            report.push(
                n,
                "hyp(5):mass",
                mass_check(c, &h).map_or(Status::Pass, Status::Fail),
            );
            let st = judge((|| {
                for (i, s) in c.iter().enumerate() {
                    if cert.sign(s)? != Ordering::Greater {
                        return Ok(Some(format!("c[{n}][{i}] = {s} is not positive")));
                    }
                }
                Ok(None)
            })())?;
            report.push(n, "positivity", st);
            match mv.level(n - 1) {
                Some(prev) => report.push(
                    n,
                    "recurrence",
                    recurrence_check(&t, prev, c).map_or(Status::Pass, Status::Fail),
                ),
                None => report.push(
                    n,
                    "recurrence",
                    Status::Unverifiable("measures missing".into()),
                ),
            }
            let bound = |_m: usize| -> Result<Rational> {
                Ok(Rational::new(BigInt::one(), BigInt::one() << n))
            };
            let st = judge(frequency_check(cert, gs, mv, n, &bound, false))?;
            report.push(n, "hyp(6)", st);
        }
        None => {
            for hyp in ["hyp(5):mass", "positivity", "recurrence", "hyp(6)"] {
                report.push(
                    n,
                    hyp,
                    Status::Unverifiable(format!("no measures for level {n}")),
                );
            }
        }
    }
    if n > 1 {
        let st = aligned_check(gs, n)?;
        report.push(n, "(h)", st.map_or(Status::Pass, Status::Fail));
    }
    Ok(())
}

/// `c - e/N < k/h < c` for every word; the lower side needs `e`.
fn k_window(
    cert: &Certifier<'_>,
    prev: &[ParamScalar],
    k: &[BigInt],
    h: &BigInt,
    e: Option<&Rational>,
) -> Result<Option<String>> {
    let n = prev.len() as u64;
    for (i, (c, ki)) in prev.iter().zip(k).enumerate() {
        let kh = ParamScalar::rational(q(ki, h));
        if !cert.lt(&kh, c)? {
            return Ok(Some(format!("k[{i}]/h = {} is not below c", q(ki, h))));
        }
        match e {
            Some(e) => {
                let low = c - &ParamScalar::rational(e / rat_int(n));
                if !cert.lt(&low, &kh)? {
                    return Ok(Some(format!(
                        "k[{i}]/h = {} is not above c - e/N",
                        q(ki, h)
                    )));
                }
            }
            None => {
                return Err(Error::Indeterminate(
                    "meta e missing, lower window unknown".into(),
                ))
            }
        }
    }
    Ok(None)
}

fn certify_rank(
    gs: &GeneratingSequence,
    mv: &MeasureVector,
    basis: &ParamBasis,
    params: Option<&[ParamScalar]>,
    big_n: usize,
    report: &mut VerifyReport,
) -> Result<()> {
    let last = gs.last_level();
    if (0..=last).any(|n| !mv.covers(n)) {
        report.push(
            last,
            "gamma:dim",
            Status::Unverifiable("measures missing".into()),
        );
        report.certificates.push(format!("rank: at most {big_n}"));
        return Ok(());
    }
    let (g, _) = gamma_from_system(gs, mv, last, basis.len().max(mv.coord_len()))?;
    let d = g.dimension();
    report.check(last, "gamma:dim<=N", d <= big_n, || {
        format!("gamma dimension {d} exceeds {big_n}")
    });
    if let Some(xs) = params {
        if params_independent(xs) {
            report.check(last, "gamma:dim=N", d == big_n, || {
                format!("independent parameters but gamma dimension {d}")
            });
        }
    }
    report.certificates.push(format!("gamma dimension: {d}"));
    if d == big_n {
        report.certificates.push(format!("rank: exactly {big_n}"));
    } else {
        report.certificates.push(format!("rank: at most {big_n}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rational_config(first: Option<i64>) -> RankConfig {
        let basis = ParamBasis::unit();
        let mut cfg = RankConfig::new(basis, 2, vec![ParamScalar::rational(rat(2, 5))], 1);
        cfg.first_length = first.map(BigInt::from);
        cfg
    }

    #[test]
    fn first_level_with_forced_length() {
        let (gs, mv) = build_rank_subshift(&rational_config(Some(20))).unwrap();
        let meta = &gs.level(1).unwrap().meta;
        assert_eq!(
            meta.k.as_ref().unwrap(),
            &vec![BigInt::from(6), BigInt::from(10)]
        );
        assert_eq!(meta.r.as_ref().unwrap(), &BigInt::from(4));
        let c = mv.level(1).unwrap();
        assert_eq!(c[0], ParamScalar::rational(rat(1, 40)));
        assert_eq!(c[1], ParamScalar::rational(rat(1, 40)));
    }

    #[test]
    fn first_level_default_length() {
        let (gs, _) = build_rank_subshift(&rational_config(None)).unwrap();
        assert_eq!(gs.h(1).unwrap(), &BigInt::from(16));
    }

    #[test]
    fn infeasible_forced_length() {
        assert!(matches!(
            build_rank_subshift(&rational_config(Some(4))),
            Err(Error::Infeasible { level: 1, .. })
        ));
    }

    #[test]
    fn shifted_params_land_in_window() {
        let basis = ParamBasis::sqrt_primes(&[2, 3]).unwrap();
        let cfg = RankConfig::from_exprs(basis, 3, &["sqrt2", "sqrt3"], 1).unwrap();
        let ys = shifted_params(&cfg).unwrap();
        assert_eq!(ys[0], cfg.basis.parse_expr("sqrt2-4/3").unwrap());
        assert_eq!(ys[1], cfg.basis.parse_expr("sqrt3-3/2").unwrap());
    }

    #[test]
    fn small_build_verifies() {
        let basis = ParamBasis::sqrt_primes(&[2, 3]).unwrap();
        let cfg = RankConfig::from_exprs(basis, 3, &["sqrt2", "sqrt3"], 3).unwrap();
        let (gs, mv) = build_rank_subshift(&cfg).unwrap();
        let report =
            verify_rank_invariants(&gs, &mv, &cfg.basis, Some(&cfg.params), &cfg.precision)
                .unwrap();
        assert!(report.all_pass(), "{report}");
        assert!(report.certificates.contains(&"rank: exactly 3".to_string()));
    }
}
