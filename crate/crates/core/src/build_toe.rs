//! Inductive construction of regular binary Toeplitz generating sequences
//! whose measure group is spanned by `1` and a list of basis parameters.
//!
//! Level `n` has `n + 1` words. The measures `c_{n,i}` are chosen so that the
//! top `n x n` block of `T^{n-1}_n / h_n` maps `(c_{n,0}, .., c_{n,n-1})` plus
//! the fixed last coordinate onto the previous level, and the last measure
//! lies in `b_{n-1} + Q`, where `b_i = a_{pi0(i)} / pi1(i)` runs through the
//! parameters under a fixed pairing.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::certify::{
    agreement_check, aligned_check, annotate, frequency_check, identity_z, is_even, judge,
    mass_check, q, recurrence_check, structure_checks, Certifier,
};
use crate::error::{Error, Result};
use crate::layout::canonical_layout;
use crate::linalg::{inverse, mul_z, solve, QMatrix, ZMatrix};
use crate::measures::MeasureVector;
use crate::report::{Status, VerifyReport};
use crate::scalars::{
    default_precision, rat, rat_int, ParamBasis, ParamKind, ParamScalar, Rational,
};
use crate::words::{GeneratingSequence, Header, Level, LevelMeta};

pub const ENGINE: &str = "toe";
pub const PAIRING: &str = "cantor-v1";

/// Most halvings of the rounding tolerance tried per level.
const MAX_HALVINGS: usize = 40;
/// Candidate lengths tried per tolerance.
const MAX_LENGTH_TRIES: usize = 64;

#[derive(Clone, Debug)]
pub struct ToeConfig {
    pub basis: ParamBasis,
    /// Basis indices of the parameters `a_0, a_1, ..`.
    pub params: Vec<usize>,
    /// Last level built (levels run from 1).
    pub levels: usize,
    pub precision: Rational,
}

impl ToeConfig {
    pub fn new(basis: ParamBasis, params: Vec<usize>, levels: usize) -> Self {
        ToeConfig {
            basis,
            params,
            levels,
            precision: default_precision(),
        }
    }

    /// Config from parameter names such as `sqrt2`.
    pub fn from_names(basis: ParamBasis, names: &[&str], levels: usize) -> Result<Self> {
        let params = names
            .iter()
            .map(|n| {
                basis
                    .index_of(n)
                    .ok_or_else(|| Error::InvalidConfig(format!("`{n}` is not a basis entry")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ToeConfig::new(basis, params, levels))
    }

    pub fn validate(&self) -> Result<()> {
        if self.params.is_empty() {
            return Err(Error::InvalidConfig("no parameters".into()));
        }
        if self.levels == 0 {
            return Err(Error::InvalidConfig(
                "at least one level is required".into(),
            ));
        }
        for (k, &p) in self.params.iter().enumerate() {
            if p >= self.basis.len() {
                return Err(Error::InvalidConfig(format!(
                    "parameter index {p} outside the basis"
                )));
            }
            if matches!(self.basis.entries()[p].kind, ParamKind::Unit) {
                return Err(Error::InvalidConfig(format!(
                    "parameter `{}` is the constant",
                    self.basis.name(p)
                )));
            }
            if self.params[..k].contains(&p) {
                return Err(Error::InvalidConfig(format!(
                    "parameter `{}` repeated",
                    self.basis.name(p)
                )));
            }
        }
        Ok(())
    }

    pub fn param_names(&self) -> Vec<String> {
        self.params
            .iter()
            .map(|&p| self.basis.name(p).to_string())
            .collect()
    }
}

/// Cantor pairing of `(a, b)`.
pub fn pair(a: u64, b: u64) -> u64 {
    (a + b) * (a + b + 1) / 2 + b
}

/// Inverse of [`pair`].
pub fn unpair(i: u64) -> (u64, u64) {
    let w = ((8 * i as u128 + 1).isqrt() as u64 - 1) / 2;
    let t = w * (w + 1) / 2;
    let b = i - t;
    (w - b, b)
}

/// `(pi0(i), pi1(i))` with `pi1 >= 1`.
pub fn projections(i: usize) -> (usize, usize) {
    let (a, b) = unpair(i as u64);
    (a as usize, b as usize + 1)
}

/// `b_i = a_{pi0(i)} / pi1(i)`, reading the parameter list cyclically.
pub fn b_param(params: &[usize], i: usize) -> ParamScalar {
    let (p0, p1) = projections(i);
    ParamScalar::unit_vector(params[p0 % params.len()]).scale(&rat(1, p1 as i64))
}

struct ToeStep {
    t: ZMatrix,
    c: Vec<ParamScalar>,
    meta: LevelMeta,
}

pub fn build_toeplitz_reduction(cfg: &ToeConfig) -> Result<(GeneratingSequence, MeasureVector)> {
    cfg.validate()?;
    let cert = Certifier::new(&cfg.basis, &cfg.precision);
    let b0 = b_param(&cfg.params, 0);
    let shift = cfg
        .basis
        .rational_shift_into(&b0, &rat(1, 4), &rat(3, 4), false, &cfg.precision)
        .map_err(|e| annotate(e, 1, || format!("b0 = {b0}")))?;
    let c11 = &b0 + &ParamScalar::rational(shift.clone());
    let c10 = &ParamScalar::one() - &c11;
    let mut gs = GeneratingSequence::new(
        vec!['0', '1'],
        1,
        vec![Level {
            buildings: vec![vec![0], vec![1]],
            meta: LevelMeta {
                eps: vec![("q".into(), shift.to_string())],
                ..Default::default()
            },
        }],
    )?;
    gs.header = Header {
        basis: None,
        engine: Some(ENGINE.into()),
        pairing: Some(PAIRING.into()),
        params: Some(cfg.param_names().join(",")),
    };
    let mut measures = vec![vec![c10, c11]];
    // cum[m - 1] = T^m_{n-1}
    let mut cum: Vec<ZMatrix> = vec![identity_z(2)];
    for n in 2..=cfg.levels {
        let step = toe_level(&cert, cfg, &gs, &measures, &cum, n)?;
        let buildings =
            canonical_layout(&step.t).map_err(|state| Error::Infeasible { level: n, state })?;
        gs.push_level(Level {
            buildings,
            meta: step.meta,
        })?;
        for m in cum.iter_mut() {
            *m = mul_z(m, &step.t);
        }
        cum.push(identity_z(n + 1));
        measures.push(step.c);
    }
    Ok((gs, MeasureVector::new(1, measures)))
}

/// `U_{j,i}`: `c + e2` on the diagonal, `c - e2/(n-1)` elsewhere, `c` in the
/// last column.
fn targets(prev: &[ParamScalar], eps2: &Rational, n: usize) -> Vec<Vec<ParamScalar>> {
    let off = eps2 / rat_int(n as u64 - 1);
    (0..n)
        .map(|j| {
            (0..=n)
                .map(|i| {
                    if i == n {
                        prev[j].clone()
                    } else if i == j {
                        &prev[j] + &ParamScalar::rational(eps2.clone())
                    } else {
                        &prev[j] - &ParamScalar::rational(off.clone())
                    }
                })
                .collect()
        })
        .collect()
}

fn toe_level(
    cert: &Certifier<'_>,
    cfg: &ToeConfig,
    gs: &GeneratingSequence,
    measures: &[Vec<ParamScalar>],
    cum: &[ZMatrix],
    n: usize,
) -> Result<ToeStep> {
    let h_prev = gs.h(n - 1)?.clone();
    let prev = &measures[n - 2];
    let dump = |extra: &str| {
        let cs: Vec<String> = prev.iter().map(|c| cfg.basis.format_expr(c)).collect();
        format!("h_prev={h_prev} c_prev=[{}] {extra}", cs.join("; "))
    };
    let mut bound = Rational::new(BigInt::one(), BigInt::from((n - 1) * n) * &h_prev);
    for m in 1..n - 1 {
        let hm = gs.h(m)?;
        for row in &cum[m - 1] {
            let mj: BigInt = row.iter().sum();
            let b = Rational::new(BigInt::one(), BigInt::from(m * (m + 1)) * hm * mj);
            if b < bound {
                bound = b;
            }
        }
    }
    let eps1 = bound / rat_int(2);
    let mut low = eps1.clone() / rat_int(4);
    for c in prev {
        let l = cert
            .basis
            .positive_lower_bound(c, cert.prec)
            .map_err(|e| annotate(e, n, || dump("")))?
            / rat_int(4);
        if l < low {
            low = l;
        }
    }
    let eps2 = low / rat_int(2);
    let u = targets(prev, &eps2, n);
    let b = b_param(&cfg.params, n - 1);
    let mut eps4 = &eps2 / rat_int(2);
    for _ in 0..MAX_HALVINGS {
        let found = try_tolerance(cert, gs, measures, cum, n, &u, &b, &eps4)
            .map_err(|e| annotate(e, n, || dump(&format!("eps4={eps4}"))))?;
        if let Some((t, c, eps3)) = found {
            let meta = LevelMeta {
                k: None,
                r: None,
                eps: vec![
                    ("e1".into(), eps1.to_string()),
                    ("e2".into(), eps2.to_string()),
                    ("e3".into(), cfg.basis.format_expr(&eps3)),
                    ("e4".into(), eps4.to_string()),
                ],
            };
            return Ok(ToeStep { t, c, meta });
        }
        eps4 /= rat_int(2);
    }
    Err(Error::Infeasible {
        level: n,
        state: dump(&format!("no admissible length down to eps4={eps4}")),
    })
}

/// Largest-remainder rounding of `tau` to even integers summing to `total`.
fn even_round(tau: &[Rational], total: &BigInt) -> Vec<BigInt> {
    let half: Vec<Rational> = tau.iter().map(|t| t / rat_int(2)).collect();
    let mut f: Vec<BigInt> = half.iter().map(|h| h.floor().to_integer()).collect();
    let fracs: Vec<Rational> = half
        .iter()
        .zip(&f)
        .map(|(h, fl)| h - Rational::from_integer(fl.clone()))
        .collect();
    let mut deficit: BigInt = total / 2 - f.iter().sum::<BigInt>();
    let mut order: Vec<usize> = (0..tau.len()).collect();
    if deficit.is_positive() {
        order.sort_by(|&a, &b| fracs[b].cmp(&fracs[a]).then(a.cmp(&b)));
        let mut k = 0;
        while deficit.is_positive() {
            f[order[k % order.len()]] += 1;
            deficit -= 1;
            k += 1;
        }
    } else {
        order.sort_by(|&a, &b| fracs[a].cmp(&fracs[b]).then(a.cmp(&b)));
        let mut k = 0;
        while deficit.is_negative() {
            f[order[k % order.len()]] -= 1;
            deficit += 1;
            k += 1;
        }
    }
    f.into_iter().map(|x| x * 2).collect()
}

fn layout_ready(t: &ZMatrix) -> bool {
    t.iter()
        .flatten()
        .all(|x| x >= &BigInt::from(6) && is_even(x))
}

/// `e3 = h b + s/2^t` inside `(1/(2(n+1)), 1/(n+1))`, smallest `t` then
/// smallest `|s|`.
fn choose_eps3(cert: &Certifier<'_>, h: &BigInt, b: &ParamScalar, n: usize) -> Result<ParamScalar> {
    let lo = rat(1, 2 * (n as i64 + 1));
    let hi = rat(1, n as i64 + 1);
    let base = b.scale(&Rational::from_integer(h.clone()));
    let mut two_t = BigInt::one();
    loop {
        let scale = Rational::from_integer(two_t.clone());
        let low = (&ParamScalar::rational(lo.clone()) - &base).scale(&scale);
        let high = (&ParamScalar::rational(hi.clone()) - &base).scale(&scale);
        let s_min: BigInt = cert.basis.floor(&low, cert.prec)? + 1;
        let s_max = -cert.basis.floor(&-&high, cert.prec)? - 1;
        if s_min <= s_max {
            let s = if s_min.is_positive() {
                s_min
            } else if s_max.is_negative() {
                s_max
            } else {
                BigInt::zero()
            };
            return Ok(&base + &ParamScalar::rational(Rational::new(s, two_t)));
        }
        two_t *= 2;
    }
}

#[allow(clippy::too_many_arguments)]
fn try_tolerance(
    cert: &Certifier<'_>,
    gs: &GeneratingSequence,
    measures: &[Vec<ParamScalar>],
    cum: &[ZMatrix],
    n: usize,
    u: &[Vec<ParamScalar>],
    b: &ParamScalar,
    eps4: &Rational,
) -> Result<Option<(ZMatrix, Vec<ParamScalar>, ParamScalar)>> {
    let h_prev = gs.h(n - 1)?;
    let prev = &measures[n - 2];
    let nn = BigInt::from(n);
    let step = BigInt::from(2).lcm(&(&nn / nn.gcd(h_prev)));
    let need: BigInt = (rat_int(4) / eps4 / Rational::from_integer(h_prev.clone()))
        .ceil()
        .to_integer();
    let rounded: BigInt = (need + &step - BigInt::one()) / &step * &step;
    let mut l = rounded.max(step.clone());
    for _ in 0..MAX_LENGTH_TRIES {
        let h = &l * h_prev;
        let hq = Rational::from_integer(h.clone());
        let width = Rational::new(BigInt::one(), &h * 64);
        let mut t: ZMatrix = vec![vec![BigInt::zero(); n + 1]; n];
        for i in 0..=n {
            let tau = (0..n)
                .map(|j| Ok(cert.basis.eval(&u[j][i], &width)?.midpoint() * &hq))
                .collect::<Result<Vec<_>>>()?;
            for (j, x) in even_round(&tau, &l).into_iter().enumerate() {
                t[j][i] = x;
            }
        }
        if !layout_ready(&t) || !bullets_hold(cert, &t, &h, u, eps4, n, &l)? {
            l += &step;
            continue;
        }
        let eps3 = choose_eps3(cert, &h, b, n)?;
        let a: QMatrix = (0..n)
            .map(|j| (0..n).map(|i| q(&t[j][i], &h)).collect())
            .collect();
        let rhs: Vec<ParamScalar> = (0..n)
            .map(|j| &prev[j] - &eps3.scale(&q(&t[j][n], &h)))
            .collect();
        let Some(mut x) = solve(&a, &rhs) else {
            l += &step;
            continue;
        };
        x.push(eps3.clone());
        for xi in &x {
            if !cert.in_open_unit(xi)? {
                return Ok(None);
            }
        }
        let inv_h = Rational::new(BigInt::one(), h.clone());
        let c: Vec<ParamScalar> = x.iter().map(|xi| xi.scale(&inv_h)).collect();
        for m in 1..n {
            let tm = mul_z(&cum[m - 1], &t);
            let cm = &measures[m - 1];
            let bound = Rational::new(BigInt::one(), BigInt::from(m * (m + 1)) * gs.h(m)?);
            for (j, row) in tm.iter().enumerate() {
                for x in row {
                    let diff = &ParamScalar::rational(q(x, &h)) - &cm[j];
                    if !cert.abs_within(&diff, &bound, true)? {
                        return Ok(None);
                    }
                }
            }
        }
        return Ok(Some((t, c, eps3)));
    }
    Ok(None)
}

/// The rounding conditions: `|T/h - U| < e4`, column sums `L`, and
/// `sum_j min_i T_{j,i} >= L/n`.
fn bullets_hold(
    cert: &Certifier<'_>,
    t: &ZMatrix,
    h: &BigInt,
    u: &[Vec<ParamScalar>],
    eps4: &Rational,
    n: usize,
    l: &BigInt,
) -> Result<bool> {
    Ok(bullet_violation(cert, t, h, u, Some(eps4), n, l)?.is_none())
}

fn bullet_violation(
    cert: &Certifier<'_>,
    t: &ZMatrix,
    h: &BigInt,
    u: &[Vec<ParamScalar>],
    eps4: Option<&Rational>,
    n: usize,
    l: &BigInt,
) -> Result<Option<String>> {
    for i in 0..=n {
        let col: BigInt = t.iter().map(|r| &r[i]).sum();
        if &col != l {
            return Ok(Some(format!("column {i} sums to {col}, expected {l}")));
        }
    }
    let mins: BigInt = t
        .iter()
        .map(|r| r.iter().min().cloned().unwrap_or_default())
        .sum();
    if mins * BigInt::from(n) < *l {
        return Ok(Some(format!("sum of row minima below {l}/{n}")));
    }
    if let Some(e4) = eps4 {
        for j in 0..n {
            for i in 0..=n {
                let diff = &ParamScalar::rational(q(&t[j][i], h)) - &u[j][i];
                if !cert.abs_within(&diff, e4, true)? {
                    return Ok(Some(format!(
                        "entry ({j}, {i}) is not within e4 of its target"
                    )));
                }
            }
        }
    }
    Ok(None)
}

/// Checks every level of an engine-shaped sequence. `params` (basis indices
/// of the `a_i`) enables the coset part of hypothesis (4).
pub fn verify_toe_invariants(
    gs: &GeneratingSequence,
    mv: &MeasureVector,
    basis: &ParamBasis,
    params: Option<&[usize]>,
    precision: &Rational,
) -> Result<VerifyReport> {
    check_toe_shape(gs, mv)?;
    let cert = Certifier::new(basis, precision);
    let mut report = VerifyReport::default();
    for n in gs.level_numbers() {
        verify_level(&cert, gs, mv, params, n, &mut report)?;
    }
    Ok(report)
}

fn check_toe_shape(gs: &GeneratingSequence, mv: &MeasureVector) -> Result<()> {
    if gs.first_level() != 1 || gs.alphabet().len() != 2 {
        return Err(Error::DimensionMismatch(
            "expected a binary sequence whose levels start at 1".into(),
        ));
    }
    for n in gs.level_numbers() {
        let count = gs.word_count(n)?;
        if count != n + 1 {
            return Err(Error::DimensionMismatch(format!(
                "level {n} has {count} words, expected {}",
                n + 1
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
    if !mv.is_empty() && mv.first_level != 1 {
        return Err(Error::DimensionMismatch(
            "measures must start at level 1".into(),
        ));
    }
    Ok(())
}

fn verify_level(
    cert: &Certifier<'_>,
    gs: &GeneratingSequence,
    mv: &MeasureVector,
    params: Option<&[usize]>,
    n: usize,
    report: &mut VerifyReport,
) -> Result<()> {
    structure_checks(report, gs, n, "hyp(1)")?;
    if !gs.is_constant_length(n)? {
        report.push(
            n,
            "hyp(2)",
            Status::Fail("level is not constant length".into()),
        );
        return Ok(());
    }
    let h = gs.h(n)?.clone();
    let nn = BigInt::from(n);
    report.check(n, "hyp(2)", (&h % &nn).is_zero(), || {
        format!("h = {h} is not a multiple of {n}")
    });
    if n > 1 {
        let hp = gs.h(n - 1)?;
        report.check(n, "hyp(2):nested-lengths", (&h % hp).is_zero(), || {
            format!("h = {h} is not a multiple of {hp}")
        });
    }
    agreement_check(report, gs, n, "hyp(3)")?;
    let missing = || Status::Unverifiable(format!("no measures recorded for level {n}"));
    match mv.level(n) {
        None => {
            for hyp in ["hyp(4)", "(**)", "hyp(5)", "hyp(6)"] {
                report.push(n, hyp, missing());
            }
        }
        Some(c) => {
            let st = judge((|| {
                for (i, s) in c.iter().enumerate() {
                    if !cert.in_open_unit(s)? {
                        return Ok(Some(format!("c[{n}][{i}] = {s} is outside (0, 1)")));
                    }
                }
                Ok(None)
            })())?;
            report.push(n, "hyp(4)", st);
            match params {
                Some(p) => {
                    let b = b_param(p, n - 1);
                    let diff = &c[n] - &b;
                    report.check(n, "hyp(4):coset", diff.as_rational().is_some(), || {
                        format!("c[{n}][{n}] - b_{} = {diff} is not rational", n - 1)
                    });
                }
                None => report.push(
                    n,
                    "hyp(4):coset",
                    Status::Unverifiable("parameters unknown".into()),
                ),
            }
            let st = mass_check(c, &h).map_or(Status::Pass, Status::Fail);
            report.push(n, "(**)", st);
            if n > 1 {
                match mv.level(n - 1) {
                    Some(prev) => {
                        let t = gs.incidence(n)?;
                        let mut detail = recurrence_check(&t, prev, c);
                        if detail.is_none() {
                            let top: QMatrix = (0..n)
                                .map(|j| {
                                    (0..n)
                                        .map(|i| Rational::from_integer(t[j][i].clone()))
                                        .collect()
                                })
                                .collect();
                            if inverse(&top).is_none() {
                                detail = Some("system is singular, solution not unique".into());
                            }
                        }
                        report.push(n, "hyp(5)", detail.map_or(Status::Pass, Status::Fail));
                    }
                    None => report.push(n, "hyp(5)", missing()),
                }
            }
            let bound = |m: usize| -> Result<Rational> {
                Ok(Rational::new(
                    BigInt::one(),
                    BigInt::from(m * (m + 1)) * gs.h(m)?,
                ))
            };
            let st = judge(frequency_check(cert, gs, mv, n, &bound, true))?;
            report.push(n, "hyp(6)", st);
        }
    }
    if n > 1 {
        bullet_checks(cert, gs, mv, n, &h, report)?;
    }
    Ok(())
}

fn bullet_checks(
    cert: &Certifier<'_>,
    gs: &GeneratingSequence,
    mv: &MeasureVector,
    n: usize,
    h: &BigInt,
    report: &mut VerifyReport,
) -> Result<()> {
    let t = gs.incidence(n)?;
    let l = h / gs.h(n - 1)?;
    let odd = t.iter().flatten().find(|x| !is_even(x)).cloned();
    report.check(n, "bullet:even", odd.is_none(), || {
        format!("count {} is odd", odd.unwrap_or_default())
    });
    let st = bullet_violation(cert, &t, h, &[], None, n, &l)?;
    report.push(
        n,
        "bullet:column-sums",
        st.map_or(Status::Pass, Status::Fail),
    );
    let st = aligned_check(gs, n)?;
    report.push(n, "bullet:aligned", st.map_or(Status::Pass, Status::Fail));
    let meta = &gs.level(n)?.meta;
    let e2 = meta
        .eps_value("e2")
        .and_then(|s| s.parse::<Rational>().ok());
    let e4 = meta
        .eps_value("e4")
        .and_then(|s| s.parse::<Rational>().ok());
    match (e2, e4, mv.level(n - 1)) {
        (Some(e2), Some(e4), Some(prev)) => {
            let u = targets(prev, &e2, n);
            let st = judge(bullet_violation(cert, &t, h, &u, Some(&e4), n, &l))?;
            report.push(n, "bullet:within-e4", st);
        }
        _ => report.push(
            n,
            "bullet:within-e4",
            Status::Unverifiable("meta e2/e4 or previous measures missing".into()),
        ),
    }
    match meta
        .eps_value("e1")
        .and_then(|s| s.parse::<Rational>().ok())
    {
        Some(e1) => {
            let hp = gs.h(n - 1)?;
            let mut bound = Rational::new(BigInt::one(), BigInt::from((n - 1) * n) * hp);
            for m in 1..n - 1 {
                let tm = gs.occurrence_matrix(m, n - 1)?;
                for row in &tm {
                    let mj: BigInt = row.iter().sum();
                    let b = Rational::new(BigInt::one(), BigInt::from(m * (m + 1)) * gs.h(m)? * mj);
                    if b < bound {
                        bound = b;
                    }
                }
            }
            report.check(n, "claim:e1", e1.is_positive() && e1 < bound, || {
                format!("e1 = {e1} is not below {bound}")
            });
        }
        None => report.push(
            n,
            "claim:e1",
            Status::Unverifiable("meta e1 missing".into()),
        ),
    }
    Ok(())
}
