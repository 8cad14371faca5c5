//! The `sadic` command-line front end.
//!
//! Exit status: 0 success or equivalent, 1 inequivalent, 2 error,
//! 3 indeterminate comparison.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use sha2::{Digest, Sha256};

use crate::build_rank::{build_rank_subshift, verify_rank_invariants, RankConfig};
use crate::build_toe::{build_toeplitz_reduction, verify_toe_invariants, ToeConfig};
use crate::error::{Error, Result};
use crate::gamma::{decision_text, fn_equivalent, fn_witness, gamma_from_system, orbit_equivalent};
use crate::gsq::{load_gsq, write_gsq};
use crate::measures::{check_measure_consistency, kr_from_level, measure_report, MeasureVector};
use crate::report::VerifyReport;
use crate::scalars::{dyadic_width, ParamBasis, ParamScalar, Rational};
use crate::toeplitz::regularity_profile;
use crate::verify::verify_by_header;
use crate::words::GeneratingSequence;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INEQUIVALENT: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sadic",
    version,
    about = "Toeplitz and S-adic subshift constructions and orbit-equivalence decisions"
)]
pub struct Cli {
    /// Comparison precision as a power of two (width 2^-bits).
    #[arg(
        long,
        global = true,
        env = "SADIC_PRECISION_BITS",
        default_value_t = 512
    )]
    pub precision_bits: u32,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a regular binary Toeplitz sequence from basis parameters.
    ConstructToe(ConstructToe),
    /// Build an N-letter Toeplitz sequence of rank N.
    ConstructRank(ConstructRank),
    /// Structure, regularity and invariant checks of a GSQ file.
    Analyze(Inspect),
    /// Measures, Kakutani-Rohlin towers and frequency bounds.
    Measure(MeasureArgs),
    /// Orbit-equivalence verdict for two GSQ files.
    Compare(CompareArgs),
    /// Decide whether two parameter tuples span the same Q-space with 1.
    DecideFn(DecideFn),
}

#[derive(Debug, Args)]
pub struct ConstructToe {
    #[arg(long)]
    pub basis: PathBuf,
    /// Basis entry names, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub params: Vec<String>,
    #[arg(long)]
    pub levels: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConstructRank {
    /// Alphabet size.
    #[arg(long = "n")]
    pub n: usize,
    #[arg(long)]
    pub basis: PathBuf,
    /// Parameter expressions such as `sqrt2` or `2*sqrt3-1/5`, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub params: Vec<String>,
    #[arg(long)]
    pub levels: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Forces the first word length.
    #[arg(long)]
    pub h1: Option<u64>,
}

#[derive(Debug, Args)]
pub struct Inspect {
    pub gsq: PathBuf,
    /// Basis file; defaults to the one named in the GSQ header.
    #[arg(long)]
    pub basis: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    pub gsq: PathBuf,
    #[arg(long)]
    pub basis: Option<PathBuf>,
    /// Level at which frequencies are counted (default: last).
    #[arg(long)]
    pub depth: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long)]
    pub basis: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecideFn {
    #[arg(long = "n")]
    pub n: usize,
    #[arg(long)]
    pub basis: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub x: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub y: Vec<String>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_indeterminate() {
                EXIT_INDETERMINATE
            } else {
                EXIT_ERROR
            }
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let prec = dyadic_width(cli.precision_bits);
    match &cli.command {
        Command::ConstructToe(c) => construct_toe(c, cli.precision_bits, &prec, out),
        Command::ConstructRank(c) => construct_rank(c, cli.precision_bits, &prec, out),
        Command::Analyze(c) => analyze(c, &prec, out),
        Command::Measure(c) => measure(c, &prec, out),
        Command::Compare(c) => compare(c, out),
        Command::DecideFn(c) => decide_fn(c, out),
    }
}

fn load_basis(path: &Path) -> Result<ParamBasis> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidBasis(format!("{}: {e}", path.display())))?;
    ParamBasis::parse(&text, None)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes the GSQ and `<out>.manifest`: command, config hash, input and
/// output digests, tool version.
fn write_outputs(
    command: &str,
    config: &str,
    basis_path: &Path,
    out_path: &Path,
    gsq: &str,
) -> Result<PathBuf> {
    std::fs::write(out_path, gsq)?;
    let basis_bytes = std::fs::read(basis_path)?;
    let manifest = format!(
        "command: {command}\nconfig: {config}\nconfig-sha256: {}\ninput: {} sha256 {}\noutput: {} sha256 {}\ntool: sadic {}\noutcome: ok\n",
        sha256_hex(config.as_bytes()),
        basis_path.display(),
        sha256_hex(&basis_bytes),
        out_path.display(),
        sha256_hex(gsq.as_bytes()),
        env!("CARGO_PKG_VERSION"),
    );
    let mut name = out_path.as_os_str().to_owned();
    name.push(".manifest");
    let manifest_path = PathBuf::from(name);
    std::fs::write(&manifest_path, manifest)?;
    Ok(manifest_path)
}

fn construct_toe(c: &ConstructToe, bits: u32, prec: &Rational, out: &mut dyn Write) -> Result<i32> {
    let basis = load_basis(&c.basis)?;
    let names: Vec<&str> = c.params.iter().map(|s| s.trim()).collect();
    let mut cfg = ToeConfig::from_names(basis, &names, c.levels)?;
    cfg.precision = prec.clone();
    let (mut gs, mv) = build_toeplitz_reduction(&cfg)?;
    gs.header.basis = Some(c.basis.display().to_string());
    let report = verify_toe_invariants(&gs, &mv, &cfg.basis, Some(&cfg.params), prec)?;
    let config = format!(
        "construct-toe params={} levels={} precision-bits={bits}",
        names.join(","),
        c.levels
    );
    let manifest = write_outputs(
        "construct-toe",
        &config,
        &c.basis,
        &c.out,
        &write_gsq(&gs, &mv),
    )?;
    summarize_build(out, &gs, &report, &c.out, &manifest)?;
    Ok(if report.all_pass() {
        EXIT_OK
    } else {
        EXIT_ERROR
    })
}

fn construct_rank(
    c: &ConstructRank,
    bits: u32,
    prec: &Rational,
    out: &mut dyn Write,
) -> Result<i32> {
    let basis = load_basis(&c.basis)?;
    let exprs: Vec<&str> = c.params.iter().map(|s| s.trim()).collect();
    let mut cfg = RankConfig::from_exprs(basis, c.n, &exprs, c.levels)?;
    cfg.precision = prec.clone();
    cfg.first_length = c.h1.map(BigInt::from);
    let (mut gs, mv) = build_rank_subshift(&cfg)?;
    gs.header.basis = Some(c.basis.display().to_string());
    let report = verify_rank_invariants(&gs, &mv, &cfg.basis, Some(&cfg.params), prec)?;
    let config = format!(
        "construct-rank n={} params={} levels={} h1={} precision-bits={bits}",
        c.n,
        exprs.join(","),
        c.levels,
        c.h1.map_or("auto".to_string(), |h| h.to_string())
    );
    let manifest = write_outputs(
        "construct-rank",
        &config,
        &c.basis,
        &c.out,
        &write_gsq(&gs, &mv),
    )?;
    summarize_build(out, &gs, &report, &c.out, &manifest)?;
    Ok(if report.all_pass() {
        EXIT_OK
    } else {
        EXIT_ERROR
    })
}

fn summarize_build(
    out: &mut dyn Write,
    gs: &GeneratingSequence,
    report: &VerifyReport,
    path: &Path,
    manifest: &Path,
) -> Result<()> {
    for n in gs.level_numbers() {
        writeln!(
            out,
            "level {n}: {} words, h = {}",
            gs.word_count(n)?,
            gs.h(n)?
        )?;
    }
    for c in report.failures() {
        writeln!(out, "{c}")?;
    }
    for c in &report.certificates {
        writeln!(out, "{c}")?;
    }
    let failed = report.failures().count();
    writeln!(
        out,
        "verification: {} checks, {failed} failed, {} unverifiable",
        report.checks.len(),
        report.unverifiable().count()
    )?;
    writeln!(out, "wrote {}", path.display())?;
    writeln!(out, "wrote {}", manifest.display())?;
    Ok(())
}

/// GSQ contents plus the basis resolved from `--basis` or the header path
/// (relative to the GSQ file).
struct Loaded {
    gs: GeneratingSequence,
    mv: MeasureVector,
    basis: Option<ParamBasis>,
}

fn load(path: &Path, basis: Option<&PathBuf>) -> Result<Loaded> {
    let (gs, mv) = load_gsq(path)?;
    let basis_path = match basis {
        Some(p) => Some(p.clone()),
        None => gs.header.basis.as_ref().map(|b| {
            let p = PathBuf::from(b);
            if p.is_absolute() || p.exists() {
                p
            } else {
                path.parent().unwrap_or(Path::new(".")).join(p)
            }
        }),
    };
    let basis = match basis_path {
        Some(p) => Some(load_basis(&p)?),
        None => None,
    };
    if let Some(b) = &basis {
        if mv.coord_len() > b.len() {
            return Err(Error::BasisMismatch(format!(
                "{} stores {} coordinates but the basis has {}",
                path.display(),
                mv.coord_len(),
                b.len()
            )));
        }
    }
    Ok(Loaded { gs, mv, basis })
}

fn verify_loaded(l: &Loaded, prec: &Rational) -> Result<Option<VerifyReport>> {
    let Some(basis) = &l.basis else {
        return Ok(None);
    };
    verify_by_header(&l.gs, &l.mv, basis, prec)
}

fn analyze(c: &Inspect, prec: &Rational, out: &mut dyn Write) -> Result<i32> {
    let l = load(&c.gsq, c.basis.as_ref())?;
    let structure = l.gs.validate_structure();
    writeln!(out, "structure:")?;
    write!(out, "{structure}")?;
    if let Some((name, level, word, detail)) = structure.first_violation() {
        writeln!(
            out,
            "first violation: {name} at level {level} word {word}: {detail}"
        )?;
        return Ok(EXIT_ERROR);
    }
    if l.gs.last_level() > l.gs.first_level() {
        writeln!(out, "regularity:")?;
        for e in regularity_profile(&l.gs)? {
            writeln!(out, "  {e}")?;
        }
    }
    match verify_loaded(&l, prec)? {
        Some(report) => {
            writeln!(out, "verification:")?;
            write!(out, "{report}")?;
            if let Some(f) = report.first_failure() {
                writeln!(out, "first failure: {f}")?;
                return Ok(EXIT_ERROR);
            }
        }
        None => writeln!(out, "verification: skipped (no engine header or basis)")?,
    }
    Ok(EXIT_OK)
}

fn measure(c: &MeasureArgs, prec: &Rational, out: &mut dyn Write) -> Result<i32> {
    let l = load(&c.gsq, c.basis.as_ref())?;
    let Some(last) = l.mv.last_level() else {
        writeln!(
            out,
            "no measures recorded in {}; measure commands need `c=` meta",
            c.gsq.display()
        )?;
        return Ok(EXIT_ERROR);
    };
    let basis = match &l.basis {
        Some(b) => b.clone(),
        None if l.mv.coord_len() <= 1 => ParamBasis::unit(),
        None => {
            return Err(Error::BasisMismatch(
                "measures have irrational coordinates but no basis was given".into(),
            ))
        }
    };
    let consistency = check_measure_consistency(&l.gs, &l.mv, &basis, prec)?;
    write!(out, "{consistency}")?;
    write!(out, "{}", measure_report(&l.gs, &l.mv, &basis, c.depth)?)?;
    let kr = kr_from_level(&l.gs, &l.mv, last)?;
    writeln!(out, "kakutani-rohlin partition at level {last}:")?;
    write!(out, "{kr}")?;
    Ok(if consistency.ok() {
        EXIT_OK
    } else {
        EXIT_ERROR
    })
}

fn compare(c: &CompareArgs, out: &mut dyn Write) -> Result<i32> {
    let a = load(&c.a, c.basis.as_ref())?;
    let b = load(&c.b, c.basis.as_ref())?;
    if let (Some(ba), Some(bb)) = (&a.basis, &b.basis) {
        if ba != bb {
            return Err(Error::BasisMismatch(
                "the two files use different bases".into(),
            ));
        }
    }
    let dim = a
        .basis
        .as_ref()
        .map_or(0, |b| b.len())
        .max(a.mv.coord_len())
        .max(b.mv.coord_len())
        .max(1);
    let ga = gamma_of(&a, &c.a, dim)?;
    let gb = gamma_of(&b, &c.b, dim)?;
    writeln!(out, "gamma a: dimension {}", ga.dimension())?;
    writeln!(out, "gamma b: dimension {}", gb.dimension())?;
    let perm = orbit_equivalent(&ga, &gb);
    writeln!(out, "{}", decision_text(perm.as_deref()))?;
    Ok(if perm.is_some() {
        EXIT_OK
    } else {
        EXIT_INEQUIVALENT
    })
}

fn gamma_of(l: &Loaded, path: &Path, dim: usize) -> Result<crate::gamma::GammaModule> {
    let last = l.gs.last_level();
    if !(l.gs.first_level()..=last).all(|n| l.mv.covers(n)) {
        return Err(Error::InconsistentMeasure(format!(
            "{} lacks measures for some levels",
            path.display()
        )));
    }
    Ok(gamma_from_system(&l.gs, &l.mv, last, dim)?.0)
}

fn parse_tuple(basis: &ParamBasis, items: &[String]) -> Result<Vec<ParamScalar>> {
    items.iter().map(|s| basis.parse_expr(s.trim())).collect()
}

fn decide_fn(c: &DecideFn, out: &mut dyn Write) -> Result<i32> {
    let basis = load_basis(&c.basis)?;
    let xs = parse_tuple(&basis, &c.x)?;
    let ys = parse_tuple(&basis, &c.y)?;
    if c.n < 2 || xs.len() + 1 != c.n || ys.len() + 1 != c.n {
        return Err(Error::InvalidConfig(format!(
            "N = {} needs {} values in each of --x and --y",
            c.n,
            c.n.saturating_sub(1)
        )));
    }
    if fn_equivalent(&xs, &ys) {
        writeln!(out, "equivalent: yes")?;
        if let Some(m) = fn_witness(&xs, &ys) {
            for row in m {
                let r: Vec<String> = row.iter().map(|q| q.to_string()).collect();
                writeln!(out, "M: {}", r.join(" "))?;
            }
        }
        Ok(EXIT_OK)
    } else {
        writeln!(out, "equivalent: no")?;
        Ok(EXIT_INEQUIVALENT)
    }
}
