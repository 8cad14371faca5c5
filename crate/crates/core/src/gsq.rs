//! GSQ text format for generating sequences with optional measures.
//!
//! ```text
//! gsq 1
//! alphabet: 01
//! basis: primes.basis
//! engine: toe
//! pairing: cantor-v1
//! params: sqrt2,sqrt3
//! level 1 len 1 h 1
//! w0: 0
//! w1: 1
//! meta: c=(2,-1;-1,1) eps=(q:-1)
//! level 2 len 256 h 256
//! ...
//! ```
//!
//! `len` is the building length, `h` the word length in letters. Scalars in
//! `c=` are coordinate lists over the basis. Measures must cover a prefix of
//! the levels.

use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::measures::MeasureVector;
use crate::scalars::ParamScalar;
use crate::words::{GeneratingSequence, Header, Level, LevelMeta};

pub const MAGIC: &str = "gsq 1";

/// Serializes `gs` with the measures of `mv` (levels `mv` lacks carry no `c=`).
pub fn write_gsq(gs: &GeneratingSequence, mv: &MeasureVector) -> String {
    let width = mv.coord_len().max(1);
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    let letters: String = gs.alphabet().iter().collect();
    let _ = writeln!(out, "alphabet: {letters}");
    let h = &gs.header;
    for (key, val) in [
        ("basis", &h.basis),
        ("engine", &h.engine),
        ("pairing", &h.pairing),
        ("params", &h.params),
    ] {
        if let Some(v) = val {
            let _ = writeln!(out, "{key}: {v}");
        }
    }
    for (idx, level) in gs.levels().iter().enumerate() {
        let n = gs.first_level() + idx;
        let len = level.buildings[0].len();
        match gs.h(n) {
            Ok(hn) => {
                let _ = writeln!(out, "level {n} len {len} h {hn}");
            }
            Err(_) => {
                let _ = writeln!(out, "level {n} len {len}");
            }
        }
        for (i, b) in level.buildings.iter().enumerate() {
            let _ = write!(out, "w{i}:");
            for x in b {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        let mut fields = Vec::new();
        if let Some(k) = &level.meta.k {
            let ks: Vec<String> = k.iter().map(|x| x.to_string()).collect();
            fields.push(format!("k=({})", ks.join(",")));
        }
        if let Some(r) = &level.meta.r {
            fields.push(format!("r={r}"));
        }
        if let Some(c) = mv.level(n) {
            let cs: Vec<String> = c.iter().map(|s| s.coords_text(width)).collect();
            fields.push(format!("c=({})", cs.join(";")));
        }
        if !level.meta.eps.is_empty() {
            let es: Vec<String> = level
                .meta
                .eps
                .iter()
                .map(|(k, v)| format!("{k}:{v}"))
                .collect();
            fields.push(format!("eps=({})", es.join(";")));
        }
        if !fields.is_empty() {
            let _ = writeln!(out, "meta: {}", fields.join(" "));
        }
    }
    out
}

struct PendingLevel {
    number: usize,
    line: usize,
    len: usize,
    h: Option<BigInt>,
    buildings: Vec<Vec<u32>>,
    meta: LevelMeta,
    c: Option<Vec<ParamScalar>>,
}

fn gsq_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Gsq {
        line,
        msg: msg.into(),
    }
}

fn parenthesized<'a>(line: usize, key: &str, v: &'a str) -> Result<&'a str> {
    v.strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| gsq_err(line, format!("`{key}=` value must be parenthesized")))
}

fn parse_meta(line: usize, text: &str, level: &mut PendingLevel) -> Result<()> {
    for field in text.split_whitespace() {
        let (key, val) = field
            .split_once('=')
            .ok_or_else(|| gsq_err(line, format!("meta field `{field}` lacks `=`")))?;
        match key {
            "k" => {
                let ks = parenthesized(line, key, val)?
                    .split(',')
                    .map(|x| {
                        x.parse::<BigInt>()
                            .map_err(|_| gsq_err(line, format!("bad k entry `{x}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                level.meta.k = Some(ks);
            }
            "r" => {
                level.meta.r = Some(
                    val.parse()
                        .map_err(|_| gsq_err(line, format!("bad r value `{val}`")))?,
                );
            }
            "c" => {
                let cs = parenthesized(line, key, val)?
                    .split(';')
                    .map(|x| {
                        ParamScalar::parse_coords(x)
                            .ok_or_else(|| gsq_err(line, format!("bad coordinates `{x}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                level.c = Some(cs);
            }
            "eps" => {
                let inner = parenthesized(line, key, val)?;
                if !inner.is_empty() {
                    for item in inner.split(';') {
                        let (k, v) = item
                            .split_once(':')
                            .ok_or_else(|| gsq_err(line, format!("eps item `{item}` lacks `:`")))?;
                        level.meta.eps.push((k.to_string(), v.to_string()));
                    }
                }
            }
            other => return Err(gsq_err(line, format!("unknown meta field `{other}`"))),
        }
    }
    Ok(())
}

fn parse_level_line(line: usize, rest: &str) -> Result<PendingLevel> {
    let parts: Vec<&str> = rest.split_whitespace().collect();
    let bad = || gsq_err(line, "expected `level <n> len <terms> [h <length>]`");
    let (number, len, h) = match parts.as_slice() {
        [n, "len", l] => (n, l, None),
        [n, "len", l, "h", h] => (n, l, Some(*h)),
        _ => return Err(bad()),
    };
    Ok(PendingLevel {
        number: number.parse().map_err(|_| bad())?,
        line,
        len: len.parse().map_err(|_| bad())?,
        h: match h {
            Some(h) => Some(h.parse().map_err(|_| bad())?),
            None => None,
        },
        buildings: Vec::new(),
        meta: LevelMeta::default(),
        c: None,
    })
}

/// Parses GSQ text; errors carry 1-based line numbers.
pub fn read_gsq(text: &str) -> Result<(GeneratingSequence, MeasureVector)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, MAGIC)) => {}
        Some((n, other)) => return Err(gsq_err(n, format!("expected `{MAGIC}`, found `{other}`"))),
        None => return Err(gsq_err(1, "empty file")),
    }
    let mut alphabet: Option<Vec<char>> = None;
    let mut header = Header::default();
    let mut levels: Vec<PendingLevel> = Vec::new();
    for (ln, l) in lines {
        if let Some(rest) = l.strip_prefix("level ") {
            let lvl = parse_level_line(ln, rest)?;
            if let Some(prev) = levels.last() {
                if lvl.number != prev.number + 1 {
                    return Err(gsq_err(
                        ln,
                        format!("level {} follows level {}", lvl.number, prev.number),
                    ));
                }
            }
            levels.push(lvl);
            continue;
        }
        if let Some(rest) = l.strip_prefix("meta:") {
            let cur = levels
                .last_mut()
                .ok_or_else(|| gsq_err(ln, "meta before any level"))?;
            parse_meta(ln, rest, cur)?;
            continue;
        }
        if let Some(rest) = l.strip_prefix('w') {
            let cur = levels
                .last_mut()
                .ok_or_else(|| gsq_err(ln, "word before any level"))?;
            let (idx, body) = rest
                .split_once(':')
                .ok_or_else(|| gsq_err(ln, "word line lacks `:`"))?;
            let idx: usize = idx.parse().map_err(|_| gsq_err(ln, "bad word index"))?;
            if idx != cur.buildings.len() {
                return Err(gsq_err(
                    ln,
                    format!("expected w{}, found w{idx}", cur.buildings.len()),
                ));
            }
            let b = body
                .split_whitespace()
                .map(|x| {
                    x.parse::<u32>()
                        .map_err(|_| gsq_err(ln, format!("bad building term `{x}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if b.len() != cur.len {
                return Err(gsq_err(
                    ln,
                    format!(
                        "building has {} terms, level declares len {}",
                        b.len(),
                        cur.len
                    ),
                ));
            }
            cur.buildings.push(b);
            continue;
        }
        let (key, val) = l
            .split_once(':')
            .ok_or_else(|| gsq_err(ln, format!("unrecognized line `{l}`")))?;
        let val = val.trim().to_string();
        match key.trim() {
            "alphabet" => alphabet = Some(val.chars().collect()),
            "basis" => header.basis = Some(val),
            "engine" => header.engine = Some(val),
            "pairing" => header.pairing = Some(val),
            "params" => header.params = Some(val),
            other => return Err(gsq_err(ln, format!("unknown header `{other}`"))),
        }
    }
    let alphabet = alphabet.ok_or_else(|| gsq_err(1, "missing `alphabet:` header"))?;
    let first = levels
        .first()
        .ok_or_else(|| gsq_err(1, "no levels"))?
        .number;
    let mut measures = Vec::new();
    let mut gaps = false;
    for lvl in &levels {
        match (&lvl.c, gaps) {
            (Some(_), true) => {
                return Err(gsq_err(
                    lvl.line,
                    "measures must cover a prefix of the levels",
                ))
            }
            (Some(c), false) => measures.push(c.clone()),
            (None, _) => gaps = true,
        }
    }
    let declared: Vec<(usize, usize, Option<BigInt>)> = levels
        .iter()
        .map(|l| (l.line, l.number, l.h.clone()))
        .collect();
    let mut gs = GeneratingSequence::new(
        alphabet,
        first,
        levels
            .into_iter()
            .map(|l| Level {
                buildings: l.buildings,
                meta: l.meta,
            })
            .collect(),
    )
    .map_err(|e| {
        let line = match &e {
            Error::MalformedBuilding { level, .. } => declared
                .iter()
                .find(|(_, n, _)| n == level)
                .map_or(1, |(l, _, _)| *l),
            _ => 1,
        };
        gsq_err(line, e.to_string())
    })?;
    for (line, n, h) in declared {
        if let Some(h) = h {
            let actual = gs.h(n).map_err(|e| gsq_err(line, e.to_string()))?;
            if actual != &h {
                return Err(gsq_err(
                    line,
                    format!("declared h {h} but words have length {actual}"),
                ));
            }
        }
    }
    gs.header = header;
    Ok((gs, MeasureVector::new(first, measures)))
}

pub fn save_gsq(path: &Path, gs: &GeneratingSequence, mv: &MeasureVector) -> Result<()> {
    std::fs::write(path, write_gsq(gs, mv))?;
    Ok(())
}

pub fn load_gsq(path: &Path) -> Result<(GeneratingSequence, MeasureVector)> {
    read_gsq(&std::fs::read_to_string(path)?)
}
