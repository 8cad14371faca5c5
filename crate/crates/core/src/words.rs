//! Generating sequences: leveled word systems given by buildings.
//!
//! Levels are numbered from `first_level`; the words of the first level are
//! single letters. Every later word is stored as a building, a sequence of
//! indices into the previous level. Expansions to letters are computed lazily
//! and only for words below [`EXPANSION_LIMIT`] letters; deeper words are
//! handled hierarchically.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{mul_z, ZMatrix};

/// Longest expansion (in letters) materialized as a flat string.
pub const EXPANSION_LIMIT: usize = 1 << 26;

/// Most parses returned by the parsers before enumeration stops.
pub const PARSE_LIMIT: usize = 4096;

/// Engine metadata attached to a level.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LevelMeta {
    pub k: Option<Vec<BigInt>>,
    pub r: Option<BigInt>,
    /// Named construction constants, kept verbatim (`e1`, `e2`, ...).
    pub eps: Vec<(String, String)>,
}

impl LevelMeta {
    pub fn is_empty(&self) -> bool {
        self.k.is_none() && self.r.is_none() && self.eps.is_empty()
    }

    pub fn eps_value(&self, key: &str) -> Option<&str> {
        self.eps
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Level {
    pub buildings: Vec<Vec<u32>>,
    pub meta: LevelMeta,
}

/// Free-form provenance carried by GSQ headers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Header {
    pub basis: Option<String>,
    pub engine: Option<String>,
    pub pairing: Option<String>,
    pub params: Option<String>,
}

#[derive(Debug)]
pub struct GeneratingSequence {
    alphabet: Vec<char>,
    first_level: usize,
    levels: Vec<Level>,
    lengths: Vec<Vec<BigInt>>,
    distinct: Vec<bool>,
    pub header: Header,
    cache: Vec<Vec<OnceLock<Arc<Vec<u8>>>>>,
}

impl Clone for GeneratingSequence {
    fn clone(&self) -> Self {
        GeneratingSequence {
            alphabet: self.alphabet.clone(),
            first_level: self.first_level,
            levels: self.levels.clone(),
            lengths: self.lengths.clone(),
            distinct: self.distinct.clone(),
            header: self.header.clone(),
            cache: self.cache.clone(),
        }
    }
}

impl PartialEq for GeneratingSequence {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.first_level == other.first_level
            && self.levels == other.levels
            && self.header == other.header
    }
}

impl Eq for GeneratingSequence {}

/// Outcome of one structural check; `failure` names the first offending
/// `(level, word)` when the check fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub ok: bool,
    pub failure: Option<(usize, usize, String)>,
}

impl Check {
    fn pass() -> Self {
        Check {
            ok: true,
            failure: None,
        }
    }

    fn fail(level: usize, word: usize, detail: impl Into<String>) -> Self {
        Check {
            ok: false,
            failure: Some((level, word, detail.into())),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "true"),
            Some((l, w, d)) => write!(f, "false (level {l} word {w}: {d})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureReport {
    pub constant_length: Check,
    pub proper: Check,
    pub primitive_per_step: Check,
    /// Every level's words all occur in every word of some later built level.
    pub primitive_eventual: bool,
    pub marker_certificate: Check,
}

impl StructureReport {
    pub fn all_ok(&self) -> bool {
        self.constant_length.ok
            && self.proper.ok
            && self.primitive_per_step.ok
            && self.marker_certificate.ok
    }

    /// First failing check as `(name, level, word, detail)`.
    pub fn first_violation(&self) -> Option<(&'static str, usize, usize, &str)> {
        [
            ("constant_length", &self.constant_length),
            ("proper", &self.proper),
            ("primitive_per_step", &self.primitive_per_step),
            ("marker_certificate", &self.marker_certificate),
        ]
        .into_iter()
        .find_map(|(name, c)| {
            c.failure
                .as_ref()
                .map(|(l, w, d)| (name, *l, *w, d.as_str()))
        })
    }
}

impl fmt::Display for StructureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "constant_length: {}", self.constant_length)?;
        writeln!(f, "proper: {}", self.proper)?;
        writeln!(f, "primitive_per_step: {}", self.primitive_per_step)?;
        writeln!(f, "primitive_eventual: {}", self.primitive_eventual)?;
        writeln!(f, "marker_certificate: {}", self.marker_certificate)
    }
}

/// Per-level structural findings; `None` means the check passed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LevelStructure {
    pub constant_length: Option<(usize, String)>,
    pub proper: Option<(usize, String)>,
    pub primitive: Option<(usize, String)>,
    pub marker: Option<(usize, String)>,
}

/// Text searched by the parsers: explicit letters, or the expansion of a
/// stored word that may be far too long to materialize.
#[derive(Clone, Copy, Debug)]
enum Source<'a> {
    Flat(&'a [u8]),
    Stored { level: usize, word: usize },
}

impl GeneratingSequence {
    /// Builds and checks a generating sequence. `levels[0]` holds the single
    /// letter words (buildings of length one into the alphabet).
    pub fn new(alphabet: Vec<char>, first_level: usize, levels: Vec<Level>) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::InvalidConfig("empty alphabet".into()));
        }
        for (i, a) in alphabet.iter().enumerate() {
            if alphabet[..i].contains(a) {
                return Err(Error::InvalidConfig(format!(
                    "letter `{a}` repeated in alphabet"
                )));
            }
        }
        if levels.is_empty() {
            return Err(Error::InvalidConfig("no levels".into()));
        }
        let mut lengths: Vec<Vec<BigInt>> = Vec::with_capacity(levels.len());
        for (idx, level) in levels.iter().enumerate() {
            let n = first_level + idx;
            let prev_count = if idx == 0 {
                alphabet.len()
            } else {
                levels[idx - 1].buildings.len()
            };
            if level.buildings.is_empty() {
                return Err(Error::MalformedBuilding {
                    level: n,
                    word: 0,
                    detail: "level has no words".into(),
                });
            }
            let mut seen: HashMap<&[u32], usize> = HashMap::new();
            let mut lens = Vec::with_capacity(level.buildings.len());
            for (w, b) in level.buildings.iter().enumerate() {
                if b.is_empty() {
                    return Err(Error::MalformedBuilding {
                        level: n,
                        word: w,
                        detail: "empty building".into(),
                    });
                }
                if idx == 0 && b.len() != 1 {
                    return Err(Error::MalformedBuilding {
                        level: n,
                        word: w,
                        detail: "first-level words must be single letters".into(),
                    });
                }
                if let Some(&bad) = b.iter().find(|&&x| x as usize >= prev_count) {
                    return Err(Error::MalformedBuilding {
                        level: n,
                        word: w,
                        detail: format!(
                            "index {bad} out of range (previous level has {prev_count} words)"
                        ),
                    });
                }
                if let Some(&other) = seen.get(b.as_slice()) {
                    return Err(Error::MalformedBuilding {
                        level: n,
                        word: w,
                        detail: format!("same building as word {other}"),
                    });
                }
                seen.insert(b, w);
                let len = if idx == 0 {
                    BigInt::one()
                } else {
                    let prev = &lengths[idx - 1];
                    b.iter()
                        .fold(BigInt::zero(), |acc, &x| acc + &prev[x as usize])
                };
                lens.push(len);
            }
            lengths.push(lens);
        }
        let cache = levels
            .iter()
            .map(|l| (0..l.buildings.len()).map(|_| OnceLock::new()).collect())
            .collect();
        let mut gs = GeneratingSequence {
            alphabet,
            first_level,
            levels,
            lengths,
            distinct: Vec::new(),
            header: Header::default(),
            cache,
        };
        gs.distinct = gs.compute_distinct();
        Ok(gs)
    }

    fn compute_distinct(&self) -> Vec<bool> {
        let mut out = vec![true];
        for idx in 1..self.levels.len() {
            let prev_ok = out[idx - 1] && self.is_constant_idx(idx - 1);
            let ok = prev_ok || {
                let n = self.first_level + idx;
                let count = self.levels[idx].buildings.len();
                let mut expansions = Vec::new();
                let mut all = true;
                for w in 0..count {
                    match self.expand_indices(n, w) {
                        Ok(e) => expansions.push(e),
                        Err(_) => {
                            all = false;
                            break;
                        }
                    }
                }
                all && {
                    let mut sorted: Vec<&Vec<u8>> = expansions.iter().map(|e| e.as_ref()).collect();
                    sorted.sort();
                    sorted.windows(2).all(|p| p[0] != p[1])
                }
            };
            out.push(ok);
        }
        out
    }

    fn is_constant_idx(&self, idx: usize) -> bool {
        self.lengths[idx].windows(2).all(|p| p[0] == p[1])
    }

    fn idx(&self, n: usize) -> Result<usize> {
        if n < self.first_level || n > self.last_level() {
            return Err(Error::LevelOutOfRange {
                level: n,
                first: self.first_level,
                last: self.last_level(),
            });
        }
        Ok(n - self.first_level)
    }

    fn check_word(&self, n: usize, i: usize) -> Result<usize> {
        let idx = self.idx(n)?;
        let count = self.levels[idx].buildings.len();
        if i >= count {
            return Err(Error::WordOutOfRange {
                level: n,
                word: i,
                count,
            });
        }
        Ok(idx)
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn first_level(&self) -> usize {
        self.first_level
    }

    pub fn last_level(&self) -> usize {
        self.first_level + self.levels.len() - 1
    }

    pub fn level_numbers(&self) -> std::ops::RangeInclusive<usize> {
        self.first_level..=self.last_level()
    }

    pub fn level(&self, n: usize) -> Result<&Level> {
        Ok(&self.levels[self.idx(n)?])
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn word_count(&self, n: usize) -> Result<usize> {
        Ok(self.levels[self.idx(n)?].buildings.len())
    }

    pub fn building(&self, n: usize, i: usize) -> Result<&[u32]> {
        let idx = self.check_word(n, i)?;
        Ok(&self.levels[idx].buildings[i])
    }

    pub fn length(&self, n: usize, i: usize) -> Result<&BigInt> {
        let idx = self.check_word(n, i)?;
        Ok(&self.lengths[idx][i])
    }

    pub fn is_constant_length(&self, n: usize) -> Result<bool> {
        Ok(self.is_constant_idx(self.idx(n)?))
    }

    /// Common word length `h_n` of a constant-length level.
    pub fn h(&self, n: usize) -> Result<&BigInt> {
        let idx = self.idx(n)?;
        if !self.is_constant_idx(idx) {
            return Err(Error::NotConstantLength { level: n });
        }
        Ok(&self.lengths[idx][0])
    }

    /// Replaces the metadata of level `n`.
    pub fn set_meta(&mut self, n: usize, meta: LevelMeta) -> Result<()> {
        let idx = self.idx(n)?;
        self.levels[idx].meta = meta;
        Ok(())
    }

    /// Incidence matrix of level `n` over level `n - 1`: entry `(j, i)` counts
    /// index `j` in the building of word `i`.
    pub fn incidence(&self, n: usize) -> Result<ZMatrix> {
        let idx = self.idx(n)?;
        if idx == 0 {
            return Err(Error::LevelOutOfRange {
                level: n,
                first: self.first_level + 1,
                last: self.last_level(),
            });
        }
        let rows = self.levels[idx - 1].buildings.len();
        let cols = &self.levels[idx].buildings;
        let mut m = vec![vec![BigInt::zero(); cols.len()]; rows];
        for (i, b) in cols.iter().enumerate() {
            let mut counts = vec![0u64; rows];
            for &x in b {
                counts[x as usize] += 1;
            }
            for (j, c) in counts.into_iter().enumerate() {
                m[j][i] = BigInt::from(c);
            }
        }
        Ok(m)
    }

    /// Expected-occurrence matrix `T^m_{m2}` (rows: level `m`, columns: level `m2`).
    pub fn occurrence_matrix(&self, m: usize, m2: usize) -> Result<ZMatrix> {
        let a = self.idx(m)?;
        let b = self.idx(m2)?;
        if a > b {
            return Err(Error::LevelOutOfRange {
                level: m,
                first: self.first_level,
                last: m2,
            });
        }
        let count = self.levels[a].buildings.len();
        let mut acc: ZMatrix = (0..count)
            .map(|i| {
                (0..count)
                    .map(|j| {
                        if i == j {
                            BigInt::one()
                        } else {
                            BigInt::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        for n in (m + 1)..=m2 {
            acc = mul_z(&acc, &self.incidence(n)?);
        }
        Ok(acc)
    }

    /// Letter indices of word `i` at level `n`, cached.
    pub fn expand_indices(&self, n: usize, i: usize) -> Result<Arc<Vec<u8>>> {
        let idx = self.check_word(n, i)?;
        if let Some(v) = self.cache[idx][i].get() {
            return Ok(v.clone());
        }
        let len = &self.lengths[idx][i];
        if *len > BigInt::from(EXPANSION_LIMIT) {
            return Err(Error::TooLong {
                level: n,
                word: i,
                length: len.to_string(),
                limit: EXPANSION_LIMIT,
            });
        }
        let v: Vec<u8> = if idx == 0 {
            vec![self.levels[0].buildings[i][0] as u8]
        } else {
            let mut out = Vec::with_capacity(len.to_usize().unwrap_or(0));
            for &x in &self.levels[idx].buildings[i] {
                out.extend_from_slice(&self.expand_indices(n - 1, x as usize)?);
            }
            out
        };
        Ok(self.cache[idx][i].get_or_init(|| Arc::new(v)).clone())
    }

    /// Full expansion of word `i` at level `n` as a string over the alphabet.
    pub fn expand_word(&self, n: usize, i: usize) -> Result<String> {
        Ok(self
            .expand_indices(n, i)?
            .iter()
            .map(|&x| self.alphabet[x as usize])
            .collect())
    }

    /// Letter index at position `pos` of word `i` at level `n`, without expanding.
    pub fn letter_at(&self, n: usize, i: usize, pos: &BigInt) -> Result<u8> {
        let mut idx = self.check_word(n, i)?;
        if pos.sign() == num_bigint::Sign::Minus || pos >= &self.lengths[idx][i] {
            return Err(Error::ShiftOutOfRange {
                level: n,
                word: i,
                shift: pos.to_string(),
                length: self.lengths[idx][i].to_string(),
            });
        }
        let mut word = i;
        let mut off = pos.clone();
        while idx > 0 {
            let b = &self.levels[idx].buildings[word];
            let prev = &self.lengths[idx - 1];
            if self.is_constant_idx(idx - 1) {
                let (q, r) = off.div_rem(&prev[0]);
                word = b[q.to_usize().expect("block index fits")] as usize;
                off = r;
            } else {
                let mut next = None;
                for &x in b {
                    let l = &prev[x as usize];
                    if off < *l {
                        next = Some(x as usize);
                        break;
                    }
                    off -= l;
                }
                word = next.expect("position inside word");
            }
            idx -= 1;
        }
        Ok(self.levels[0].buildings[word][0] as u8)
    }

    /// Whether words `a` and `b` of level `n` spell the same letters.
    pub fn words_equal(&self, n: usize, a: usize, b: usize) -> Result<bool> {
        let idx = self.check_word(n, a)?;
        self.check_word(n, b)?;
        if a == b {
            return Ok(true);
        }
        if self.distinct[idx] {
            return Ok(false);
        }
        if self.lengths[idx][a] != self.lengths[idx][b] {
            return Ok(false);
        }
        Ok(self.expand_indices(n, a)? == self.expand_indices(n, b)?)
    }

    fn letters_of(&self, w: &str) -> Option<Vec<u8>> {
        w.chars()
            .map(|c| self.alphabet.iter().position(|&a| a == c).map(|p| p as u8))
            .collect()
    }

    /// All exact tilings of `w` by the expansions of level-`n` words.
    pub fn parse_building(&self, n: usize, w: &str) -> Result<Vec<Vec<u32>>> {
        self.parse_building_at(n, w, 0)
    }

    /// Tilings of the longest window of `w` starting at `offset` that is a whole
    /// number of level-`n` lengths (constant-length levels); for other levels
    /// the window is the whole suffix.
    pub fn parse_building_at(&self, n: usize, w: &str, offset: usize) -> Result<Vec<Vec<u32>>> {
        self.idx(n)?;
        let Some(letters) = self.letters_of(w) else {
            return Ok(Vec::new());
        };
        if offset > letters.len() {
            return Ok(Vec::new());
        }
        let total = BigInt::from(letters.len());
        let end = self.window_end(n, &total, &BigInt::from(offset))?;
        self.parse_source(n, Source::Flat(&letters), BigInt::from(offset), end)
    }

    /// Tilings of the expansion of stored word `(level, word)` by level-`n`
    /// words, computed without expanding deep words.
    pub fn parse_stored_word(&self, level: usize, word: usize, n: usize) -> Result<Vec<Vec<u32>>> {
        self.parse_stored_word_at(level, word, n, &BigInt::zero())
    }

    /// Phase-shifted variant of [`parse_stored_word`](Self::parse_stored_word).
    pub fn parse_stored_word_at(
        &self,
        level: usize,
        word: usize,
        n: usize,
        offset: &BigInt,
    ) -> Result<Vec<Vec<u32>>> {
        let idx = self.check_word(level, word)?;
        self.idx(n)?;
        let total = self.lengths[idx][word].clone();
        if offset > &total || offset.sign() == num_bigint::Sign::Minus {
            return Ok(Vec::new());
        }
        let end = self.window_end(n, &total, offset)?;
        self.parse_source(n, Source::Stored { level, word }, offset.clone(), end)
    }

    fn window_end(&self, n: usize, total: &BigInt, offset: &BigInt) -> Result<BigInt> {
        if self.is_constant_length(n)? {
            let h = self.h(n)?;
            let tiles = (total - offset) / h;
            Ok(offset + tiles * h)
        } else {
            Ok(total.clone())
        }
    }

    fn source_letter(&self, src: Source<'_>, pos: &BigInt) -> Result<u8> {
        match src {
            Source::Flat(l) => Ok(l[pos.to_usize().expect("flat position")]),
            Source::Stored { level, word } => self.letter_at(level, word, pos),
        }
    }

    /// Word of level `n` whose expected occurrence starts exactly at `pos` in a
    /// stored word, if `pos` is a level-`n` boundary of its building tree.
    fn aligned_block(&self, level: usize, word: usize, n: usize, pos: &BigInt) -> Option<usize> {
        let mut idx = level - self.first_level;
        let target = n - self.first_level;
        let mut w = word;
        let mut off = pos.clone();
        while idx > target {
            if !self.is_constant_idx(idx - 1) {
                return None;
            }
            let (q, r) = off.div_rem(&self.lengths[idx - 1][0]);
            w = self.levels[idx].buildings[w][q.to_usize()?] as usize;
            off = r;
            idx -= 1;
        }
        off.is_zero().then_some(w)
    }

    fn matches_at(&self, n: usize, src: Source<'_>, pos: &BigInt, j: usize) -> Result<bool> {
        let idx = n - self.first_level;
        let len = &self.lengths[idx][j];
        match src {
            Source::Flat(l) => {
                let p = pos.to_usize().expect("flat position");
                let e = self.expand_indices(n, j)?;
                Ok(l.len() >= p + e.len() && l[p..p + e.len()] == e[..])
            }
            Source::Stored { level, word } => {
                if level > n {
                    if let Some(b) = self.aligned_block(level, word, n, pos) {
                        if self.lengths[idx][b] == *len {
                            return self.words_equal(n, b, j);
                        }
                    }
                }
                if let Ok(e) = self.expand_indices(n, j) {
                    for (k, &letter) in e.iter().enumerate() {
                        if self.source_letter(src, &(pos + k))? != letter {
                            return Ok(false);
                        }
                    }
                    return Ok(true);
                }
                let mut k = BigInt::zero();
                while &k < len {
                    if self.source_letter(src, &(pos + &k))? != self.letter_at(n, j, &k)? {
                        return Ok(false);
                    }
                    k += 1;
                }
                Ok(true)
            }
        }
    }

    fn parse_source(
        &self,
        n: usize,
        src: Source<'_>,
        start: BigInt,
        end: BigInt,
    ) -> Result<Vec<Vec<u32>>> {
        let idx = n - self.first_level;
        let count = self.levels[idx].buildings.len();
        // Forward reachability over tile boundaries.
        let mut edges: BTreeMap<BigInt, Vec<(BigInt, u32)>> = BTreeMap::new();
        let mut frontier: BTreeMap<BigInt, ()> = BTreeMap::new();
        frontier.insert(start.clone(), ());
        while let Some((pos, ())) = frontier.pop_first() {
            if pos == end {
                continue;
            }
            for j in 0..count {
                let next = &pos + &self.lengths[idx][j];
                if next > end {
                    continue;
                }
                if self.matches_at(n, src, &pos, j)? {
                    let e = edges.entry(next.clone()).or_default();
                    if e.is_empty() {
                        frontier.insert(next.clone(), ());
                    }
                    e.push((pos.clone(), j as u32));
                }
            }
        }
        if start == end {
            return Ok(vec![Vec::new()]);
        }
        // Enumerate paths back from the end.
        let mut out = Vec::new();
        let mut stack: Vec<(BigInt, Vec<u32>)> = vec![(end, Vec::new())];
        while let Some((pos, suffix)) = stack.pop() {
            if pos == start {
                let mut p = suffix;
                p.reverse();
                out.push(p);
                if out.len() >= PARSE_LIMIT {
                    break;
                }
                continue;
            }
            if let Some(es) = edges.get(&pos) {
                for (prev, j) in es.iter().rev() {
                    let mut s = suffix.clone();
                    s.push(*j);
                    stack.push((prev.clone(), s));
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Number of positions where all buildings of level `n` carry the same index.
    pub fn aligned_columns(&self, n: usize) -> Result<usize> {
        let idx = self.idx(n)?;
        let bs = &self.levels[idx].buildings;
        let len = bs.iter().map(|b| b.len()).min().unwrap_or(0);
        Ok((0..len)
            .filter(|&k| bs.iter().all(|b| b[k] == bs[0][k]))
            .count())
    }

    /// Structural checks restricted to level `n` (all pass vacuously on the
    /// first level).
    pub fn level_structure(&self, n: usize) -> Result<LevelStructure> {
        let idx = self.idx(n)?;
        let mut out = LevelStructure::default();
        let lens = &self.lengths[idx];
        if let Some(w) = lens.iter().position(|l| l != &lens[0]) {
            out.constant_length = Some((w, format!("length {} differs from {}", lens[w], lens[0])));
        }
        if idx == 0 {
            return Ok(out);
        }
        let bs = &self.levels[idx].buildings;
        if let Some(w) = bs
            .iter()
            .position(|b| b[0] != bs[0][0] || b.last() != bs[0].last())
        {
            out.proper = Some((w, "first or last term differs from word 0".into()));
        }
        let prev = self.levels[idx - 1].buildings.len();
        for (w, b) in bs.iter().enumerate() {
            let mut seen = vec![false; prev];
            for &x in b {
                seen[x as usize] = true;
            }
            if let Some(missing) = seen.iter().position(|s| !s) {
                out.primitive = Some((w, format!("previous-level word {missing} does not occur")));
                break;
            }
        }
        for (w, b) in bs.iter().enumerate() {
            if let Some(d) = marker_violation(b) {
                out.marker = Some((w, d));
                break;
            }
        }
        Ok(out)
    }

    /// Copy with the building of word `i` at level `n` replaced.
    pub fn with_building(&self, n: usize, i: usize, building: Vec<u32>) -> Result<Self> {
        let idx = self.check_word(n, i)?;
        let mut levels = self.levels.clone();
        levels[idx].buildings[i] = building;
        let mut gs = GeneratingSequence::new(self.alphabet.clone(), self.first_level, levels)?;
        gs.header = self.header.clone();
        Ok(gs)
    }

    /// Copy keeping only the levels up to `last`.
    pub fn truncated(&self, last: usize) -> Result<Self> {
        let idx = self.idx(last)?;
        let mut gs = GeneratingSequence::new(
            self.alphabet.clone(),
            self.first_level,
            self.levels[..=idx].to_vec(),
        )?;
        gs.header = self.header.clone();
        Ok(gs)
    }

    /// Appends a level built over the current last level.
    pub fn push_level(&mut self, level: Level) -> Result<()> {
        let mut levels = std::mem::take(&mut self.levels);
        levels.push(level);
        let header = std::mem::take(&mut self.header);
        match GeneratingSequence::new(self.alphabet.clone(), self.first_level, levels.clone()) {
            Ok(mut gs) => {
                gs.header = header;
                *self = gs;
                Ok(())
            }
            Err(e) => {
                levels.pop();
                self.levels = levels;
                self.header = header;
                Err(e)
            }
        }
    }

    pub fn validate_structure(&self) -> StructureReport {
        let mut constant_length = Check::pass();
        for (idx, lens) in self.lengths.iter().enumerate() {
            if let Some(w) = lens.iter().position(|l| l != &lens[0]) {
                constant_length = Check::fail(
                    self.first_level + idx,
                    w,
                    format!("length {} differs from word 0 length {}", lens[w], lens[0]),
                );
                break;
            }
        }

        let mut proper = Check::pass();
        'proper: for (idx, level) in self.levels.iter().enumerate().skip(1) {
            let b0 = &level.buildings[0];
            for (w, b) in level.buildings.iter().enumerate() {
                if b[0] != b0[0] {
                    proper = Check::fail(self.first_level + idx, w, "first term differs");
                    break 'proper;
                }
                if b.last() != b0.last() {
                    proper = Check::fail(self.first_level + idx, w, "last term differs");
                    break 'proper;
                }
            }
        }

        let mut primitive_per_step = Check::pass();
        'prim: for (idx, level) in self.levels.iter().enumerate().skip(1) {
            let prev = self.levels[idx - 1].buildings.len();
            for (w, b) in level.buildings.iter().enumerate() {
                let mut seen = vec![false; prev];
                for &x in b {
                    seen[x as usize] = true;
                }
                if let Some(missing) = seen.iter().position(|s| !s) {
                    primitive_per_step = Check::fail(
                        self.first_level + idx,
                        w,
                        format!("previous-level word {missing} does not occur"),
                    );
                    break 'prim;
                }
            }
        }

        let primitive_eventual = primitive_per_step.ok || self.eventually_primitive();

        let mut marker_certificate = Check::pass();
        'marker: for (idx, level) in self.levels.iter().enumerate().skip(1) {
            for (w, b) in level.buildings.iter().enumerate() {
                if let Some(detail) = marker_violation(b) {
                    marker_certificate = Check::fail(self.first_level + idx, w, detail);
                    break 'marker;
                }
            }
        }

        StructureReport {
            constant_length,
            proper,
            primitive_per_step,
            primitive_eventual,
            marker_certificate,
        }
    }

    fn eventually_primitive(&self) -> bool {
        let last = self.last_level();
        for n in self.first_level..last {
            let ok = ((n + 1)..=last).any(|m| {
                self.occurrence_matrix(n, m)
                    .map(|t| t.iter().flatten().all(|x| !x.is_zero()))
                    .unwrap_or(false)
            });
            if !ok {
                return false;
            }
        }
        true
    }
}

/// Why a building fails the marker certificate, if it does: it must start and
/// end with `0 1 0`, and every other maximal run of index 1 must have even length.
pub fn marker_violation(b: &[u32]) -> Option<String> {
    let len = b.len();
    if len < 6 {
        return Some(format!("building of length {len} cannot hold both markers"));
    }
    if b[..3] != [0, 1, 0] {
        return Some("building does not start with 0 1 0".into());
    }
    if b[len - 3..] != [0, 1, 0] {
        return Some("building does not end with 0 1 0".into());
    }
    let mut k = 3;
    while k < len - 3 {
        if b[k] == 1 {
            let start = k;
            while k < len - 3 && b[k] == 1 {
                k += 1;
            }
            if (k - start) % 2 == 1 {
                return Some(format!("unpaired index 1 at position {start}"));
            }
        } else {
            k += 1;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy(with_level2: bool) -> GeneratingSequence {
        let mut levels = vec![
            Level {
                buildings: vec![vec![0], vec![1]],
                ..Default::default()
            },
            Level {
                buildings: vec![vec![0, 1, 0, 0], vec![0, 1, 0, 1]],
                ..Default::default()
            },
        ];
        if with_level2 {
            levels.push(Level {
                buildings: vec![vec![0, 1]],
                ..Default::default()
            });
        }
        GeneratingSequence::new(vec!['0', '1'], 0, levels).unwrap()
    }

    fn z(rows: &[&[i64]]) -> ZMatrix {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    /// Independent occurrence count by brute-force expansion and aligned scan.
    fn brute_counts(gs: &GeneratingSequence, m: usize, m2: usize) -> ZMatrix {
        let rows = gs.word_count(m).unwrap();
        let cols = gs.word_count(m2).unwrap();
        let h = gs.h(m).unwrap().to_usize().unwrap();
        let mut out = vec![vec![BigInt::zero(); cols]; rows];
        for i in 0..cols {
            let w = gs.expand_word(m2, i).unwrap();
            for chunk in w.as_bytes().chunks(h) {
                let s = std::str::from_utf8(chunk).unwrap();
                for j in 0..rows {
                    if gs.expand_word(m, j).unwrap() == s {
                        out[j][i] += 1;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn toy_structure() {
        let gs = toy(false);
        let r = gs.validate_structure();
        assert!(r.constant_length.ok);
        assert!(!r.proper.ok);
        assert_eq!(r.proper.failure.as_ref().unwrap().0, 1);
    }

    #[test]
    fn single_level_vacuous() {
        let gs = GeneratingSequence::new(
            vec!['a', 'b'],
            0,
            vec![Level {
                buildings: vec![vec![0], vec![1]],
                ..Default::default()
            }],
        )
        .unwrap();
        assert!(gs.validate_structure().all_ok());
    }

    #[test]
    fn toy_occurrences() {
        let gs = toy(true);
        assert_eq!(gs.occurrence_matrix(0, 1).unwrap(), z(&[&[3, 2], &[1, 2]]));
        assert_eq!(gs.occurrence_matrix(0, 2).unwrap(), brute_counts(&gs, 0, 2));
        assert_eq!(gs.occurrence_matrix(0, 2).unwrap(), z(&[&[5], &[3]]));
        assert_eq!(
            gs.occurrence_matrix(1, 2).unwrap(),
            gs.incidence(2).unwrap()
        );
        assert!(gs.occurrence_matrix(2, 1).is_err());
    }

    #[test]
    fn toy_expansion() {
        let gs = toy(true);
        assert_eq!(gs.expand_word(1, 0).unwrap(), "0100");
        assert_eq!(gs.expand_word(0, 1).unwrap(), "1");
        assert_eq!(gs.expand_word(2, 0).unwrap(), "01000101");
        for p in 0..8 {
            let l = gs.letter_at(2, 0, &BigInt::from(p)).unwrap();
            assert_eq!(
                gs.alphabet()[l as usize],
                "01000101".chars().nth(p).unwrap()
            );
        }
        assert!(gs.expand_word(3, 0).is_err());
    }

    #[test]
    fn toy_parsing() {
        let gs = toy(true);
        assert_eq!(gs.parse_building(1, "01000101").unwrap(), vec![vec![0, 1]]);
        assert_eq!(gs.parse_building(1, "0100").unwrap(), vec![vec![0]]);
        assert!(gs.parse_building(1, "1111").unwrap().is_empty());
        assert_eq!(gs.parse_stored_word(2, 0, 1).unwrap(), vec![vec![0, 1]]);
        assert!(gs.parse_building_at(1, "01000101", 1).unwrap().is_empty());
    }

    #[test]
    fn ambiguous_parses_all_reported() {
        let gs = GeneratingSequence::new(
            vec!['a'],
            0,
            vec![
                Level {
                    buildings: vec![vec![0]],
                    ..Default::default()
                },
                Level {
                    buildings: vec![vec![0], vec![0, 0]],
                    ..Default::default()
                },
            ],
        )
        .unwrap();
        // "aaa" = a|a|a, a|aa, aa|a
        assert_eq!(gs.parse_building(1, "aaa").unwrap().len(), 3);
    }

    #[test]
    fn malformed_buildings_rejected() {
        let bad = GeneratingSequence::new(
            vec!['0', '1'],
            0,
            vec![
                Level {
                    buildings: vec![vec![0], vec![1]],
                    ..Default::default()
                },
                Level {
                    buildings: vec![vec![0, 2]],
                    ..Default::default()
                },
            ],
        );
        assert!(matches!(
            bad,
            Err(Error::MalformedBuilding {
                level: 1,
                word: 0,
                ..
            })
        ));
    }

    #[test]
    fn marker_rules() {
        assert!(marker_violation(&[0, 1, 0, 1, 1, 0, 1, 0]).is_none());
        assert!(marker_violation(&[0, 1, 0, 1, 0, 1, 0]).is_some());
        assert!(marker_violation(&[0, 1, 0, 0, 1, 1]).is_some());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn random_gs() -> impl Strategy<Value = GeneratingSequence> {
            (2usize..4, 1usize..4).prop_flat_map(|(words, depth)| {
                proptest::collection::vec(
                    proptest::collection::vec(
                        proptest::collection::vec(0u32..words as u32, 3),
                        words,
                    ),
                    depth,
                )
                .prop_map(move |raw| {
                    let mut levels = vec![Level {
                        buildings: (0..words as u32).map(|i| vec![i]).collect(),
                        ..Default::default()
                    }];
                    for mut bs in raw {
                        // Force distinct buildings by tagging the first entry.
                        for (i, b) in bs.iter_mut().enumerate() {
                            b[0] = i as u32;
                        }
                        levels.push(Level {
                            buildings: bs,
                            ..Default::default()
                        });
                    }
                    let alphabet = ['a', 'b', 'c', 'd'][..words].to_vec();
                    GeneratingSequence::new(alphabet, 0, levels).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn composition_and_mass(gs in random_gs()) {
                let last = gs.last_level();
                for m in 0..last {
                    for m2 in (m + 1)..=last {
                        let direct = gs.occurrence_matrix(m, m2).unwrap();
                        prop_assert_eq!(&direct, &brute_counts(&gs, m, m2));
                        for mid in (m + 1)..m2 {
                            let composed = mul_z(&gs.occurrence_matrix(m, mid).unwrap(), &gs.occurrence_matrix(mid, m2).unwrap());
                            prop_assert_eq!(&direct, &composed);
                        }
                        let hm = gs.h(m).unwrap();
                        for i in 0..direct[0].len() {
                            let mass: BigInt = direct.iter().map(|r| &r[i] * hm).sum();
                            prop_assert_eq!(&mass, gs.h(m2).unwrap());
                        }
                    }
                }
            }

            #[test]
            fn stored_building_among_parses(gs in random_gs()) {
                for n in gs.first_level()..gs.last_level() {
                    for i in 0..gs.word_count(n + 1).unwrap() {
                        let w = gs.expand_word(n + 1, i).unwrap();
                        let parses = gs.parse_building(n, &w).unwrap();
                        let stored = gs.building(n + 1, i).unwrap().to_vec();
                        prop_assert!(parses.contains(&stored));
                        prop_assert_eq!(gs.parse_stored_word(n + 1, i, n).unwrap(), parses);
                    }
                }
            }
        }
    }
}
