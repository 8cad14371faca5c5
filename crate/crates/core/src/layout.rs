#![allow(clippy::needless_range_loop)]
//! Canonical building layout shared by both engines.
//!
//! Given a table `t[j][i]` (occurrences of previous-level word `j` in new word
//! `i`), every building is
//! `0 1 0 | aligned block | surplus | 0 1 0`, where the aligned block is the
//! same for all words and holds `min_i t[j][i]` minus marker usage copies of
//! each `j` in ascending order, and the surplus holds the remaining counts of
//! the word, again ascending.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::linalg::ZMatrix;

const MARKER: [u32; 3] = [0, 1, 0];

/// Marker usage per index: four copies of index 0 and two of index 1.
fn marker_usage(j: usize) -> usize {
    match j {
        0 => 4,
        1 => 2,
        _ => 0,
    }
}

fn count(x: &BigInt) -> Result<usize, String> {
    x.to_usize()
        .ok_or_else(|| format!("count {x} is negative or too large to lay out"))
}

/// Buildings realizing the counts of `t`, or a reason they cannot exist.
pub fn canonical_layout(t: &ZMatrix) -> Result<Vec<Vec<u32>>, String> {
    let rows = t.len();
    if rows < 2 {
        return Err("markers need at least two previous-level words".into());
    }
    let cols = t[0].len();
    let table: Vec<Vec<usize>> = t
        .iter()
        .map(|r| r.iter().map(count).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    for i in 0..cols {
        if table[0][i] < 4 || table[1][i] < 2 {
            return Err(format!(
                "word {i}: too few occurrences of indices 0 and 1 for markers"
            ));
        }
        if (table[1][i] - 2) % 2 == 1 {
            return Err(format!("word {i}: odd count of index 1 cannot be paired"));
        }
    }
    let aligned: Vec<usize> = (0..rows)
        .map(|j| table[j].iter().min().copied().unwrap_or(0) - marker_usage(j))
        .collect();
    let mut block = Vec::new();
    for (j, &a) in aligned.iter().enumerate() {
        block.extend(std::iter::repeat_n(j as u32, a));
    }
    let mut out = Vec::with_capacity(cols);
    for i in 0..cols {
        let total: usize = (0..rows).map(|j| table[j][i]).sum();
        let mut b = Vec::with_capacity(total);
        b.extend_from_slice(&MARKER);
        b.extend_from_slice(&block);
        for (j, a) in aligned.iter().enumerate() {
            let surplus = table[j][i] - marker_usage(j) - a;
            b.extend(std::iter::repeat_n(j as u32, surplus));
        }
        b.extend_from_slice(&MARKER);
        out.push(b);
    }
    Ok(out)
}
