//! Exact rational and integer matrix routines.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::scalars::{ParamScalar, Rational};

pub type QMatrix = Vec<Vec<Rational>>;
pub type ZMatrix = Vec<Vec<BigInt>>;

/// Result of a row reduction: the reduced rows (zero rows included at the
/// bottom) and the pivot column of each nonzero row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub rows: QMatrix,
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// The nonzero rows, i.e. the canonical basis of the row space.
    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.rows[..self.pivots.len()]
    }
}

fn row_reduce(mut rows: QMatrix, mut transform: Option<&mut QMatrix>) -> Rref {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        if let Some(t) = transform.as_deref_mut() {
            t.swap(r, p);
        }
        let inv = Rational::one() / &rows[r][col];
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        if let Some(t) = transform.as_deref_mut() {
            for x in t[r].iter_mut() {
                *x *= &inv;
            }
        }
        for i in 0..rows.len() {
            if i == r || rows[i][col].is_zero() {
                continue;
            }
            let f = rows[i][col].clone();
            let (pivot_row, other) = if i < r {
                let (a, b) = rows.split_at_mut(r);
                (&b[0], &mut a[i])
            } else {
                let (a, b) = rows.split_at_mut(i);
                (&a[r], &mut b[0])
            };
            for (x, y) in other.iter_mut().zip(pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
            if let Some(t) = transform.as_deref_mut() {
                let pr = t[r].clone();
                for (x, y) in t[i].iter_mut().zip(&pr) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    Rref { rows, pivots }
}

/// Reduced row-echelon form over Q.
pub fn rref(rows: QMatrix) -> Rref {
    row_reduce(rows, None)
}

/// Reduced row-echelon form together with an invertible `E` such that
/// `E * rows = rref.rows`.
pub fn rref_with_transform(rows: QMatrix) -> (Rref, QMatrix) {
    let n = rows.len();
    let mut e = identity(n);
    let r = row_reduce(rows, Some(&mut e));
    (r, e)
}

pub fn rank(rows: QMatrix) -> usize {
    rref(rows).rank()
}

pub fn identity(n: usize) -> QMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn inverse(a: &QMatrix) -> Option<QMatrix> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return None;
    }
    let (r, e) = rref_with_transform(a.clone());
    (r.rank() == n).then_some(e)
}

pub fn mul_q(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(Rational::zero(), |acc, (x, brow)| acc + x * &brow[j])
                })
                .collect()
        })
        .collect()
}

pub fn mul_z(a: &ZMatrix, b: &ZMatrix) -> ZMatrix {
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(BigInt::zero(), |acc, (x, brow)| acc + x * &brow[j])
                })
                .collect()
        })
        .collect()
}

pub fn transpose<T: Clone>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|j| a.iter().map(|r| r[j].clone()).collect())
        .collect()
}

/// `A x` for a rational matrix and a vector of scalars.
pub fn apply(a: &QMatrix, x: &[ParamScalar]) -> Vec<ParamScalar> {
    a.iter()
        .map(|row| ParamScalar::combine(row.iter().zip(x)))
        .collect()
}

/// Unique solution of `A x = b` for square invertible `A`.
pub fn solve(a: &QMatrix, b: &[ParamScalar]) -> Option<Vec<ParamScalar>> {
    let inv = inverse(a)?;
    Some(apply(&inv, b))
}

pub fn to_q(a: &ZMatrix) -> QMatrix {
    a.iter()
        .map(|r| {
            r.iter()
                .map(|x| Rational::from_integer(x.clone()))
                .collect()
        })
        .collect()
}
