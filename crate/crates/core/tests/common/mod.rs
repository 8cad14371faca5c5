#![allow(dead_code)]

use std::sync::OnceLock;

use sadic_core::build_rank::{build_rank_subshift, RankConfig};
use sadic_core::build_toe::{build_toeplitz_reduction, ToeConfig};
use sadic_core::measures::MeasureVector;
use sadic_core::scalars::{default_precision, ParamBasis, ParamScalar, Rational};
use sadic_core::words::GeneratingSequence;

pub type Built = (GeneratingSequence, MeasureVector);

pub fn primes() -> ParamBasis {
    ParamBasis::sqrt_primes(&[2, 3, 5]).unwrap()
}

pub fn prec() -> Rational {
    default_precision()
}

pub fn toe_config(levels: usize) -> ToeConfig {
    ToeConfig::from_names(primes(), &["sqrt2", "sqrt3"], levels).unwrap()
}

pub fn rank_config(n: usize, levels: usize) -> RankConfig {
    let names = ["sqrt2", "sqrt3", "sqrt5"];
    RankConfig::from_exprs(primes(), n, &names[..n - 1], levels).unwrap()
}

/// Toe output over `sqrt2, sqrt3`, four levels.
pub fn toe4() -> &'static Built {
    static CELL: OnceLock<Built> = OnceLock::new();
    CELL.get_or_init(|| build_toeplitz_reduction(&toe_config(4)).unwrap())
}

/// Rank output for `N = 3`, three levels.
pub fn rank3() -> &'static Built {
    static CELL: OnceLock<Built> = OnceLock::new();
    CELL.get_or_init(|| build_rank_subshift(&rank_config(3, 3)).unwrap())
}

/// Rank output for `N = 2`, four levels.
pub fn rank2() -> &'static Built {
    static CELL: OnceLock<Built> = OnceLock::new();
    CELL.get_or_init(|| build_rank_subshift(&rank_config(2, 4)).unwrap())
}

pub fn params(basis: &ParamBasis, exprs: &[&str]) -> Vec<ParamScalar> {
    exprs.iter().map(|e| basis.parse_expr(e).unwrap()).collect()
}
