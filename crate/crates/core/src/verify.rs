//! Engine dispatch on the `engine:` header of a generating sequence.

use crate::build_rank::{self, verify_rank_invariants};
use crate::build_toe::{self, verify_toe_invariants};
use crate::error::{Error, Result};
use crate::measures::MeasureVector;
use crate::report::VerifyReport;
use crate::scalars::{ParamBasis, Rational};
use crate::words::GeneratingSequence;

/// Runs the verifier named by the header, with the header's parameters.
/// `None` when the header names no known engine.
pub fn verify_by_header(
    gs: &GeneratingSequence,
    mv: &MeasureVector,
    basis: &ParamBasis,
    prec: &Rational,
) -> Result<Option<VerifyReport>> {
    let params = gs.header.params.as_deref();
    match gs.header.engine.as_deref() {
        Some(build_toe::ENGINE) => {
            let idx = params
                .map(|p| {
                    p.split(',')
                        .map(|n| {
                            basis.index_of(n.trim()).ok_or_else(|| {
                                Error::BasisMismatch(format!("parameter `{n}` not in basis"))
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?;
            Ok(Some(verify_toe_invariants(
                gs,
                mv,
                basis,
                idx.as_deref(),
                prec,
            )?))
        }
        Some(build_rank::ENGINE) => {
            let xs = params
                .map(|p| {
                    p.split(',')
                        .map(|e| basis.parse_expr(e))
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?;
            Ok(Some(verify_rank_invariants(
                gs,
                mv,
                basis,
                xs.as_deref(),
                prec,
            )?))
        }
        _ => Ok(None),
    }
}
