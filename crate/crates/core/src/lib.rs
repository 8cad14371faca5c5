//! Exact constructions and invariants for Toeplitz and S-adic subshifts.

pub mod build_rank;
pub mod build_toe;
mod certify;
pub mod cli;
pub mod error;
pub mod gamma;
pub mod gsq;
pub mod layout;
pub mod linalg;
pub mod measures;
pub mod report;
pub mod scalars;
pub mod toeplitz;
pub mod verify;
pub mod words;

pub use error::{Error, Result};
