//! Outer automorphisms of free groups: the displacement norm, CMT generators,
//! Stallings graphs, marked metric graphs, and the two closure-based decision
//! procedures (conjugacy of irreducibles, irreducibility detection).

pub mod autom;
pub mod cli;
pub mod cmt;
pub mod cvmetric;
pub mod decide;
pub mod error;
pub mod stallings;
pub mod words;

pub use autom::{Endo, OuterAutomorphism};
pub use error::{Error, Result};
pub use words::{CyclicWord, FreeWord, Letter};

/// Exact rational numbers used for lengths, norms and caps.
pub type Rational = num_rational::BigRational;

#[cfg(test)]
pub(crate) fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}
