//! Exact combinatorics of small Boolean functions.
//!
//! Everything in this crate works on dense truth tables of at most
//! [`MAX_VARS`] variables and is exact: minimum CNF/DNF sizes, minimum set
//! covers, maximum independent sets of falsepoints/truepoints (`ess`,
//! `ess_k`), and minimum Horn implication bases (`mi`), each with a
//! checkable certificate.  Generators for the classic gap-witness families
//! (Gimpel set-cover reductions, the Allender total-function lift, and a
//! Horn amplification family) live in [`constructions`].

pub mod bfcore;
pub mod bitset;
pub mod constructions;
pub mod essence;
pub mod exactmin;
pub mod horn;
pub mod implicants;
pub mod oracle;
pub mod report;

pub use bfcore::{Assignment, Cube, PartialFunction, TotalFunction};

/// Hard cap on the variable count of a materialized truth table (2^24 bits
/// = 2 MiB).  Constructors accept larger `n` only through the explicit
/// `force` paths.
pub const MAX_VARS: usize = 24;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected n={expected}, got n={got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("variable count {n} exceeds the table cap of {cap}; pass --force to override")]
    SizeCap { n: usize, cap: usize },
    #[error("empty point set")]
    EmptyPointSet,
    #[error("invalid function data: {0}")]
    InvalidFunction(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("work limit exceeded: {0}")]
    WorkLimit(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
