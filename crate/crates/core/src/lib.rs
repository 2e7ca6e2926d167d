//! Exact toolkit for no-transfer allocation mechanisms driven by peer information.
//!
//! A principal holds one unit of a good and n agents each report a type.
//! Dominant-strategy incentive compatibility without transfers forces each
//! agent's winning probability to depend only on the others' reports, so a
//! mechanism is a map q_i(theta_{-i}) subject to per-profile feasibility
//! sum_i q_i(theta_{-i}) <= 1 (or = 1 when the good must always be allocated).
//!
//! Everything here is exact rational arithmetic: LP solving, stable-set
//! search, extreme-point analysis and the experiment harness all run on
//! `BigRational` so reported values are certificates, not approximations.
//!
//! Modules:
//! - [`env`]: finite type spaces, joint distributions, peer values, weights
//! - [`fgraph`]: the feasibility graph, odd-hole search, exports
//! - [`mech`]: mechanisms, feasibility checks, utilities, rank tables
//! - [`solve`]: exact LP / deterministic / jury-enumeration solvers, bounds
//! - [`extremal`]: extremality certificates, vertex enumeration, hole builds
//! - [`hardness`]: stable-set reduction gadget and its verifier
//! - [`simgen`]: environment generators and the scaling experiment harness

// Index loops keep row/column symmetry visible in the pivot and adjacency
// code; the iterator forms clippy suggests obscure it.
#![allow(clippy::needless_range_loop)]

pub mod env;
pub mod extremal;
pub mod fgraph;
pub mod hardness;
pub mod mech;
pub mod rat;
pub mod simgen;
pub mod solve;

use thiserror::Error;

/// Library-wide error type. `GuardExceeded` is kept separate from ordinary
/// domain errors so callers (and the CLI exit-code mapping) can distinguish
/// "this input is wrong" from "this input is too large for an exact method".
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
    pub fn guard(msg: impl Into<String>) -> Self {
        Error::GuardExceeded(msg.into())
    }
}
