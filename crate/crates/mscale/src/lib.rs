//! Linear-time evaluation of the multiscale change-point statistic and
//! Monte Carlo simulation of its null quantiles.
//!
//! The statistic is the maximum, over all subintervals of the data, of a
//! penalized local likelihood-ratio. Evaluating it naively costs O(n^3)
//! (or O(n^2) with cumulative sums). This crate evaluates it in O(n) by
//! rewriting the maximization as the maximum of a quasiconvex bivariate
//! function over a constrained Minkowski sum of two planar point sets,
//! whose convex-hull vertices can be enumerated in linear time.
//!
//! Layout:
//! - [`model`]: exponential-family models, penalties, and the bivariate
//!   objective `h(l, s)`.
//! - [`geometry`]: orientation predicate, incremental hulls, and the
//!   constrained-Minkowski candidate-set sweep.
//! - [`engine`]: the O(n) evaluator plus the O(n^2)/O(n^3) oracle
//!   evaluators used for verification.
//! - [`simulate`]: seedable Monte Carlo estimation of null quantiles,
//!   parallel over repetitions (feature `parallel`, on by default).
//! - [`cli`]: benchmark harness, CSV formats, and helpers backing the
//!   `mscale` binary.

pub mod cli;
pub mod engine;
pub mod geometry;
pub mod model;
pub mod simulate;

use thiserror::Error as ThisError;

/// Errors produced by this crate.
#[derive(Debug, ThisError)]
pub enum Error {
    /// An argument violated a precondition (non-positive scale, unsorted
    /// input, empty sample set, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Data incompatible with the requested model (e.g. a negative value
    /// for a Poisson count series).
    #[error("infeasible data: {0}")]
    InfeasibleData(String),
    /// A penalty that the requested statistic form cannot accept.
    #[error("rejected penalty: {0}")]
    RejectedPenalty(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
