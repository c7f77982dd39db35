//! Numerical toolkit for low-influence functions on correlated finite
//! product spaces.
//!
//! The crate is organized around a handful of concrete objects:
//!
//! * [`spaces`] — finite probability spaces, joint (correlated)
//!   distributions over products of them, Markov operators and the
//!   maximal-correlation structure of a joint law.
//! * [`functions`] — real-valued functions on `n`-fold products:
//!   Efron-Stein decompositions, influences, multilinear expansions in
//!   orthonormal bases, noise operators and empirical invariance gaps.
//! * [`gaussian`] — scalar Gaussian numerics: CDF/quantile, bivariate
//!   quantile-box probabilities, the recursive stability functionals and
//!   their asymptotic sequences.
//! * [`bounds`] — product-expectation bound checking and the recursive
//!   influence regularizer.
//! * [`social_choice`] — vote prediction from samples and Condorcet
//!   tournament statistics.
//! * [`hypergraph`] — relations on `Ω^k` and counting relation-satisfying
//!   tuples among product sets.
//!
//! All stochastic routines take an explicit seed and partition trials with
//! counter-based per-trial generators, so results do not depend on the
//! number of worker threads. Building with `--no-default-features`
//! disables rayon and runs the same trial schedule sequentially.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod functions;
pub mod gaussian;
pub mod hypergraph;
pub mod io;
pub mod mc;
pub mod social_choice;
pub mod spaces;

pub use error::{Error, Result};
