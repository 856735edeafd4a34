//! equilab: a numerical laboratory for equidistribution of real sequences.
//!
//! The library computes finite, checkable equidistribution quantities —
//! interval hit ratios, star discrepancy, Weyl averages, index-set
//! densities — for prefixes produced by deterministic and seeded
//! generators, evaluates Gaussian cylinder-event masses and their
//! Borel–Cantelli sums under a geometric σ-schedule, and packages both
//! into named, fully reproducible Monte Carlo experiments.
//!
//! Modules:
//! - [`generators`]: Kronecker, van der Corput, i.i.d. uniform, and
//!   Gaussian σ-schedule prefixes, plus termwise shifts.
//! - [`equidist`]: per-prefix statistics and the thresholded
//!   uniform-distribution verdict.
//! - [`measures`]: the normal CDF/quantile kernel, cylinder-event masses,
//!   partial sums with geometric envelopes, and limsup hit estimates.
//! - [`experiments`]: the five named experiments with per-replica records
//!   and serializable results.
//! - [`canonical`]: byte-reproducible JSON output.
//! - [`rng`]: counter-based splittable random streams.

#![forbid(unsafe_code)]

pub mod canonical;
pub mod equidist;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod measures;
pub mod rng;

pub use error::{Error, Result};
