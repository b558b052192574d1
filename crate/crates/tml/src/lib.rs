//! Command line front end and thread-parallel drivers for `tml-core`.
//!
//! [`parallel`] runs the Monte Carlo loops of the core crate on a rayon pool
//! with the same per-trial seeds and the same reduction order, so every result
//! is independent of the thread count. [`suites`] bundles the exhaustive and
//! randomized gluing checks, [`output`] writes CSV/JSON tables with a run
//! manifest, and [`cli`] wires everything to the `tml` binary.

pub mod cli;
pub mod output;
pub mod parallel;
pub mod suites;

/// `git describe` of the build, or the package version outside a checkout.
pub const BUILD_ID: &str = env!("TML_BUILD_ID");
