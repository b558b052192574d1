//! Trace-method toolkit for Wigner-type random symmetric matrices whose entries
//! are centered but not symmetrically distributed.
//!
//! The crate is `no_std` (with `alloc`) and holds every algorithm:
//!
//! * [`ensemble`]: finite discrete entry laws and seeded matrix sampling.
//! * [`linalg`]: dense symmetric eigensolvers (Householder + implicit QL, Lanczos).
//! * [`spectral`]: largest eigenvalue, trace powers and the Monte Carlo experiments
//!   around the spectral-edge bound.
//! * [`paths`]: closed paths, exact trace expectation by enumeration, marked
//!   instants and the lift through a fresh vertex.
//! * [`gluing`]: odd-path gluing, case classification, second gluing, cycle
//!   structure, path statistics and the insertion counting bounds.
//! * [`dyck`]: Catalan numbers, Dyck path enumeration and sampling, and the
//!   window functionals used to bound preimage counts.
//!
//! IO, the command line and thread-parallel drivers live in the `tml` crate.
#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod dyck;
pub mod ensemble;
pub mod gluing;
pub mod linalg;
pub mod numeric;
pub mod paths;
pub mod spectral;

pub use dyck::DyckPath;
pub use ensemble::{EntryDistribution, MatrixSample};
pub use gluing::{CycleDecomposition, GluedDecomposition, GluingCase, OddStructure, PathStatistics};
pub use paths::{ClosedPath, EdgeCount};
pub use spectral::{EdgeExperimentRow, TraceEstimate};

/// Name of the pseudo random generator behind every seeded routine.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3, seed_from_u64)";

/// Seed used for trial `index` of a Monte Carlo loop started from `seed`.
#[inline]
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_add(index)
}
