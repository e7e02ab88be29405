//! Simulation and characterization toolkit for set-associative cache
//! replacement policies.
//!
//! The crate is organized around four layers:
//!
//! * [`geometry`] and [`simulator`] — cache shapes, symbolic blocks, and the
//!   per-set simulator shell.
//! * [`policies`] — the replacement-policy zoo (permutation policies, PLRU,
//!   MRU/NRU variants, parameterized QLRU, set-dueling adaptive policies)
//!   plus the policy-name grammar.
//! * [`seqlang`] — the access-sequence language: parsing, evaluation, and
//!   the measured/unmeasured accounting boundary.
//! * [`inference`] and [`bench`] — characterization procedures (policy
//!   identification, permutation inference, age graphs, dueling-set scans)
//!   over an abstract hit/miss oracle, and the microbenchmark run loop with
//!   its aggregation semantics.

pub mod bench;
pub mod geometry;
pub mod inference;
pub mod policies;
pub mod seqlang;
pub mod simulator;

pub use geometry::{AccessOutcome, BlockId, CacheGeometry, GeometryError};
pub use policies::{PolicySpec, QlruConfig};
pub use seqlang::{AccessSeq, MeasuredCounts, SeqToken};
pub use simulator::{CacheSimulator, PolicyStateError};
