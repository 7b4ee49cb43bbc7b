//! Robust (1+eps)-approximation scheme for k-means, with the quantum
//! distance-estimation subroutines emulated as parameterized noisy
//! channels.
//!
//! The crate builds up from exact geometry ([`geometry`]) through the
//! distance channel ([`oracle`]), D²-sampling and seeding ([`sampler`]),
//! sampled cost estimation ([`estimator`]), and the candidate-list
//! scheme with its brute-force verification oracle ([`scheme`]).
//! [`generate`] and [`experiment`] back the `qks` CLI.
//!
//! Everything is deterministic given seeds: random streams derive from
//! `(seed, stage, index)` and never depend on thread counts.

pub mod error;
pub mod estimator;
pub mod experiment;
pub mod generate;
pub mod geometry;
pub mod oracle;
pub mod rng;
pub mod sampler;
pub mod scheme;

pub use error::{Error, Result};
