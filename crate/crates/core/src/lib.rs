//! Archive-based evolutionary multi-objective optimisation (SEMO and GSEMO) on
//! the unbounded integer lattice `Z^n`.
//!
//! The crate is organised bottom-up:
//!
//! * [`benchmark`] holds the bi-objective benchmark `f`, the dominance
//!   relations, the exact Pareto set and front, and checkers for the
//!   structural properties every archive must satisfy on `f`.
//! * [`samplers`] implements the three mutation-strength laws over `Z`
//!   (unit step, bilateral geometric, power law) together with their exact
//!   probability mass functions and truncated moments.
//! * [`moea`] runs the evolutionary loop itself, with an indexed archive for
//!   the hot path and a literal scan-based archive used as a reference.
//! * [`bounds`] evaluates the closed-form expected-runtime upper bounds.
//! * [`experiments`] fans seeded runs out over a scenario grid, aggregates
//!   them and reads/writes the CSV result files.
//! * [`verify`] bundles the self-checks exposed by the `semo verify` command.

pub mod benchmark;
pub mod bounds;
pub mod error;
pub mod experiments;
pub mod moea;
pub mod rng;
pub mod samplers;
pub mod verify;

pub use benchmark::{BenchmarkConfig, ObjectiveValue, Point};
pub use error::{Error, Result};
pub use moea::{AlgorithmKind, RunConfig, RunRecord};
pub use rng::RandomStream;
pub use samplers::MutationLaw;
