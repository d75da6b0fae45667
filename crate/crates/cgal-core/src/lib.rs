//! Conditional-gradient solver on an augmented Lagrangian with an increasing
//! penalty schedule and safeguarded dual ascent.
//!
//! The crate is `no_std` (with `alloc`): it holds the problem oracles, the
//! rank-1 spectrahedron LMO backed by Lanczos, Nesterov smoothing for
//! composite terms, the solver loop itself, and builders for the built-in
//! SDP instance families (max-cut, k-means clustering, generalized
//! eigenvector). File IO, the command line, the CSV trace format, and the
//! dense reference solver live in the companion `cgal-harness` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod instances;
pub mod linalg;
pub mod oracles;
pub mod problem;
pub mod sampling;
pub mod smoothing;
pub mod solver;

pub use oracles::Atom;
pub use problem::ProblemSpec;
pub use solver::{run_cgal, DualVariant, RunOptions, SolverState, StepRule, TraceRecord};
