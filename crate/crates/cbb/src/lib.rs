//! Certified ground states of classical Ising spin models.
//!
//! The solver combines three ingredients:
//!
//! - chordal decomposition of the coupling graph into maximal cliques,
//! - clique-wise semidefinite moment relaxations that share variables
//!   across overlapping cliques and yield certified lower bounds,
//! - a best-first branch-and-bound over single spin fixings whose upper
//!   bounds come from sign-rounding the relaxation's one-body moments.
//!
//! The result is a [`bnb::Certificate`]: a bracketing `[lower, upper]`
//! around the ground-state energy together with a configuration attaining
//! `upper`, so optimality claims can be checked independently. External
//! configurations (for example from annealing hardware) can be scored
//! against a certificate with [`bnb::verify_external`].
//!
//! # Example
//!
//! ```
//! use cbb::bnb::{solve_cbb, SolveParams};
//! use cbb::model::gen_square;
//!
//! let model = gen_square(3, 1.5, 7);
//! let cert = solve_cbb(&model, &SolveParams::default()).unwrap();
//! assert!(cert.converged);
//! assert!(cert.gap <= 1e-6 * (1.0 + cert.upper.abs()));
//! ```
//!
//! The `examples/` directory walks through each capability separately;
//! the `cbb` binary exposes the same functionality as subcommands
//! (`gen`, `solve`, `brute`, `verify`, `bench`).

pub mod bnb;
pub mod bounds;
pub mod chordal;
pub mod cli;
mod error;
pub mod model;
pub mod relaxation;
pub mod rng;
pub mod sdp;

pub use error::{Error, Result};
pub use model::{OracleResult, SpinConfiguration, SpinModel};
