//! Inhomogeneous quenches of the transverse-field Ising chain.
//!
//! The chain `H = -sum_n g_n sigma^x_n - sum_n sigma^z_n sigma^z_{n+1}` is
//! mapped to free fermions and handled through its Bogoliubov-de Gennes
//! modes:
//!
//! * [`model`] builds chains and field profiles `g_n(t)`,
//! * [`static_solver`] diagonalizes static configurations,
//! * [`dynamics`] integrates the time-dependent BdG equations,
//! * [`observables`] turns mode matrices into spin observables,
//! * [`analytic`] holds the closed-form scaling and Landau-Zener predictions,
//! * [`cli`] parses run configs, runs them and writes CSV tables.

pub mod analytic;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod observables;
pub mod static_solver;

pub use error::{Error, Result};
