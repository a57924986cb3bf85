//! Bound states of the mass-constrained nonlinear Schrödinger equation
//! `-u'' + (W + lambda) u = |u|^(p-2) u` on noncompact metric graphs with
//! Kirchhoff vertex conditions.
//!
//! The crate covers the graph model and potentials ([`graph`],
//! [`potential`]), a piecewise-linear discretization ([`mesh`], [`operator`]),
//! the energy and its derivatives ([`functionals`]), an edge-localized
//! constrained minimizer ([`solver`]) and the closed-form soliton levels used to
//! certify its output ([`theory`]).
//!
//! It is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod error;
pub mod functionals;
pub mod graph;
pub mod linalg;
pub mod mesh;
pub mod operator;
pub mod potential;
pub mod solver;
pub mod theory;

pub use error::{Error, Result};
