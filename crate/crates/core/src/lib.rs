#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Momentum-eigenvalue picture of single- and two-particle quantum mechanics.
//!
//! The central object is the complex momentum field `p(r) = -i hbar grad psi / psi`.
//! From it the crate evaluates the local energy
//! `E = p.p / 2m + U - i (hbar / 2m) div p` and the force
//! `F = -grad U + i (hbar / 2m) lap p`, evolves point particles along
//! `dr/dt = p / m`, rebuilds `psi` from the phase integral of `p`, runs seeded
//! ensembles of trajectories, and checks the two-electron conservation and
//! energy-splitting relations.
//!
//! Module map:
//!
//! * [`model`]: units, complex vectors, tolerances, seed derivation
//! * [`fields`], [`potential`], [`energy`], [`reconstruct`]: fields and what
//!   can be computed from them at fixed time
//! * [`dynamics`]: force law, trajectories, closed-form oscillator solution
//! * [`ensemble`]: many independent trajectories and their density
//! * [`two_electron`]: momentum histories of electron pairs and their invariants
//! * [`oracle`]: finite-difference eigensolver used for cross-validation

pub mod dynamics;
pub mod energy;
pub mod ensemble;
pub mod error;
pub mod fields;
pub mod io;
pub mod model;
pub mod oracle;
pub mod potential;
pub mod reconstruct;
pub mod two_electron;

pub use error::{Error, Result};
pub use model::{mix_seed, ComplexVector, SeedSpec, TolerancePolicy, UnitSystem, C64, I};
