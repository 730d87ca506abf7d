//! Hybrid cooperative training of a parameterized PDE solver and a neural
//! network.
//!
//! A physical model (a finite-difference solver with unknown coefficients
//! `Λ`) and a synthetic model (an MLP with weights `Θ`) are trained by
//! alternating gradient steps. Each player fits the observations it is given
//! and is pulled toward the other through an interaction loss evaluated at
//! randomly drawn ghost points. The crate also carries the comparison
//! baselines (physics-only fitting, a plain network, a finite-difference
//! PINN) and the four benchmark problems: Helmholtz, heat, Gray–Scott and
//! Darcy.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. The `parallel` feature runs the per-parameter probe solves of
//! the finite-difference gradient on a rayon pool.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baselines;
pub mod coefficients;
mod error;
pub mod experiments;
pub mod grid;
pub mod hyco;
pub mod nn;
pub mod solvers;

pub use error::{Error, Result};
