//! Pseudospectral toolkit for singular stochastic PDEs on the torus.
//!
//! The crate provides the numerical substrate (FFT grids, spectral
//! multipliers, exact dealiased products), Littlewood-Paley / Bony
//! paraproduct calculus, seeded Gaussian field samplers, Wick/Hermite
//! algebra, closed-form renormalization constants, and three solver
//! families:
//!
//! * a spectral Galerkin simulator for the 1d stochastic Burgers equation,
//! * renormalized direct / exponential-transform / paracontrolled solvers
//!   for the 2d generalized parabolic Anderson model,
//! * a paracontrolled solver for stochastic Burgers driven by its
//!   six-component enhancement, cross-validated against the Galerkin one.
//!
//! Everything is deterministic given `(seed, replica)`; the `experiments`
//! module fans replicas out over threads and reduces in a fixed order so
//! reports are byte-stable.

pub mod besov;
pub mod burgers;
pub mod config;
mod error;
pub mod experiments;
pub mod gaussian;
pub mod pam;
pub mod renorm;
pub mod report;
pub mod sbe;
pub mod spectral;
pub mod stats;
pub mod wick;

pub use error::{Error, Result};
