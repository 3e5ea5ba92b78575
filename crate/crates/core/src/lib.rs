//! Boundary spike layers for −ε²Δu + u = u^{p−1} with Neumann data on
//! flat domains: ground states, Fermi geometry, reduced energy, model
//! spectra and discrete spike solutions.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod pde;
pub mod numerics;
pub mod profile;
pub mod reduction;
pub mod spectrum;

pub use error::{Error, Result};
