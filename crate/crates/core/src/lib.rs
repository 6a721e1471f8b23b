//! Pseudospectral simulation of the massive Dirac-Klein-Gordon system in its
//! half-wave form, together with numerical checks of the algebraic identities,
//! dyadic decompositions, resonance bounds and space-time estimates that
//! underpin its small-data theory.

pub mod decomposition;
pub mod dirac_algebra;
pub mod error;
pub mod estimates;
pub mod exec;
pub mod resonance;
pub mod solver;
pub mod spectral_grid;
pub mod vec3;

pub use error::{Error, Result};
