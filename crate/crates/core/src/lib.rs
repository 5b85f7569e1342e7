//! Speckle synthesis and PDE-based despeckling at desk scale.
//!
//! The crate covers the full pipeline: positive-intensity image grids with
//! PGM I/O, seeded multiplicative Gamma speckle, Gaussian pre-smoothing,
//! variable-exponent diffusion coefficients, explicit and weighted-theta
//! time stepping for the diffusion and telegraph models, and the quality
//! measures used to score a restoration.

pub mod diffusivity;
pub mod error;
pub mod grid;
pub mod metrics;
pub mod pgm;
pub mod rng;
pub mod smoothing;
pub mod solver;
pub mod speckle;

pub use error::{Error, Result};
pub use grid::{GhostView, ImageGrid, FLOOR_INTENSITY};
