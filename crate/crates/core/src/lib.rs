//! Ground states of the Schrödinger–Poisson system
//!
//! ```text
//! −Δu + V(x)u + φu = |u|^{p−1}u,   −Δφ = u²   in ℝ³,   3 < p < 5,
//! ```
//!
//! computed by minimizing the reduced action over the Nehari manifold on a
//! truncated grid.

pub mod error;
pub mod functional;
pub mod grid;
pub mod minimize;
pub mod nehari;
pub mod poisson;
pub mod potential;
pub mod radial_oracle;
pub mod sampling;

pub use error::{Error, Result};
