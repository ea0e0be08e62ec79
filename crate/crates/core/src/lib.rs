//! Additive inverse eigenvalue problems on truncated modal data.
//!
//! The crate pairs a particle swarm optimizer with random low-dimensional
//! embeddings of the perturbation space. Modules, bottom-up:
//!
//! - [`linalg`]: symmetric-definite generalized eigensolver and matrix IO.
//! - [`perturbation`]: first-order eigenvalue sensitivities and the
//!   step-size study built on them.
//! - [`embedding`]: Gaussian embeddings, box projection and JL bounds.
//! - [`pso`]: global-best particle swarm over real vectors.
//! - [`aiep`]: packed perturbation parameters and the truncated-spectrum
//!   objective.
//! - [`femodel`]: Euler-Bernoulli wing model and weight estimates.

pub mod aiep;
pub mod embedding;
pub mod error;
pub mod femodel;
pub mod linalg;
pub mod perturbation;
pub mod pso;
pub mod seed;

pub use error::{Error, Result};
