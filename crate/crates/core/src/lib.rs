//! Reaction–diffusion population dynamics on a shifting, resizing 1-D habitat
//! with time-periodic quadratic selection.
//!
//! The crate bundles analytic eigenvalue bounds, a periodic-parabolic
//! eigen-solver, sub/supersolution envelopes for moving habitats, a
//! stabilized space-time finite element solver and a finite-difference
//! reference solver.

pub mod envelope;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod oracle;
pub mod quadrature;
pub mod recipes;
pub mod scenario;
pub mod spectral;

pub use error::{Error, Result};
pub use scenario::{parse_scenario, periodic_mean, DomainMotion, InitialDatum, PeriodicCoefficient, Scenario};
