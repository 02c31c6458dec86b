//! Numerical laboratory for truncated resolvent estimates of semiclassical
//! Schrödinger operators `P = -h^2 Laplacian + V(x)` in one dimension.
//!
//! The modules follow the pipeline of an experiment:
//!
//! - [`potentials`]: analytic potential families and their decay check;
//! - [`classical`]: Hamiltonian flow, trapped-set sampling, stability rate;
//! - [`quantum`]: grid operator, cutoffs, energy filter, propagator;
//! - [`resolvent`]: norms of `chi (P - z - iW)^{-1} chi` and `K(h)`;
//! - [`ehrenfest`]: the coherent-state certificate for the lower bound;
//! - [`scaling`]: growth-law fits of the measured norms;
//! - [`lab`]: configuration, CLI runs and reports.

pub mod classical;
pub mod ehrenfest;
pub mod error;
pub mod lab;
pub mod linalg;
pub mod potentials;
pub mod quantum;
pub mod resolvent;
pub mod scaling;

pub use error::{LabError, Result};
