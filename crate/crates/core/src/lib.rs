//! Petrov-Galerkin discretization of isothermal gas transport on pipe
//! networks: continuous degree-k trial functions, discontinuous degree-(k-1)
//! test functions, an inexact friction term and implicit midpoint stepping.
//!
//! The modules build on each other: [`topology`] (graphs), [`fem`]
//! (meshes, bases, projections), [`assembly`] (global operators and
//! coupling), [`models`] (linear and nonlinear physics), [`timeloop`]
//! (steady states and time integration) and [`harness`] (convergence
//! studies).

pub mod assembly;
pub mod error;
pub mod fem;
pub mod harness;
pub mod models;
pub mod sparse;
pub mod timeloop;
pub mod topology;

pub use error::{Error, Result};
