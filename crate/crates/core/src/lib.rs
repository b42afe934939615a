//! Neural tangent kernel certificates for deep ReLU networks on curve data.
//!
//! The crate covers the limiting kernel and its skeleton, the geometry of
//! curves on the sphere, certificate solvers, nominal gradient dynamics and
//! an empirical kernel built from finite networks.

pub mod certificate;
pub mod dynamics;
pub mod empirical;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod jet;
pub mod kernel;
pub mod quadrature;

pub use error::{Error, Result};
