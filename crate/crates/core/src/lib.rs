//! Graphs of p-minimal surfaces in the Heisenberg group H₁ and in the CR 3-sphere.

pub mod characteristic;
pub mod curvature;
pub mod dirichlet;
pub mod error;
pub mod families;
pub mod field;
pub mod fixtures;
pub mod h1;
pub mod ode;
pub mod quadrature;
pub mod singular;
pub mod sphere;
pub mod variation;
pub mod verify;

pub use error::{Error, Result};
pub use field::{AnalyticField, FieldSample, GridField, ScalarField2};
