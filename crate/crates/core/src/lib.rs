//! Quadratic discontinuous Galerkin methods for frictionless unilateral
//! contact in linear elasticity.

pub mod assembly;
pub mod elasticity;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod linalg;
pub mod mesh;
pub mod problems;
pub mod solver;
pub mod space;

pub use elasticity::{Material, Tensor2};
pub use assembly::Method;
pub use error::{Error, Result};
pub use estimator::EstimatorReport;
pub use mesh::{BoundarySpec, BoundaryTag, Mesh, Point};
pub use harness::RunRecord;
pub use problems::ProblemSpec;
pub use space::{DiscreteField, DofMap};
