//! Meshes, bases, quadrature and the two projection operators.

pub mod basis;
pub mod mesh;
pub mod projection;
pub mod quadrature;

pub use basis::{BasisSpec, ElementTables};
pub use mesh::EdgeMesh;
pub use projection::{
    derivative_coefficients, eval_test, eval_trial, h1_project, l2_project, project_trial,
    projection_error, ProjectionKind,
};
pub use quadrature::{gauss_lobatto_points, gauss_rule, QuadratureRule};
