//! Degree-of-freedom maps and assembly of the Petrov-Galerkin operators.

mod discretization;
mod dofmap;
mod hidden;
mod system;

pub use discretization::{hybrid_to_monolithic, Discretization, EdgeFields};
pub use dofmap::{Constraint, ConstraintRhs, CouplingMode, DofMap, EdgeLayout};
pub use hidden::HiddenConstraints;
pub(crate) use system::OperatorWeights;
pub use system::{
    antisymmetry_defect, assemble_load, AntisymmetryDefect, Coefficient, LinearCoefficients,
    SemidiscreteSystem, SpaceFn, SpaceTimeFn,
};
