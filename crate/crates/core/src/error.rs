use thiserror::Error;

/// Errors produced by the discretization, the solvers and the harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("network has no edges")]
    EmptyGraph,
    #[error("edge `{edge}` has non-positive length {length}")]
    NonpositiveLength { edge: String, length: f64 },
    #[error("edge `{edge}` is a self-loop at vertex `{vertex}`")]
    SelfLoop { edge: String, vertex: String },
    #[error("network is not connected (vertex `{vertex}` is unreachable)")]
    Disconnected { vertex: String },
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("polynomial degree must be at least 1")]
    DegreeZero,
    #[error("no mesh given for edge `{0}`")]
    MissingMesh(String),

    #[error("coefficient `{name}` must be positive, got {value}")]
    NonpositiveCoefficient { name: &'static str, value: f64 },
    #[error("friction coefficient is negative ({value}) on edge `{edge}`")]
    NegativeFriction { edge: String, value: f64 },
    #[error("density must be positive, got {0}")]
    NonpositiveDensity(f64),
    #[error("non-positive density {density} at x = {x} on edge `{edge}`")]
    VacuumState { edge: String, x: f64, density: f64 },

    #[error("missing boundary condition for vertex `{0}`")]
    MissingBoundary(String),
    #[error("vertex `{0}` is not a boundary vertex")]
    NotABoundaryVertex(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("linear system is singular")]
    SingularSystem,
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("fine mesh is not a refinement of the coarse mesh: {0}")]
    MeshMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
