use std::path::PathBuf;

use gasnet_core::topology::NetworkParseError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Bad command line (reported by clap).
    pub const USAGE: i32 = 2;
    /// Unreadable or syntactically invalid network or scenario file.
    pub const INPUT: i32 = 3;
    /// Files parse but do not describe a valid problem.
    pub const CONFIG: i32 = 4;
    /// Newton did not converge or a linear system was singular.
    pub const SOLVER: i32 = 5;
    /// The state left the physical range (non-positive density).
    pub const PHYSICS: i32 = 6;
    /// Output files could not be written.
    pub const OUTPUT: i32 = 7;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}:{line}:{column}: {message}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("cannot read `{}`: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Network(#[from] NetworkParseError),
    #[error("boundary condition for unknown vertex `{0}`")]
    UnknownVertexInBoundaryCondition(String),
    #[error("missing parameter: {0}")]
    MissingParameter(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] gasnet_core::Error),
    #[error("cannot write `{}`: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use gasnet_core::Error as E;
        match self {
            CliError::Parse { .. } | CliError::Read { .. } => exit::INPUT,
            CliError::Network(NetworkParseError::Graph(_)) => exit::CONFIG,
            CliError::Network(_) => exit::INPUT,
            CliError::UnknownVertexInBoundaryCondition(_) | CliError::MissingParameter(_) | CliError::Config(_) => {
                exit::CONFIG
            }
            CliError::Core(E::NewtonDiverged { .. } | E::SingularSystem) => exit::SOLVER,
            CliError::Core(E::VacuumState { .. } | E::NonpositiveDensity(_)) => exit::PHYSICS,
            CliError::Core(_) => exit::CONFIG,
            CliError::Write { .. } => exit::OUTPUT,
        }
    }
}
