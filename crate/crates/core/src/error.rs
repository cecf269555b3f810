use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants are grouped by how the CLI reports them: mesh and validation
/// problems map to exit code 1, numeric failures to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-manifold edge {0}-{1}: shared by more than two faces")]
    NonManifoldEdge(usize, usize),
    #[error("half-edge {0} has no twin")]
    UnmatchedHalfEdge(usize),
    #[error("edge {0}-{1} is ambiguous without deck labels")]
    AmbiguousEdge(usize, usize),
    #[error("inconsistent orientation at edge {0}-{1}")]
    InconsistentOrientation(usize, usize),
    #[error("Euler characteristic {chi} does not match genus {genus}")]
    EulerCharacteristic { chi: i64, genus: u32 },
    #[error("unsupported genus {0} (only spheres and tori)")]
    UnsupportedGenus(u32),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("operation requires a torus")]
    NotATorus,
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("invalid cross ratio system: {0}")]
    InvalidSystem(String),
    #[error("not Delaunay: {0}")]
    NotDelaunay(String),
    #[error("invalid angle structure: {0}")]
    InvalidAngles(String),
    #[error("holonomy: {0}")]
    Holonomy(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("newton iteration did not converge: {reason} (residual trace {trace:?})")]
    Divergence { reason: String, trace: Vec<f64> },
    #[error("rigidity counterexample: {0}")]
    RigidityCounterexample(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Numeric failures exit with 2, everything else with 1.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric(_)
                | Error::Divergence { .. }
                | Error::Holonomy(_)
                | Error::RigidityCounterexample(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
