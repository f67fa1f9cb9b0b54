use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("parse error at byte {offset}, field `{field}`: {message}")]
    Parse { offset: usize, field: String, message: String },

    #[error("volume anchoring failed for region {region}: value {value} outside (0, {det})")]
    Anchoring { region: u8, value: f64, det: f64 },

    #[error("point classification failed: {0}")]
    Classification(String),

    #[error("monte carlo oracle unreliable: {failures} of {samples} samples could not be classified")]
    OracleUnreliable { failures: usize, samples: usize },

    #[error("degenerate volume constraints: Gram matrix condition number {0:e}")]
    DegenerateConstraint(f64),

    #[error("volume projection did not converge in {iterations} iterations (max error {error:e})")]
    ProjectionFailure { iterations: usize, error: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible candidate: {0}")]
    Infeasible(String),

    #[error("unsupported lattice: {0}")]
    UnsupportedLattice(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
