use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid graph descriptor `{input}`: {reason}")]
    Descriptor { input: String, reason: String },

    #[error("graph is not connected")]
    Disconnected,

    #[error("no closed-form spectrum for family `{0}`")]
    UnsupportedFamily(String),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("temperature must be positive and finite, got {0}")]
    InvalidTemperature(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("spectrum carries no eigenvectors")]
    MissingEigenvectors,

    #[error("vertex {vertex} out of range for graph of order {order}")]
    VertexOutOfRange { vertex: usize, order: usize },

    #[error("position probability vanishes at vertex {0} while its energy weight does not")]
    DegeneratePosition(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_temperature(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTemperature(t))
    }
}
