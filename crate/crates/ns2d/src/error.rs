use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed mesh: {0}")]
    MalformedMesh(String),

    #[error("malformed boundary: {0}")]
    MalformedBoundary(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("solver did not converge after {iters} iterations (residual {residual:.3e})")]
    IterationLimit { iters: usize, residual: f64 },

    #[error("solver breakdown: {0}")]
    Breakdown(String),

    #[error("invalid linear system: {0}")]
    InvalidSystem(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("NaN detected at step {step}")]
    NanDetected { step: usize },

    #[error("point ({x}, {y}) is outside the mesh")]
    PointOutsideMesh { x: f64, y: f64 },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
