use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("dimension too large: {0}")]
    TooLarge(String),

    #[error("singular operator: {0}")]
    Singular(String),

    #[error("lyapunov solver stopped at relative residual {residual:.3e} (target {tol:.1e}) after {iterations} iterations{context}")]
    LyapNoConvergence {
        residual: f64,
        tol: f64,
        iterations: usize,
        context: String,
    },

    #[error("unstable or indefinite pencil: {0}")]
    Unstable(String),

    #[error("integration failed at t = {t:.6e}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("basis is not orthonormal (max Gram deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular(_)
                | Error::LyapNoConvergence { .. }
                | Error::Unstable(_)
                | Error::Integration { .. }
                | Error::NotOrthonormal(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
