use thiserror::Error;

pub type Result<T> = std::result::Result<T, CorexError>;

#[derive(Debug, Error)]
pub enum CorexError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: usize },

    #[error("line {line}: node id {id} out of range for declared n = {n}")]
    NodeOutOfRange { line: usize, id: usize, n: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("infeasible rescaling: {clip_fraction:.3} of entries would be clipped (limit 0.2)")]
    Infeasible { clip_fraction: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CorexError {
    pub fn domain(msg: impl Into<String>) -> Self {
        CorexError::Domain(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            CorexError::Convergence { .. } | CorexError::Infeasible { .. } => 4,
            _ => 3,
        }
    }
}
