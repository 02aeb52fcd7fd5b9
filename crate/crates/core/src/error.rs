use thiserror::Error;

/// Errors raised across the lab. Variants carry enough context to be
/// reported to the CLI user without further lookup.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("edge-list parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("graph is not regular")]
    NotRegular,

    #[error("graph is disconnected; effective resistance and hitting times are infinite")]
    Disconnected,

    #[error("graph is bipartite; the walk does not mix")]
    Bipartite,

    #[error("generation failed after {restarts} restarts")]
    GenerationFailed { restarts: usize },

    #[error("no convergence after {iterations} iterations (best residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("{what} of size {size} exceeds the limit {limit}; {hint}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
        hint: &'static str,
    },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
