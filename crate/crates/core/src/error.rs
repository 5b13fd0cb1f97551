use thiserror::Error;

/// Location of a grid node, reported by errors that are tied to one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeLocation {
    pub colat_index: usize,
    pub lon_index: usize,
    pub colat: f64,
    pub lon: f64,
}

impl std::fmt::Display for NodeLocation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "node ({}, {}) at colatitude {:.6}, longitude {:.6}",
            self.colat_index, self.lon_index, self.colat, self.lon
        )
    }
}

#[derive(Debug, Error)]
pub enum QlmError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("metric is not positive definite at {0}")]
    SingularMetric(NodeLocation),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("normal frame undefined at {node}: {reason}")]
    FrameUndefined { node: NodeLocation, reason: String },

    #[error("mean curvature vector is not space-like at {count} node(s), first at {first}")]
    NonSpacelikeMeanCurvature { count: usize, first: NodeLocation },

    #[error("{solver} did not converge: {detail}")]
    NoConvergence { solver: &'static str, detail: String },

    #[error("Weyl continuation stalled after {steps} step(s) at s = {s:.4}, best residual {residual:e}")]
    WeylStall {
        steps: usize,
        s: f64,
        residual: f64,
        best: Box<crate::embed::EmbeddingR3>,
    },

    #[error("Jang solution blows up near r = {radius}: |f'| reached {slope:e}")]
    JangBlowUp { radius: f64, slope: f64 },

    #[error("incomplete data: {0}")]
    IncompleteData(String),

    #[error("admissibility failure: {0}")]
    Admissibility(String),

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("descent stalled at the boundary of the admissible set: {0}")]
    AdmissibilityBoundary(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QlmError>;
