use thiserror::Error;

/// Errors surfaced by the planning library.
#[derive(Debug, Error)]
pub enum PlanError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("task is infeasible: {} target(s) are not reachable from any floor point: {uncovered:?}", uncovered.len())]
    Infeasible { uncovered: Vec<usize> },

    #[error("no IK solution for target {target} at the base pose of cluster {cluster}")]
    EmptyLayer { target: usize, cluster: usize },

    #[error("region fitting failed: {0}")]
    RegionFit(String),

    #[error("simplex exceeded its iteration cap of {cap}")]
    IterationCap { cap: usize },

    #[error("instance too large for exhaustive search: {what} = {size} exceeds budget {budget}")]
    TooLarge {
        what: &'static str,
        size: usize,
        budget: usize,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl PlanError {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            PlanError::Infeasible { .. } => 2,
            PlanError::InvalidInput(_)
            | PlanError::Parse { .. }
            | PlanError::Io { .. }
            | PlanError::RegionFit(_)
            | PlanError::TooLarge { .. } => 3,
            PlanError::EmptyLayer { .. } | PlanError::IterationCap { .. } | PlanError::Contract(_) => 4,
        }
    }
}

pub type Result<T, E = PlanError> = std::result::Result<T, E>;
