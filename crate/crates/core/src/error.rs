use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("steady-state solver failed: {0}")]
    SolverFailure(String),

    #[error("steady-state root q_s = {q_s:e} lies on the pole q = g_m/(2 g2) = {pole:e}")]
    DegenerateBranch { q_s: f64, pole: f64 },

    #[error("fluctuation matrix is singular at omega = {omega:e} rad/s (|det| = {det:e})")]
    SingularMatrix { omega: f64, det: f64 },

    #[error("operating point is not asymptotically stable (max Re lambda = {max_real:e} rad/s)")]
    UnstableBranch { max_real: f64 },

    #[error("no stable steady-state branch")]
    AllBranchesUnstable,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParam { .. } | Error::Config(_) | Error::Json(_) => 2,
            Error::AllBranchesUnstable | Error::UnstableBranch { .. } => 4,
            Error::SolverFailure(_)
            | Error::DegenerateBranch { .. }
            | Error::SingularMatrix { .. } => 3,
            Error::Io(_) => 1,
        }
    }
}
