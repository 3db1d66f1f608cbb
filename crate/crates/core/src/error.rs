use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("asymmetric parameters: {0}")]
    Asymmetric(String),

    #[error("degenerate covariance: optimization denominator {denominator:e} below tolerance")]
    DegenerateCovariance { denominator: f64 },

    #[error("trajectory {index} diverged at t = {time}")]
    DivergedTrajectory { index: usize, time: f64 },

    #[error("insufficient trajectories: stderr {stderr:e} exceeds {limit:e}")]
    InsufficientTrajectories { stderr: f64, limit: f64 },

    #[error("steady-state search did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("pump above threshold without an injected signal: low-frequency phase is undefined")]
    PhaseDiffusionRisk,

    #[error("drift matrix has an eigenvalue with non-positive real part ({min_real:e})")]
    UnstableModel { min_real: f64 },

    #[error("configuration: {0}")]
    Config(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short name of the failing condition, used by the command-line front end.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::Asymmetric(_) => "AsymmetricParams",
            Error::DegenerateCovariance { .. } => "DegenerateCovariance",
            Error::DivergedTrajectory { .. } => "DivergedTrajectory",
            Error::InsufficientTrajectories { .. } => "InsufficientTrajectories",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::PhaseDiffusionRisk => "PhaseDiffusionRisk",
            Error::UnstableModel { .. } => "UnstableModel",
            Error::Config(_) => "Config",
            Error::Checkpoint(_) => "Checkpoint",
            Error::Io(_) => "Io",
        }
    }

    /// Whether the error stems from bad input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_) | Error::Asymmetric(_) | Error::Config(_) | Error::Checkpoint(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
