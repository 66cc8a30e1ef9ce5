use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("OutOfInterval: separation q = {q} is outside the admissible interval for kappa = {kappa}")]
    OutOfInterval { kappa: f64, q: f64 },

    #[error("SingularArgument: {what} (value {value:e})")]
    SingularArgument { what: &'static str, value: f64 },

    #[error("NotOnSurface: residual {residual:e} exceeds the surface tolerance")]
    NotOnSurface { residual: f64 },

    #[error("NegativeCurvature: operation needs kappa > 0, got {kappa}")]
    NegativeCurvature { kappa: f64 },

    #[error("NonzeroCurvature: operation needs kappa = 0, got {kappa}")]
    NonzeroCurvature { kappa: f64 },

    #[error("LeftDomain: q = {q} reached the boundary of the admissible interval at t = {t}")]
    LeftDomain { q: f64, t: f64 },

    #[error("StepFailure: step size collapsed to {h:e} at t = {t}")]
    StepFailure { t: f64, h: f64 },

    #[error("NoConvergence: {iterations} iterations, residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("RightAngleUnequalMasses: right-angled configuration needs mu = 1, got {mu}")]
    RightAngleUnequalMasses { mu: f64 },

    #[error("WrongBranch: {0}")]
    WrongBranch(String),

    #[error("NoRoot: {0}")]
    NoRoot(String),

    #[error("ForceNotZero: V'(q0) = {force:e}")]
    ForceNotZero { force: f64 },

    #[error("RankDeficientLeaf: Poisson tensor has rank {rank}")]
    RankDeficientLeaf { rank: usize },

    #[error("BranchLost at kappa = {kappa}: {reason}")]
    BranchLost { kappa: f64, reason: String },

    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
