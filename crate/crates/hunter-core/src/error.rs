use thiserror::Error;

/// Every failure the numerical pipeline can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("sonic singularity at y = {y} (discriminant {discriminant:e})")]
    SonicSingular { y: f64, discriminant: f64 },
    #[error("origin singularity: y = {0} is not positive")]
    OriginSingular(f64),
    #[error("sonic branch lost at eps = {eps}: negative discriminant")]
    BranchLost { eps: f64 },
    #[error("degenerate branch: a + bU vanishes")]
    DegenerateBranch,
    #[error("resonant singular point: kappa = {kappa}")]
    Resonant { kappa: f64 },
    #[error("near-resonant linear solve at series order {0}")]
    ResonantOrder(usize),
    #[error("series evaluated at y = {y}, outside its trust region of radius {radius}")]
    TrustRegionExceeded { y: f64, radius: f64 },
    #[error("step size underflow at x = {x}")]
    StiffnessFailure { x: f64 },
    #[error("positivity violated at y = {y}")]
    PositivityViolation { y: f64 },
    #[error("unreliable fit: relative residual {residual:e}")]
    FitUnreliable { residual: f64 },
    #[error("series did not converge after {terms} terms")]
    ConvergenceFailure { terms: usize },
    #[error("argument xi = {xi} lies outside the hypergeometric window")]
    OutsideWindow { xi: f64 },
    #[error("profile pieces disagree at the sonic point: relative mismatch {mismatch:e}")]
    GlueMismatch { mismatch: f64 },
    #[error("tangential far-field crossing near y = {y}")]
    AmbiguousCrossing { y: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
