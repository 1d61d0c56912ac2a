use crate::extremals::ProfileError;
use crate::manifold::ManifoldPoint;
use crate::params::ParamError;
use crate::quadrature::QuadratureError;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("best constant disagrees between the two routes: {direct:.12e} vs {via_star:.12e}")]
    ConsistencyFailure { direct: f64, via_star: f64 },
    #[error("the function is identically zero")]
    ZeroFunction,
    #[error("denominator of the quotient vanishes")]
    DegenerateDenominator,
    #[error("distance optimizer stalled at the window edge (best c = {}, lambda = {}, d = {distance:.6e})", best_found.c, best_found.lambda)]
    OptimizerStall { best_found: ManifoldPoint, distance: f64 },
    #[error("Gram matrix of the tangent space is singular (det = {det:e})")]
    SingularGram { det: f64 },
    #[error("{what} did not converge: {detail}")]
    NoConvergence { what: &'static str, detail: String },
    #[error("grid too coarse: extrapolation error {estimate:.3e} exceeds the tolerance")]
    GridTooCoarse { estimate: f64 },
    #[error("spectral gap is not positive (mode {mode}, gap {gap:.6e})")]
    NonPositiveGap { mode: usize, gap: f64 },
    #[error("log-log fit is degenerate (correlation {correlation:.4})")]
    DegenerateFit { correlation: f64 },
    #[error("zero base vector where the weight needs |x| in a denominator")]
    ZeroBase,
    #[error("scalar expansion branch {branch} does not apply to r = {r}")]
    BranchMismatch { r: f64, branch: &'static str },
    #[error("gap form variant {variant} does not apply: {reason}")]
    VariantMismatch { variant: &'static str, reason: String },
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Failures of an iterative numerical method, as opposed to bad input.
    pub fn is_non_convergence(&self) -> bool {
        matches!(
            self,
            Error::Quadrature(QuadratureError::NoConvergence { .. })
                | Error::NoConvergence { .. }
                | Error::GridTooCoarse { .. }
                | Error::OptimizerStall { .. }
                | Error::DegenerateFit { .. }
        )
    }
}
