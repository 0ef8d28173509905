use thiserror::Error;

/// Errors raised by the numerical modules.
///
/// Several variants are soft conditions (a critical fiber, a zero field); the
/// caller decides whether to perturb the input or propagate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid rational map: {0}")]
    InvalidMap(String),
    #[error("root solver did not converge after {iterations} iterations (residual {residual:e})")]
    RootSolveFailure { iterations: usize, residual: f64 },
    #[error("fewer than three distinct fixed points selected for normalization")]
    DegenerateFixedPoints,
    #[error("backward tree of size {size} exceeds the cap {cap}")]
    TreeTooLarge { size: u128, cap: u128 },
    #[error("point lies on a critical fiber (distance {distance:e} to critical value)")]
    CriticalFiber { distance: f64 },
    #[error("field vanishes identically: pole {0} coincides with a numerator zero")]
    ZeroField(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("exponent p = {0} must exceed 1")]
    InvalidExponent(f64),
    #[error("integrand has decay order {decay} < 3 on an unbounded region")]
    NonIntegrable { decay: i32 },
    #[error("degenerate lattice: discriminant g2^3 - 27 g3^2 = {0}")]
    DegenerateLattice(String),
    #[error("no repelling fixed point")]
    NoRepellingFixedPoint,
    #[error("point at distance {0:e} from the set")]
    OnBoundary(f64),
    #[error("orbit did not escape radius {radius} within {iterations} iterations")]
    NotEscaped { radius: f64, iterations: usize },
    #[error("critical point {0} has multiplicity above one")]
    HigherOrderCritical(String),
    #[error("map is not (numerically) postcritically finite at depth {0}")]
    NotPcf(usize),
    #[error("transfer matrix column reconstruction residual {0:e}")]
    ExpansionResidual(f64),
    #[error("basis of Hol(R) is empty")]
    EmptyBasis,
    #[error("eigenvalue iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("analytic and contour residues disagree by {0:e}")]
    ResidueMismatch(f64),
    #[error("normalizing mass estimate has relative stderr {0:e}")]
    MassEstimateFailure(f64),
    #[error("orbit hits a critical point at step {0}")]
    CriticalOrbit(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
