use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rho must be positive and finite, got {0}")]
    InvalidRho(f64),
    #[error("beta[{index}] = {value} is outside [0, 1]")]
    BetaOutOfRange { index: usize, value: f64 },
    #[error("beta sequence must start with beta[0] = 0, got {0}")]
    BetaStartNonZero(f64),
    #[error("beta sequence must be non-decreasing, violated at index {index}")]
    BetaNotMonotone { index: usize },
    #[error("dimension must be at least {min}, got {got}")]
    BadDimension { min: usize, got: usize },
    #[error("rho = {rho} outside the admissible range {range}")]
    RhoOutOfRange { rho: f64, range: &'static str },
    #[error("point rejected by the operator's domain check at step {step}")]
    DomainViolation { step: usize },
    #[error("dimension mismatch: operator expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Lipschitz audit failed: ||Tx-Ty|| = {lhs} > rho*||x-y|| = {rhs} (declared rho = {rho})")]
    LipschitzAuditFailed { lhs: f64, rhs: f64, rho: f64 },
    #[error("adaptive sandwich violated at step {step}: {detail}")]
    AdaSandwichViolated { step: usize, detail: String },
    #[error("Banach-Picard residual decrease violated at step {step}: {current} > rho*{previous}")]
    GeometricDecreaseViolated {
        step: usize,
        current: f64,
        previous: f64,
    },
    #[error("Mann array invalid: {0}")]
    InvalidMannArray(String),
    #[error("transport marginals infeasible: sums differ by {0:e}")]
    InfeasibleMarginals(f64),
    #[error("transportation simplex failed to converge")]
    SimplexStalled,
    #[error("dual infeasibility at cell ({m}, {n}): slack {slack:e}")]
    DualInfeasible { m: isize, n: isize, slack: f64 },
    #[error("Lambert W domain error: argument {0} < -1/e")]
    LambertDomain(f64),
    #[error("n0 closed form ({closed_form}) disagrees with direct scan ({scan}) at rho = {rho}")]
    N0Mismatch {
        rho: f64,
        scan: usize,
        closed_form: usize,
    },
    #[error("n0 is undefined for rho = 1 (the transition never occurs)")]
    N0Undefined,
    #[error("singular system: {0}")]
    Singular(&'static str),
    #[error("analysis invariant failed: {0}")]
    Analysis(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
