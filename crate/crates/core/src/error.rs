use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
    #[error("derivative order {order} is not resolved on a grid of {n} points (need order < N/4)")]
    Resolution { order: u32, n: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("structure violation: {0}")]
    StructureViolation(String),
    #[error("telescoping identity fails at level k = {k}: {detail}")]
    TelescopeFailure { k: usize, detail: String },
    #[error("p-integral diverges: deg P = {degree} with denominator power {power}")]
    Degree { degree: usize, power: usize },
    #[error("level {k} exceeds the configured cap {cap}")]
    LevelCap { k: usize, cap: usize },
    #[error("profile does not decay at the domain edge (edge/max = {ratio:.3e})")]
    Decay { ratio: f64 },
    #[error("step control collapsed near x = {x:.6} (step {step:.3e})")]
    Stiffness { x: f64, step: f64 },
    #[error("trace series diverges: spectral radius of T^2 is {radius:.4}")]
    Divergence { radius: f64 },
    #[error("logarithm branch undetermined: {0}")]
    Branch(String),
    #[error("evolution unstable: {0}")]
    Stability(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("energy E_{j} requested but only E_0..E_{cap} are available")]
    Index { j: usize, cap: usize },
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
