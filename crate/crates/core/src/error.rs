use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs at least {min} samples, got {n}")]
    GridTooSmall { n: usize, min: usize },

    #[error("grid half-width must be positive and finite, got {0}")]
    BadHalfWidth(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    Shape { expected: (usize, usize), got: (usize, usize) },

    #[error("parameter `{name}` must be {requirement}, got {value}")]
    BadParameter { name: &'static str, requirement: &'static str, value: f64 },

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("state centre ({x0}, {p0}) lies within {margin} of the grid boundary")]
    CentreTooClose { x0: f64, p0: f64, margin: f64 },

    #[error("Fock level {n} does not fit the grid (needs half-width >= {needed:.3})")]
    FockTooLarge { n: usize, needed: f64 },

    #[error("superposition has zero norm")]
    ZeroNorm,

    #[error("density matrix is not Hermitian (max deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("{what}: boundary leakage {leak:.3e} exceeds {limit:.1e} of the peak")]
    BoundaryLeak { what: &'static str, leak: f64, limit: f64 },

    #[error("region [{x_lo}, {x_hi}] x [{p_lo}, {p_hi}] is empty or leaves the grid")]
    BadRegion { x_lo: f64, x_hi: f64, p_lo: f64, p_hi: f64 },

    #[error("integration unstable: trace drift {drift:.3e} with dt = {dt:.3e}")]
    Unstable { drift: f64, dt: f64 },

    #[error("{n_steps} splitting steps too coarse: halving the step changes the result by {change:.3e}")]
    StepsTooCoarse { n_steps: usize, change: f64 },

    #[error("malformed input on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
