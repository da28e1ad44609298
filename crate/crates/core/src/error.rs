use thiserror::Error;

/// Errors raised by the engine. Every variant carries enough numbers to
/// reproduce the failed check.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operator is not Hermitian: ‖O − O†‖ = {violation:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { violation: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("eigensolver did not converge for a {dim}×{dim} operator")]
    EigenFailure { dim: usize },

    #[error("operator is not a projector: ‖P² − P‖ = {idempotency:.3e}")]
    NotProjector { idempotency: f64 },

    #[error("projectors do not form a complete orthogonal set: {0}")]
    InvalidCsop(String),

    #[error("{value} is not an eigenvalue (nearest eigenvalue {nearest})")]
    NotAnEigenvalue { value: f64, nearest: f64 },

    #[error("invalid density state: {0}")]
    InvalidState(String),

    #[error("no actualization context: the Hamiltonian is a multiple of the identity")]
    NoActualizationContext,

    #[error("factors are not subsystems: ‖H_int‖ = {interaction_norm:.3e}")]
    NotSubsystems { interaction_norm: f64 },

    #[error("probability {value} lies outside [0, 1] beyond the round-off window")]
    ProbabilityOutOfRange { value: f64 },

    #[error("propensity table sums to {sum}, not 1")]
    UnnormalizedTable { sum: f64 },

    #[error("amplitudes are not normalized: Σ|·|² = {norm_sqr}")]
    Unnormalized { norm_sqr: f64 },

    #[error("{outcomes} observable eigenstates but only {pointer_states} pointer states")]
    PointerTooSmall { outcomes: usize, pointer_states: usize },

    #[error("detection windows overlap")]
    OverlappingWindows,

    #[error("time grid is empty or lies outside the quasi-continuous window (0, {limit})")]
    EmptyWindow { limit: f64 },

    #[error("ħ ladder must be strictly decreasing")]
    LadderNotDecreasing,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
