use thiserror::Error;

/// Which frame-dimensioning inequality failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameBound {
    /// `T >= tau_max`
    Delay,
    /// `delta_f >= v_max`
    Doppler,
}

impl std::fmt::Display for FrameBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FrameBound::Delay => f.write_str("delay (T >= tau_max)"),
            FrameBound::Doppler => f.write_str("Doppler (delta_f >= v_max)"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid frame parameters: {0}")]
    InvalidFrame(String),
    #[error("frame too small: {bound} violated ({have} < {need})")]
    FrameTooSmall { bound: FrameBound, have: f64, need: f64 },
    #[error("delay-Doppler index (k={k}, l={l}) outside {n}x{m} grid")]
    IndexOutOfRange { k: usize, l: usize, n: usize, m: usize },
    #[error("invalid channel profile: {0}")]
    InvalidProfile(String),
    #[error("invalid power allocation: alpha_c={alpha_c}, alpha_e={alpha_e}")]
    InvalidAllocation { alpha_c: f64, alpha_e: f64 },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("grid size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("dense matrix of order {order} exceeds the {limit} limit")]
    MatrixTooLarge { order: usize, limit: usize },
    #[error("channel is singular (an eigenvalue is numerically zero)")]
    SingularChannel,
    #[error("K1 is undefined for z = {re}{im:+}j (need Re z >= 0, z != 0)")]
    BesselDomain { re: f64, im: f64 },
    #[error("characteristic function does not decay below {threshold:e} for t <= 2^40")]
    NonDecayingCf { threshold: f64 },
    #[error("invalid inversion parameters: mu={mu}, terms={terms}")]
    InvalidInversion { mu: f64, terms: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
