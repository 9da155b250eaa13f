//! Error type shared by all library modules.

use thiserror::Error;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("length {got} too small, need at least {min}")]
    LengthTooSmall { got: usize, min: usize },

    #[error("norm kind {kind:?} incompatible with {state}")]
    NormKindMismatch { kind: crate::norms::NormKind, state: &'static str },

    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),

    #[error("tridiagonal solve: pivot {pivot:.3e} below {threshold:.3e} at row {row}")]
    NearSingular { pivot: f64, threshold: f64, row: usize },

    #[error("operator is not symmetric")]
    NonSymmetric,

    #[error("spectrum requires constant-stencil symmetric operator")]
    NonUniformStencil,

    #[error("time {t} outside sampled range [0, {t_final}]")]
    TimeOutOfRange { t: f64, t_final: f64 },

    #[error("weight {omega} not in (0, {omega_max}) for model {model}")]
    OmegaOutOfRange { omega: f64, omega_max: f64, model: &'static str },

    #[error("shift {omega} destabilizes the generator (margin {margin})")]
    ShiftDestabilizes { omega: f64, margin: f64 },

    #[error("smallness violated: |z0| + |u1|_w = {got:.6e} exceeds epsilon {epsilon:.6e}")]
    SmallnessViolated { got: f64, epsilon: f64 },

    #[error("no smallness radius converged; smallest tried {smallest:.3e}")]
    EpsilonSearchFailed { smallest: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
