//! Numerical laboratory for bilinear feedback systems on 1D Dirichlet grids.
//!
//! The library discretizes semilinear evolution equations of the form
//!
//! ```text
//! dz/dt = A z + B1 u1 + B2 N(z, Cz),    z(0) = z0,
//! ```
//!
//! on the unit interval with homogeneous Dirichlet boundary conditions and
//! provides two independent solution paths (a Picard fixed-point iteration on
//! the feedback signal and a direct IMEX integrator) together with routines
//! that certify local and global input-to-state stability estimates
//! numerically.
//!
//! Modules:
//! - [`grid`], [`norms`], [`rng`], [`signal`]: domain types, discrete Sobolev
//!   norms, deterministic sampling, time-sampled input signals.
//! - [`operators`]: tridiagonal Dirichlet Laplacian, Thomas solves, spectra.
//! - [`models`]: the four shipped system models (Burgers on H¹₀ and on L²,
//!   Schrödinger, damped semilinear wave) and the IMEX closed-loop integrator.
//! - [`linsys`]: the open-loop linear system, exponentially shifted variants,
//!   and empirical well-posedness constants.
//! - [`picard`]: the contraction iteration on the feedback ball and the
//!   empirical smallness-radius search.
//! - [`certify`]: bilinear growth constants, dissipation fits, Lyapunov
//!   derivative checks, and ISS certificates.

// Parameter validation deliberately uses `!(x > 0.0)` so that NaN is
// rejected along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod error;
pub mod grid;
pub mod linsys;
pub mod models;
pub mod norms;
pub mod operators;
pub mod picard;
pub mod rng;
pub mod sample;
pub mod scalar;
pub mod signal;

pub use error::{Error, Result};
pub use grid::{GridFunction, ProductState, State};
pub use models::{ModelConstants, ModelKind, SystemModel};
pub use norms::NormKind;
pub use rng::Rng;
pub use scalar::Scalar;
pub use signal::InputSignal;
