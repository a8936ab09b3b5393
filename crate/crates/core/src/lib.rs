//! Spectral computations for the forward-backward heat operator
//! ℓ[h] = ε(sinθ h′)′ + h′ on the circle, 0 < ε < 2.
//!
//! Functions are stored either as samples on a uniform grid or as Fourier
//! coefficients h = Σ v_k e^{ikθ}. On positive modes the operator acts as
//! iA₊ with A₊ real tridiagonal; see [`operator::build_aplus`].

pub mod dd;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod exec;
pub mod grid;
pub mod invsolve;
pub mod linalg;
pub mod operator;
pub mod qd;
pub mod quadrature;
pub mod scalar;
pub mod spectrum;
pub mod sturm;
pub mod verify;

pub use dd::Dd;
pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::{EpsilonParam, FourierCoeffsFull, OneSidedCoeffs, PeriodicGridFunction};
pub use operator::TridiagonalMatrix;
pub use qd::Qd;
pub use spectrum::{PrecisionMode, Spectrum};
