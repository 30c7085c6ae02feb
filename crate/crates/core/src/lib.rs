//! Adaptive operator splitting for nonlinear parabolic systems on the torus.
//!
//! The crate is organized bottom-up:
//!
//! * [`spectral`]: periodic grids, Fourier transforms, Sobolev norms.
//! * [`problems`]: split evolution problems (Gray–Scott, Van der Pol PDE, a
//!   linear diagnostic problem) whose sub-operators expose flow maps.
//! * [`schemes`]: splitting coefficients, the composition engine, adjoints and
//!   the scheme/pair registry.
//! * [`estimators`]: local error estimators built from scheme pairs.
//! * [`controller`]: step-size selection and the adaptive/fixed drivers.
//! * [`diagnostics`]: convergence studies, commutator checks, efficiency
//!   comparisons.

pub mod controller;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod problems;
pub mod schemes;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Exec;
pub use num_complex::Complex64;
