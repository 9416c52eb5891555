//! Pseudo-spectral simulation and numerical verification for the 1-D cubic
//! NLS with half-wave dispersion,
//!
//! ```text
//! i u_t - |D|^{1/2} u = c0 |u|^2 u + c1 u^3 + c2 u conj(u)^2 + c3 conj(u)^3.
//! ```
//!
//! The solver integrates the profile `f^(xi, t) = e^{i t |xi|^{1/2}} u^(xi, t)`
//! with dealiased RK4; `diagnostics` and `scattering` measure norm growth,
//! sup-norm decay and convergence of the phase-corrected profile, and
//! `oscillatory` checks the resonant stationary-phase term by direct quadrature.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod initial;
pub mod io;
pub mod oscillatory;
pub mod scattering;
pub mod spectral;

pub use error::{Error, Result};
pub use evolution::{Coefficients, ProfileState, RunConfig};
pub use spectral::SpectralGrid;
