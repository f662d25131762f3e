//! Numerical pipeline for the open-system Dicke model whose spin-like mode
//! is damped by a sub-Ohmic reservoir.
//!
//! The two boson modes are `a` (Markovian loss at rate `kappa`) and `b`
//! (coupled to a bath with spectral density `~ omega^s`, `0 < s < 1`).
//! Modules, bottom-up:
//!
//! - [`model`]: parameters, validation, the critical coupling `y_c`.
//! - [`bath`]: coupling density and level-shift kernels on both Riemann sheets.
//! - [`greens`]: 4x4 retarded/Keldysh blocks and the power spectra `C_a`, `C_b`.
//! - [`poles`]: characteristic function, Newton root finder, soft-mode sweep.
//! - [`observables`]: steady-state populations and the critical-exponent fit.
//!
//! All frequencies are measured in units of `omega_b`.

pub mod bath;
pub mod error;
pub mod greens;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod poles;
pub mod quad;
pub mod validation;

pub use error::{Error, Result};
pub use model::ModelParams;
pub use num_complex::Complex64;
