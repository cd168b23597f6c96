//! Bubble-tower solutions of `−Δu = u^{p*+ε} − V(|y|) u^q` in the radial
//! setting.
//!
//! The crate is organised bottom-up:
//!
//! * [`profiles`] holds the exact profile `U`, the bubbles and the
//!   Emden-Fowler change of variables;
//! * [`quadrature`] integrates decaying functions on the line and produces
//!   the energy constants;
//! * [`reduced_model`] is the finite-dimensional functional `Ψ_k`, its
//!   critical point and the asymptotic predictions built from it;
//! * [`field`] discretises functions on a truncated line and evaluates the
//!   energy, residuals and linearised operator;
//! * [`reduction`] performs the Lyapunov-Schmidt reduction and the outer
//!   Newton solve;
//! * [`verifier`] shoots the radial ODE independently and compares profiles;
//! * [`cli`] drives all of it from the command line with reproducible
//!   artifacts.

pub mod cli;
pub mod error;
pub mod field;
pub mod linalg;
pub mod profiles;
pub mod quadrature;
pub mod reduced_model;
pub mod reduction;
pub mod verifier;

pub use error::{Error, Result};
