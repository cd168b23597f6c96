//! Functions sampled on a truncated line: the ansatz, weighted norms,
//! energy, residual, nonlinear remainder and linearised operator.
//!
//! Everything is discretised consistently: the energy's gradient is the
//! discrete operator, so a critical point of the discrete reduced energy is
//! exactly a zero of the discrete multipliers.

mod grid;
mod ops;

pub use grid::{default_sigma, default_width, sigma_bound, Grid, GridFunction, SpikeFrame};
pub(crate) use ops::nonlinear_n_with;
pub use ops::{
    ansatz_energy, energy, energy_with_ghosts, linearized_apply, linearized_potential, nonlinear_n,
    nonlinear_operator, residual_continuum, residual_r, star_norm, ubar, Ansatz, Equation,
};
