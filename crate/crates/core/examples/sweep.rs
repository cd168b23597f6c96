//! Sizes of the residual and the correction along a ladder of ε, with the
//! fitted log-log slopes.
//!
//! ```text
//! cargo run --release --example sweep -- 1
//! ```

use bubble_tower::cli::fit_slope;
use bubble_tower::profiles::{ModelParams, PotentialSpec, Regime};
use bubble_tower::quadrature::energy_constants;
use bubble_tower::reduced_model::tower_config;
use bubble_tower::reduction::{iterate_phi, ReductionConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(1);
    let c = energy_constants(3, 4.0)?;
    let cfg = ReductionConfig::default();
    let mut r_pts = Vec::new();
    let mut phi_pts = Vec::new();
    println!(
        "{:>8} {:>12} {:>12} {:>6}",
        "eps", "||R||_*", "||phi||_*", "iters"
    );
    for eps in [1e-2, 5e-3, 2e-3, 1e-3] {
        let params = ModelParams::new(3, 4.0, eps, k, Regime::Sub, PotentialSpec::constant(-1.0))?;
        let tower = tower_config(&c, &params)?;
        let grid = cfg.grid_for(&tower.xi, &params)?;
        let s = iterate_phi(&tower.xi, &params, &grid, &cfg)?;
        println!(
            "{eps:8.0e} {:12.4e} {:12.4e} {:6}",
            s.residual_star_norm, s.star_norm_phi, s.iterations
        );
        r_pts.push((eps, s.residual_star_norm));
        phi_pts.push((eps, s.star_norm_phi));
    }
    println!(
        "slope ||R||_*   = {:.3}",
        fit_slope(&r_pts).unwrap_or(f64::NAN)
    );
    println!(
        "slope ||phi||_* = {:.3}",
        fit_slope(&phi_pts).unwrap_or(f64::NAN)
    );
    Ok(())
}
