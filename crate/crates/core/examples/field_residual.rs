//! Residual of the ansatz on the line and its weighted norm, together with
//! the discrete energy against the reduced expansion.
//!
//! ```text
//! cargo run --release --example field_residual -- 0.01 2
//! ```

use bubble_tower::field::{ansatz_energy, residual_r, star_norm, Grid, SpikeFrame};
use bubble_tower::profiles::{ModelParams, PotentialSpec, Regime};
use bubble_tower::quadrature::energy_constants;
use bubble_tower::reduced_model::{predicted_energy, tower_config};
use bubble_tower::reduction::ReductionConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eps: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0.01);
    let k: usize = std::env::args()
        .nth(2)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(2);
    let params = ModelParams::new(3, 4.0, eps, k, Regime::Sub, PotentialSpec::constant(-1.0))?;
    let c = energy_constants(3, 4.0)?;
    let tower = tower_config(&c, &params)?;
    let cfg = ReductionConfig::default();
    let frame = SpikeFrame::new(tower.xi.clone(), cfg.sigma_for(&params), &params)?;
    let pred = predicted_energy(&tower.lambda, eps, &c, &params)?;

    println!("xi = {:?}, sigma = {}", tower.xi, frame.sigma());
    println!(
        "{:>6} {:>12} {:>14} {:>14}",
        "h", "||R||_*", "E(Ubar)", "(E - pred)/eps"
    );
    for h in [0.04, 0.02, 0.01] {
        let grid = Grid::around(&tower.xi, cfg.width_for(&params), h)?;
        let r = residual_r(&tower.xi, &params, &grid)?;
        let e = ansatz_energy(&tower.xi, &grid, &params)?;
        println!(
            "{h:6.3} {:12.4e} {e:14.10} {:14.4e}",
            star_norm(&r, &frame),
            (e - pred.total) / eps
        );
    }
    Ok(())
}
