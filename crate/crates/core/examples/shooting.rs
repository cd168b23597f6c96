//! Independent shooting search for the single-bubble tower, compared with
//! the reduction output in the Emden-Fowler variable.
//!
//! ```text
//! cargo run --release --example shooting -- 0.05
//! ```

use bubble_tower::profiles::{ModelParams, PotentialSpec, Profile1D, Regime};
use bubble_tower::quadrature::energy_constants;
use bubble_tower::reduced_model::tower_config;
use bubble_tower::reduction::{assemble_solution, solve_reduced, ReductionConfig};
use bubble_tower::verifier::{compare, find_tower, predicted_height, ShootConfig, Window};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eps: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0.05);
    let params = ModelParams::new(3, 4.0, eps, 1, Regime::Sub, PotentialSpec::constant(-1.0))?;
    let c = energy_constants(3, 4.0)?;
    let guess = tower_config(&c, &params)?;

    let shot = find_tower(&params, &guess, &ShootConfig::default())?;
    println!("predicted u(0) = {:.6}", predicted_height(&params, &guess));
    println!(
        "shooting  u(0) = {:.6} ({:?}, {} EF peaks)",
        shot.u0, shot.classification, shot.peak_count_ef
    );

    let tower = solve_reduced(
        &params,
        &c,
        &ReductionConfig {
            h: 0.01,
            ..Default::default()
        },
    )?;
    let assembled = assemble_solution(&tower.state, &params)?;
    let line = shot.line(params.regime)?;
    let xi = tower.xi[0];
    let m = compare(&line, &assembled.line, Window::new(xi - 2.0, xi + 2.0, 401))?;
    println!(
        "EF window |x - xi| <= 2: sup rel {:.3e}, L2 rel {:.3e}",
        m.sup_rel, m.l2_rel
    );
    println!("shooting peaks  {:?}", m.peaks_a);
    println!("reduction peaks {:?}", m.peaks_b);
    println!("xi* = {:.6}, v(xi) = {:.6}", guess.xi[0], line.eval(xi));
    Ok(())
}
