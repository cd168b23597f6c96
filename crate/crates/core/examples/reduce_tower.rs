//! Lyapunov-Schmidt reduction of a single-bubble tower and Newton solve of
//! the reduced problem.
//!
//! ```text
//! cargo run --release --example reduce_tower -- 0.05
//! ```

use bubble_tower::profiles::{ModelParams, PotentialSpec, Regime};
use bubble_tower::quadrature::energy_constants;
use bubble_tower::reduced_model::critical_lambda;
use bubble_tower::reduction::{solve_reduced, ReductionConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eps: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0.05);
    let k: usize = std::env::args()
        .nth(2)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(1);
    let params = ModelParams::new(3, 4.0, eps, k, Regime::Sub, PotentialSpec::constant(-1.0))?;
    let c = energy_constants(3, 4.0)?;
    let cfg = ReductionConfig {
        h: 0.01,
        ..Default::default()
    };

    let start = std::time::Instant::now();
    let tower = solve_reduced(&params, &c, &cfg)?;
    println!("Lambda*     = {:?}", critical_lambda(&c, &params)?);
    println!("Lambda_eps  = {:?}", tower.lambda);
    println!("xi          = {:?}", tower.xi);
    println!(
        "|grad Phi|  = {:e} after {} Newton steps",
        tower.grad_norm, tower.newton_iterations
    );
    println!("c           = {:?}", tower.state.c);
    println!("||phi||_*   = {:e}", tower.state.star_norm_phi);
    println!("||R||_*     = {:e}", tower.state.residual_star_norm);
    println!("elapsed     = {:?}", start.elapsed());
    Ok(())
}
