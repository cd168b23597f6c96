//! The reduced energy `Ψ_k`, its maximiser, and the tower it predicts.
//!
//! ```text
//! cargo run --example predict -- 4 0.01 3
//! ```

use bubble_tower::profiles::{ModelParams, PotentialSpec, Regime};
use bubble_tower::quadrature::energy_constants;
use bubble_tower::reduced_model::{grad_psi_k, predicted_energy, psi_k, tower_config};
use bubble_tower::verifier::predicted_height;

fn arg<T: std::str::FromStr>(i: usize, default: T) -> Result<T, T::Err> {
    std::env::args()
        .nth(i)
        .map(|s| s.parse())
        .transpose()
        .map(|v| v.unwrap_or(default))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q: f64 = arg(1, 4.0).map_err(|_| "bad q")?;
    let eps: f64 = arg(2, 0.01).map_err(|_| "bad eps")?;
    let k: usize = arg(3, 3).map_err(|_| "bad k")?;
    let regime = if q > 5.0 { Regime::Super } else { Regime::Sub };
    let params = ModelParams::new(3, q, eps, k, regime, PotentialSpec::constant(-1.0))?;
    let c = energy_constants(3, q)?;

    let tower = tower_config(&c, &params)?;
    let grad = grad_psi_k(&tower.lambda, &c, &params)?;
    println!("regime {regime:?}, k = {k}, eps = {eps}");
    println!(
        "{:>3} {:>16} {:>12} {:>16}",
        "j", "Lambda_j", "xi_j", "alpha_j"
    );
    for j in 0..k {
        println!(
            "{:3} {:16.10} {:12.6} {:16.8e}",
            j + 1,
            tower.lambda[j],
            tower.xi[j],
            tower.alpha[j]
        );
    }
    println!(
        "Psi_k(Lambda*)    = {:.12}",
        psi_k(&tower.lambda, &c, &params)?
    );
    println!(
        "|grad Psi_k|      = {:.1e}",
        grad.iter().map(|g| g * g).sum::<f64>().sqrt()
    );
    let e = predicted_energy(&tower.lambda, eps, &c, &params)?;
    println!(
        "predicted energy  = {:.12} (k a1 = {:.12})",
        e.total, e.leading
    );
    println!(
        "predicted u(0)    = {:.6e}",
        predicted_height(&params, &tower)
    );
    Ok(())
}
