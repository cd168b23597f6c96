//! The one-dimensional profile, its ODE, and the Emden-Fowler change of
//! variables that turns a standard bubble into a translate of it.
//!
//! ```text
//! cargo run --example profiles -- 3
//! ```

use bubble_tower::profiles::{
    bubble_w, critical_exponents, model_constants, EmdenFowler, Profile, Regime,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: u32 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(3);
    let u = Profile::new(n)?;
    let (p_s, p_star) = critical_exponents(n)?;
    let (gamma, beta) = model_constants(n)?;
    println!("N = {n}: p^s = {p_s}, p* = {p_star}, gamma = {gamma:.12}, beta = {beta}");

    println!("{:>6} {:>14} {:>14} {:>12}", "x", "U", "U'", "ODE defect");
    for i in 0..=8 {
        let x = -8.0 + 2.0 * i as f64;
        let defect = u.d2u(x) - u.u(x) + beta * u.u(x).powf(p_star);
        println!("{x:6.1} {:14.6e} {:14.6e} {defect:12.1e}", u.u(x), u.du(x));
    }

    // Rescaling a bubble by λ translates its image on the line.
    let ef = EmdenFowler::new(n, Regime::Sub)?;
    for lambda in [0.5, 1.0, 4.0] {
        let w = |r: f64| bubble_w(lambda, &[0.0], &[r], n).unwrap();
        let shift = ef.line_coordinate(lambda) + 0.0;
        let worst = (0..200)
            .map(|i| -6.0 + 0.06 * i as f64)
            .map(|x| (ef.forward_value(&w, x + shift) - u.u(x)).abs())
            .fold(0.0, f64::max);
        println!(
            "lambda = {lambda}: peak at x = {shift:+.4}, max |v - U(x - shift)| = {worst:.1e}"
        );
    }
    Ok(())
}
