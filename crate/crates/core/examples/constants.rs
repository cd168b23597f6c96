//! Energy constants of the one-dimensional profile by adaptive quadrature,
//! with their error bounds.
//!
//! ```text
//! cargo run --example constants -- 4
//! ```

use bubble_tower::quadrature::energy_constants;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(4.0);
    for n in [3u32, 4, 5] {
        let c = match energy_constants(n, q) {
            Ok(c) => c,
            Err(e) => {
                println!("N = {n}: {e}");
                continue;
            }
        };
        println!("N = {n}, q = {q}");
        println!("  a1  = {:.15} (+- {:.1e})", c.a1, c.err.a1);
        println!("  a2  = {:.15} (+- {:.1e})", c.a2, c.err.a2);
        println!("  a3  = {:.15} (+- {:.1e})", c.a3, c.err.a3);
        println!("  a4  = {:.15} (+- {:.1e})", c.a4, c.err.a4);
        if let Some(a5) = c.a5 {
            println!("  a5  = {a5:.15}");
        }
        if let Some(a5_hat) = c.a5_hat {
            println!("  a5^ = {a5_hat:.15}");
        }
        println!("  C_N = {:.15}", c.c_n);
        // independent check of a1 through an integral identity
        println!(
            "  a1 identity gap = {:.1e}",
            (c.a1 - c.a1_from_identity()).abs()
        );
    }
    Ok(())
}
