//! Closed-form profiles, model constants and the Emden-Fowler change of
//! variables.

mod emden_fowler;
mod params;

pub use emden_fowler::{
    ef_forward, ef_inverse, EmdenFowler, LineFunction, Profile1D, RadialFunction,
};
pub use params::{critical_exponents, model_constants, ModelParams, PotentialSpec, Regime};

use crate::error::{Error, Result};

/// The bubble `w_{λ,ξ}(y) = γ_N (λ/(λ²+|y−ξ|²))^{(N−2)/2}`.
pub fn bubble_w(lambda: f64, center: &[f64], y: &[f64], n: u32) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!(
            "bubble scale lambda = {lambda} must be positive"
        )));
    }
    if center.len() != y.len() {
        return Err(Error::Domain(
            "center and point have different dimensions".into(),
        ));
    }
    let (gamma, _) = model_constants(n)?;
    let d2: f64 = center.iter().zip(y).map(|(c, p)| (p - c) * (p - c)).sum();
    let m = (n as f64 - 2.0) / 2.0;
    Ok(gamma * (lambda / (lambda * lambda + d2)).powf(m))
}

/// The Emden-Fowler image of the standard bubble,
/// `U(x) = γ_N (2 cosh(2x/(N−2)))^{−(N−2)/2}`, with its first two derivatives.
///
/// Evaluation goes through `log U` so nothing overflows for large `|x|`.
#[derive(Debug, Clone, Copy)]
pub struct Profile {
    n: u32,
    log_gamma: f64,
    m: f64,
    a: f64,
}

impl Profile {
    pub fn new(n: u32) -> Result<Self> {
        let (gamma, _) = model_constants(n)?;
        let m = (n as f64 - 2.0) / 2.0;
        Ok(Self {
            n,
            log_gamma: gamma.ln(),
            m,
            a: 1.0 / m,
        })
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn log_u(&self, x: f64) -> f64 {
        let t = (self.a * x).abs();
        self.log_gamma - self.m * (t + (-2.0 * t).exp().ln_1p())
    }

    pub fn u(&self, x: f64) -> f64 {
        self.log_u(x).exp()
    }

    /// `U' = −tanh(2x/(N−2)) U`.
    pub fn du(&self, x: f64) -> f64 {
        -(self.a * x).tanh() * self.u(x)
    }

    /// `U'' = (tanh² − (2/(N−2)) sech²) U` with the argument `2x/(N−2)`.
    pub fn d2u(&self, x: f64) -> f64 {
        let t = self.a * x;
        let th = t.tanh();
        let e = (-2.0 * t.abs()).exp();
        let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
        (th * th - self.a * sech2) * self.u(x)
    }
}

pub fn profile_u(x: f64, n: u32) -> Result<f64> {
    Ok(Profile::new(n)?.u(x))
}

pub fn profile_du(x: f64, n: u32) -> Result<f64> {
    Ok(Profile::new(n)?.du(x))
}

pub fn profile_d2u(x: f64, n: u32) -> Result<f64> {
    Ok(Profile::new(n)?.d2u(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponents_and_constants() {
        assert_eq!(critical_exponents(3).unwrap(), (3.0, 5.0));
        assert_eq!(critical_exponents(4).unwrap(), (2.0, 3.0));
        assert_eq!(critical_exponents(6).unwrap(), (1.5, 2.0));
        assert!(critical_exponents(2).is_err());
        let (g, b) = model_constants(4).unwrap();
        assert_relative_eq!(g, 8f64.sqrt(), epsilon = 1e-15);
        assert_eq!(b, 1.0);
        let (g, b) = model_constants(3).unwrap();
        assert_relative_eq!(g, 3f64.powf(0.25), epsilon = 1e-15);
        assert_eq!(b, 4.0);
        let (g, b) = model_constants(6).unwrap();
        assert_relative_eq!(g, 24.0, epsilon = 1e-12);
        assert_eq!(b, 0.25);
        assert!(model_constants(1).is_err());
    }

    #[test]
    fn bubble_values() {
        let g = model_constants(3).unwrap().0;
        assert_relative_eq!(
            bubble_w(1.0, &[0.0; 3], &[0.0; 3], 3).unwrap(),
            g,
            epsilon = 1e-15
        );
        assert_relative_eq!(g, 1.316074, epsilon = 1e-6);
        assert_relative_eq!(
            bubble_w(1.0, &[0.0; 3], &[1.0, 0.0, 0.0], 3).unwrap(),
            g / 2f64.sqrt(),
            epsilon = 1e-15
        );
        for lam in [0.1, 2.0, 7.5] {
            let w = bubble_w(lam, &[0.0; 3], &[0.0; 3], 3).unwrap();
            assert_relative_eq!(w, g * lam.powf(-0.5), max_relative = 1e-14);
        }
        assert!(bubble_w(0.0, &[0.0], &[0.0], 3).is_err());
    }

    #[test]
    fn profile_center_value() {
        assert_relative_eq!(profile_u(0.0, 3).unwrap(), 0.930605, epsilon = 1e-6);
    }

    #[test]
    fn profile_no_overflow() {
        let p = Profile::new(3).unwrap();
        for x in [-800.0, -350.0, 350.0, 800.0] {
            let v = p.u(x);
            assert!(v.is_finite() && v >= 0.0);
            assert!(p.du(x).is_finite() && p.d2u(x).is_finite());
        }
        assert!(p.log_u(800.0).is_finite());
    }

    #[test]
    fn derivative_matches_differences() {
        let p = Profile::new(3).unwrap();
        for x in [-2.0, 1.0, 4.0] {
            let e1 = ((p.u(x + 1e-3) - p.u(x - 1e-3)) / 2e-3 - p.du(x)).abs();
            let e2 = ((p.u(x + 5e-4) - p.u(x - 5e-4)) / 1e-3 - p.du(x)).abs();
            assert!(e1 < 1e-6);
            // second order: halving the step quarters the error
            assert!((e1 / e2 - 4.0).abs() < 0.2, "ratio {}", e1 / e2);
            let d2 = (p.du(x + 1e-4) - p.du(x - 1e-4)) / 2e-4;
            assert_relative_eq!(d2, p.d2u(x), epsilon = 1e-7);
        }
    }
}
