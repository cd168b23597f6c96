//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use statrs::function::beta::ln_beta;
use statrs::function::gamma::digamma;

/// Closed forms for integrals of the profile through the Beta function.
pub struct Closed {
    pub gamma: f64,
    pub m: f64,
    pub a: f64,
    pub beta: f64,
    pub p_star: f64,
}

impl Closed {
    pub fn new(n: u32) -> Self {
        let nf = n as f64;
        let m = (nf - 2.0) / 2.0;
        Self {
            gamma: (nf * (nf - 2.0)).powf((nf - 2.0) / 4.0),
            m,
            a: 1.0 / m,
            beta: (2.0 / (nf - 2.0)).powi(2),
            p_star: (nf + 2.0) / (nf - 2.0),
        }
    }

    /// `∫ (2cosh ax)^{−μ} e^{cx} dx`.
    pub fn cosh_integral(&self, mu: f64, c: f64) -> f64 {
        let t = c / (2.0 * self.a);
        ln_beta(mu / 2.0 + t, mu / 2.0 - t).exp() / (2.0 * self.a)
    }

    /// `∫ U^s e^{cx} dx`.
    pub fn power(&self, s: f64, c: f64) -> f64 {
        self.gamma.powf(s) * self.cosh_integral(self.m * s, c)
    }

    pub fn a1(&self) -> f64 {
        // U'² = U² − sech²(ax) U², and sech² = 4(2cosh)^{−2}
        let g2 = self.gamma * self.gamma;
        let u2 = g2 * self.cosh_integral(2.0 * self.m, 0.0);
        let sech_u2 = 4.0 * g2 * self.cosh_integral(2.0 * self.m + 2.0, 0.0);
        let s = self.p_star + 1.0;
        0.5 * (2.0 * u2 - sech_u2) - self.beta / s * self.power(s, 0.0)
    }

    pub fn a3(&self) -> f64 {
        let s = self.p_star + 1.0;
        self.beta / s * self.power(s, 0.0)
    }

    pub fn a4(&self) -> f64 {
        let s = self.p_star + 1.0;
        let j = self.power(s, 0.0);
        let dlog = self.gamma.ln() + self.m * (digamma(self.m * s / 2.0) - digamma(self.m * s));
        j / (s * s) - j * dlog / s
    }

    pub fn potential(&self, q: f64) -> f64 {
        self.beta / (q + 1.0) * self.power(q + 1.0, (self.p_star - q).abs())
    }

    pub fn interaction(&self) -> f64 {
        self.power(self.p_star, 1.0)
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Newton ascent in `log Λ` with finite-difference derivatives of the
/// values of `f` only.
pub fn fd_newton(f: &dyn Fn(&[f64]) -> f64, start: &[f64]) -> Option<Vec<f64>> {
    let k = start.len();
    let mut y: Vec<f64> = start.iter().map(|v| v.ln()).collect();
    let g = |y: &[f64]| -> f64 { f(&y.iter().map(|v| v.exp()).collect::<Vec<_>>()) };
    let h = 1e-4;
    for _ in 0..200 {
        let mut grad = vec![0.0; k];
        let mut hess = nalgebra::DMatrix::zeros(k, k);
        let f0 = g(&y);
        for i in 0..k {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[i] += h;
            ym[i] -= h;
            let (fp, fm) = (g(&yp), g(&ym));
            grad[i] = (fp - fm) / (2.0 * h);
            hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        }
        // Ψ_k is separable, so the mixed partials vanish; a full FD
        // Hessian would only add noise
        let step: Vec<f64> = (0..k)
            .map(|i| {
                let d = hess[(i, i)];
                if d < 0.0 {
                    -grad[i] / d
                } else {
                    grad[i].signum() * 0.5
                }
            })
            .map(|s: f64| s.clamp(-1.0, 1.0))
            .collect();
        for (yi, s) in y.iter_mut().zip(&step) {
            *yi += s;
        }
        if step.iter().all(|s| s.abs() < 1e-13) {
            break;
        }
    }
    let x: Vec<f64> = y.iter().map(|v| v.exp()).collect();
    x.iter().all(|v| v.is_finite()).then_some(x)
}
