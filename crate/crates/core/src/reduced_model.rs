//! The reduced functional `Ψ_k`, its closed-form critical point and the
//! asymptotic predictions (spike locations, amplitudes, energy, profile).
//!
//! Both regimes share one parametrisation: with `d = |p* − q|` the first
//! spike sits at `ξ₁ = −(1/d) log ε − log Λ₁` and every later gap is
//! `−log ε − log Λ_{i+1}`. In the sub regime the potential enters through
//! `a₅ V(0)`, in the super regime through `â₅ V_∞`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profiles::{EmdenFowler, LineFunction, ModelParams, Profile, RadialFunction, Regime};
use crate::quadrature::EnergyConstants;

/// Default admissible box `[δ, 1/δ]` for each `Λ_i`.
pub const DEFAULT_DELTA: f64 = 0.05;

/// Parameters, spike locations and amplitudes of a tower.
#[derive(Debug, Clone, Serialize)]
pub struct TowerConfig {
    pub lambda: Vec<f64>,
    pub xi: Vec<f64>,
    pub alpha: Vec<f64>,
    pub regime: Regime,
}

/// The terms of the energy expansion of the ansatz.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyBreakdown {
    pub total: f64,
    pub leading: f64,
    pub psi_term: f64,
    pub a4_term: f64,
    pub log_term: f64,
    pub remainder: f64,
}

fn check_lambda(lambda: &[f64], params: &ModelParams) -> Result<()> {
    if lambda.len() != params.k {
        return Err(Error::Domain(format!(
            "expected {} Lambda components, got {}",
            params.k,
            lambda.len()
        )));
    }
    if let Some(l) = lambda.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(Error::Domain(format!(
            "Lambda components must be positive, got {l}"
        )));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon = {epsilon} outside (0, 1)")));
    }
    Ok(())
}

/// Spike locations `ξ(Λ)` for the given `ε`.
pub fn spike_locations(lambda: &[f64], epsilon: f64, params: &ModelParams) -> Result<Vec<f64>> {
    check_lambda(lambda, params)?;
    check_epsilon(epsilon)?;
    let d = params.gap_exponent();
    let le = epsilon.ln();
    let mut xi = Vec::with_capacity(lambda.len());
    let mut x = -le / d - lambda[0].ln();
    xi.push(x);
    for l in &lambda[1..] {
        x += -le - l.ln();
        xi.push(x);
    }
    if xi[0] <= 0.0 || xi.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validity(format!(
            "spikes {xi:?} are not positive and increasing (epsilon = {epsilon} too large?)"
        )));
    }
    Ok(xi)
}

/// `Λ ↦ ξ(Λ)` inverted: recovers `Λ` from increasing spike locations.
pub fn lambda_from_spikes(xi: &[f64], epsilon: f64, params: &ModelParams) -> Result<Vec<f64>> {
    check_epsilon(epsilon)?;
    let d = params.gap_exponent();
    let le = epsilon.ln();
    let mut out = Vec::with_capacity(xi.len());
    out.push((-le / d - xi[0]).exp());
    for w in xi.windows(2) {
        out.push((-le - (w[1] - w[0])).exp());
    }
    Ok(out)
}

struct Coefficients {
    k: f64,
    d: f64,
    a2: f64,
    a3: f64,
    pot: f64,
}

fn coefficients(c: &EnergyConstants, params: &ModelParams) -> Result<Coefficients> {
    let a5 = c.potential_constant(params.regime)?;
    Ok(Coefficients {
        k: params.k as f64,
        d: params.gap_exponent(),
        a2: c.a2,
        a3: c.a3,
        pot: a5 * params.reduced_potential(),
    })
}

/// `Ψ_k(Λ) = a₃ k log Λ₁ + a₅ V Λ₁^d + Σ_{i≥2} [(k−i+1) a₃ log Λ_i − a₂ Λ_i]`.
pub fn psi_k(lambda: &[f64], c: &EnergyConstants, params: &ModelParams) -> Result<f64> {
    check_lambda(lambda, params)?;
    let co = coefficients(c, params)?;
    let mut s = co.a3 * co.k * lambda[0].ln() + co.pot * lambda[0].powf(co.d);
    for (i, l) in lambda.iter().enumerate().skip(1) {
        let weight = co.k - i as f64;
        s += weight * co.a3 * l.ln() - co.a2 * l;
    }
    Ok(s)
}

pub fn grad_psi_k(lambda: &[f64], c: &EnergyConstants, params: &ModelParams) -> Result<Vec<f64>> {
    check_lambda(lambda, params)?;
    let co = coefficients(c, params)?;
    let mut g = Vec::with_capacity(lambda.len());
    let l1 = lambda[0];
    g.push(co.a3 * co.k / l1 + co.pot * co.d * l1.powf(co.d - 1.0));
    for (i, l) in lambda.iter().enumerate().skip(1) {
        g.push((co.k - i as f64) * co.a3 / l - co.a2);
    }
    Ok(g)
}

/// Diagonal of the Hessian of `Ψ_k` (the functional is separable).
pub fn hessian_diag_psi_k(
    lambda: &[f64],
    c: &EnergyConstants,
    params: &ModelParams,
) -> Result<Vec<f64>> {
    check_lambda(lambda, params)?;
    let co = coefficients(c, params)?;
    let l1 = lambda[0];
    let mut h =
        vec![-co.a3 * co.k / (l1 * l1) + co.pot * co.d * (co.d - 1.0) * l1.powf(co.d - 2.0)];
    for (i, l) in lambda.iter().enumerate().skip(1) {
        h.push(-(co.k - i as f64) * co.a3 / (l * l));
    }
    Ok(h)
}

/// The unique maximiser `Λ*` of `Ψ_k`.
pub fn critical_lambda(c: &EnergyConstants, params: &ModelParams) -> Result<Vec<f64>> {
    let v = params.reduced_potential();
    if v >= 0.0 {
        return Err(match params.regime {
            Regime::Sub => Error::Hypothesis {
                regime: "sub",
                detail: format!("critical point needs V(0) < 0, got {v}"),
            },
            Regime::Super => Error::Hypothesis {
                regime: "super",
                detail: format!("critical point needs V_inf < 0, got {v}"),
            },
        });
    }
    let co = coefficients(c, params)?;
    let mut out = vec![(-co.a3 * co.k / (co.pot * co.d)).powf(1.0 / co.d)];
    for i in 1..params.k {
        out.push((co.k - i as f64) * co.a3 / co.a2);
    }
    Ok(out)
}

/// Amplitude coefficients `α_j` of the asymptotic profile.
///
/// Closed form `α₁ = [−a₅V(p*−q)/(a₃k)]^{1/(p*−q)}` times
/// `(a₂/a₃)^{j−1}(k−j)!/(k−1)!`; the super regime uses `â₅`, `V_∞` and the
/// exponent `1/(q−p*)`.
pub fn amplitudes(
    lambda_star: &[f64],
    c: &EnergyConstants,
    params: &ModelParams,
) -> Result<Vec<f64>> {
    check_lambda(lambda_star, params)?;
    let co = coefficients(c, params)?;
    let first = (-co.pot * co.d / (co.a3 * co.k)).powf(1.0 / co.d);
    let k = params.k;
    let mut out = Vec::with_capacity(k);
    // (k-j)!/(k-1)! built incrementally
    let mut fact = 1.0;
    for j in 1..=k {
        if j > 1 {
            fact /= (k + 1 - j) as f64;
        }
        out.push(first * (co.a2 / co.a3).powi(j as i32 - 1) * fact);
    }
    Ok(out)
}

/// Energy expansion `k a₁ + εΨ_k + kεβa₄ − [a₃k/(2d)]((1−k)d − 2) ε log ε`.
pub fn predicted_energy(
    lambda: &[f64],
    epsilon: f64,
    c: &EnergyConstants,
    params: &ModelParams,
) -> Result<EnergyBreakdown> {
    check_epsilon(epsilon)?;
    let psi = psi_k(lambda, c, params)?;
    let k = params.k as f64;
    let d = params.gap_exponent();
    let leading = k * c.a1;
    let psi_term = epsilon * psi;
    let a4_term = k * epsilon * params.beta() * c.a4;
    let log_term = -(c.a3 * k / (2.0 * d)) * ((1.0 - k) * d - 2.0) * epsilon * epsilon.ln();
    Ok(EnergyBreakdown {
        total: leading + psi_term + a4_term + log_term,
        leading,
        psi_term,
        a4_term,
        log_term,
        remainder: 0.0,
    })
}

/// `Λ*`, `ξ(Λ*)` and `α` for the parameters' `ε`.
pub fn tower_config(c: &EnergyConstants, params: &ModelParams) -> Result<TowerConfig> {
    let lambda = critical_lambda(c, params)?;
    let xi = spike_locations(&lambda, params.epsilon, params)?;
    let alpha = amplitudes(&lambda, c, params)?;
    Ok(TowerConfig {
        lambda,
        xi,
        alpha,
        regime: params.regime,
    })
}

/// The ansatz `Σ U(· − ξ_i)` as a function on the line.
pub fn ansatz_line(xi: &[f64], n: u32) -> Result<LineFunction> {
    let p = Profile::new(n)?;
    let xi = xi.to_vec();
    Ok(LineFunction::new(
        move |x| xi.iter().map(|c| p.u(x - c)).sum(),
        1.0,
        1.0,
    ))
}

/// The predicted radial profile: the ansatz at `Λ*` carried back to the
/// radial variable.
pub fn predicted_solution(params: &ModelParams, c: &EnergyConstants) -> Result<RadialFunction> {
    let cfg = tower_config(c, params)?;
    let v = ansatz_line(&cfg.xi, params.n)?;
    Ok(EmdenFowler::new(params.n, params.regime)?.inverse(&v))
}

/// The explicit superposition of bubbles:
/// `γ_N Σ_j (1 + A_j^{4/(N−2)} r²)^{−(N−2)/2} A_j` with
/// `A_j = α_j ε^{∓(j−1+1/d)}`.
pub fn bubble_superposition(params: &ModelParams, c: &EnergyConstants) -> Result<RadialFunction> {
    check_epsilon(params.epsilon)?;
    let lambda = critical_lambda(c, params)?;
    let alpha = amplitudes(&lambda, c, params)?;
    let d = params.gap_exponent();
    let s = params.regime.sign();
    let amps: Vec<f64> = alpha
        .iter()
        .enumerate()
        .map(|(j, a)| a * params.epsilon.powf(-s * (j as f64 + 1.0 / d)))
        .collect();
    let gamma = params.gamma();
    let m = (params.n as f64 - 2.0) / 2.0;
    Ok(RadialFunction::new(
        move |r| {
            amps.iter()
                .map(|a| gamma * a * (1.0 + a.powf(2.0 / m) * r * r).powf(-m))
                .sum()
        },
        params.n as f64 - 2.0,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{PotentialSpec, Profile1D};
    use crate::quadrature::energy_constants;

    fn sub(k: usize, eps: f64) -> ModelParams {
        ModelParams::new(3, 4.0, eps, k, Regime::Sub, PotentialSpec::constant(-1.0)).unwrap()
    }

    #[test]
    fn spike_examples() {
        let p = sub(1, 0.01);
        let xi = spike_locations(&[1.0], 0.01, &p).unwrap();
        assert!((xi[0] - 100f64.ln()).abs() < 1e-12);
        let p2 = sub(2, 0.01);
        let xi = spike_locations(&[0.5, 1.0], 0.01, &p2).unwrap();
        assert!((xi[1] - xi[0] - 100f64.ln()).abs() < 1e-12);
        let xi_small = spike_locations(&[0.5, 1.0], 0.001, &p2).unwrap();
        assert!(((xi_small[1] - xi_small[0]) - (xi[1] - xi[0]) - 10f64.ln()).abs() < 1e-12);
        assert!(spike_locations(&[-1.0, 1.0], 0.01, &p2).is_err());
        assert!(matches!(
            spike_locations(&[0.5, 50.0], 0.3, &p2),
            Err(Error::Validity(_))
        ));
        let back = lambda_from_spikes(&xi, 0.01, &p2).unwrap();
        assert!((back[0] - 0.5).abs() < 1e-12 && (back[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn critical_point_and_hessian() {
        let c = energy_constants(3, 4.0).unwrap();
        for k in 1..=4 {
            let p = sub(k, 0.01);
            let l = critical_lambda(&c, &p).unwrap();
            let g = grad_psi_k(&l, &c, &p).unwrap();
            assert!(g.iter().all(|v| v.abs() < 1e-12), "k={k} {g:?}");
            let h = hessian_diag_psi_k(&l, &c, &p).unwrap();
            assert!(h.iter().all(|v| *v < 0.0));
            let d = p.gap_exponent();
            assert!((h[0] + k as f64 * c.a3 * d / (l[0] * l[0])).abs() < 1e-12);
        }
        let p = sub(3, 0.01);
        let l = critical_lambda(&c, &p).unwrap();
        assert!((l[1] - 2.0 * c.a3 / c.a2).abs() < 1e-15);
        let k1 = critical_lambda(&c, &sub(1, 0.01)).unwrap()[0];
        assert!((k1 - (-c.a3 / (c.a5.unwrap() * -1.0 * 1.0))).abs() < 1e-14);
        let pos = sub(1, 0.01)
            .with_potential(PotentialSpec::constant(1.0))
            .unwrap();
        assert!(matches!(
            critical_lambda(&c, &pos),
            Err(Error::Hypothesis { .. })
        ));
    }

    #[test]
    fn gradient_matches_differences() {
        let c = energy_constants(3, 4.0).unwrap();
        let p = sub(3, 0.01);
        let l = vec![0.7, 0.4, 1.3];
        let g = grad_psi_k(&l, &c, &p).unwrap();
        for i in 0..3 {
            let mut lp = l.clone();
            let mut lm = l.clone();
            lp[i] += 1e-6;
            lm[i] -= 1e-6;
            let fd = (psi_k(&lp, &c, &p).unwrap() - psi_k(&lm, &c, &p).unwrap()) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-6 * g[i].abs().max(1.0));
        }
    }

    #[test]
    fn amplitude_identity_and_ratio() {
        let c = energy_constants(3, 4.0).unwrap();
        for k in 1..=5 {
            let p = sub(k, 0.01);
            let l = critical_lambda(&c, &p).unwrap();
            let a = amplitudes(&l, &c, &p).unwrap();
            let mut prod = 1.0;
            for j in 0..k {
                prod *= l[j];
                assert!((a[j] * prod - 1.0).abs() < 1e-12);
                if j + 1 < k {
                    assert!((a[j] / a[j + 1] - (k - j - 1) as f64 * c.a3 / c.a2).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn energy_terms() {
        let c = energy_constants(3, 4.0).unwrap();
        let p = sub(1, 0.01);
        let l = critical_lambda(&c, &p).unwrap();
        let e = predicted_energy(&l, 1e-12, &c, &p).unwrap();
        assert!((e.total - c.a1).abs() < 1e-9);
        let e = predicted_energy(&l, 0.01, &c, &p).unwrap();
        let coeff = c.a3 / p.gap_exponent();
        assert!((e.log_term - coeff * 0.01 * 0.01f64.ln()).abs() < 1e-15);
        let sum = e.leading + e.psi_term + e.a4_term + e.log_term + e.remainder;
        assert_eq!(sum, e.total);
    }

    #[test]
    fn predicted_solution_matches_superposition() {
        let c = energy_constants(3, 4.0).unwrap();
        for (k, eps) in [(1, 0.01), (2, 0.03), (3, 0.01)] {
            let p = sub(k, eps);
            let a = predicted_solution(&p, &c).unwrap();
            let b = bubble_superposition(&p, &c).unwrap();
            for r in [1e-9, 1e-6, 1e-3, 0.1, 1.0, 10.0] {
                let (x, y) = (a.eval(r), b.eval(r));
                assert!((x - y).abs() < 1e-10 * y, "k={k} r={r}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn peak_height_trends() {
        let c = energy_constants(3, 4.0).unwrap();
        let h = |e| predicted_solution(&sub(1, e), &c).unwrap().eval(1e-12);
        assert!(h(1e-3) > h(1e-2));
        let c7 = energy_constants(3, 7.0).unwrap();
        let sup = |e| {
            let p = ModelParams::new(3, 7.0, e, 1, Regime::Super, PotentialSpec::constant(-1.0))
                .unwrap();
            predicted_solution(&p, &c7).unwrap().eval(1e-12)
        };
        assert!(sup(1e-3) < sup(1e-2));
    }
}
