//! Adaptive Gauss-Kronrod quadrature on the real line for exponentially
//! decaying integrands, and the energy constants of the reduced model.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profiles::{critical_exponents, model_constants, Profile, Regime};

/// Default absolute tolerance for the energy constants.
pub const DEFAULT_TOL: f64 = 1e-12;
const MAX_PANELS: usize = 20_000;

// 7-point Gauss / 15-point Kronrod nodes on [-1, 1], positive half.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// An integral value with an error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadrature {
    pub value: f64,
    pub err: f64,
}

/// Declared envelope `|f(x)| ≤ bound · e^{−left·|x|}` for `x < 0` and
/// `|f(x)| ≤ bound · e^{−right·x}` for `x > 0`.
#[derive(Debug, Clone, Copy)]
pub struct Tails {
    pub left: f64,
    pub right: f64,
    pub bound: f64,
}

impl Tails {
    pub fn symmetric(rate: f64, bound: f64) -> Self {
        Self {
            left: rate,
            right: rate,
            bound,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = WGK[7] * fc.abs();
    let mut fv = [0.0; 14];
    for j in 0..7 {
        let f1 = f(c - h * XGK[j]);
        let f2 = f(c + h * XGK[j]);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kron += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kron;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let value = kron * h;
    let resasc = asc * h.abs();
    let resabs = abs_sum * h.abs();
    let mut err = ((kron - gauss) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let round = 50.0 * f64::EPSILON * resabs;
    Panel {
        a,
        b,
        value,
        err: err.max(round),
    }
}

/// Adaptive Gauss-Kronrod on `[a, b]` split initially into `pieces` panels.
///
/// Stops once the error estimate is below `tol·max(1, |value|)`, so `tol`
/// is absolute for small integrals and relative for large ones.
pub fn integrate_interval(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    pieces: usize,
    tol: f64,
) -> Result<Quadrature> {
    let pieces = pieces.max(1);
    let w = (b - a) / pieces as f64;
    let mut heap = BinaryHeap::new();
    for i in 0..pieces {
        let lo = a + w * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + w };
        heap.push(gk15(f, lo, hi));
    }
    loop {
        let (value, err) = totals(&heap);
        if !value.is_finite() {
            return Err(Error::Convergence { value, err, tol });
        }
        if err <= tol * value.abs().max(1.0) {
            return Ok(Quadrature { value, err });
        }
        if heap.len() >= MAX_PANELS {
            return Err(Error::Convergence { value, err, tol });
        }
        let worst = heap.pop().expect("nonempty panel heap");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval exhausted at machine resolution
            heap.push(worst);
            let (value, err) = totals(&heap);
            return Err(Error::Convergence { value, err, tol });
        }
        heap.push(gk15(f, worst.a, mid));
        heap.push(gk15(f, mid, worst.b));
    }
}

fn totals(heap: &BinaryHeap<Panel>) -> (f64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    // deterministic summation order
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = 0.0;
    let mut comp = 0.0;
    let mut err = 0.0;
    for p in panels {
        let t = value + p.value;
        comp += if value.abs() >= p.value.abs() {
            (value - t) + p.value
        } else {
            (p.value - t) + value
        };
        value = t;
        err += p.err;
    }
    (value + comp, err)
}

/// `∫_ℝ f` for an integrand obeying the declared exponential envelope.
///
/// The line is cut where each analytic tail bound drops below `tol/10`; the
/// reported error includes both tail bounds. The tolerance is mixed as in
/// [`integrate_interval`].
pub fn integrate_line(f: &dyn Fn(f64) -> f64, tails: Tails, tol: f64) -> Result<Quadrature> {
    if !(tails.left > 0.0 && tails.right > 0.0 && tails.bound >= 0.0 && tol > 0.0) {
        return Err(Error::Domain(
            "decay rates and tolerance must be positive".into(),
        ));
    }
    let cut = |rate: f64| {
        let l = (10.0 * tails.bound.max(f64::MIN_POSITIVE) / (rate * tol)).ln() / rate;
        l.max(1.0)
    };
    let (l, r) = (cut(tails.left), cut(tails.right));
    let tail = tails.bound
        * ((-tails.left * l).exp() / tails.left + (-tails.right * r).exp() / tails.right);
    let pieces = ((l + r) / 2.0).ceil() as usize;
    let inner = integrate_interval(f, -l, r, pieces, tol - tail).map_err(|e| match e {
        Error::Convergence { value, err, .. } => Error::Convergence {
            value,
            err: err + tail,
            tol,
        },
        other => other,
    })?;
    Ok(Quadrature {
        value: inner.value,
        err: inner.err + tail,
    })
}

/// The constants `a₁ … a₅, â₅` of the energy expansion and the interaction
/// coefficient `C_N`.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyConstants {
    pub n: u32,
    pub q: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a5: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a5_hat: Option<f64>,
    pub c_n: f64,
    /// `∫ U^{p*} e^x`, the integral behind `a₂`.
    pub interaction_integral: f64,
    pub err: ConstantErrors,
}

/// Error bounds matching the fields of [`EnergyConstants`].
#[derive(Debug, Clone, Serialize)]
pub struct ConstantErrors {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a5: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a5_hat: Option<f64>,
    pub interaction_integral: f64,
}

impl EnergyConstants {
    pub fn a5(&self) -> Result<f64> {
        self.a5.ok_or_else(|| {
            Error::RegimeMismatch(format!("a5 needs p^s < q < p*, got q = {}", self.q))
        })
    }

    pub fn a5_hat(&self) -> Result<f64> {
        self.a5_hat.ok_or_else(|| {
            Error::RegimeMismatch(format!("a5_hat needs q > p*, got q = {}", self.q))
        })
    }

    /// `a₅` in the sub regime, `â₅` in the super regime.
    pub fn potential_constant(&self, regime: Regime) -> Result<f64> {
        match regime {
            Regime::Sub => self.a5(),
            Regime::Super => self.a5_hat(),
        }
    }

    /// `a₁` through the Pohozaev-type identity `∫(U'²+U²) = β∫U^{p*+1}`.
    pub fn a1_from_identity(&self) -> f64 {
        // a3·(p*+1) = β∫U^{p*+1}
        let (_, p_star) = critical_exponents(self.n).expect("validated dimension");
        self.a3 * (0.5 * (p_star + 1.0) - 1.0)
    }
}

/// All energy constants for dimension `n` and absorption power `q`, each to
/// absolute accuracy `tol`.
pub fn energy_constants(n: u32, q: f64) -> Result<EnergyConstants> {
    energy_constants_with_tol(n, q, DEFAULT_TOL)
}

pub fn energy_constants_with_tol(n: u32, q: f64, tol: f64) -> Result<EnergyConstants> {
    let (p_s, p_star) = critical_exponents(n)?;
    let (gamma, beta) = model_constants(n)?;
    if !(q > p_s) {
        return Err(Error::Domain(format!("q = {q} must exceed p^s = {p_s}")));
    }
    let u = Profile::new(n)?;
    let s = p_star + 1.0;

    let grad_sq = integrate_line(
        &|x| {
            let (v, d) = (u.u(x), u.du(x));
            v * v + d * d
        },
        Tails::symmetric(2.0, 2.0 * gamma * gamma),
        tol,
    )?;
    let j = integrate_line(
        &|x| (s * u.log_u(x)).exp(),
        Tails::symmetric(s, gamma.powf(s)),
        tol,
    )?;
    let k_int = integrate_line(
        &|x| (p_star * u.log_u(x) + x).exp(),
        Tails {
            left: p_star + 1.0,
            right: p_star - 1.0,
            bound: gamma.powf(p_star),
        },
        tol,
    )?;
    let delta = 0.5;
    let l = integrate_line(
        &|x| {
            let lu = u.log_u(x);
            (s * lu).exp() * lu
        },
        Tails::symmetric(
            s - delta,
            gamma.powf(s) * (gamma.ln().abs() + 1.0 / (delta * std::f64::consts::E)),
        ),
        tol,
    )?;

    let a1 = 0.5 * grad_sq.value - beta / s * j.value;
    let a1_err = 0.5 * grad_sq.err + beta / s * j.err;
    let a2 = beta * gamma * k_int.value;
    let a3 = beta / s * j.value;
    let a4 = j.value / (s * s) - l.value / s;
    let a4_err = j.err / (s * s) + l.err / s;

    let potential = |c: f64| -> Result<Quadrature> {
        // ∫ e^{-c x} U^{q+1}, c = |p* - q|·sign
        let w = q + 1.0;
        let tails = Tails {
            left: w - c,
            right: w + c,
            bound: gamma.powf(w),
        };
        integrate_line(&|x| (w * u.log_u(x) - c * x).exp(), tails, tol)
    };
    let (a5, a5_err) = if q < p_star {
        let r = potential(p_star - q)?;
        (
            Some(beta / (q + 1.0) * r.value),
            Some(beta / (q + 1.0) * r.err),
        )
    } else {
        (None, None)
    };
    let (a5_hat, a5_hat_err) = if q > p_star {
        let r = potential(q - p_star)?;
        (
            Some(beta / (q + 1.0) * r.value),
            Some(beta / (q + 1.0) * r.err),
        )
    } else {
        (None, None)
    };

    Ok(EnergyConstants {
        n,
        q,
        a1,
        a2,
        a3,
        a4,
        a5,
        a5_hat,
        c_n: gamma,
        interaction_integral: k_int.value,
        err: ConstantErrors {
            a1: a1_err,
            a2: beta * gamma * k_int.err,
            a3: beta / s * j.err,
            a4: a4_err,
            a5: a5_err,
            a5_hat: a5_hat_err,
            interaction_integral: k_int.err,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_integrals() {
        let r = integrate_line(
            &|x: f64| (-x.abs()).exp(),
            Tails::symmetric(1.0, 1.0),
            1e-12,
        )
        .unwrap();
        assert!((r.value - 2.0).abs() < 1e-12 && r.err < 2e-12, "{r:?}");
        let r = integrate_line(
            &|x: f64| 1.0 / x.cosh().powi(2),
            Tails::symmetric(2.0, 4.0),
            1e-12,
        )
        .unwrap();
        assert!((r.value - 2.0).abs() < 1e-12 && r.err < 2e-12, "{r:?}");
    }

    #[test]
    fn panel_budget_is_reported() {
        let e = integrate_interval(&|x: f64| x.abs().sqrt().recip(), -1.0, 1.0, 1, 1e-300);
        assert!(matches!(e, Err(Error::Convergence { .. })));
    }

    #[test]
    fn both_a1_routes_agree() {
        for n in [3, 4, 5] {
            let (p_s, p_star) = critical_exponents(n).unwrap();
            let c = energy_constants(n, 0.5 * (p_s + p_star)).unwrap();
            assert!((c.a1 - c.a1_from_identity()).abs() < 1e-10, "N={n}");
        }
    }

    #[test]
    fn positivity_and_regime_presence() {
        let c = energy_constants(3, 4.0).unwrap();
        assert!(c.a1 > 0.0 && c.a2 > 0.0 && c.a3 > 0.0 && c.a5.unwrap() > 0.0);
        assert!(c.a5_hat().is_err());
        let c = energy_constants(3, 7.0).unwrap();
        assert!(c.a5_hat.unwrap() > 0.0);
        assert!(matches!(c.a5(), Err(Error::RegimeMismatch(_))));
        assert!(energy_constants(3, 2.5).is_err());
        assert_eq!(c.c_n, model_constants(3).unwrap().0);
    }

    #[test]
    fn halving_tol_stays_within_reported_error() {
        let u = Profile::new(3).unwrap();
        let f = |x: f64| (6.0 * u.log_u(x)).exp() * (0.3 * x).cos();
        let coarse = integrate_line(&f, Tails::symmetric(6.0, 2.0), 1e-8).unwrap();
        let fine = integrate_line(&f, Tails::symmetric(6.0, 2.0), 5e-9).unwrap();
        assert!((coarse.value - fine.value).abs() <= coarse.err);
    }
}
