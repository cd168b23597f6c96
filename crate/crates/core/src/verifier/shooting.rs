use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::CubicSpline;
use crate::profiles::{EmdenFowler, LineFunction, ModelParams, RadialFunction, Regime};
use crate::reduced_model::TowerConfig;

/// Fate of a shot from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// Positive up to `r_max` and decaying at the fast rate `r^{2−N}`.
    Decaying,
    /// `u` reaches zero.
    Crossing,
    /// Stays positive without reaching the fast decay rate: grows past
    /// `10·u0`, climbs back above `u0`, or decays more slowly than `r^{2−N}`.
    Blowing,
}

/// Integration settings. The ODE is integrated in `t = log r` with a fixed
/// step classical Runge-Kutta scheme.
#[derive(Debug, Clone, Serialize)]
pub struct ShootConfig {
    pub dt: f64,
    /// Defaults to `50/√ε` (or 1e3 when `ε = 0`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    /// Defaults to `min(1e−6, 1e−3·λ)` where `λ` is the bubble scale whose
    /// central height is `u0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self {
            dt: 2e-3,
            r_max: None,
            r0: None,
        }
    }
}

/// A shot: initial height, the sampled profile and its classification.
#[derive(Debug, Clone, Serialize)]
pub struct ShotProfile {
    pub u0: f64,
    /// Uniform step in `log r` of `samples`.
    pub dt: f64,
    pub samples: Vec<(f64, f64)>,
    pub classification: Classification,
    pub peak_count_ef: usize,
    /// `−r u'/u` where `u` first drops below `1e−3·u0`, or at the last
    /// sample when it never does.
    pub decay_exponent: f64,
    #[serde(skip)]
    n: u32,
}

impl ShotProfile {
    pub fn r_end(&self) -> f64 {
        self.samples.last().map(|s| s.0).unwrap_or(0.0)
    }

    /// The profile as a radial function: cubic spline in `log r`, `u0` below
    /// the first sample and 0 beyond the last.
    pub fn radial(&self) -> Result<RadialFunction> {
        let t0 = self.samples[0].0.ln();
        let ys: Vec<f64> = self.samples.iter().map(|s| s.1).collect();
        let spline = CubicSpline::uniform(t0, self.dt, &ys, 0.0)?;
        let (u0, r_first) = (self.u0, self.samples[0].0);
        Ok(RadialFunction::new(
            move |r| if r < r_first { u0 } else { spline.eval(r.ln()) },
            self.n as f64 - 2.0,
        ))
    }

    /// Emden-Fowler image of the profile.
    pub fn line(&self, regime: Regime) -> Result<LineFunction> {
        Ok(EmdenFowler::new(self.n, regime)?.forward(&self.radial()?))
    }
}

fn rhs(params: &ModelParams, t: f64, u: f64, w: f64) -> (f64, f64) {
    let r = t.exp();
    let up = u.max(0.0);
    let f = if up > 0.0 {
        up.powf(params.p()) - params.potential.eval(r) * up.powf(params.q)
    } else {
        0.0
    };
    let n = params.n as f64;
    (w, -(n - 2.0) * w - r * r * f)
}

/// Integrates the radial equation from height `u0` at the origin.
pub fn shoot(u0: f64, params: &ModelParams, cfg: &ShootConfig) -> Result<ShotProfile> {
    if !(u0 > 0.0 && u0.is_finite()) {
        return Err(Error::Domain(format!(
            "initial height u0 = {u0} must be positive"
        )));
    }
    let n = params.n as f64;
    let r_max = cfg.r_max.unwrap_or(if params.epsilon > 0.0 {
        50.0 / params.epsilon.sqrt()
    } else {
        1e3
    });
    let scale = (params.gamma() / u0).powf(2.0 / (n - 2.0));
    let r0 = cfg.r0.unwrap_or((1e-3 * scale).min(1e-6));
    if !(r0 > 0.0 && r_max > r0) {
        return Err(Error::Domain(format!(
            "need 0 < r0 < r_max, got {r0}, {r_max}"
        )));
    }
    let f0 = u0.powf(params.p()) - params.potential.v0() * u0.powf(params.q);
    let mut u = u0 - f0 * r0 * r0 / (2.0 * n);
    let mut w = -f0 * r0 * r0 / n;
    let (t0, t1) = (r0.ln(), r_max.ln());
    let steps = ((t1 - t0) / cfg.dt).ceil().max(1.0) as usize;
    let dt = (t1 - t0) / steps as f64;

    let mut samples = Vec::with_capacity(steps + 1);
    samples.push((r0, u));
    let mut classification = None;
    let mut tail_exponent = None;
    for i in 0..steps {
        let t = t0 + i as f64 * dt;
        let (k1u, k1w) = rhs(params, t, u, w);
        let (k2u, k2w) = rhs(params, t + 0.5 * dt, u + 0.5 * dt * k1u, w + 0.5 * dt * k1w);
        let (k3u, k3w) = rhs(params, t + 0.5 * dt, u + 0.5 * dt * k2u, w + 0.5 * dt * k2w);
        let (k4u, k4w) = rhs(params, t + dt, u + dt * k3u, w + dt * k3w);
        let nu = u + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        let nw = w + dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        if !(nu.is_finite() && nw.is_finite()) {
            return Err(Error::Integration {
                r: t.exp(),
                detail: "state became non-finite".into(),
            });
        }
        u = nu;
        w = nw;
        samples.push(((t + dt).exp(), u));
        if tail_exponent.is_none() && u > 0.0 && u < 1e-3 * u0 {
            tail_exponent = Some(-w / u);
        }
        if u <= 0.0 {
            classification = Some(Classification::Crossing);
            break;
        }
        if u > 10.0 * u0 || (w > 0.0 && u > u0) {
            classification = Some(Classification::Blowing);
            break;
        }
    }
    let end_exponent = -w / u;
    let decay_exponent = tail_exponent.unwrap_or(end_exponent);
    let classification = classification.unwrap_or(if w < 0.0 && end_exponent >= 0.9 * (n - 2.0) {
        Classification::Decaying
    } else {
        Classification::Blowing
    });
    let peak_count_ef = count_ef_peaks(&samples, n);
    Ok(ShotProfile {
        u0,
        dt,
        samples,
        classification,
        peak_count_ef,
        decay_exponent,
        n: params.n,
    })
}

/// Local maxima of `r^{(N−2)/2} u` that stand out by at least `1e−3` of the
/// global maximum against the lower of the two neighbouring minima.
fn count_ef_peaks(samples: &[(f64, f64)], n: f64) -> usize {
    let v: Vec<f64> = samples
        .iter()
        .map(|(r, u)| r.powf(0.5 * (n - 2.0)) * u)
        .collect();
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(*x));
    if v.len() < 3 || vmax <= 0.0 {
        return 0;
    }
    let threshold = 1e-3 * vmax;
    let mut count = 0;
    let mut last_min = v[0];
    let mut candidate: Option<f64> = None;
    for i in 1..v.len() - 1 {
        if v[i] > v[i - 1] && v[i] >= v[i + 1] {
            if v[i] - last_min >= threshold {
                candidate = Some(candidate.map_or(v[i], |c: f64| c.max(v[i])));
            }
        } else if v[i] < v[i - 1] && v[i] <= v[i + 1] {
            if let Some(c) = candidate {
                if c - v[i] >= threshold {
                    count += 1;
                    candidate = None;
                }
            }
            last_min = if candidate.is_none() {
                v[i]
            } else {
                last_min.min(v[i])
            };
        }
    }
    let tail = *v.last().unwrap();
    if let Some(c) = candidate {
        if c - tail >= threshold {
            count += 1;
        }
    }
    count
}

fn crosses(u0: f64, params: &ModelParams, cfg: &ShootConfig) -> Result<bool> {
    Ok(shoot(u0, params, cfg)?.classification == Classification::Crossing)
}

/// Bisection between a crossing and a non-crossing height; returns the
/// successive brackets.
pub fn bisect_threshold(
    mut lo: f64,
    mut hi: f64,
    iterations: usize,
    params: &ModelParams,
    cfg: &ShootConfig,
) -> Result<Vec<(f64, f64)>> {
    let lo_crosses = crosses(lo, params, cfg)?;
    if lo_crosses == crosses(hi, params, cfg)? {
        return Err(Error::NotFound(format!(
            "[{lo}, {hi}] does not bracket a threshold"
        )));
    }
    let mut history = vec![(lo, hi)];
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if crosses(mid, params, cfg)? == lo_crosses {
            lo = mid
        } else {
            hi = mid
        }
        history.push((lo, hi));
    }
    Ok(history)
}

/// Predicted central height `γ_N Σ_j e^{±ξ_j}` of the tower.
pub fn predicted_height(params: &ModelParams, guess: &TowerConfig) -> f64 {
    let s = params.regime.sign();
    params.gamma() * guess.xi.iter().map(|x| (s * x).exp()).sum::<f64>()
}

/// Shooting search for a decaying solution whose Emden-Fowler image has
/// `k` peaks, seeded at the predicted central height with a ±50% bracket
/// (widened to a factor 10 if that bracket shows no threshold).
pub fn find_tower(
    params: &ModelParams,
    guess: &TowerConfig,
    cfg: &ShootConfig,
) -> Result<ShotProfile> {
    let pred = predicted_height(params, guess);
    let mut report = Vec::new();
    for (lo_f, hi_f, points) in [(0.5, 1.5, 25), (0.1, 10.0, 61)] {
        let heights: Vec<f64> = (0..points)
            .map(|i| pred * lo_f * (hi_f / lo_f as f64).powf(i as f64 / (points - 1) as f64))
            .collect();
        let status: Vec<bool> = heights
            .iter()
            .map(|u| crosses(*u, params, cfg))
            .collect::<Result<_>>()?;
        let mut best: Option<ShotProfile> = None;
        for i in 0..points - 1 {
            if status[i] == status[i + 1] {
                continue;
            }
            let history = bisect_threshold(heights[i], heights[i + 1], 200, params, cfg)?;
            let (lo, hi) = *history.last().unwrap();
            let keep = if status[i] { hi } else { lo };
            let shot = shoot(keep, params, cfg)?;
            report.push(format!(
                "threshold {keep:.6e}: {:?}, {} peaks",
                shot.classification, shot.peak_count_ef
            ));
            if shot.classification == Classification::Decaying && shot.peak_count_ef == params.k {
                let better = best
                    .as_ref()
                    .map_or(true, |b| (keep - pred).abs() < (b.u0 - pred).abs());
                if better {
                    best = Some(shot);
                }
            }
        }
        if let Some(b) = best {
            return Ok(b);
        }
        let crossings = status.iter().filter(|s| **s).count();
        report.push(format!(
            "scan [{:.3e}, {:.3e}] ({points} heights): {crossings} crossing",
            heights[0],
            heights[points - 1]
        ));
    }
    Err(Error::NotFound(format!(
        "predicted height {pred:.6e}; {}",
        report.join("; ")
    )))
}
