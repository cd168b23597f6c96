use serde::Serialize;

use crate::error::{Error, Result};
use crate::profiles::Profile1D;

/// Uniformly sampled interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
}

impl Window {
    pub fn new(lo: f64, hi: f64, samples: usize) -> Self {
        Self { lo, hi, samples }
    }
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let step = (self.hi - self.lo) / (self.samples - 1) as f64;
        (0..self.samples).map(move |i| self.lo + step * i as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub position: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    /// `max|a − b| / max|b|` over the window.
    pub sup_rel: f64,
    /// `‖a − b‖₂ / ‖b‖₂` over the window.
    pub l2_rel: f64,
    pub peaks_a: Vec<Peak>,
    pub peaks_b: Vec<Peak>,
}

/// Interior local maxima of sampled values, refined by a parabola through
/// the three nodes around each.
pub fn sampled_peaks(xs: &[f64], ys: &[f64]) -> Vec<Peak> {
    let mut out = Vec::new();
    for i in 1..ys.len().saturating_sub(1) {
        if ys[i] > ys[i - 1] && ys[i] >= ys[i + 1] {
            let (a, b, c) = (ys[i - 1], ys[i], ys[i + 1]);
            let denom = a - 2.0 * b + c;
            let off = if denom != 0.0 {
                0.5 * (a - c) / denom
            } else {
                0.0
            };
            let h = xs[i + 1] - xs[i];
            out.push(Peak {
                position: xs[i] + off * h,
                height: b - 0.25 * (a - c) * off,
            });
        }
    }
    out
}

/// Discrepancies of `a` against the reference `b` on `window`.
pub fn compare(a: &dyn Profile1D, b: &dyn Profile1D, window: Window) -> Result<Metrics> {
    if !(window.hi > window.lo) || window.samples < 2 {
        return Err(Error::Domain(format!(
            "empty comparison window [{}, {}] with {} samples",
            window.lo, window.hi, window.samples
        )));
    }
    let xs: Vec<f64> = window.points().collect();
    let va: Vec<f64> = xs.iter().map(|x| a.eval(*x)).collect();
    let vb: Vec<f64> = xs.iter().map(|x| b.eval(*x)).collect();
    let (mut dmax, mut bmax, mut d2, mut b2) = (0.0f64, 0.0f64, 0.0, 0.0);
    for (x, y) in va.iter().zip(&vb) {
        dmax = dmax.max((x - y).abs());
        bmax = bmax.max(y.abs());
        d2 += (x - y) * (x - y);
        b2 += y * y;
    }
    let ratio = |num: f64, den: f64| if num == 0.0 { 0.0 } else { num / den };
    Ok(Metrics {
        sup_rel: ratio(dmax, bmax),
        l2_rel: ratio(d2.sqrt(), b2.sqrt()),
        peaks_a: sampled_peaks(&xs, &va),
        peaks_b: sampled_peaks(&xs, &vb),
    })
}
