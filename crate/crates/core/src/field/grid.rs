use serde::Serialize;

use crate::error::{Error, Result};
use crate::profiles::ModelParams;

/// Uniform nodes `x_i = left + i·h`, `i = 0..n`. Values beyond the two ends
/// are treated as ghost nodes by the difference operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    left: f64,
    h: f64,
    n: usize,
}

impl Grid {
    pub fn new(left: f64, right: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && left.is_finite() && right.is_finite() && right > left) {
            return Err(Error::Domain(format!(
                "bad grid [{left}, {right}] with h = {h}"
            )));
        }
        let n = ((right - left) / h).round() as usize + 1;
        if n < 3 {
            return Err(Error::Domain("a grid needs at least 3 nodes".into()));
        }
        Ok(Self { left, h, n })
    }

    /// `[ξ₁ − width, ξ_k + width]`.
    pub fn around(xi: &[f64], width: f64, h: f64) -> Result<Self> {
        let (first, last) = match (xi.first(), xi.last()) {
            (Some(a), Some(b)) => (*a, *b),
            _ => return Err(Error::Domain("no spikes given".into())),
        };
        Self::new(first - width, last + width, h)
    }

    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn left(&self) -> f64 {
        self.left
    }
    pub fn right(&self) -> f64 {
        self.x(self.n - 1)
    }
    pub fn x(&self, i: usize) -> f64 {
        self.left + i as f64 * self.h
    }
    /// Nodes including one ghost on each side, as `x(-1)` and `x(n)`.
    pub fn ghosts(&self) -> (f64, f64) {
        (self.left - self.h, self.left + self.n as f64 * self.h)
    }
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes().map(f).collect()
    }
}

/// Samples on a [`Grid`] plus the exponential decay rate the function is
/// declared to have at the ends.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    decay: f64,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>, decay: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let f = Self {
            grid,
            values,
            decay,
        };
        if !f.boundary_consistent() {
            log::warn!(
                "grid function ends ({:e}, {:e}) exceed the bound implied by decay rate {}",
                f.values[0],
                f.values[f.values.len() - 1],
                decay
            );
        }
        Ok(f)
    }

    pub fn from_fn(grid: Grid, decay: f64, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.sample(f);
        Self {
            grid,
            values,
            decay,
        }
    }

    pub fn zeros(grid: Grid, decay: f64) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
            decay,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self {
            grid: self.grid,
            values,
            decay: self.decay,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.with_values(self.values.iter().map(|v| f(*v)).collect())
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(
            self.grid, other.grid,
            "grid functions live on different grids"
        );
        self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete `L²` pairing `h Σ f_i g_i`.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(
            self.grid, other.grid,
            "grid functions live on different grids"
        );
        self.grid.h
            * crate::linalg::compensated_sum(
                self.values.iter().zip(&other.values).map(|(a, b)| a * b),
            )
    }

    /// Soft check: each end value is within a factor 10 of what the decay
    /// rate allows, measured from the node of largest magnitude.
    pub fn boundary_consistent(&self) -> bool {
        let n = self.values.len();
        let (imax, vmax) = self
            .values
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bi, bv), (i, v)| {
                if v.abs() > bv {
                    (i, v.abs())
                } else {
                    (bi, bv)
                }
            });
        if vmax == 0.0 || !self.decay.is_finite() {
            return true;
        }
        let allowed = |i: usize| {
            let dist = (i as f64 - imax as f64).abs() * self.grid.h;
            10.0 * vmax * (-self.decay * dist).exp() + 1e-300
        };
        self.values[0].abs() <= allowed(0) && self.values[n - 1].abs() <= allowed(n - 1)
    }
}

/// Spike locations with the exponent of the weighted norm
/// `‖ψ‖_* = sup |ψ| / Σ_i e^{−σ|x−ξ_i|}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpikeFrame {
    xi: Vec<f64>,
    sigma: f64,
}

/// `min{1, p*−1, 2q−p*−1}`, the open upper bound for `σ`.
pub fn sigma_bound(params: &ModelParams) -> f64 {
    let p = params.p_star();
    1f64.min(p - 1.0).min(2.0 * params.q - p - 1.0)
}

/// Half of [`sigma_bound`].
pub fn default_sigma(params: &ModelParams) -> f64 {
    0.5 * sigma_bound(params)
}

/// Truncation half-width `max(30, 10/σ)`.
pub fn default_width(sigma: f64) -> f64 {
    30f64.max(10.0 / sigma)
}

impl SpikeFrame {
    pub fn new(xi: Vec<f64>, sigma: f64, params: &ModelParams) -> Result<Self> {
        let bound = sigma_bound(params);
        if !(sigma > 0.0 && sigma < bound) {
            return Err(Error::Domain(format!(
                "sigma = {sigma} must lie in (0, {bound})"
            )));
        }
        if xi.is_empty() || xi.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(format!(
                "spikes {xi:?} must be nonempty and increasing"
            )));
        }
        Ok(Self { xi, sigma })
    }

    pub fn with_default_sigma(xi: Vec<f64>, params: &ModelParams) -> Result<Self> {
        Self::new(xi, default_sigma(params), params)
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn weight(&self, x: f64) -> f64 {
        self.xi
            .iter()
            .map(|c| (-self.sigma * (x - c).abs()).exp())
            .sum()
    }
}
