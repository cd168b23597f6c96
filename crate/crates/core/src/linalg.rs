//! Banded solvers and interpolation used by the discretised problem.

use crate::error::{Error, Result};

/// LU factorisation of a tridiagonal matrix with partial pivoting.
///
/// The linearised operator is indefinite near the spikes, so pivoting is
/// required; the layout follows the classical `gttrf`/`gttrs` scheme with a
/// second superdiagonal created by row interchanges.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    /// Factors the matrix with subdiagonal `lower`, diagonal `diag` and
    /// superdiagonal `upper`.
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(Error::Domain(
                "inconsistent tridiagonal band lengths".into(),
            ));
        }
        let mut dl = lower.to_vec();
        let mut d = diag.to_vec();
        let mut du = upper.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if let Some(i) = d.iter().position(|v| *v == 0.0 || !v.is_finite()) {
            return Err(Error::Conditioning(format!("zero pivot at row {i} of {n}")));
        }
        Ok(Self {
            dl,
            d,
            du,
            du2,
            swapped,
        })
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Smallest pivot magnitude, a cheap conditioning diagnostic.
    pub fn min_pivot(&self) -> f64 {
        self.d.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }

    /// Solves in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        assert_eq!(b.len(), n, "right-hand side length");
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// `y = T x` for a tridiagonal `T`.
pub fn tridiagonal_apply(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i] * x[i];
            if i > 0 {
                s += lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += upper[i] * x[i + 1];
            }
            s
        })
        .collect()
}

/// Natural cubic spline through equally spaced samples; evaluates to
/// `outside` beyond the sampled interval.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
    outside: f64,
}

impl CubicSpline {
    pub fn uniform(x0: f64, h: f64, y: &[f64], outside: f64) -> Result<Self> {
        let n = y.len();
        if n < 3 || !(h > 0.0) {
            return Err(Error::Domain(
                "spline needs at least 3 samples and h > 0".into(),
            ));
        }
        let inner = n - 2;
        let rhs: Vec<f64> = (1..n - 1)
            .map(|i| 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h))
            .collect();
        let lu = TridiagonalLu::factor(
            &vec![1.0; inner - 1],
            &vec![4.0; inner],
            &vec![1.0; inner - 1],
        )?;
        let mut m = vec![0.0; n];
        m[1..n - 1].copy_from_slice(&lu.solve(&rhs));
        Ok(Self {
            x0,
            h,
            y: y.to_vec(),
            m,
            outside,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let t = (x - self.x0) / self.h;
        if !(t >= 0.0 && t <= (n - 1) as f64) {
            return self.outside;
        }
        let i = (t.floor() as usize).min(n - 2);
        let a = (i + 1) as f64 - t;
        let b = t - i as f64;
        let h2 = self.h * self.h / 6.0;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h2
    }

    /// Value, first and second derivative; all three are `outside`, 0, 0
    /// beyond the sampled interval.
    pub fn eval_with_derivatives(&self, x: f64) -> (f64, f64, f64) {
        let n = self.y.len();
        let t = (x - self.x0) / self.h;
        if !(t >= 0.0 && t <= (n - 1) as f64) {
            return (self.outside, 0.0, 0.0);
        }
        let i = (t.floor() as usize).min(n - 2);
        let a = (i + 1) as f64 - t;
        let b = t - i as f64;
        let d1 = (self.y[i + 1] - self.y[i]) / self.h
            + self.h / 6.0
                * ((3.0 * b * b - 1.0) * self.m[i + 1] - (3.0 * a * a - 1.0) * self.m[i]);
        (self.eval(x), d1, a * self.m[i] + b * self.m[i + 1])
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + comp
}
