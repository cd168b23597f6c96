use std::fmt;
use std::sync::Arc;

use super::params::{critical_exponents, Regime};
use crate::error::Result;

type Eval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Anything that can be sampled along one real coordinate.
pub trait Profile1D {
    fn eval(&self, t: f64) -> f64;
}

impl<F: Fn(f64) -> f64> Profile1D for F {
    fn eval(&self, t: f64) -> f64 {
        self(t)
    }
}

/// A radial function `r ↦ u(r)` on `r > 0` with a declared algebraic decay
/// `|u(r)| ≲ r^{−decay}` as `r → ∞`.
#[derive(Clone)]
pub struct RadialFunction {
    f: Eval,
    decay: f64,
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFunction")
            .field("decay", &self.decay)
            .finish_non_exhaustive()
    }
}

impl RadialFunction {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, decay: f64) -> Self {
        Self {
            f: Arc::new(f),
            decay,
        }
    }
    pub fn zero() -> Self {
        Self::new(|_| 0.0, f64::INFINITY)
    }
    pub fn decay(&self) -> f64 {
        self.decay
    }
    pub fn scaled(&self, c: f64) -> Self {
        let f = self.f.clone();
        Self::new(move |r| c * f(r), self.decay)
    }
}

impl Profile1D for RadialFunction {
    fn eval(&self, r: f64) -> f64 {
        (self.f)(r)
    }
}

/// A function on the line with declared exponential decay rates toward
/// `−∞` and `+∞`.
#[derive(Clone)]
pub struct LineFunction {
    f: Eval,
    decay_left: f64,
    decay_right: f64,
}

impl fmt::Debug for LineFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LineFunction")
            .field("decay_left", &self.decay_left)
            .field("decay_right", &self.decay_right)
            .finish_non_exhaustive()
    }
}

impl LineFunction {
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        decay_left: f64,
        decay_right: f64,
    ) -> Self {
        Self {
            f: Arc::new(f),
            decay_left,
            decay_right,
        }
    }
    pub fn decay_left(&self) -> f64 {
        self.decay_left
    }
    pub fn decay_right(&self) -> f64 {
        self.decay_right
    }
}

impl Profile1D for LineFunction {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

/// The change of variables `v(x) = r^{2/(p*−1)} u(r)`, with
/// `r = e^{−(p*−1)x/2}` in the sub regime and `r = e^{(p*−1)x/2}` in the super
/// regime.
///
/// Since `2/(p*−1) · (p*−1)/2 = 1`, the weight `r^{2/(p*−1)}` is just `e^{∓x}`.
#[derive(Debug, Clone, Copy)]
pub struct EmdenFowler {
    regime: Regime,
    weight: f64,
    rate: f64,
}

impl EmdenFowler {
    pub fn new(n: u32, regime: Regime) -> Result<Self> {
        let (_, p_star) = critical_exponents(n)?;
        Ok(Self {
            regime,
            weight: 2.0 / (p_star - 1.0),
            rate: (p_star - 1.0) / 2.0,
        })
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// `r(x)`.
    pub fn radius(&self, x: f64) -> f64 {
        (-self.regime.sign() * self.rate * x).exp()
    }

    /// `x(r)`.
    pub fn line_coordinate(&self, r: f64) -> f64 {
        -self.regime.sign() * r.ln() / self.rate
    }

    /// `r^{2/(p*−1)}` written in the line variable.
    pub fn weight_at(&self, x: f64) -> f64 {
        (-self.regime.sign() * x).exp()
    }

    pub fn forward_value(&self, u: &dyn Fn(f64) -> f64, x: f64) -> f64 {
        let w = self.weight_at(x);
        if w == 0.0 {
            return 0.0;
        }
        w * u(self.radius(x))
    }

    pub fn inverse_value(&self, v: &dyn Fn(f64) -> f64, r: f64) -> f64 {
        let x = self.line_coordinate(r);
        r.powf(-self.weight) * v(x)
    }

    pub fn forward(&self, u: &RadialFunction) -> LineFunction {
        // u ~ r^{-κ} at infinity gives v ~ e^{-(κ/w - 1)|x|} on that side;
        // u bounded at the origin gives v ~ e^{-|x|} on the other.
        let toward_infinity = u.decay / self.weight - 1.0;
        let toward_origin = 1.0;
        let (left, right) = match self.regime {
            Regime::Sub => (toward_infinity, toward_origin),
            Regime::Super => (toward_origin, toward_infinity),
        };
        let ef = *self;
        let f = u.f.clone();
        LineFunction::new(move |x| ef.forward_value(&*f, x), left, right)
    }

    pub fn inverse(&self, v: &LineFunction) -> RadialFunction {
        let toward_infinity = match self.regime {
            Regime::Sub => v.decay_left,
            Regime::Super => v.decay_right,
        };
        let ef = *self;
        let f = v.f.clone();
        RadialFunction::new(
            move |r| ef.inverse_value(&*f, r),
            (toward_infinity + 1.0) * self.weight,
        )
    }
}

pub fn ef_forward(u: &RadialFunction, n: u32, regime: Regime) -> Result<LineFunction> {
    Ok(EmdenFowler::new(n, regime)?.forward(u))
}

pub fn ef_inverse(v: &LineFunction, n: u32, regime: Regime) -> Result<RadialFunction> {
    Ok(EmdenFowler::new(n, regime)?.inverse(v))
}
