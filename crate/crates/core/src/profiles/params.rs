use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which side of the critical exponent the absorption power `q` sits on.
///
/// `SubQ` is `p^s < q < p*` (towers of concentrating bubbles), `SuperQ` is
/// `q > p*` (towers of flat bubbles). The regime fixes the orientation of the
/// Emden-Fowler variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    #[serde(alias = "subq")]
    Sub,
    #[serde(alias = "superq")]
    Super,
}

impl Regime {
    /// +1 for `Sub`, −1 for `Super`.
    pub fn sign(self) -> f64 {
        match self {
            Regime::Sub => 1.0,
            Regime::Super => -1.0,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Sub => "sub",
            Regime::Super => "super",
        })
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sub" | "subq" => Ok(Regime::Sub),
            "super" | "superq" => Ok(Regime::Super),
            other => Err(Error::Domain(format!(
                "unknown regime '{other}' (expected sub|super)"
            ))),
        }
    }
}

/// `(p^s, p*) = (N/(N−2), (N+2)/(N−2))`.
pub fn critical_exponents(n: u32) -> Result<(f64, f64)> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "dimension N = {n} must be at least 3"
        )));
    }
    let nf = n as f64;
    Ok((nf / (nf - 2.0), (nf + 2.0) / (nf - 2.0)))
}

/// `(γ_N, β) = ((N(N−2))^{(N−2)/4}, (2/(N−2))²)`.
pub fn model_constants(n: u32) -> Result<(f64, f64)> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "dimension N = {n} must be at least 3"
        )));
    }
    let nf = n as f64;
    let gamma = (nf * (nf - 2.0)).powf((nf - 2.0) / 4.0);
    let beta = (2.0 / (nf - 2.0)).powi(2);
    Ok((gamma, beta))
}

type RadialMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A bounded radial potential `r ↦ V(r)` together with its value at the
/// origin, its limit at infinity and a declared bound on `|V|`.
#[derive(Clone)]
pub struct PotentialSpec {
    label: String,
    eval: RadialMap,
    v0: f64,
    vinf: f64,
    bound: f64,
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("label", &self.label)
            .field("v0", &self.v0)
            .field("vinf", &self.vinf)
            .field("bound", &self.bound)
            .finish()
    }
}

impl PotentialSpec {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        v0: f64,
        vinf: f64,
        bound: f64,
    ) -> Result<Self> {
        if !(v0.is_finite() && vinf.is_finite() && bound.is_finite()) {
            return Err(Error::Domain("potential data must be finite".into()));
        }
        if v0.abs() > bound || vinf.abs() > bound {
            return Err(Error::Domain(format!(
                "declared bound {bound} is below |V(0)| or |V_inf|"
            )));
        }
        Ok(Self {
            label: label.into(),
            eval: Arc::new(eval),
            v0,
            vinf,
            bound,
        })
    }

    /// `V ≡ c`.
    pub fn constant(c: f64) -> Self {
        Self::new(format!("const:{c}"), move |_| c, c, c, c.abs())
            .expect("finite constant potential")
    }

    /// `V(r) = a + b r²/(1+r²)`, so `V(0) = a` and `V_∞ = a + b`.
    pub fn rational(a: f64, b: f64) -> Self {
        Self::new(
            format!("rational:{a},{b}"),
            move |r| {
                let r2 = r * r;
                if r2.is_infinite() {
                    a + b
                } else {
                    a + b * r2 / (1.0 + r2)
                }
            },
            a,
            a + b,
            a.abs() + b.abs(),
        )
        .expect("finite rational potential")
    }

    /// Parses the presets `const:c` and `rational:a,b`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = || {
            Error::Domain(format!(
                "bad potential preset '{spec}' (c | const:c | rational:a,b)"
            ))
        };
        if let Ok(c) = spec.trim().parse::<f64>() {
            return if c.is_finite() {
                Ok(Self::constant(c))
            } else {
                Err(bad())
            };
        }
        let (kind, args) = spec.split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        if nums.iter().any(|v| !v.is_finite()) {
            return Err(bad());
        }
        match (kind.trim(), nums.as_slice()) {
            ("const", [c]) => Ok(Self::constant(*c)),
            ("rational", [a, b]) => Ok(Self::rational(*a, *b)),
            _ => Err(bad()),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.eval)(r)
    }
    pub fn v0(&self) -> f64 {
        self.v0
    }
    pub fn vinf(&self) -> f64 {
        self.vinf
    }
    pub fn bound(&self) -> f64 {
        self.bound
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    /// True when the potential vanishes identically (only detectable for presets).
    pub fn is_zero(&self) -> bool {
        self.bound == 0.0
    }
}

/// Dimension, exponents, tower height, regime and potential of one problem
/// instance.
///
/// `epsilon = 0` and `V ≡ 0` are accepted so that the unperturbed equation can
/// be used for calibration; the existence hypotheses are checked
/// separately by [`ModelParams::check_hypotheses`].
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub n: u32,
    pub q: f64,
    pub epsilon: f64,
    pub k: usize,
    pub regime: Regime,
    pub potential: PotentialSpec,
    p_s: f64,
    p_star: f64,
    gamma: f64,
    beta: f64,
}

impl ModelParams {
    pub fn new(
        n: u32,
        q: f64,
        epsilon: f64,
        k: usize,
        regime: Regime,
        potential: PotentialSpec,
    ) -> Result<Self> {
        let (p_s, p_star) = critical_exponents(n)?;
        let (gamma, beta) = model_constants(n)?;
        if !q.is_finite() {
            return Err(Error::Domain("q must be finite".into()));
        }
        match regime {
            Regime::Sub if !(p_s < q && q < p_star) => {
                return Err(Error::RegimeMismatch(format!(
                    "sub regime needs {p_s} < q < {p_star}, got q = {q}"
                )))
            }
            Regime::Super if q <= p_star => {
                return Err(Error::RegimeMismatch(format!(
                    "super regime needs q > {p_star}, got q = {q}"
                )))
            }
            _ => {}
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::Domain(format!("epsilon = {epsilon} outside [0, 1)")));
        }
        if k == 0 {
            return Err(Error::Domain("tower height k must be positive".into()));
        }
        Ok(Self {
            n,
            q,
            epsilon,
            k,
            regime,
            potential,
            p_s,
            p_star,
            gamma,
            beta,
        })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(
            self.n,
            self.q,
            epsilon,
            self.k,
            self.regime,
            self.potential.clone(),
        )
    }

    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::new(
            self.n,
            self.q,
            self.epsilon,
            k,
            self.regime,
            self.potential.clone(),
        )
    }

    pub fn with_potential(&self, potential: PotentialSpec) -> Result<Self> {
        Self::new(self.n, self.q, self.epsilon, self.k, self.regime, potential)
    }

    /// Existence hypotheses: `V(0) < 0` in the sub regime,
    /// `V_∞ < 0` in the super regime, and `ε > 0`.
    pub fn check_hypotheses(&self) -> Result<()> {
        match self.regime {
            Regime::Sub if self.potential.v0() >= 0.0 => Err(Error::Hypothesis {
                regime: "sub",
                detail: format!("requires V(0) < 0, got V(0) = {}", self.potential.v0()),
            }),
            Regime::Super if self.potential.vinf() >= 0.0 => Err(Error::Hypothesis {
                regime: "super",
                detail: format!("requires V_inf < 0, got V_inf = {}", self.potential.vinf()),
            }),
            _ if self.epsilon <= 0.0 => Err(Error::Hypothesis {
                regime: if self.regime == Regime::Sub {
                    "sub"
                } else {
                    "super"
                },
                detail: "requires epsilon > 0".into(),
            }),
            _ => Ok(()),
        }
    }

    pub fn p_s(&self) -> f64 {
        self.p_s
    }
    pub fn p_star(&self) -> f64 {
        self.p_star
    }
    /// The nonlinearity exponent `p* + ε`.
    pub fn p(&self) -> f64 {
        self.p_star + self.epsilon
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    /// `|p* − q|`, the rate of the first spike.
    pub fn gap_exponent(&self) -> f64 {
        (self.p_star - self.q).abs()
    }
    /// The potential value that enters the reduced model: `V(0)` or `V_∞`.
    pub fn reduced_potential(&self) -> f64 {
        match self.regime {
            Regime::Sub => self.potential.v0(),
            Regime::Super => self.potential.vinf(),
        }
    }
}
