use crate::error::{Error, Result};
use crate::linalg::compensated_sum;
use crate::profiles::{EmdenFowler, ModelParams, PotentialSpec, Profile};

use super::grid::{Grid, GridFunction, SpikeFrame};

/// Coefficients of the line equation
/// `−v'' + v − β[e^{sεx} v₊^{p*+ε} − ω(x) e^{−s(p*−q)x} v₊^q] = 0`,
/// where `s = ±1` is the regime sign and `ω(x) = V(r(x))`.
#[derive(Debug, Clone)]
pub struct Equation {
    pub p: f64,
    pub q: f64,
    pub beta: f64,
    eps: f64,
    sign: f64,
    drift_rate: f64,
    potential_rate: f64,
    ef: EmdenFowler,
    potential: PotentialSpec,
}

impl Equation {
    pub fn new(params: &ModelParams) -> Self {
        let s = params.regime.sign();
        Self {
            p: params.p(),
            q: params.q,
            beta: params.beta(),
            eps: params.epsilon,
            sign: s,
            drift_rate: s * params.epsilon,
            potential_rate: -s * (params.p_star() - params.q),
            ef: EmdenFowler::new(params.n, params.regime).expect("validated dimension"),
            potential: params.potential.clone(),
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn regime_sign(&self) -> f64 {
        self.sign
    }

    pub fn drift(&self, x: f64) -> f64 {
        if self.drift_rate == 0.0 {
            1.0
        } else {
            (self.drift_rate * x).exp()
        }
    }

    pub fn potential_weight(&self, x: f64) -> f64 {
        if self.potential.is_zero() {
            return 0.0;
        }
        self.potential.eval(self.ef.radius(x)) * (self.potential_rate * x).exp()
    }

    /// `β[e^{sεx} v₊^p − ω e^{−s(p*−q)x} v₊^q]`, the nonlinear part at `x`.
    pub fn source(&self, x: f64, v: f64) -> f64 {
        let vp = v.max(0.0);
        if vp == 0.0 {
            return 0.0;
        }
        self.beta * (self.drift(x) * vp.powf(self.p) - self.potential_weight(x) * vp.powf(self.q))
    }

    /// Derivative of [`Equation::source`] in `v`.
    pub fn source_derivative(&self, x: f64, v: f64) -> f64 {
        let vp = v.max(0.0);
        if vp == 0.0 {
            return 0.0;
        }
        self.beta
            * (self.p * self.drift(x) * vp.powf(self.p - 1.0)
                - self.q * self.potential_weight(x) * vp.powf(self.q - 1.0))
    }

    /// Energy density without the gradient term.
    pub fn density(&self, x: f64, v: f64) -> f64 {
        let vp = v.max(0.0);
        let mut e = 0.5 * v * v;
        if vp > 0.0 {
            e += -self.beta / (self.p + 1.0) * self.drift(x) * vp.powf(self.p + 1.0)
                + self.beta / (self.q + 1.0) * self.potential_weight(x) * vp.powf(self.q + 1.0);
        }
        e
    }
}

/// `Ū = Σ U(· − ξ_i)` with analytic derivatives.
#[derive(Debug, Clone)]
pub struct Ansatz {
    xi: Vec<f64>,
    profile: Profile,
}

impl Ansatz {
    pub fn new(xi: &[f64], n: u32) -> Result<Self> {
        Ok(Self {
            xi: xi.to_vec(),
            profile: Profile::new(n)?,
        })
    }
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }
    pub fn value(&self, x: f64) -> f64 {
        self.xi.iter().map(|c| self.profile.u(x - c)).sum()
    }
    pub fn derivative(&self, x: f64) -> f64 {
        self.xi.iter().map(|c| self.profile.du(x - c)).sum()
    }
    pub fn second_derivative(&self, x: f64) -> f64 {
        self.xi.iter().map(|c| self.profile.d2u(x - c)).sum()
    }
    /// `Z_i = U'(· − ξ_i)`.
    pub fn kernel(&self, i: usize, x: f64) -> f64 {
        self.profile.du(x - self.xi[i])
    }
    /// Values at the two ghost nodes of `grid`.
    pub fn ghosts(&self, grid: &Grid) -> (f64, f64) {
        let (a, b) = grid.ghosts();
        (self.value(a), self.value(b))
    }
    pub fn sample(&self, grid: &Grid) -> GridFunction {
        GridFunction::from_fn(*grid, 1.0, |x| self.value(x))
    }
}

/// Samples of `Ū` for spikes `xi` in dimension `n`.
pub fn ubar(xi: &[f64], grid: &Grid, n: u32) -> Result<GridFunction> {
    if xi.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(format!("spikes {xi:?} must be increasing")));
    }
    Ok(Ansatz::new(xi, n)?.sample(grid))
}

pub fn star_norm(psi: &GridFunction, frame: &SpikeFrame) -> f64 {
    psi.grid()
        .nodes()
        .zip(psi.values())
        .fold(0.0, |m, (x, v)| m.max(v.abs() / frame.weight(x)))
}

fn second_difference(v: &[f64], ghosts: (f64, f64), h: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let a = if i == 0 { ghosts.0 } else { v[i - 1] };
            let b = if i + 1 == n { ghosts.1 } else { v[i + 1] };
            (a - 2.0 * v[i] + b) / (h * h)
        })
        .collect()
}

/// Discrete energy
/// `(1/2h) Σ_edges (Δv)² + h Σ_i [½v_i² − β/(p+1) e^{sεx} v₊^{p+1} + β/(q+1) ω e^{−s(p*−q)x} v₊^{q+1}]`
/// where the edge sum includes the two edges to the ghost values.
///
/// Its gradient is exactly `h` times [`nonlinear_operator`] with the same
/// ghosts, which is what makes the reduced problem variational on the grid.
pub fn energy_with_ghosts(v: &GridFunction, ghosts: (f64, f64), eq: &Equation) -> Result<f64> {
    let grid = v.grid();
    let h = grid.h();
    let vals = v.values();
    let n = vals.len();
    let edges = std::iter::once(vals[0] - ghosts.0)
        .chain(vals.windows(2).map(|w| w[1] - w[0]))
        .chain(std::iter::once(ghosts.1 - vals[n - 1]));
    let grad = compensated_sum(edges.map(|d| d * d)) / (2.0 * h);
    let dens: Vec<f64> = grid
        .nodes()
        .zip(vals)
        .map(|(x, v)| eq.density(x, *v))
        .collect();
    check_potential_tails(grid, vals, eq)?;
    Ok(grad + h * compensated_sum(dens))
}

fn check_potential_tails(grid: &Grid, vals: &[f64], eq: &Equation) -> Result<()> {
    let term = |i: usize| {
        let vp = vals[i].max(0.0);
        (eq.potential_weight(grid.x(i)) * vp.powf(eq.q + 1.0)).abs()
    };
    let n = vals.len();
    let peak = (0..n).map(term).fold(0.0, f64::max);
    let ends = term(0).max(term(n - 1));
    if !ends.is_finite() || (peak > 0.0 && ends > 1e-6 * peak) {
        return Err(Error::Truncation(format!(
            "potential integrand at the ends is {ends:e} against a peak of {peak:e}"
        )));
    }
    Ok(())
}

/// [`energy_with_ghosts`] with zero values beyond the truncation.
pub fn energy(psi: &GridFunction, params: &ModelParams) -> Result<f64> {
    energy_with_ghosts(psi, (0.0, 0.0), &Equation::new(params))
}

/// Energy of the ansatz `Ū` using its analytic derivative and the trapezoid
/// rule; spectrally accurate for these smooth decaying integrands.
pub fn ansatz_energy(xi: &[f64], grid: &Grid, params: &ModelParams) -> Result<f64> {
    let a = Ansatz::new(xi, params.n)?;
    let eq = Equation::new(params);
    let terms = grid.nodes().enumerate().map(|(i, x)| {
        let d = a.derivative(x);
        let w = if i == 0 || i + 1 == grid.len() {
            0.5
        } else {
            1.0
        };
        w * (0.5 * d * d + eq.density(x, a.value(x)))
    });
    Ok(grid.h() * compensated_sum(terms))
}

/// The discrete operator `F_h(v) = −D²v + v − β[...]` with given ghost
/// values.
pub fn nonlinear_operator(v: &GridFunction, ghosts: (f64, f64), eq: &Equation) -> GridFunction {
    let grid = v.grid();
    let d2 = second_difference(v.values(), ghosts, grid.h());
    let out = grid
        .nodes()
        .zip(v.values())
        .zip(d2)
        .map(|((x, v), l)| -l + v - eq.source(x, *v))
        .collect();
    v.with_values(out)
}

/// Residual of the ansatz, `R = F_h(Ū)`, with analytic ghost values of `Ū`.
pub fn residual_r(xi: &[f64], params: &ModelParams, grid: &Grid) -> Result<GridFunction> {
    let a = Ansatz::new(xi, params.n)?;
    let eq = Equation::new(params);
    let u = a.sample(grid);
    let r = nonlinear_operator(&u, a.ghosts(grid), &eq);
    Ok(GridFunction::new(
        *grid,
        r.into_values(),
        default_decay(params),
    )?)
}

/// The residual written term by term with the analytic `Ū''`:
/// `−Ū'' + Ū − β[...]`. Agrees with [`residual_r`] up to `O(h²)`.
pub fn residual_continuum(xi: &[f64], params: &ModelParams, grid: &Grid) -> Result<GridFunction> {
    let a = Ansatz::new(xi, params.n)?;
    let eq = Equation::new(params);
    Ok(GridFunction::from_fn(*grid, default_decay(params), |x| {
        let v = a.value(x);
        -a.second_derivative(x) + v - eq.source(x, v)
    }))
}

fn default_decay(params: &ModelParams) -> f64 {
    super::grid::default_sigma(params)
}

/// `N(φ) = β e^{sεx}[(Ū+φ)₊^p − Ū^p − pŪ^{p−1}φ] − β ω e^{−s(p*−q)x}[(Ū+φ)₊^q − Ū^q − qŪ^{q−1}φ]`.
pub fn nonlinear_n(phi: &GridFunction, xi: &[f64], params: &ModelParams) -> Result<GridFunction> {
    let a = Ansatz::new(xi, params.n)?;
    let eq = Equation::new(params);
    Ok(nonlinear_n_with(phi, &a, &eq))
}

pub(crate) fn nonlinear_n_with(phi: &GridFunction, a: &Ansatz, eq: &Equation) -> GridFunction {
    let out = phi
        .grid()
        .nodes()
        .zip(phi.values())
        .map(|(x, f)| {
            let u = a.value(x);
            eq.source(x, u + f) - eq.source(x, u) - eq.source_derivative(x, u) * f
        })
        .collect();
    phi.with_values(out)
}

/// Potential of the linearised operator, `−β[p e^{sεx}Ū^{p−1} − q ω e^{−s(p*−q)x}Ū^{q−1}]`.
pub fn linearized_potential(a: &Ansatz, grid: &Grid, eq: &Equation) -> Vec<f64> {
    grid.nodes()
        .map(|x| -eq.source_derivative(x, a.value(x)))
        .collect()
}

/// `L φ = −D²φ + φ − β[...]φ` with zero values beyond the truncation.
pub fn linearized_apply(
    phi: &GridFunction,
    xi: &[f64],
    params: &ModelParams,
) -> Result<GridFunction> {
    let a = Ansatz::new(xi, params.n)?;
    let eq = Equation::new(params);
    let pot = linearized_potential(&a, phi.grid(), &eq);
    let d2 = second_difference(phi.values(), (0.0, 0.0), phi.grid().h());
    let out = phi
        .values()
        .iter()
        .zip(d2)
        .zip(pot)
        .map(|((f, l), w)| -l + f + w * f)
        .collect();
    Ok(phi.with_values(out))
}
