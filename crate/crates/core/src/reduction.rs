//! Lyapunov-Schmidt reduction on the grid: the projected linear solver,
//! the fixed point for the correction `φ(ξ)`, the reduced energy and the
//! outer Newton solve in `Λ`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{
    default_sigma, default_width, energy_with_ghosts, linearized_potential, nonlinear_n_with,
    nonlinear_operator, star_norm, Ansatz, Equation, Grid, GridFunction, SpikeFrame,
};
use crate::linalg::{CubicSpline, TridiagonalLu};
use crate::profiles::{EmdenFowler, LineFunction, ModelParams, RadialFunction};
use crate::quadrature::EnergyConstants;
use crate::reduced_model::{critical_lambda, spike_locations, DEFAULT_DELTA};

/// Tolerances, grid and window settings of a reduction run.
#[derive(Debug, Clone, Serialize)]
pub struct ReductionConfig {
    pub h: f64,
    /// Truncation half-width; `None` means `max(30, 10/σ)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    /// Star-norm exponent; `None` means half the admissible bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub tol_fp: f64,
    pub tol_orth: f64,
    pub tol_c: f64,
    pub newton_tol: f64,
    pub fd_step: f64,
    pub hessian_step: f64,
    pub max_fp_iterations: usize,
    pub max_newton_iterations: usize,
    /// Extra width added around `ξ(Λ*)` so the Newton iterates stay inside
    /// the fixed grid.
    pub newton_margin: f64,
    pub window_m: f64,
    pub delta: f64,
    pub r0: f64,
    pub delta0: f64,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        Self {
            h: 0.02,
            width: None,
            sigma: None,
            tol_fp: 1e-10,
            tol_orth: 1e-10,
            tol_c: 1e-8,
            newton_tol: 1e-8,
            fd_step: 1e-4,
            hessian_step: 1e-3,
            max_fp_iterations: 100,
            max_newton_iterations: 30,
            newton_margin: 5.0,
            window_m: 10.0,
            delta: DEFAULT_DELTA,
            r0: 1.0,
            delta0: 1.0,
        }
    }
}

impl ReductionConfig {
    pub fn sigma_for(&self, params: &ModelParams) -> f64 {
        self.sigma.unwrap_or_else(|| default_sigma(params))
    }
    pub fn width_for(&self, params: &ModelParams) -> f64 {
        self.width
            .unwrap_or_else(|| default_width(self.sigma_for(params)))
    }
    /// The grid `[ξ₁ − W, ξ_k + W]`.
    pub fn grid_for(&self, xi: &[f64], params: &ModelParams) -> Result<Grid> {
        Grid::around(xi, self.width_for(params), self.h)
    }
}

/// Admissible spike configurations for a given `ε`: every gap exceeds
/// `log(1/(Mε))` and `ξ_k < (k − 1 + 1/|p*−q|) log(M/ε)`.
///
/// In `Λ`-coordinates both conditions say the parameters stay in a box of
/// size `M` around 1, so taking `M` large loosens the window.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindowConstraint {
    pub m: f64,
    pub epsilon: f64,
    pub k: usize,
}

impl WindowConstraint {
    pub fn check(&self, xi: &[f64], params: &ModelParams) -> Result<()> {
        if self.epsilon == 0.0 {
            return Ok(());
        }
        let lower = (1.0 / (self.m * self.epsilon)).ln();
        if let Some(w) = xi.windows(2).find(|w| w[1] - w[0] <= lower) {
            return Err(Error::Window(format!(
                "gap {} not above log(1/(M eps)) = {lower}",
                w[1] - w[0]
            )));
        }
        let rate = self.k as f64 - 1.0 + 1.0 / params.gap_exponent();
        let upper = rate * (self.m / self.epsilon).ln();
        let last = *xi.last().ok_or_else(|| Error::Window("no spikes".into()))?;
        if last >= upper {
            return Err(Error::Window(format!("xi_k = {last} not below {upper}")));
        }
        Ok(())
    }
}

fn check_linear_window(xi: &[f64], params: &ModelParams, cfg: &ReductionConfig) -> Result<()> {
    if xi[0] <= cfg.r0 {
        return Err(Error::Window(format!(
            "xi_1 = {} must exceed R0 = {}",
            xi[0], cfg.r0
        )));
    }
    if let Some(w) = xi.windows(2).find(|w| w[1] - w[0] <= cfg.r0) {
        return Err(Error::Window(format!(
            "gap {} must exceed R0 = {}",
            w[1] - w[0],
            cfg.r0
        )));
    }
    let eps = params.epsilon;
    if eps > 0.0 && *xi.last().unwrap() >= cfg.delta0 / eps {
        return Err(Error::Window(format!(
            "xi_k = {} must stay below delta0/eps = {}",
            xi.last().unwrap(),
            cfg.delta0 / eps
        )));
    }
    Ok(())
}

/// The discrete projected operator: solves `L φ = h + Σ c_i Z_i` subject to
/// `⟨Z_i, φ⟩ = 0` by block elimination, reusing one factorisation of `L`.
#[derive(Debug, Clone)]
pub struct ProjectedOperator {
    grid: Grid,
    lower: Vec<f64>,
    diag: Vec<f64>,
    lu: TridiagonalLu,
    z: Vec<Vec<f64>>,
    w: Vec<Vec<f64>>,
    schur: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    schur_condition: f64,
}

impl ProjectedOperator {
    pub fn new(ansatz: &Ansatz, grid: &Grid, eq: &Equation) -> Result<Self> {
        let n = grid.len();
        let h = grid.h();
        let inv_h2 = 1.0 / (h * h);
        let pot = linearized_potential(ansatz, grid, eq);
        let diag: Vec<f64> = pot.iter().map(|w| 2.0 * inv_h2 + 1.0 + w).collect();
        let lower = vec![-inv_h2; n - 1];
        let lu = TridiagonalLu::factor(&lower, &diag, &lower)?;
        let k = ansatz.xi().len();
        let z: Vec<Vec<f64>> = (0..k)
            .map(|i| grid.sample(|x| ansatz.kernel(i, x)))
            .collect();
        let w: Vec<Vec<f64>> = z.iter().map(|zi| lu.solve(zi)).collect();
        let s = DMatrix::from_fn(k, k, |i, j| h * dot(&z[i], &w[j]));
        let sv = s.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let schur_condition = if smin > 0.0 {
            smax / smin
        } else {
            f64::INFINITY
        };
        if !(schur_condition < 1e12) {
            return Err(Error::Conditioning(format!(
                "Schur complement condition {schur_condition:e} (singular values {:?}), \
                 min tridiagonal pivot {:e}",
                sv.as_slice(),
                lu.min_pivot()
            )));
        }
        Ok(Self {
            grid: *grid,
            lower,
            diag,
            lu,
            z,
            w,
            schur: s.lu(),
            schur_condition,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn schur_condition(&self) -> f64 {
        self.schur_condition
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.z
    }

    /// Returns `(φ, c)`.
    pub fn solve(&self, rhs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let h = self.grid.h();
        let mut y = self.lu.solve(rhs);
        let b = DVector::from_iterator(self.z.len(), self.z.iter().map(|zi| -h * dot(zi, &y)));
        let c = self
            .schur
            .solve(&b)
            .expect("Schur complement checked at construction");
        for (j, wj) in self.w.iter().enumerate() {
            for (yi, wi) in y.iter_mut().zip(wj) {
                *yi += c[j] * wi;
            }
        }
        (y, c.iter().copied().collect())
    }

    /// `h Σ Z_i φ` for each `i`.
    pub fn orthogonality_defects(&self, phi: &[f64]) -> Vec<f64> {
        self.z
            .iter()
            .map(|zi| self.grid.h() * dot(zi, phi))
            .collect()
    }

    /// The symmetric bordered matrix `[hL, −hZ; −hZᵀ, 0]`.
    pub fn bordered_matrix(&self) -> DMatrix<f64> {
        let n = self.grid.len();
        let k = self.z.len();
        let h = self.grid.h();
        let mut m = DMatrix::zeros(n + k, n + k);
        for i in 0..n {
            m[(i, i)] = h * self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = h * self.lower[i];
                m[(i + 1, i)] = h * self.lower[i];
            }
        }
        for (j, zj) in self.z.iter().enumerate() {
            for i in 0..n {
                m[(i, n + j)] = -h * zj[i];
                m[(n + j, i)] = -h * zj[i];
            }
        }
        m
    }

    /// Dense LU solve of the bordered system; a second route for checks on
    /// small grids.
    pub fn solve_dense(&self, rhs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.grid.len();
        let k = self.z.len();
        let h = self.grid.h();
        let b = DVector::from_iterator(
            n + k,
            rhs.iter()
                .map(|v| h * v)
                .chain(std::iter::repeat(0.0).take(k)),
        );
        let x = self
            .bordered_matrix()
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Conditioning("bordered matrix is singular".into()))?;
        Ok((
            x.rows(0, n).iter().copied().collect(),
            x.rows(n, k).iter().copied().collect(),
        ))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    crate::linalg::compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Solution of the projected linear problem.
#[derive(Debug, Clone)]
pub struct ProjectedSolution {
    pub phi: GridFunction,
    pub c: Vec<f64>,
}

/// `T_ε(h)`: the `φ ⊥ Z` with `L φ = h + Σ c_i Z_i`, on the grid of `rhs`.
pub fn solve_projected_linear(
    rhs: &GridFunction,
    xi: &[f64],
    params: &ModelParams,
    cfg: &ReductionConfig,
) -> Result<ProjectedSolution> {
    check_linear_window(xi, params, cfg)?;
    let ansatz = Ansatz::new(xi, params.n)?;
    let op = ProjectedOperator::new(&ansatz, rhs.grid(), &Equation::new(params))?;
    let (phi, c) = op.solve(rhs.values());
    Ok(ProjectedSolution {
        phi: GridFunction::new(*rhs.grid(), phi, cfg.sigma_for(params))?,
        c,
    })
}

/// Correction `φ(ξ)`, multipliers and diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct ReductionState {
    pub xi: Vec<f64>,
    pub phi: GridFunction,
    pub c: Vec<f64>,
    pub star_norm_phi: f64,
    pub residual_star_norm: f64,
    pub orthogonality_defect: f64,
    pub increment: f64,
    pub iterations: usize,
    pub converged: bool,
    pub sigma: f64,
}

impl ReductionState {
    pub fn max_abs_c(&self) -> f64 {
        self.c.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Runs the damped Picard iteration `φ ← T(N(φ) − R)` on a fixed grid.
///
/// Never fails on the iteration cap; the returned state says whether it
/// converged. Divergence (three consecutive increases of the increment) is
/// an error.
pub fn iterate_phi(
    xi: &[f64],
    params: &ModelParams,
    grid: &Grid,
    cfg: &ReductionConfig,
) -> Result<ReductionState> {
    check_linear_window(xi, params, cfg)?;
    let sigma = cfg.sigma_for(params);
    let frame = SpikeFrame::new(xi.to_vec(), sigma, params)?;
    let eq = Equation::new(params);
    let ansatz = Ansatz::new(xi, params.n)?;
    let op = ProjectedOperator::new(&ansatz, grid, &eq)?;
    let u = ansatz.sample(grid);
    let r = nonlinear_operator(&u, ansatz.ghosts(grid), &eq);
    let residual_star_norm = star_norm(&r, &frame);

    let mut phi = GridFunction::zeros(*grid, sigma);
    let mut c = vec![0.0; xi.len()];
    let mut damping = 1.0;
    let mut previous = f64::INFINITY;
    let mut growth = 0;
    let mut increment = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_fp_iterations {
        iterations += 1;
        let n = nonlinear_n_with(&phi, &ansatz, &eq);
        let rhs: Vec<f64> = n
            .values()
            .iter()
            .zip(r.values())
            .map(|(a, b)| a - b)
            .collect();
        let (next, cn) = op.solve(&rhs);
        let candidate: Vec<f64> = phi
            .values()
            .iter()
            .zip(&next)
            .map(|(p, q)| p + damping * (q - p))
            .collect();
        let step = phi.with_values(
            candidate
                .iter()
                .zip(phi.values())
                .map(|(a, b)| a - b)
                .collect(),
        );
        increment = star_norm(&step, &frame);
        if !increment.is_finite() {
            return Err(Error::Divergence {
                iterations,
                increment,
            });
        }
        if increment > previous {
            damping = 0.5;
            growth += 1;
            if growth >= 3 {
                return Err(Error::Divergence {
                    iterations,
                    increment,
                });
            }
        } else {
            growth = 0;
        }
        previous = increment;
        phi = phi.with_values(candidate);
        c = cn;
        if increment < cfg.tol_fp {
            converged = true;
            break;
        }
    }
    let orthogonality_defect = op
        .orthogonality_defects(phi.values())
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(ReductionState {
        xi: xi.to_vec(),
        star_norm_phi: star_norm(&phi, &frame),
        phi,
        c,
        residual_star_norm,
        orthogonality_defect,
        increment,
        iterations,
        converged,
        sigma,
    })
}

/// `φ(ξ)` on the default grid around `ξ`, requiring the spike window and
/// convergence.
pub fn solve_phi(
    xi: &[f64],
    params: &ModelParams,
    cfg: &ReductionConfig,
) -> Result<ReductionState> {
    WindowConstraint {
        m: cfg.window_m,
        epsilon: params.epsilon,
        k: params.k,
    }
    .check(xi, params)?;
    let grid = cfg.grid_for(xi, params)?;
    let state = iterate_phi(xi, params, &grid, cfg)?;
    if !state.converged {
        return Err(Error::NonConvergence {
            iterations: state.iterations,
            increment: state.increment,
        });
    }
    Ok(state)
}

/// Energy of `Ū + φ` with the ghost values of `Ū`, matching the discrete
/// operator.
pub fn state_energy(state: &ReductionState, params: &ModelParams) -> Result<f64> {
    let ansatz = Ansatz::new(&state.xi, params.n)?;
    let grid = state.phi.grid();
    let v = ansatz.sample(grid).zip_with(&state.phi, |a, b| a + b);
    energy_with_ghosts(&v, ansatz.ghosts(grid), &Equation::new(params))
}

/// Reduction on a grid fixed once, so that `Λ ↦ 𝓘_ε(ξ(Λ))` is a smooth
/// function suitable for finite differences.
#[derive(Debug, Clone)]
pub struct Reducer {
    params: ModelParams,
    cfg: ReductionConfig,
    grid: Grid,
}

impl Reducer {
    pub fn new(params: &ModelParams, cfg: &ReductionConfig, grid: Grid) -> Self {
        Self {
            params: params.clone(),
            cfg: cfg.clone(),
            grid,
        }
    }

    /// Grid around `ξ(Λ*)` widened by the Newton margin.
    pub fn around_critical(
        params: &ModelParams,
        c: &EnergyConstants,
        cfg: &ReductionConfig,
    ) -> Result<Self> {
        let lambda = critical_lambda(c, params)?;
        let xi = spike_locations(&lambda, params.epsilon, params)?;
        let grid = Grid::around(&xi, cfg.width_for(params) + cfg.newton_margin, cfg.h)?;
        Ok(Self::new(params, cfg, grid))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn state(&self, lambda: &[f64]) -> Result<ReductionState> {
        let xi = spike_locations(lambda, self.params.epsilon, &self.params)?;
        WindowConstraint {
            m: self.cfg.window_m,
            epsilon: self.params.epsilon,
            k: self.params.k,
        }
        .check(&xi, &self.params)?;
        let state = iterate_phi(&xi, &self.params, &self.grid, &self.cfg)?;
        if !state.converged {
            return Err(Error::NonConvergence {
                iterations: state.iterations,
                increment: state.increment,
            });
        }
        Ok(state)
    }

    /// `𝓘_ε(ξ(Λ)) = E_ε(Ū + φ(ξ(Λ)))`.
    pub fn reduced_energy(&self, lambda: &[f64]) -> Result<f64> {
        state_energy(&self.state(lambda)?, &self.params)
    }

    /// Central-difference gradient of `Φ_ε = 𝓘_ε/ε`.
    pub fn gradient(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        let step = self.cfg.fd_step;
        let eps = self.params.epsilon;
        (0..lambda.len())
            .map(|i| {
                let mut up = lambda.to_vec();
                let mut down = lambda.to_vec();
                up[i] += step;
                down[i] -= step;
                Ok((self.reduced_energy(&up)? - self.reduced_energy(&down)?) / (2.0 * step * eps))
            })
            .collect()
    }

    fn hessian(&self, lambda: &[f64]) -> Result<DMatrix<f64>> {
        let k = lambda.len();
        let step = self.cfg.hessian_step;
        let mut h = DMatrix::zeros(k, k);
        for j in 0..k {
            let mut up = lambda.to_vec();
            let mut down = lambda.to_vec();
            up[j] += step;
            down[j] -= step;
            let (gu, gd) = (self.gradient(&up)?, self.gradient(&down)?);
            for i in 0..k {
                h[(i, j)] = (gu[i] - gd[i]) / (2.0 * step);
            }
        }
        Ok(0.5 * (&h + h.transpose()))
    }

    /// Newton's method for `∇Φ_ε = 0` started from `lambda0`.
    pub fn solve(&self, lambda0: &[f64]) -> Result<SolvedTower> {
        if !(self.params.epsilon > 0.0) {
            return Err(Error::Domain("the reduced solve needs epsilon > 0".into()));
        }
        let (lo, hi) = (self.cfg.delta, 1.0 / self.cfg.delta);
        let in_box = |l: &[f64]| l.iter().all(|v| *v > lo && *v < hi);
        let mut lambda = lambda0.to_vec();
        if !in_box(&lambda) {
            return Err(Error::DomainEscape { lambda, lo, hi });
        }
        let mut g = self.gradient(&lambda)?;
        let mut gn = norm(&g);
        let mut iterations = 0;
        while gn >= self.cfg.newton_tol {
            if iterations >= self.cfg.max_newton_iterations {
                return Err(Error::NonConvergence {
                    iterations,
                    increment: gn,
                });
            }
            iterations += 1;
            let hess = self.hessian(&lambda)?;
            let step = hess
                .lu()
                .solve(&DVector::from_column_slice(&g))
                .ok_or_else(|| Error::Conditioning("singular reduced Hessian".into()))?;
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..10 {
                let cand: Vec<f64> = lambda
                    .iter()
                    .zip(step.iter())
                    .map(|(l, s)| l - t * s)
                    .collect();
                if !in_box(&cand) {
                    return Err(Error::DomainEscape {
                        lambda: cand,
                        lo,
                        hi,
                    });
                }
                let gc = self.gradient(&cand)?;
                let gcn = norm(&gc);
                if gcn < gn {
                    lambda = cand;
                    g = gc;
                    gn = gcn;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                return Err(Error::Stagnation { grad_norm: gn });
            }
        }
        let state = self.state(&lambda)?;
        Ok(SolvedTower {
            xi: state.xi.clone(),
            lambda,
            grad_norm: gn,
            newton_iterations: iterations,
            state,
        })
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A critical point `Λ_ε` of the reduced functional with its reduction state.
#[derive(Debug, Clone, Serialize)]
pub struct SolvedTower {
    pub lambda: Vec<f64>,
    pub xi: Vec<f64>,
    pub grad_norm: f64,
    pub newton_iterations: usize,
    pub state: ReductionState,
}

/// `𝓘_ε(ξ(Λ))` on the default grid around `ξ(Λ)`.
pub fn reduced_energy(lambda: &[f64], params: &ModelParams, cfg: &ReductionConfig) -> Result<f64> {
    let xi = spike_locations(lambda, params.epsilon, params)?;
    state_energy(&solve_phi(&xi, params, cfg)?, params)
}

/// Newton from `Λ*` on a grid fixed around `ξ(Λ*)`.
pub fn solve_reduced(
    params: &ModelParams,
    c: &EnergyConstants,
    cfg: &ReductionConfig,
) -> Result<SolvedTower> {
    params.check_hypotheses()?;
    let reducer = Reducer::around_critical(params, c, cfg)?;
    reducer.solve(&critical_lambda(c, params)?)
}

/// `v = Ū + φ` as a function on the line and its radial image.
#[derive(Debug, Clone)]
pub struct AssembledSolution {
    pub line: LineFunction,
    pub radial: RadialFunction,
    ansatz: Ansatz,
    phi: CubicSpline,
    transform: EmdenFowler,
}

impl AssembledSolution {
    /// `v`, `v'` and `v''` on the line; `φ` contributes through its spline.
    pub fn line_jet(&self, x: f64) -> (f64, f64, f64) {
        let (p, dp, d2p) = self.phi.eval_with_derivatives(x);
        (
            self.ansatz.value(x) + p,
            self.ansatz.derivative(x) + dp,
            self.ansatz.second_derivative(x) + d2p,
        )
    }

    pub fn transform(&self) -> &EmdenFowler {
        &self.transform
    }
}

/// Carries `Ū + φ` back to the radial variable; `φ` is interpolated by a
/// natural cubic spline and vanishes outside the grid.
pub fn assemble_solution(
    state: &ReductionState,
    params: &ModelParams,
) -> Result<AssembledSolution> {
    if !state.converged {
        return Err(Error::Assembly("reduction state did not converge".into()));
    }
    let ansatz = Ansatz::new(&state.xi, params.n)?;
    let grid = *state.phi.grid();
    let min = grid
        .nodes()
        .zip(state.phi.values())
        .map(|(x, p)| ansatz.value(x) + p)
        .fold(f64::INFINITY, f64::min);
    if min < 0.0 {
        return Err(Error::Assembly(format!(
            "U + phi takes the negative value {min:e}"
        )));
    }
    let phi = CubicSpline::uniform(grid.left(), grid.h(), state.phi.values(), 0.0)?;
    let (a, s) = (ansatz.clone(), phi.clone());
    let line = LineFunction::new(move |x| a.value(x) + s.eval(x), 1.0, 1.0);
    let transform = EmdenFowler::new(params.n, params.regime)?;
    let radial = transform.inverse(&line);
    Ok(AssembledSolution {
        line,
        radial,
        ansatz,
        phi,
        transform,
    })
}

/// The four terms of `u'' + (N−1)u'/r + u₊^{p*+ε} − V u₊^q` at radius `r`,
/// each multiplied by `r²`, together with `u(r)`.
///
/// With `u = e^{sx} v(x)`, `t = ln r` and `g = dx/dt` the chain rule gives
/// `r u' = g u_x` and `r² u'' = g² u_xx − g u_x`, so the derivatives come
/// from the exact jet of `v` rather than from differencing a nearly flat `u`
/// at small radii.
pub fn radial_terms(sol: &AssembledSolution, params: &ModelParams, r: f64) -> ([f64; 4], f64) {
    let x = sol.transform().line_coordinate(r);
    let (v, dv, d2v) = sol.line_jet(x);
    let s = params.regime.sign();
    let g = -2.0 / (s * (params.p_star() - 1.0));
    let w = (s * x).exp();
    let ux = w * (s * v + dv);
    let uxx = w * (v + 2.0 * s * dv + d2v);
    let u = (w * v).max(0.0);
    let r2 = r * r;
    let terms = [
        g * g * uxx - g * ux,
        (params.n as f64 - 1.0) * g * ux,
        r2 * u.powf(params.p()),
        -r2 * params.potential.eval(r) * u.powf(params.q),
    ];
    (terms, u)
}

/// Scale-invariant residual of the radial equation at `r`:
/// `r²|res| / (|u| + r²|u''| + (N−1)r|u'| + r²|f(u)|)`.
///
/// Every term has the units of `u`, so an `O(h²)` relative error of the
/// assembled solution shows up as `O(h²)` at every radius, the flat core
/// included.
pub fn radial_residual(sol: &AssembledSolution, params: &ModelParams, r: f64) -> f64 {
    let (terms, u) = radial_terms(sol, params, r);
    let sum: f64 = terms.iter().sum();
    sum.abs() / (u.abs() + terms.iter().map(|t| t.abs()).sum::<f64>())
}

/// Residual relative to the four equation terms alone. Near the origin the
/// solution is flat and this ratio amplifies any relative error of `u` by
/// `|u|/(r²u^{p})`, so it is reported as a diagnostic only.
pub fn radial_residual_term_relative(sol: &AssembledSolution, params: &ModelParams, r: f64) -> f64 {
    let (terms, _) = radial_terms(sol, params, r);
    let sum: f64 = terms.iter().sum();
    sum.abs() / terms.iter().map(|t| t.abs()).sum::<f64>()
}

/// Largest `‖T_ε h‖_*` over `samples` random right-hand sides of unit star
/// norm (rough noise shaped by the star-norm weight).
pub fn operator_norm_probe(
    xi: &[f64],
    params: &ModelParams,
    grid: &Grid,
    cfg: &ReductionConfig,
    samples: usize,
    rng: &mut impl rand::Rng,
) -> Result<f64> {
    check_linear_window(xi, params, cfg)?;
    let frame = SpikeFrame::new(xi.to_vec(), cfg.sigma_for(params), params)?;
    let ansatz = Ansatz::new(xi, params.n)?;
    let op = ProjectedOperator::new(&ansatz, grid, &Equation::new(params))?;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let noise: Vec<f64> = grid
            .nodes()
            .map(|x| frame.weight(x) * rng.gen_range(-1.0..1.0))
            .collect();
        let h = GridFunction::new(*grid, noise, frame.sigma())?;
        let h = h.scaled(1.0 / star_norm(&h, &frame));
        let (phi, _) = op.solve(h.values());
        worst = worst.max(star_norm(&h.with_values(phi), &frame));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{linearized_apply, residual_r};
    use crate::profiles::{PotentialSpec, Regime};
    use crate::quadrature::energy_constants;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(eps: f64, k: usize, v: f64) -> ModelParams {
        ModelParams::new(3, 4.0, eps, k, Regime::Sub, PotentialSpec::constant(v)).unwrap()
    }

    fn operator(xi: &[f64], p: &ModelParams, width: f64, h: f64) -> ProjectedOperator {
        let grid = Grid::around(xi, width, h).unwrap();
        ProjectedOperator::new(&Ansatz::new(xi, 3).unwrap(), &grid, &Equation::new(p)).unwrap()
    }

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn projected_solution_is_orthogonal_and_solves_the_bordered_equation() {
        let p = params(0.01, 2, -1.0);
        let xi = [4.0, 10.0];
        let op = operator(&xi, &p, 30.0, 0.02);
        let rhs = noise(op.grid().len(), 1);
        let (phi, c) = op.solve(&rhs);
        for d in op.orthogonality_defects(&phi) {
            assert!(d.abs() < 1e-10, "{d}");
        }
        let lphi =
            linearized_apply(&GridFunction::new(*op.grid(), phi, 1.0).unwrap(), &xi, &p).unwrap();
        let mut worst = 0.0f64;
        for (i, l) in lphi.values().iter().enumerate() {
            let expect = rhs[i]
                + c.iter()
                    .zip(op.kernel())
                    .map(|(cj, z)| cj * z[i])
                    .sum::<f64>();
            worst = worst.max((l - expect).abs());
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn block_and_dense_routes_agree() {
        let p = params(0.05, 2, -1.0);
        let xi = [3.0, 7.0];
        let op = operator(&xi, &p, 8.0, 0.05);
        let rhs = noise(op.grid().len(), 2);
        let (phi, c) = op.solve(&rhs);
        let (phi_d, c_d) = op.solve_dense(&rhs).unwrap();
        let dphi = phi
            .iter()
            .zip(&phi_d)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let dc = c
            .iter()
            .zip(&c_d)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(dphi < 1e-10 && dc < 1e-10, "{dphi} {dc}");
    }

    #[test]
    fn bordered_matrix_is_symmetric() {
        let m = operator(&[3.0, 7.0], &params(0.05, 2, -1.0), 6.0, 0.1).bordered_matrix();
        assert_eq!(m, m.transpose());
    }

    #[test]
    fn zero_right_hand_side_gives_zero() {
        let op = operator(&[3.0], &params(0.05, 1, -1.0), 20.0, 0.05);
        let (phi, c) = op.solve(&vec![0.0; op.grid().len()]);
        assert!(phi.iter().all(|v| *v == 0.0) && c.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn exact_bubble_needs_no_correction_beyond_discretization() {
        let p = params(0.0, 1, 0.0);
        let cfg = ReductionConfig::default();
        let norm = |h: f64| {
            let grid = Grid::around(&[3.0], 30.0, h).unwrap();
            iterate_phi(&[3.0], &p, &grid, &cfg).unwrap().star_norm_phi
        };
        let (a, b) = (norm(0.04), norm(0.02));
        assert!(b < 1e-3, "{b}");
        assert!((a / b - 4.0).abs() < 0.3, "{}", a / b);
    }

    #[test]
    fn fixed_point_satisfies_the_projected_equation() {
        let p = params(0.05, 1, -1.0);
        let cfg = ReductionConfig::default();
        let xi = [3.4];
        let grid = cfg.grid_for(&xi, &p).unwrap();
        let s = iterate_phi(&xi, &p, &grid, &cfg).unwrap();
        assert!(s.converged && s.orthogonality_defect < 1e-10);
        // F_h(Ū + φ) = Σ c_i Z_i  with the ghosts of Ū
        let eq = Equation::new(&p);
        let a = Ansatz::new(&xi, 3).unwrap();
        let v = a.sample(&grid).zip_with(&s.phi, |x, y| x + y);
        let f = crate::field::nonlinear_operator(&v, a.ghosts(&grid), &eq);
        let worst = grid
            .nodes()
            .zip(f.values())
            .map(|(x, fx)| (fx - s.c[0] * a.kernel(0, x)).abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-8, "{worst}");
        let r = residual_r(&xi, &p, &grid).unwrap();
        assert!(
            s.star_norm_phi < s.residual_star_norm,
            "{} {}",
            s.star_norm_phi,
            r.max_abs()
        );
    }

    #[test]
    fn correction_decays_away_from_the_spikes() {
        let p = params(0.02, 1, -1.0);
        let cfg = ReductionConfig::default();
        let s = solve_phi(&[4.0], &p, &cfg).unwrap();
        let g = s.phi.grid();
        let at = |x: f64| s.phi.values()[((x - g.left()) / g.h()).round() as usize].abs();
        assert!(at(4.0 + 20.0) < 1e-3 * s.phi.max_abs());
        assert!(at(4.0 - 20.0) < 1e-3 * s.phi.max_abs());
    }

    #[test]
    fn operator_norm_probe_is_moderate() {
        let p = params(0.01, 1, -1.0);
        let cfg = ReductionConfig::default();
        let xi = crate::reduced_model::spike_locations(&[1.0], 0.01, &p).unwrap();
        let grid = cfg.grid_for(&xi, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = operator_norm_probe(&xi, &p, &grid, &cfg, 10, &mut rng).unwrap();
        assert!(t > 0.0 && t < 10.0, "{t}");
    }

    #[test]
    fn window_rejects_crowded_or_far_spikes() {
        let p = params(0.01, 2, -1.0);
        let w = WindowConstraint {
            m: 10.0,
            epsilon: 0.01,
            k: 2,
        };
        let ok = crate::reduced_model::spike_locations(&[1.0, 1.0], 0.01, &p).unwrap();
        assert!(w.check(&ok, &p).is_ok());
        assert!(matches!(w.check(&[3.0, 3.5], &p), Err(Error::Window(_))));
        assert!(matches!(w.check(&[3.0, 100.0], &p), Err(Error::Window(_))));
        let cfg = ReductionConfig::default();
        assert!(matches!(
            solve_phi(&[0.5], &params(0.01, 1, -1.0), &cfg),
            Err(Error::Window(_))
        ));
    }

    #[test]
    fn newton_critical_point_has_vanishing_multipliers() {
        let p = params(0.05, 1, -1.0);
        let c = energy_constants(3, 4.0).unwrap();
        let cfg = ReductionConfig::default();
        let t = solve_reduced(&p, &c, &cfg).unwrap();
        assert!(t.grad_norm < cfg.newton_tol);
        assert!(t.state.max_abs_c() < 1e-8, "{}", t.state.max_abs_c());
        let lstar = crate::reduced_model::critical_lambda(&c, &p).unwrap();
        assert!((t.lambda[0] - lstar[0]).abs() < 0.2 * lstar[0]);
    }

    #[test]
    fn reduced_gradient_and_multipliers_vanish_together() {
        // ∂_ξ of the reduced energy is −h Σ c_j ⟨Z_j, ∂_ξ(Ū+φ)⟩, so a
        // nonzero multiplier shows up as a nonzero gradient
        let p = params(0.05, 1, -1.0);
        let c = energy_constants(3, 4.0).unwrap();
        let cfg = ReductionConfig::default();
        let r = Reducer::around_critical(&p, &c, &cfg).unwrap();
        let lstar = crate::reduced_model::critical_lambda(&c, &p).unwrap();
        let s = r.state(&lstar).unwrap();
        let g = r.gradient(&lstar).unwrap();
        assert!(
            s.max_abs_c() > 1e-4 && g[0].abs() > 1e-5,
            "{} {}",
            s.max_abs_c(),
            g[0]
        );
    }

    #[test]
    fn assembled_solution_satisfies_the_radial_equation() {
        let p = params(0.05, 1, -1.0);
        let c = energy_constants(3, 4.0).unwrap();
        let cfg = ReductionConfig {
            h: 0.01,
            ..Default::default()
        };
        let t = solve_reduced(&p, &c, &cfg).unwrap();
        let sol = assemble_solution(&t.state, &p).unwrap();
        let ef = sol.transform();
        for x in [-5.0, 0.0, 3.0, 3.3, 4.0, 8.0, 20.0] {
            let r = ef.radius(x);
            assert!(radial_residual(&sol, &p, r) < 1e-4, "x = {x}");
        }
    }
}
