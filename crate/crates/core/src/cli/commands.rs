use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::output::Artifacts;
use super::{CliError, Command, ExitReport, RunConfig, StageExt};
use crate::error::Result;
use crate::field::{ansatz_energy, Ansatz};
use crate::profiles::{EmdenFowler, ModelParams, Profile1D};
use crate::quadrature::{energy_constants, EnergyConstants};
use crate::reduced_model::{ansatz_line, predicted_energy, tower_config, TowerConfig};
use crate::reduction::{
    assemble_solution, iterate_phi, operator_norm_probe, radial_residual,
    radial_residual_term_relative, state_energy, Reducer, ReductionState,
};
use crate::verifier::{compare, find_tower, predicted_height, Window};

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Serialize)]
struct Inputs<'a> {
    #[serde(rename = "N")]
    n: u32,
    q: f64,
    k: usize,
    eps: f64,
    #[serde(rename = "V")]
    potential: &'a str,
    regime: String,
    p_s: f64,
    p_star: f64,
    gamma_n: f64,
    beta: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    inputs: Inputs<'a>,
    sigma: f64,
    width: f64,
    reduction: &'a crate::reduction::ReductionConfig,
    shooting: &'a crate::verifier::ShootConfig,
    seed: u64,
    workers: usize,
    eps_list: &'a [f64],
    files: Vec<String>,
    created_unix: u64,
}

fn write_manifest(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let p = &cfg.params;
    let dir = art.dir().to_path_buf();
    let files = art
        .files()
        .iter()
        .map(|f| f.strip_prefix(&dir).unwrap_or(f).display().to_string())
        .collect();
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cfg.command.name(),
        inputs: Inputs {
            n: p.n,
            q: p.q,
            k: p.k,
            eps: p.epsilon,
            potential: p.potential.label(),
            regime: p.regime.to_string(),
            p_s: p.p_s(),
            p_star: p.p_star(),
            gamma_n: p.gamma(),
            beta: p.beta(),
        },
        sigma: cfg.reduction.sigma_for(p),
        width: cfg.reduction.width_for(p),
        reduction: &cfg.reduction,
        shooting: &cfg.shooting,
        seed: cfg.seed,
        workers: cfg.workers,
        eps_list: if cfg.command == Command::Sweep {
            &cfg.eps_list
        } else {
            &[]
        },
        files,
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    art.json("manifest.json", &manifest)?;
    Ok(())
}

pub(super) fn run(cfg: &RunConfig) -> CliResult<ExitReport> {
    let mut art = Artifacts::new(&cfg.out_dir).stage("output")?;
    if cfg.command != Command::Constants {
        cfg.params.check_hypotheses().stage("hypotheses")?;
    }
    let constants = energy_constants(cfg.params.n, cfg.params.q).stage("constants")?;
    let outcome = match cfg.command {
        Command::Constants => constants_cmd(&constants, &mut art),
        Command::Predict => predict_cmd(cfg, &constants, &mut art),
        Command::Reduce => reduce_cmd(cfg, &constants, &mut art),
        Command::Verify => verify_cmd(cfg, &constants, &mut art),
        Command::Sweep => sweep_cmd(cfg, &constants, &mut art),
    };
    // the manifest is written even when a later stage failed
    write_manifest(cfg, &mut art).stage("output")?;
    let summary = outcome?;
    Ok(ExitReport {
        command: cfg.command,
        out_dir: cfg.out_dir.clone(),
        files: art.files().to_vec(),
        summary,
    })
}

fn constants_cmd(c: &EnergyConstants, art: &mut Artifacts) -> CliResult<serde_json::Value> {
    let mut rows = vec![
        ("a1".to_string(), vec![c.a1, c.err.a1]),
        ("a2".to_string(), vec![c.a2, c.err.a2]),
        ("a3".to_string(), vec![c.a3, c.err.a3]),
        ("a4".to_string(), vec![c.a4, c.err.a4]),
    ];
    if let (Some(v), Some(e)) = (c.a5, c.err.a5) {
        rows.push(("a5".into(), vec![v, e]));
    }
    if let (Some(v), Some(e)) = (c.a5_hat, c.err.a5_hat) {
        rows.push(("a5_hat".into(), vec![v, e]));
    }
    rows.push(("C_N".into(), vec![c.c_n, 0.0]));
    art.labelled_csv("constants.csv", &["name", "value", "err"], &rows)
        .stage("output")?;
    art.json("constants.json", c).stage("output")?;
    Ok(serde_json::to_value(c).unwrap_or_default())
}

#[derive(Serialize)]
struct Prediction<'a> {
    tower: &'a TowerConfig,
    energy: crate::reduced_model::EnergyBreakdown,
    psi_k: f64,
    predicted_height: f64,
}

fn predict_cmd(
    cfg: &RunConfig,
    c: &EnergyConstants,
    art: &mut Artifacts,
) -> CliResult<serde_json::Value> {
    let p = &cfg.params;
    let tower = tower_config(c, p).stage("predict")?;
    let energy = predicted_energy(&tower.lambda, p.epsilon, c, p).stage("predict")?;
    let psi = crate::reduced_model::psi_k(&tower.lambda, c, p).stage("predict")?;
    let pred = Prediction {
        tower: &tower,
        energy,
        psi_k: psi,
        predicted_height: predicted_height(p, &tower),
    };
    let rows: Vec<Vec<f64>> = (0..p.k)
        .map(|i| vec![(i + 1) as f64, tower.lambda[i], tower.xi[i], tower.alpha[i]])
        .collect();
    art.csv("predict.csv", &["index", "lambda", "xi", "alpha"], &rows)
        .stage("output")?;
    art.json("predict.json", &pred).stage("output")?;
    Ok(serde_json::to_value(&pred).unwrap_or_default())
}

#[derive(Serialize)]
struct StateSummary<'a> {
    lambda: &'a [f64],
    xi: &'a [f64],
    c: &'a [f64],
    star_norm_phi: f64,
    residual_star_norm: f64,
    orthogonality_defect: f64,
    increment: f64,
    iterations: usize,
    converged: bool,
    sigma: f64,
    energy: f64,
}

fn summarize<'a>(lambda: &'a [f64], s: &'a ReductionState, energy: f64) -> StateSummary<'a> {
    StateSummary {
        lambda,
        xi: &s.xi,
        c: &s.c,
        star_norm_phi: s.star_norm_phi,
        residual_star_norm: s.residual_star_norm,
        orthogonality_defect: s.orthogonality_defect,
        increment: s.increment,
        iterations: s.iterations,
        converged: s.converged,
        sigma: s.sigma,
        energy,
    }
}

fn write_profile(
    name: &str,
    s: &ReductionState,
    params: &ModelParams,
    art: &mut Artifacts,
) -> Result<()> {
    let ansatz = Ansatz::new(&s.xi, params.n)?;
    let rows: Vec<Vec<f64>> = s
        .phi
        .grid()
        .nodes()
        .zip(s.phi.values())
        .map(|(x, f)| {
            let u = ansatz.value(x);
            vec![x, u, *f, u + f]
        })
        .collect();
    art.csv(&format!("{name}.csv"), &["x", "ubar", "phi", "v"], &rows)?;
    let g = s.phi.grid();
    art.json(
        &format!("{name}.json"),
        &json!({
            "grid": {"left": g.left(), "right": g.right(), "h": g.h(), "nodes": g.len()},
            "xi": s.xi,
            "sigma": s.sigma,
            "eps": params.epsilon,
        }),
    )?;
    Ok(())
}

fn reduce_cmd(
    cfg: &RunConfig,
    c: &EnergyConstants,
    art: &mut Artifacts,
) -> CliResult<serde_json::Value> {
    let p = &cfg.params;
    let tower = tower_config(c, p).stage("predict")?;
    let reducer = Reducer::around_critical(p, c, &cfg.reduction).stage("solve_phi")?;
    let at_star = reducer.state(&tower.lambda).stage("solve_phi")?;
    let e_star = state_energy(&at_star, p).stage("solve_phi")?;
    write_profile("profile_lambda_star", &at_star, p, art).stage("output")?;
    let newton = reducer.solve(&tower.lambda);
    let (solved, newton_error) = match &newton {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    if let Some(s) = solved {
        write_profile("profile", &s.state, p, art).stage("output")?;
    }
    let solved_summary = match solved {
        Some(s) => {
            let e = state_energy(&s.state, p).stage("solve_reduced")?;
            json!({
                "state": summarize(&s.lambda, &s.state, e),
                "grad_norm": s.grad_norm,
                "newton_iterations": s.newton_iterations,
                "max_abs_c": s.state.max_abs_c(),
            })
        }
        None => json!({ "error": newton_error.clone().unwrap_or_default() }),
    };
    let report = json!({
        "lambda_star": tower.lambda,
        "at_lambda_star": summarize(&tower.lambda, &at_star, e_star),
        "solved": solved_summary,
        "grid": {"left": reducer.grid().left(), "right": reducer.grid().right(), "h": reducer.grid().h()},
    });
    art.json("reduction.json", &report).stage("output")?;
    newton.stage("solve_reduced")?;
    Ok(report)
}

fn verify_cmd(
    cfg: &RunConfig,
    c: &EnergyConstants,
    art: &mut Artifacts,
) -> CliResult<serde_json::Value> {
    let p = &cfg.params;
    let tower = tower_config(c, p).stage("predict")?;
    let solved = crate::reduction::solve_reduced(p, c, &cfg.reduction).stage("solve_reduced")?;
    let assembled = assemble_solution(&solved.state, p).stage("assemble")?;
    let ef = EmdenFowler::new(p.n, p.regime).stage("assemble")?;
    let xi1 = solved.xi[0];
    let g = solved.state.phi.grid();
    let radii: Vec<f64> = (0..100)
        .map(|i| ef.radius(g.left() + (g.right() - g.left()) * (i as f64 + 0.5) / 100.0))
        .collect();
    let max_of = |f: &dyn Fn(f64) -> f64| radii.iter().map(|r| f(*r)).fold(0.0f64, f64::max);
    let max_residual = max_of(&|r| radial_residual(&assembled, p, r));
    let max_term_relative = max_of(&|r| radial_residual_term_relative(&assembled, p, r));

    let shot = find_tower(p, &tower, &cfg.shooting).stage("shooting")?;
    let shot_line = shot.line(p.regime).stage("shooting")?;
    let predicted = ansatz_line(&tower.xi, p.n).stage("predict")?;
    let window = Window::new(xi1 - 2.0, xi1 + 2.0, 401);
    let shot_vs_reduction = compare(&shot_line, &assembled.line, window).stage("compare")?;
    let reduction_vs_prediction = compare(&assembled.line, &predicted, window).stage("compare")?;
    let shot_vs_prediction = compare(&shot_line, &predicted, window).stage("compare")?;

    let rows: Vec<Vec<f64>> = shot.samples.iter().map(|(r, u)| vec![*r, *u]).collect();
    art.csv("shot.csv", &["r", "u"], &rows).stage("output")?;
    let report = json!({
        "lambda_star": tower.lambda,
        "lambda_eps": solved.lambda,
        "xi": solved.xi,
        "max_abs_c": solved.state.max_abs_c(),
        "max_radial_residual": max_residual,
        "max_term_relative_radial_residual": max_term_relative,
        "assembled_peak_height": assembled.radial.eval(ef.radius(xi1 + 10.0 * p.regime.sign())),
        "shot": {
            "u0": shot.u0,
            "classification": shot.classification,
            "peak_count_ef": shot.peak_count_ef,
            "decay_exponent": shot.decay_exponent,
        },
        "predicted_height": predicted_height(p, &tower),
        "shot_vs_reduction": shot_vs_reduction,
        "reduction_vs_prediction": reduction_vs_prediction,
        "shot_vs_prediction": shot_vs_prediction,
    });
    art.json("metrics.json", &report).stage("output")?;
    Ok(report)
}

/// Metrics of one sweep point; fields are absent when the point failed.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_star: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_star_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_star_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_discrepancy_over_eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator_norm_probe: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fp_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Per-point table plus fitted log-log slopes against `ε`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    pub slopes: serde_json::Map<String, serde_json::Value>,
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn sweep_point(cfg: &RunConfig, c: &EnergyConstants, index: usize, eps: f64) -> SweepPoint {
    let mut point = SweepPoint {
        eps,
        lambda_star: None,
        xi: None,
        residual_star_norm: None,
        phi_star_norm: None,
        energy_discrepancy_over_eps: None,
        operator_norm_probe: None,
        fp_iterations: None,
        error: None,
    };
    let result = (|| -> Result<()> {
        let p = cfg.params.with_epsilon(eps)?;
        let tower = tower_config(c, &p)?;
        point.lambda_star = Some(tower.lambda.clone());
        point.xi = Some(tower.xi.clone());
        let grid = cfg.reduction.grid_for(&tower.xi, &p)?;
        let state = iterate_phi(&tower.xi, &p, &grid, &cfg.reduction)?;
        point.residual_star_norm = Some(state.residual_star_norm);
        point.phi_star_norm = Some(state.star_norm_phi);
        point.fp_iterations = Some(state.iterations);
        let e = ansatz_energy(&tower.xi, &grid, &p)?;
        let pred = predicted_energy(&tower.lambda, eps, c, &p)?;
        point.energy_discrepancy_over_eps = Some((e - pred.total).abs() / eps);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(index as u64));
        point.operator_norm_probe = Some(operator_norm_probe(
            &tower.xi,
            &p,
            &grid,
            &cfg.reduction,
            20,
            &mut rng,
        )?);
        if !state.converged {
            point.error = Some(format!(
                "fixed point not converged after {} iterations",
                state.iterations
            ));
        }
        Ok(())
    })();
    if let Err(e) = result {
        point.error = Some(e.to_string());
    }
    point
}

fn sweep_cmd(
    cfg: &RunConfig,
    c: &EnergyConstants,
    art: &mut Artifacts,
) -> CliResult<serde_json::Value> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError {
            stage: "sweep",
            error: crate::Error::Io(e.to_string()),
        })?;
    let points: Vec<SweepPoint> = pool.install(|| {
        cfg.eps_list
            .par_iter()
            .enumerate()
            .map(|(i, e)| sweep_point(cfg, c, i, *e))
            .collect()
    });
    for (i, point) in points.iter().enumerate() {
        let mut sub = art.subdir(&format!("point_{i:03}")).stage("output")?;
        sub.json("point.json", point).stage("output")?;
        art.absorb(sub);
    }
    let series = |f: fn(&SweepPoint) -> Option<f64>| -> Vec<(f64, f64)> {
        points
            .iter()
            .filter_map(|p| f(p).map(|v| (p.eps, v)))
            .collect()
    };
    let mut slopes = serde_json::Map::new();
    for (name, f) in [
        (
            "residual_star_norm",
            (|p: &SweepPoint| p.residual_star_norm) as fn(&SweepPoint) -> Option<f64>,
        ),
        ("phi_star_norm", |p: &SweepPoint| p.phi_star_norm),
        ("energy_discrepancy_over_eps", |p: &SweepPoint| {
            p.energy_discrepancy_over_eps
        }),
    ] {
        if let Some(s) = fit_slope(&series(f)) {
            slopes.insert(name.into(), json!(s));
        }
    }
    let rows: Vec<Vec<f64>> = points
        .iter()
        .filter_map(|p| {
            Some(vec![
                p.eps,
                p.residual_star_norm?,
                p.phi_star_norm?,
                p.energy_discrepancy_over_eps?,
                p.operator_norm_probe?,
            ])
        })
        .collect();
    art.csv(
        "sweep.csv",
        &[
            "eps",
            "residual_star_norm",
            "phi_star_norm",
            "energy_discrepancy_over_eps",
            "operator_norm_probe",
        ],
        &rows,
    )
    .stage("output")?;
    let report = SweepReport { points, slopes };
    art.json("sweep.json", &report).stage("output")?;
    Ok(serde_json::to_value(&report).unwrap_or_default())
}
