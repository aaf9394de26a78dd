//! Browser bindings for the `piag` solver. Every export returns a JSON
//! string consumed by the static page in `www/`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use piag::delay::{DelaySchedule, ScheduleKind};
use piag::diagnostics::{default_transient_skip, fit_rlinear_rate, significant_prefix};
use piag::problems::{make_quadratic_box, make_quadratic_l1, reference_solution};
use piag::solver::{solve, theorem1_constants, SmoothnessBounds, SolverConfig, Termination};
use piag::Vector;

/// Largest number of points returned per curve.
const MAX_POINTS: usize = 1500;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn schedule_for(kind: &str, n: usize, tau: usize, seed: u64) -> Result<DelaySchedule, String> {
    if tau == 0 {
        return Ok(DelaySchedule::none());
    }
    let kind = match kind {
        "cyclic" => ScheduleKind::Cyclic { block: DelaySchedule::min_cyclic_block(n, tau) },
        "uniform_random" => ScheduleKind::UniformRandom { seed },
        "adversarial_max" => ScheduleKind::AdversarialMax,
        other => return Err(format!("unknown schedule {other:?}")),
    };
    Ok(DelaySchedule::new(kind, tau))
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIters => "max_iters",
        Termination::Diverged => "diverged",
    }
}

#[derive(Serialize)]
struct Curve {
    tau: usize,
    alpha: f64,
    iterations: usize,
    termination: &'static str,
    rate: Option<f64>,
    k: Vec<usize>,
    gap: Vec<f64>,
}

#[derive(Serialize)]
struct Curves {
    f_star: f64,
    lipschitz_sum: f64,
    concave_sum: f64,
    curves: Vec<Curve>,
}

/// `F(x_k) - F*` on an l1 instance for each delay bound in `taus`.
pub fn convergence_curves_json(
    n: usize,
    d: usize,
    seed: u64,
    lambda: f64,
    taus: &[usize],
    schedule: &str,
    max_iters: usize,
) -> Result<String, String> {
    let p = make_quadratic_l1(n, d, seed, lambda).map_err(err)?;
    let f_star = reference_solution(&p).map_err(err)?.best_value();
    let mut curves = Vec::new();
    for &tau in taus {
        let sched = schedule_for(schedule, n, tau, seed)?;
        let alpha = 0.9 * SmoothnessBounds::for_problem(&p, sched.tau).map_err(err)?.alpha_lemma2();
        let cfg = SolverConfig::new(alpha, sched, Vector::zeros(d)).with_max_iters(max_iters).with_tol(1e-14);
        let t = solve(&p, &cfg).map_err(err)?;
        let values: Vec<f64> = t.records.iter().map(|r| r.objective).collect();
        let rate = fit_rlinear_rate(significant_prefix(&values, f_star, 1e-13), f_star, default_transient_skip(tau))
            .ok()
            .map(|f| f.rate);
        let stride = t.records.len().div_ceil(MAX_POINTS).max(1);
        let kept: Vec<_> = t.records.iter().step_by(stride).collect();
        curves.push(Curve {
            tau,
            alpha,
            iterations: t.iterations,
            termination: termination_name(t.termination),
            rate,
            k: kept.iter().map(|r| r.k).collect(),
            gap: kept.iter().map(|r| (r.objective - f_star).max(0.0)).collect(),
        });
    }
    let (lipschitz_sum, concave_sum) = p.smoothness_totals();
    serde_json::to_string(&Curves { f_star, lipschitz_sum, concave_sum, curves }).map_err(err)
}

#[derive(Serialize)]
struct Thresholds {
    tau: Vec<usize>,
    alpha_lemma2: Vec<f64>,
    c8: Vec<f64>,
    inverse_lipschitz: f64,
}

/// The descent threshold and the certified stepsize as functions of `tau`.
pub fn stepsize_thresholds_json(lipschitz_sum: f64, concave_sum: f64, c0: f64, tau_max: usize) -> Result<String, String> {
    let mut out = Thresholds { tau: Vec::new(), alpha_lemma2: Vec::new(), c8: Vec::new(), inverse_lipschitz: 1.0 / lipschitz_sum };
    for tau in 0..=tau_max {
        let c = theorem1_constants(lipschitz_sum, concave_sum, tau, c0).map_err(err)?;
        out.tau.push(tau);
        out.alpha_lemma2.push(c.alpha_lemma2);
        out.c8.push(c.c8);
    }
    serde_json::to_string(&out).map_err(err)
}

#[derive(Serialize)]
struct Trajectory {
    half_width: f64,
    alpha: f64,
    iterations: usize,
    termination: &'static str,
    path: Vec<[f64; 2]>,
    stationary_points: Vec<[f64; 2]>,
    stationary_values: Vec<f64>,
    final_distance: Option<f64>,
}

/// A 2-D box instance solved from `(x0, y0)` (clamped into the box).
#[allow(clippy::too_many_arguments)]
pub fn box_trajectory_json(
    n: usize,
    seed: u64,
    negative_curvature: f64,
    tau: usize,
    schedule: &str,
    x0: f64,
    y0: f64,
    max_iters: usize,
) -> Result<String, String> {
    let p = make_quadratic_box(n, 2, seed, negative_curvature).map_err(err)?;
    let (_, half_width) = p.nonsmooth().bounds(0);
    let sched = schedule_for(schedule, n, tau, seed)?;
    let alpha = 0.9 * SmoothnessBounds::for_problem(&p, sched.tau).map_err(err)?.alpha_lemma2();
    let start = Vector::from_column_slice(&[
        (x0 * half_width).clamp(-half_width, half_width),
        (y0 * half_width).clamp(-half_width, half_width),
    ]);
    let cfg = SolverConfig::new(alpha, sched, start).with_max_iters(max_iters).with_tol(1e-10).with_full_log();
    let t = solve(&p, &cfg).map_err(err)?;
    let xs = t.iterates.as_deref().unwrap_or_default();
    let stride = xs.len().div_ceil(MAX_POINTS).max(1);
    let mut path: Vec<[f64; 2]> = xs.iter().step_by(stride).map(|x| [x[0], x[1]]).collect();
    path.push([t.final_x[0], t.final_x[1]]);
    let reference = reference_solution(&p).ok();
    let final_distance = reference.as_ref().and_then(|r| piag::problems::dist_to_stationary(&t.final_x, r).ok());
    let (stationary_points, stationary_values) = match reference {
        Some(r) => (r.stationary_points.iter().map(|x| [x[0], x[1]]).collect(), r.f_values),
        None => (Vec::new(), Vec::new()),
    };
    serde_json::to_string(&Trajectory {
        half_width,
        alpha,
        iterations: t.iterations,
        termination: termination_name(t.termination),
        path,
        stationary_points,
        stationary_values,
        final_distance,
    })
    .map_err(err)
}

fn parse_taus(taus: &str) -> Result<Vec<usize>, String> {
    taus.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<usize>().map_err(|_| format!("bad delay bound {s:?}")))
        .collect()
}

#[wasm_bindgen]
pub fn convergence_curves(
    n: usize,
    d: usize,
    seed: u64,
    lambda: f64,
    taus: &str,
    schedule: &str,
    max_iters: usize,
) -> Result<String, JsError> {
    let taus = parse_taus(taus).map_err(|e| JsError::new(&e))?;
    convergence_curves_json(n, d, seed, lambda, &taus, schedule, max_iters).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn stepsize_thresholds(lipschitz_sum: f64, concave_sum: f64, c0: f64, tau_max: usize) -> Result<String, JsError> {
    stepsize_thresholds_json(lipschitz_sum, concave_sum, c0, tau_max).map_err(|e| JsError::new(&e))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn box_trajectory(
    n: usize,
    seed: u64,
    negative_curvature: f64,
    tau: usize,
    schedule: &str,
    x0: f64,
    y0: f64,
    max_iters: usize,
) -> Result<String, JsError> {
    box_trajectory_json(n, seed, negative_curvature, tau, schedule, x0, y0, max_iters).map_err(|e| JsError::new(&e))
}
