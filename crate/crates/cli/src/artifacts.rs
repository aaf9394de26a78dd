//! JSON artifacts written next to traces.

use serde::{Deserialize, Serialize};

use piag::delay::ScheduleKind;
use piag::diagnostics::{InequalityReport, RateFit};
use piag::problems::{ReferenceMethod, ReferenceSolution};
use piag::solver::{SmoothnessBounds, SolverConfig, Termination, TheoryConstants, Trace};
use piag::{PiagError, Problem};

pub fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIters => "max_iters",
        Termination::Diverged => "diverged",
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ComponentConstants {
    pub lipschitz: f64,
    pub concave_modulus: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReferenceMeta {
    pub method: ReferenceMethod,
    pub stationary_points: Vec<Vec<f64>>,
    pub f_values: Vec<f64>,
    /// Smallest distance between stationary points with different values.
    pub value_separation: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GenerateMeta {
    pub family: String,
    pub seed: u64,
    pub components: usize,
    pub dimension: usize,
    pub negative_curvature: Option<f64>,
    pub lambda: Option<f64>,
    pub lipschitz_sum: f64,
    pub concave_sum: f64,
    pub f_lower_bound: Option<f64>,
    pub component_constants: Vec<ComponentConstants>,
    pub reference: Option<ReferenceMeta>,
    /// Fitted error-bound constant (twice the largest observed ratio).
    pub c0: Option<f64>,
}

impl GenerateMeta {
    pub fn new(
        family: &str,
        seed: u64,
        problem: &Problem,
        negative_curvature: f64,
        lambda: f64,
        reference: Option<&ReferenceSolution>,
        c0: Option<f64>,
    ) -> Self {
        let (lipschitz_sum, concave_sum) = problem.smoothness_totals();
        Self {
            family: family.to_string(),
            seed,
            components: problem.num_components(),
            dimension: problem.dimension(),
            negative_curvature: (family == "quadratic_box").then_some(negative_curvature),
            lambda: (family == "quadratic_l1").then_some(lambda),
            lipschitz_sum,
            concave_sum,
            f_lower_bound: problem.f_lower_bound_hint,
            component_constants: problem
                .components()
                .iter()
                .map(|c| ComponentConstants { lipschitz: c.lipschitz(), concave_modulus: c.concave_modulus() })
                .collect(),
            reference: reference.map(|r| ReferenceMeta {
                method: r.method,
                stationary_points: r.stationary_points.iter().map(|x| x.iter().copied().collect()).collect(),
                f_values: r.f_values.clone(),
                value_separation: r.value_separation(),
            }),
            c0,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub method: String,
    pub termination: Termination,
    pub final_objective: Option<f64>,
    pub final_residual: Option<f64>,
    pub iterations: usize,
    pub alpha: f64,
    pub tau: usize,
    pub schedule: ScheduleKind,
    pub tol: f64,
    pub max_iters: usize,
    pub lipschitz_sum: f64,
    pub concave_sum: f64,
    pub alpha_lemma2: f64,
    pub l_big_bar: f64,
    pub l_small_bar: f64,
    /// Present when the config supplies `c0`.
    pub theory: Option<TheoryConstants>,
    pub full_log: bool,
    pub warnings: Vec<String>,
    pub divergence: Option<String>,
}

impl RunSummary {
    pub fn new(method: &str, problem: &Problem, config: &SolverConfig, trace: &Trace) -> Result<Self, PiagError> {
        let bounds = SmoothnessBounds::for_problem(problem, trace.tau)?;
        let theory = match config.c0 {
            Some(c0) => Some(TheoryConstants::new(bounds.lipschitz_sum, bounds.concave_sum, trace.tau, c0)?),
            None => None,
        };
        Ok(Self {
            method: method.to_string(),
            termination: trace.termination,
            final_objective: finite(trace.final_objective()),
            final_residual: finite(trace.final_residual()),
            iterations: trace.iterations,
            alpha: trace.alpha,
            tau: trace.tau,
            schedule: if method == "fbs" { ScheduleKind::None } else { config.schedule.kind },
            tol: config.prox_residual_tol,
            max_iters: config.max_iters,
            lipschitz_sum: bounds.lipschitz_sum,
            concave_sum: bounds.concave_sum,
            alpha_lemma2: bounds.alpha_lemma2(),
            l_big_bar: bounds.l_big_bar(),
            l_small_bar: bounds.l_small_bar(),
            theory,
            full_log: trace.iterates.is_some(),
            warnings: trace.warnings.clone(),
            divergence: trace.divergence.as_ref().map(|e| e.to_string()),
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub alpha: f64,
    pub tau: usize,
    pub alpha_lemma2: f64,
    pub checks: Vec<InequalityReport>,
}

impl VerifyReport {
    pub fn new(alpha: f64, tau: usize, alpha_lemma2: f64, checks: Vec<InequalityReport>) -> Self {
        Self { passed: checks.iter().all(|c| c.passed()), alpha, tau, alpha_lemma2, checks }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RateReport {
    pub limit: f64,
    pub limit_source: String,
    pub fit: RateFit,
}
