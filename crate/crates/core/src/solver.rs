//! The PIAG iteration, stepsize thresholds and the rate constants.

use serde::{Deserialize, Serialize};

use crate::delay::{DelaySchedule, GradientTable};
use crate::error::{PiagError, Result};
use crate::linalg::squared_distance;
use crate::model::{Problem, Vector};
use crate::prox::{self, prox_residual};

/// Runaway threshold: `F(x_k) > F(x_0) + DIVERGENCE_GAP` aborts the run.
pub const DIVERGENCE_GAP: f64 = 1e12;

/// Smoothness totals together with the delay bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessBounds {
    /// `L = sum_i L_i`.
    pub lipschitz_sum: f64,
    /// `l = sum_i l_i`.
    pub concave_sum: f64,
    pub tau: usize,
}

impl SmoothnessBounds {
    pub fn new(lipschitz_sum: f64, concave_sum: f64, tau: usize) -> Result<Self> {
        if !(lipschitz_sum > 0.0) || !lipschitz_sum.is_finite() {
            return Err(PiagError::invalid(format!("L must be positive and finite, got {lipschitz_sum}")));
        }
        if !(concave_sum >= 0.0 && concave_sum <= lipschitz_sum) {
            return Err(PiagError::invalid(format!(
                "need 0 <= l <= L, got l = {concave_sum}, L = {lipschitz_sum}"
            )));
        }
        Ok(Self { lipschitz_sum, concave_sum, tau })
    }

    pub fn for_problem(problem: &Problem, tau: usize) -> Result<Self> {
        let (big, small) = problem.smoothness_totals();
        Self::new(big, small, tau)
    }

    /// `L(tau+1)/2`.
    pub fn l_big_bar(&self) -> f64 {
        self.lipschitz_sum * (self.tau as f64 + 1.0) / 2.0
    }

    /// `l(tau+1)/2`.
    pub fn l_small_bar(&self) -> f64 {
        self.concave_sum * (self.tau as f64 + 1.0) / 2.0
    }

    /// Largest stepsize (exclusive) for the descent and summability bounds.
    pub fn alpha_lemma2(&self) -> f64 {
        let (lb, sb) = (self.l_big_bar(), self.l_small_bar());
        1.0 / (lb + self.tau as f64 * (sb + lb))
    }
}

/// `1 / (Lbar + tau (lbar + Lbar))` with `Lbar = L(tau+1)/2`, `lbar = l(tau+1)/2`.
pub fn stepsize_threshold(lipschitz_sum: f64, concave_sum: f64, tau: usize) -> Result<f64> {
    Ok(SmoothnessBounds::new(lipschitz_sum, concave_sum, tau)?.alpha_lemma2())
}

/// Constants of the linear-rate argument, all evaluated with the stepsize
/// relaxed to `1/L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub bounds: SmoothnessBounds,
    pub l_big_bar: f64,
    pub l_small_bar: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    /// Certified stepsize: `min(alpha_lemma2, 1/(2 C5 + 2 C7), 1/L)`.
    pub c8: f64,
    pub alpha_lemma2: f64,
    /// Error-bound constant.
    pub c0: f64,
    /// `(1 + L^2 alpha^2 / c0^2)^{-1}` at `alpha = C8`.
    pub contraction_a: f64,
}

impl TheoryConstants {
    pub fn new(lipschitz_sum: f64, concave_sum: f64, tau: usize, c0: f64) -> Result<Self> {
        let bounds = SmoothnessBounds::new(lipschitz_sum, concave_sum, tau)?;
        if !(c0 > 0.0) || !c0.is_finite() {
            return Err(PiagError::invalid(format!("error-bound constant c0 must be positive, got {c0}")));
        }
        let (big, l) = (lipschitz_sum, concave_sum);
        let t = tau as f64;
        let c0sq = c0 * c0;
        let c1 = big * (t + 1.0) / 2.0;
        let c2 = (l + big) * (t + 1.0) / 2.0;
        let c3 = (c0sq * (2.0 * l * (t + 1.0) + big) + big * t) / (2.0 * big * big);
        let c4 = ((l + big) * (1.0 + t) + 2.0 * t * (l + big + l * t) * c0sq) / (2.0 * big * big);
        let c5 = l + big + l * t + big * t / 2.0 + big * t / (2.0 * c0sq);
        let c6 = ((t + 1.0) * (l + big) / c0sq
            + 2.0 * l * t * t
            + 3.0 * l * t
            + l
            + 3.0 * big * t
            + big)
            / 2.0;
        let c7 = c6 * (1.0 + t * (1.0 + 1.0 / c0sq).powi(tau as i32));
        let alpha_lemma2 = bounds.alpha_lemma2();
        let c8 = alpha_lemma2.min(1.0 / (2.0 * c5 + 2.0 * c7)).min(1.0 / big);
        let mut out = Self {
            bounds,
            l_big_bar: bounds.l_big_bar(),
            l_small_bar: bounds.l_small_bar(),
            c1,
            c2,
            c3,
            c4,
            c5,
            c6,
            c7,
            c8,
            alpha_lemma2,
            c0,
            contraction_a: 0.0,
        };
        out.contraction_a = out.contraction_at(c8);
        Ok(out)
    }

    pub fn for_problem(problem: &Problem, tau: usize, c0: f64) -> Result<Self> {
        let (big, small) = problem.smoothness_totals();
        Self::new(big, small, tau, c0)
    }

    /// `(1 + L^2 alpha^2 / c0^2)^{-1}`.
    pub fn contraction_at(&self, alpha: f64) -> f64 {
        let r = self.bounds.lipschitz_sum * alpha / self.c0;
        1.0 / (1.0 + r * r)
    }

    /// `1 - a` at `C8`, computed without cancellation; `a` itself rounds to 1
    /// when `C8` is tiny.
    pub fn contraction_gap(&self) -> f64 {
        let r = self.bounds.lipschitz_sum * self.c8 / self.c0;
        r * r / (1.0 + r * r)
    }
}

/// Free-function form of [`TheoryConstants::new`].
pub fn theorem1_constants(lipschitz_sum: f64, concave_sum: f64, tau: usize, c0: f64) -> Result<TheoryConstants> {
    TheoryConstants::new(lipschitz_sum, concave_sum, tau, c0)
}

/// How the stepsize is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepsizeRule {
    Fixed(f64),
    /// `0.9 * alpha_lemma2`.
    AutoLemma2,
    /// `C8`; needs an error-bound constant.
    AutoC8,
}

impl StepsizeRule {
    pub fn resolve(&self, bounds: &SmoothnessBounds, c0: Option<f64>) -> Result<f64> {
        match *self {
            StepsizeRule::Fixed(a) if a > 0.0 && a.is_finite() => Ok(a),
            StepsizeRule::Fixed(a) => Err(PiagError::invalid(format!("stepsize must be positive, got {a}"))),
            StepsizeRule::AutoLemma2 => Ok(0.9 * bounds.alpha_lemma2()),
            StepsizeRule::AutoC8 => {
                let c0 = c0.ok_or_else(|| PiagError::invalid("auto_c8 stepsize requires c0"))?;
                Ok(TheoryConstants::new(bounds.lipschitz_sum, bounds.concave_sum, bounds.tau, c0)?.c8)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub alpha: f64,
    pub schedule: DelaySchedule,
    pub max_iters: usize,
    pub prox_residual_tol: f64,
    pub x0: Vector,
    pub trace_every: usize,
    /// Iterations between stationarity checks with the exact gradient.
    pub check_every: usize,
    /// Reject stepsizes above `C8` (requires `c0`).
    pub enforce_theory: bool,
    pub c0: Option<f64>,
    /// Keep every iterate and a record for every iteration.
    pub record_iterates: bool,
}

impl SolverConfig {
    pub fn new(alpha: f64, schedule: DelaySchedule, x0: Vector) -> Self {
        Self {
            alpha,
            schedule,
            max_iters: 100_000,
            prox_residual_tol: 1e-8,
            x0,
            trace_every: 1,
            check_every: 10,
            enforce_theory: false,
            c0: None,
            record_iterates: false,
        }
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.prox_residual_tol = tol;
        self
    }

    pub fn with_trace_every(mut self, n: usize) -> Self {
        self.trace_every = n;
        self
    }

    pub fn with_full_log(mut self) -> Self {
        self.record_iterates = true;
        self
    }

    fn validate(&self, problem: &Problem) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(PiagError::invalid(format!("stepsize must be positive, got {}", self.alpha)));
        }
        if self.max_iters == 0 || self.trace_every == 0 || self.check_every == 0 {
            return Err(PiagError::invalid("max_iters, trace_every and check_every must be positive"));
        }
        if !(self.prox_residual_tol > 0.0) {
            return Err(PiagError::invalid("tolerance must be positive"));
        }
        problem.check_dimension(&self.x0)?;
        if self.x0.iter().any(|v| !v.is_finite()) || !problem.nonsmooth().contains(&self.x0) {
            return Err(PiagError::invalid("x0 must be finite and inside dom h"));
        }
        self.schedule.validate(problem.num_components())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIters,
    Diverged,
}

/// One row of a trace. The record for `k` describes `x_k` and the step that
/// produced `x_{k+1}`; a terminal record has `step_norm = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub objective: f64,
    pub step_norm: f64,
    pub prox_residual: f64,
    pub max_staleness: usize,
    pub delta_k: f64,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub final_x: Vector,
    pub termination: Termination,
    /// Index of the last iterate.
    pub iterations: usize,
    pub alpha: f64,
    pub tau: usize,
    /// `x_0, ..., x_K` when the full log was requested.
    pub iterates: Option<Vec<Vector>>,
    pub warnings: Vec<String>,
    /// Set when the run diverged.
    pub divergence: Option<PiagError>,
}

impl Trace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn final_objective(&self) -> f64 {
        self.last().map_or(f64::NAN, |r| r.objective)
    }

    pub fn final_residual(&self) -> f64 {
        self.last().map_or(f64::NAN, |r| r.prox_residual)
    }
}

/// One PIAG iteration: refresh the listed gradients, form `y = x_k - alpha g_k`
/// and return `x_{k+1} = prox_{alpha h}(y)`.
pub fn piag_step(
    problem: &Problem,
    table: &mut GradientTable,
    k: usize,
    x_k: &Vector,
    alpha: f64,
    refresh_set: &[usize],
) -> Result<Vector> {
    let g = table.refresh_and_aggregate(problem, k, x_k, refresh_set)?;
    if g.iter().any(|v| !v.is_finite()) {
        return Err(PiagError::Divergence { iteration: k, reason: "non-finite aggregated gradient".into() });
    }
    let y = forward_step(x_k, g, alpha);
    prox::prox(problem.nonsmooth(), alpha, &y)
}

/// `x - alpha * g`, elementwise.
pub fn forward_step(x: &Vector, g: &Vector, alpha: f64) -> Vector {
    x.zip_map(g, |xi, gi| xi - alpha * gi)
}

struct Recorder {
    trace_every: usize,
    head: usize,
    records: Vec<TraceRecord>,
    iterates: Option<Vec<Vector>>,
}

impl Recorder {
    fn wants(&self, k: usize) -> bool {
        k <= self.head || k % self.trace_every == 0
    }
}

/// Runs PIAG until the prox residual (exact gradient, checked every
/// `check_every` iterations) drops to the tolerance, the iteration budget runs
/// out, or the run diverges. Divergence ends the trace with
/// [`Termination::Diverged`] and the error stored in `divergence`.
pub fn solve(problem: &Problem, config: &SolverConfig) -> Result<Trace> {
    run(problem, config, Method::Piag)
}

/// Plain forward-backward splitting with the full gradient evaluated directly
/// every iteration; the zero-delay reference for [`solve`].
pub fn solve_fbs(problem: &Problem, config: &SolverConfig) -> Result<Trace> {
    run(problem, config, Method::Fbs)
}

#[derive(Clone, Copy, PartialEq)]
enum Method {
    Piag,
    Fbs,
}

fn run(problem: &Problem, config: &SolverConfig, method: Method) -> Result<Trace> {
    config.validate(problem)?;
    let alpha = config.alpha;
    let tau = if method == Method::Fbs { 0 } else { config.schedule.tau };
    let mut warnings = Vec::new();
    let bounds = SmoothnessBounds::for_problem(problem, tau)?;
    if config.enforce_theory {
        let c0 = config
            .c0
            .ok_or_else(|| PiagError::invalid("enforce_theory requires the error-bound constant c0"))?;
        let consts = TheoryConstants::new(bounds.lipschitz_sum, bounds.concave_sum, tau, c0)?;
        if alpha > consts.c8 {
            return Err(PiagError::invalid(format!("stepsize {alpha} exceeds certified bound C8 = {}", consts.c8)));
        }
    } else if alpha >= bounds.alpha_lemma2() {
        warnings.push(format!(
            "stepsize {alpha} is not below the descent threshold {}; guarantees do not apply",
            bounds.alpha_lemma2()
        ));
    }

    let mut table = GradientTable::new(problem, &config.x0, tau)?;
    let mut planner = config.schedule.planner(problem.num_components())?;
    let (trace_every, check_every) = if config.record_iterates { (1, config.check_every) } else { (config.trace_every, config.check_every) };
    let mut rec = Recorder {
        trace_every,
        head: tau,
        records: Vec::new(),
        iterates: config.record_iterates.then(|| vec![config.x0.clone()]),
    };

    let mut x = config.x0.clone();
    let f0 = problem.eval_objective(&x)?;
    let mut f_x = f0;
    let mut k = 0usize;
    let mut divergence = None;

    let termination = loop {
        let mut residual = None;
        if k % check_every == 0 || k == config.max_iters {
            let r = prox_residual(problem, alpha, &x)?;
            residual = Some(r);
            if r <= config.prox_residual_tol {
                push_terminal(&mut rec, k, f_x, r, &table, tau);
                break Termination::Converged;
            }
        }
        if k == config.max_iters {
            push_terminal(&mut rec, k, f_x, residual.unwrap_or(f64::NAN), &table, tau);
            break Termination::MaxIters;
        }

        let delta = table.delta();
        let step = match method {
            Method::Piag => {
                let set = planner.next_refresh_set(k, &table);
                piag_step(problem, &mut table, k, &x, alpha, &set)
            }
            Method::Fbs => fbs_step(problem, k, &x, alpha),
        };
        let x_next = match step {
            Ok(v) => v,
            Err(e @ PiagError::Divergence { .. }) => {
                push_terminal(&mut rec, k, f_x, f64::NAN, &table, tau);
                divergence = Some(e);
                break Termination::Diverged;
            }
            Err(e) => return Err(e),
        };
        let f_next = problem.eval_objective(&x_next)?;
        let step_sq = squared_distance(&x_next, &x);

        if rec.wants(k) {
            let r = match residual {
                Some(r) => r,
                None => prox_residual(problem, alpha, &x)?,
            };
            rec.records.push(TraceRecord {
                k,
                objective: f_x,
                step_norm: step_sq.sqrt(),
                prox_residual: r,
                max_staleness: staleness(&table, method),
                delta_k: delta,
            });
        }

        if x_next.iter().any(|v| !v.is_finite()) || !f_next.is_finite() || f_next > f0 + DIVERGENCE_GAP {
            // x is the last finite iterate
            push_terminal(&mut rec, k, f_x, f64::NAN, &table, tau);
            divergence = Some(PiagError::Divergence {
                iteration: k + 1,
                reason: format!("objective {f_next} left the admissible range"),
            });
            break Termination::Diverged;
        }

        table.push_step(step_sq);
        x = x_next;
        f_x = f_next;
        k += 1;
        if let Some(log) = rec.iterates.as_mut() {
            log.push(x.clone());
        }
    };

    Ok(Trace {
        records: rec.records,
        final_x: x,
        termination,
        iterations: k,
        alpha,
        tau,
        iterates: rec.iterates,
        warnings,
        divergence,
    })
}

fn staleness(table: &GradientTable, method: Method) -> usize {
    match method {
        Method::Piag => table.max_staleness(),
        Method::Fbs => 0,
    }
}

fn push_terminal(rec: &mut Recorder, k: usize, f_x: f64, residual: f64, table: &GradientTable, tau: usize) {
    if rec.records.last().is_some_and(|r| r.k == k) {
        return;
    }
    let stale = if tau == 0 { 0 } else { table.max_staleness() };
    rec.records.push(TraceRecord {
        k,
        objective: f_x,
        step_norm: 0.0,
        prox_residual: residual,
        max_staleness: stale,
        delta_k: table.delta(),
    });
}

fn fbs_step(problem: &Problem, k: usize, x: &Vector, alpha: f64) -> Result<Vector> {
    let g = problem.full_gradient(x)?;
    if g.iter().any(|v| !v.is_finite()) {
        return Err(PiagError::Divergence { iteration: k, reason: "non-finite gradient".into() });
    }
    prox::prox(problem.nonsmooth(), alpha, &forward_step(x, &g, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delay::ScheduleKind;
    use crate::model::{NonsmoothTerm, Quadratic};
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn scalar_problem(a: f64, h: NonsmoothTerm) -> Problem {
        let q = Quadratic::new(DMatrix::from_element(1, 1, a), Vector::zeros(1), 0.0).unwrap();
        Problem::from_quadratics(vec![q], h).unwrap()
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(stepsize_threshold(2.0, 0.0, 0).unwrap(), 1.0);
        assert!((stepsize_threshold(4.0, 2.0, 1).unwrap() - 0.1).abs() < 1e-15);
        assert!(stepsize_threshold(4.0, 2.0, 2).unwrap() < stepsize_threshold(4.0, 2.0, 1).unwrap());
        assert!(stepsize_threshold(0.0, 0.0, 1).is_err());
        assert!(stepsize_threshold(-1.0, 0.0, 1).is_err());
        assert!(stepsize_threshold(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn constants_at_zero_delay() {
        let c = theorem1_constants(3.0, 1.0, 0, 0.7).unwrap();
        assert_eq!(c.c1, 1.5);
        assert_eq!(c.c2, 2.0);
        assert_eq!(c.c7, c.c6);
    }

    #[test]
    fn constants_hand_values() {
        let c = theorem1_constants(1.0, 0.0, 1, 1.0).unwrap();
        assert_eq!(c.c1, 1.0);
        assert_eq!(c.c2, 1.0);
        assert_eq!(c.c3, 1.0);
        assert_eq!(c.c4, 2.0);
        assert_eq!(c.c5, 2.0);
        assert_eq!(c.c6, 3.0);
        assert_eq!(c.c7, 9.0);
        assert_eq!(c.alpha_lemma2, 0.5);
        assert_eq!(c.c8, 1.0 / 22.0);
        assert!(c.contraction_a > 0.0 && c.contraction_a < 1.0);
        assert!(theorem1_constants(1.0, 0.0, 1, 0.0).is_err());
    }

    #[test]
    fn gradient_descent_identity() {
        let p = scalar_problem(1.0, NonsmoothTerm::Zero);
        let x = v(&[1.0]);
        let mut table = GradientTable::new(&p, &x, 0).unwrap();
        let next = piag_step(&p, &mut table, 0, &x, 0.1, &[0]).unwrap();
        assert!((next[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn stale_step_uses_padded_gradient() {
        let p = scalar_problem(1.0, NonsmoothTerm::Zero);
        let x0 = v(&[1.0]);
        let mut table = GradientTable::new(&p, &x0, 1).unwrap();
        let x1 = piag_step(&p, &mut table, 0, &x0, 0.1, &[0]).unwrap();
        assert!((x1[0] - 0.9).abs() < 1e-15);
        let x2 = piag_step(&p, &mut table, 1, &x1, 0.1, &[]).unwrap();
        assert!((x2[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn nonconvex_box_step() {
        let p = scalar_problem(-1.0, NonsmoothTerm::cube(1, 1.0).unwrap());
        let x = v(&[0.5]);
        let mut table = GradientTable::new(&p, &x, 0).unwrap();
        let next = piag_step(&p, &mut table, 0, &x, 0.1, &[0]).unwrap();
        assert!((next[0] - 0.55).abs() < 1e-15);
    }

    #[test]
    fn solve_isotropic_quadratic() {
        let q = Quadratic::new(DMatrix::identity(2, 2), Vector::zeros(2), 0.0).unwrap();
        let p = Problem::from_quadratics(vec![q], NonsmoothTerm::Zero).unwrap();
        let cfg = SolverConfig::new(0.5, DelaySchedule::none(), v(&[1.0, 1.0])).with_max_iters(30).with_full_log();
        let trace = solve(&p, &cfg).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        assert!(trace.final_residual() < 1e-8);
        assert!(trace.iterations <= 30);
        for r in &trace.records {
            let expect = 0.5 * 0.5f64.powi(2 * r.k as i32) * 2.0;
            assert!((r.objective - expect).abs() <= 1e-15 * (1.0 + expect), "k={}", r.k);
        }
    }

    #[test]
    fn solve_nonconvex_box_reaches_boundary() {
        let p = scalar_problem(-1.0, NonsmoothTerm::cube(1, 1.0).unwrap());
        let cfg = SolverConfig::new(0.05, DelaySchedule::none(), v(&[0.3])).with_full_log();
        let trace = solve(&p, &cfg).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        assert_eq!(trace.final_x[0], 1.0);
        assert_eq!(trace.final_objective(), -0.5);
        let xs = trace.iterates.unwrap();
        assert!(xs.windows(2).all(|w| w[1][0] >= w[0][0]));
    }

    #[test]
    fn stationary_start_terminates_immediately() {
        let p = scalar_problem(-1.0, NonsmoothTerm::cube(1, 1.0).unwrap());
        for kind in [ScheduleKind::None, ScheduleKind::AdversarialMax, ScheduleKind::UniformRandom { seed: 1 }] {
            let cfg = SolverConfig::new(0.05, DelaySchedule::new(kind, 2), v(&[1.0]));
            let trace = solve(&p, &cfg).unwrap();
            assert_eq!(trace.termination, Termination::Converged);
            assert_eq!(trace.iterations, 0);
            assert_eq!(trace.final_residual(), 0.0);
        }
    }

    #[test]
    fn start_outside_domain_rejected() {
        let p = scalar_problem(-1.0, NonsmoothTerm::cube(1, 1.0).unwrap());
        let cfg = SolverConfig::new(0.05, DelaySchedule::none(), v(&[2.0]));
        assert!(matches!(solve(&p, &cfg), Err(PiagError::InvalidArgument(_))));
    }

    #[test]
    fn oversized_step_diverges_without_panicking() {
        let p = scalar_problem(-1.0, NonsmoothTerm::Zero);
        let cfg = SolverConfig::new(10.0, DelaySchedule::none(), v(&[0.1])).with_max_iters(10_000);
        let trace = solve(&p, &cfg).unwrap();
        assert_eq!(trace.termination, Termination::Diverged);
        assert!(trace.divergence.is_some());
        assert!(!trace.warnings.is_empty());
    }

    #[test]
    fn enforce_theory_rejects_large_steps() {
        let p = scalar_problem(1.0, NonsmoothTerm::Zero);
        let mut cfg = SolverConfig::new(0.5, DelaySchedule::none(), v(&[1.0]));
        cfg.enforce_theory = true;
        assert!(solve(&p, &cfg).is_err());
        cfg.c0 = Some(1.0);
        assert!(solve(&p, &cfg).is_err());
        cfg.alpha = TheoryConstants::new(1.0, 0.0, 0, 1.0).unwrap().c8;
        assert!(solve(&p, &cfg).is_ok());
    }

    #[test]
    fn fixed_point_is_preserved() {
        // exact stationary point: A = diag(2, 4), b = (-2, -4), x* = (1, 1)
        let q = Quadratic::new(DMatrix::from_diagonal(&v(&[2.0, 4.0])), v(&[-2.0, -4.0]), 0.0).unwrap();
        let p = Problem::from_quadratics(vec![q], NonsmoothTerm::l1(0.0).unwrap()).unwrap();
        let xstar = v(&[1.0, 1.0]);
        assert_eq!(prox_residual(&p, 0.1, &xstar).unwrap(), 0.0);
        let mut table = GradientTable::new(&p, &xstar, 0).unwrap();
        assert_eq!(piag_step(&p, &mut table, 0, &xstar, 0.1, &[0]).unwrap(), xstar);
    }

    proptest! {
        #[test]
        fn threshold_decreases_in_tau_and_lipschitz(
            big in 0.1..100.0f64, frac in 0.0..1.0f64, tau in 0usize..20, bump in 0.01..10.0f64
        ) {
            let small = frac * big;
            let base = stepsize_threshold(big, small, tau).unwrap();
            prop_assert!(stepsize_threshold(big, small, tau + 1).unwrap() < base);
            prop_assert!(stepsize_threshold(big + bump, small, tau).unwrap() < base);
        }

        #[test]
        fn c8_is_below_both_thresholds(
            big in 0.01..100.0f64, frac in 0.0..1.0f64, tau in 0usize..=10, c0 in 0.05..20.0f64
        ) {
            let c = theorem1_constants(big, frac * big, tau, c0).unwrap();
            prop_assert!(c.c8 <= 1.0 / big);
            prop_assert!(c.c8 <= c.alpha_lemma2);
            prop_assert!(c.contraction_a > 0.0 && c.contraction_a <= 1.0);
            prop_assert!(c.contraction_gap() > 0.0);
        }
    }
}
