//! Numerical checks of the convergence theory along solver traces, the two
//! scalar-recursion lemmas as standalone oracles, and R-linear rate fitting.

use serde::{Deserialize, Serialize};

use crate::error::{PiagError, Result};
use crate::linalg::squared_distance;
use crate::model::Vector;
use crate::solver::{SmoothnessBounds, TheoryConstants, Trace, TraceRecord};

/// Relative tolerance for the trace inequalities.
pub const INEQUALITY_RTOL: f64 = 1e-9;

/// Slack added to `max(p, q)` by [`lemma8_oracle`].
pub const LEMMA8_RATE_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    /// Most negative slack (`rhs - lhs`) seen; positive when everything holds strictly.
    pub worst_margin: f64,
    /// Relative tolerance; a slack counts as a violation below `-tolerance * scale`.
    pub tolerance: f64,
    pub first_violation: Option<usize>,
}

impl InequalityReport {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            checked: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            tolerance,
            first_violation: None,
        }
    }

    fn observe(&mut self, k: usize, slack: f64, scale: f64) {
        self.checked += 1;
        if slack.is_nan() || slack < self.worst_margin {
            self.worst_margin = slack;
        }
        if slack.is_nan() || slack < -self.tolerance * scale {
            self.violations += 1;
            self.first_violation.get_or_insert(k);
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Consecutive objective values and iterates `x_0, ..., x_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateLog {
    pub objective: Vec<f64>,
    pub iterates: Vec<Vector>,
}

impl IterateLog {
    pub fn new(objective: Vec<f64>, iterates: Vec<Vector>) -> Result<Self> {
        if objective.len() != iterates.len() {
            return Err(PiagError::invalid(format!(
                "iterate log has {} objective values but {} iterates",
                objective.len(),
                iterates.len()
            )));
        }
        if objective.is_empty() {
            return Err(PiagError::invalid("iterate log is empty"));
        }
        Ok(Self { objective, iterates })
    }

    /// Requires a trace recorded with the full iterate log.
    pub fn from_trace(trace: &Trace) -> Result<Self> {
        let iterates = trace
            .iterates
            .as_ref()
            .ok_or_else(|| PiagError::invalid("trace lacks the full iterate log"))?;
        Self::from_records(&trace.records, iterates.clone())
    }

    pub fn from_records(records: &[TraceRecord], iterates: Vec<Vector>) -> Result<Self> {
        if records.iter().enumerate().any(|(i, r)| r.k != i) {
            return Err(PiagError::invalid("trace records are not consecutive from k = 0"));
        }
        Self::new(records.iter().map(|r| r.objective).collect(), iterates)
    }

    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    /// `|x_{k+1} - x_k|^2` for `k = 0..K-1`.
    pub fn step_norms_sq(&self) -> Vec<f64> {
        self.iterates.windows(2).map(|w| squared_distance(&w[1], &w[0])).collect()
    }
}

/// `Delta_k` for each `k`, with steps before `x_0` counted as zero.
fn delta_sequence(steps_sq: &[f64], tau: usize) -> Vec<f64> {
    (0..=steps_sq.len())
        .map(|k| steps_sq[k.saturating_sub(tau)..k].iter().sum())
        .collect()
}

/// `F(x_{k+1}) <= F(x_k) + (Lbar - 1/alpha)|x_{k+1}-x_k|^2 + (lbar + Lbar) Delta_k`
/// for every consecutive pair in the log.
pub fn check_sufficient_descent(log: &IterateLog, bounds: &SmoothnessBounds, alpha: f64) -> Result<InequalityReport> {
    check_alpha(alpha)?;
    let steps = log.step_norms_sq();
    let deltas = delta_sequence(&steps, bounds.tau);
    let (lb, sb) = (bounds.l_big_bar(), bounds.l_small_bar());
    let mut report = InequalityReport::new("sufficient_descent", INEQUALITY_RTOL);
    for k in 0..steps.len() {
        let (fk, fnext) = (log.objective[k], log.objective[k + 1]);
        let rhs = fk + (lb - 1.0 / alpha) * steps[k] + (sb + lb) * deltas[k];
        report.observe(k, rhs - fnext, 1.0 + fk.abs());
    }
    Ok(report)
}

/// `sum_{k<=K} |x_{k+1}-x_k|^2 <= (F(x_0) - F(x_{K+1})) / (1/alpha - tau(lbar+Lbar) - Lbar)`
/// for every prefix `K`; with `f_lower`, also the total against `F(x_0) - f_lower`.
pub fn check_summability(
    log: &IterateLog,
    bounds: &SmoothnessBounds,
    alpha: f64,
    f_lower: Option<f64>,
) -> Result<InequalityReport> {
    check_alpha(alpha)?;
    let (lb, sb) = (bounds.l_big_bar(), bounds.l_small_bar());
    let denom = 1.0 / alpha - bounds.tau as f64 * (sb + lb) - lb;
    if !(denom > 0.0) {
        return Err(PiagError::invalid(format!(
            "stepsize {alpha} is not below the descent threshold {}",
            bounds.alpha_lemma2()
        )));
    }
    let steps = log.step_norms_sq();
    let f0 = log.objective[0];
    let mut report = InequalityReport::new("summability", INEQUALITY_RTOL);
    let mut lhs = 0.0;
    for (kk, s) in steps.iter().enumerate() {
        lhs += s;
        let fend = log.objective[kk + 1];
        let rhs = (f0 - fend) / denom;
        report.observe(kk, rhs - lhs, (1.0 + f0.abs() + fend.abs()) / denom);
    }
    if let Some(lower) = f_lower {
        let k = steps.len();
        report.observe(k, (f0 - lower) / denom - lhs, (1.0 + f0.abs() + lower.abs()) / denom);
    }
    Ok(report)
}

/// Every recorded staleness is at most `tau`.
pub fn check_bounded_delay(records: &[TraceRecord], tau: usize) -> InequalityReport {
    let mut report = InequalityReport::new("bounded_delay", 0.0);
    for r in records {
        report.observe(r.k, tau as f64 - r.max_staleness as f64, 1.0);
    }
    report
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(PiagError::invalid(format!("stepsize must be positive, got {alpha}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma7Outcome {
    /// `c/(1-a) * (1 - a^(k0+1)) / a^k0 <= b`.
    pub condition_holds: bool,
    /// `V_k <= a^k V_0 + 1e-12` for every `k`.
    pub bound_holds: bool,
    /// Smallest `a^k V_0 - V_k` over the sequence.
    pub worst_slack: f64,
}

/// Left side of the condition of the `V_{k+1} <= a V_k - b w_k + c sum w_j` lemma.
pub fn lemma7_condition_lhs(a: f64, c: f64, k0: usize) -> f64 {
    c / (1.0 - a) * (1.0 - a.powi(k0 as i32 + 1)) / a.powi(k0 as i32)
}

/// Evaluates the recursion lemma on a concrete pair of sequences.
///
/// Whether `V` really satisfies `V_{k+1} <= a V_k - b w_k + c sum_{j=k-k0}^k w_j`
/// is up to the caller (see [`lemma7_first_violation`]).
pub fn lemma7_oracle(a: f64, b: f64, c: f64, k0: usize, v: &[f64], omega: &[f64]) -> Result<Lemma7Outcome> {
    if !(a > 0.0 && a < 1.0) {
        return Err(PiagError::invalid(format!("a must lie in (0, 1), got {a}")));
    }
    if !(b >= 0.0 && c >= 0.0) || k0 == 0 {
        return Err(PiagError::invalid("need b >= 0, c >= 0 and k0 >= 1"));
    }
    if v.iter().chain(omega).any(|x| !(*x >= 0.0)) {
        return Err(PiagError::invalid("V and omega must be nonnegative"));
    }
    let condition_holds = lemma7_condition_lhs(a, c, k0) <= b;
    let v0 = v.first().copied().unwrap_or(0.0);
    let mut worst_slack = f64::INFINITY;
    let mut envelope = v0;
    for &vk in v {
        worst_slack = worst_slack.min(envelope - vk);
        envelope *= a;
    }
    Ok(Lemma7Outcome { condition_holds, bound_holds: worst_slack >= -1e-12, worst_slack })
}

/// First `k` with `V_{k+1} > a V_k - b w_k + c sum_{j=k-k0}^k w_j` (relative 1e-12).
pub fn lemma7_first_violation(a: f64, b: f64, c: f64, k0: usize, v: &[f64], omega: &[f64]) -> Option<usize> {
    (0..v.len().saturating_sub(1).min(omega.len())).find(|&k| {
        let window: f64 = omega[k.saturating_sub(k0)..=k].iter().sum();
        let rhs = a * v[k] - b * omega[k] + c * window;
        v[k + 1] > rhs + 1e-12 * (1.0 + rhs.abs())
    })
}

/// `P(x) = x^tau - (c/tau)(x^(tau-1) + ... + 1)`.
pub fn lemma8_polynomial(x: f64, c: f64, tau: usize) -> f64 {
    let mut tail = 0.0;
    let mut pow = 1.0;
    for _ in 0..tau {
        tail += pow;
        pow *= x;
    }
    pow - c / tau as f64 * tail
}

/// The root of [`lemma8_polynomial`] in `[c, 1)`, by bisection.
pub fn lemma8_root(c: f64, tau: usize) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) || tau == 0 {
        return Err(PiagError::invalid(format!("need 0 < c < 1 and tau >= 1, got c = {c}, tau = {tau}")));
    }
    let (mut lo, mut hi) = (c, 1.0);
    if lemma8_polynomial(lo, c, tau) >= 0.0 {
        return Ok(lo);
    }
    // P(lo) < 0 < P(hi) = 1 - c
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lemma8_polynomial(mid, c, tau) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma8Outcome {
    pub holds: bool,
    pub root: f64,
    /// `max(p, q) + slack`.
    pub envelope_rate: f64,
    /// `ln M`, fitted on the first half of the sequence.
    pub log_envelope_constant: f64,
    /// Largest `ln a_k - k ln r - ln M` over the second half; `<= 0` when the bound holds.
    pub worst_log_excess: f64,
}

/// Checks the R-linear conclusion of the lemma on
/// `a_k <= b0 q^k + (c/tau)(a_{k-1} + ... + a_{k-tau})`, `k >= tau`.
///
/// With `r = max(p, q) + 1e-3` and `M = max_{k < n/2} a_k / r^k`, the sequence
/// passes when `a_k <= M r^k` on the second half. The hypothesis is verified
/// first; a violation is reported with its index.
pub fn lemma8_oracle(b0: f64, q: f64, c: f64, tau: usize, a_seq: &[f64]) -> Result<Lemma8Outcome> {
    if !(b0 > 0.0) || !(q > 0.0 && q < 1.0) {
        return Err(PiagError::invalid("need b0 > 0 and 0 < q < 1"));
    }
    let p = lemma8_root(c, tau)?;
    if a_seq.len() < 2 * tau + 2 || a_seq.len() < 10 {
        return Err(PiagError::invalid(format!("sequence too short: {} terms", a_seq.len())));
    }
    if let Some(k) = a_seq.iter().position(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(PiagError::invalid(format!("a_{k} is not a positive finite number")));
    }
    let w = c / tau as f64;
    for k in tau..a_seq.len() {
        let window: f64 = a_seq[k - tau..k].iter().sum();
        let rhs = b0 * q.powi(k as i32) + w * window;
        if a_seq[k] > rhs * (1.0 + 1e-12) {
            return Err(PiagError::invalid(format!("recursion hypothesis fails at k = {k}")));
        }
    }
    let r = p.max(q) + LEMMA8_RATE_SLACK;
    let ln_r = r.ln();
    let half = a_seq.len() / 2;
    let scaled = |k: usize| a_seq[k].ln() - k as f64 * ln_r;
    let ln_m = (0..half).map(scaled).fold(f64::NEG_INFINITY, f64::max);
    let worst = (half..a_seq.len()).map(|k| scaled(k) - ln_m).fold(f64::NEG_INFINITY, f64::max);
    Ok(Lemma8Outcome {
        holds: worst <= 1e-9,
        root: p,
        envelope_rate: r,
        log_envelope_constant: ln_m,
        worst_log_excess: worst,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// `exp(slope)` of the log-linear fit.
    pub rate: f64,
    pub log_linear_r2: f64,
    pub transient_skip: usize,
    pub points: usize,
}

/// Default transient skip `5 (tau + 1)`.
pub fn default_transient_skip(tau: usize) -> usize {
    5 * (tau + 1)
}

/// Limit estimate when none is known: the last value minus a few ulps.
pub fn default_limit(values: &[f64]) -> Option<f64> {
    let last = *values.last()?;
    Some(last - 4.0 * f64::EPSILON * last.abs().max(1.0))
}

/// Least-squares fit of `ln(values_k - limit)` against `k`, skipping the
/// first `skip` entries.
pub fn fit_rlinear_rate(values: &[f64], limit: f64, skip: usize) -> Result<RateFit> {
    let ks: Vec<f64> = (0..values.len()).map(|k| k as f64).collect();
    fit_rlinear_rate_at(&ks, values, limit, skip)
}

/// [`fit_rlinear_rate`] with explicit iteration indices (for sparse traces).
pub fn fit_rlinear_rate_at(ks: &[f64], values: &[f64], limit: f64, skip: usize) -> Result<RateFit> {
    if ks.len() != values.len() {
        return Err(PiagError::invalid("indices and values differ in length"));
    }
    let n = values.len().saturating_sub(skip);
    if n < 10 {
        return Err(PiagError::invalid(format!("need at least 10 points after skip, have {n}")));
    }
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for (k, v) in ks[skip..].iter().zip(&values[skip..]) {
        let gap = v - limit;
        if !(gap > 0.0) || !gap.is_finite() {
            return Err(PiagError::invalid(format!("value at k = {k} is not above the limit {limit}")));
        }
        xs.push(*k);
        ys.push(gap.ln());
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(PiagError::invalid("indices are all equal"));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(RateFit { rate: slope.exp(), log_linear_r2: r2, transient_skip: skip, points: n })
}

/// Longest prefix whose gaps `values[k] - limit` stay above
/// `rel_floor * (1 + |limit|)`; the part that rounding has not yet swamped.
pub fn significant_prefix(values: &[f64], limit: f64, rel_floor: f64) -> &[f64] {
    let floor = rel_floor * (1.0 + limit.abs());
    let end = values.iter().position(|v| !(v - limit > floor)).unwrap_or(values.len());
    &values[..end]
}

/// `C2 / (1/alpha - C1) < 1/tau`, the coefficient condition that turns the
/// linear rate of `F(x_k)` into one for the iterates.
pub fn check_theorem2_coefficient(constants: &TheoryConstants, alpha: f64) -> Result<bool> {
    check_alpha(alpha)?;
    let tau = constants.bounds.tau;
    if tau == 0 {
        return Err(PiagError::invalid("coefficient condition needs tau >= 1"));
    }
    let gap = 1.0 / alpha - constants.c1;
    if !(gap > 0.0) {
        return Err(PiagError::invalid(format!("1/alpha = {} does not exceed C1 = {}", 1.0 / alpha, constants.c1)));
    }
    Ok(constants.c2 / gap < 1.0 / tau as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn log_of(obj: &[f64], xs: &[f64]) -> IterateLog {
        IterateLog::new(obj.to_vec(), xs.iter().map(|x| Vector::from_element(1, *x)).collect()).unwrap()
    }

    #[test]
    fn significant_prefix_stops_at_floor() {
        let vals = [1.0, 0.1, 1e-14, 0.5];
        assert_eq!(significant_prefix(&vals, 0.0, 1e-13), &vals[..2]);
        assert_eq!(significant_prefix(&vals[..2], 0.0, 1e-13).len(), 2);
        assert!(significant_prefix(&vals, 2.0, 1e-13).is_empty());
    }

    #[test]
    fn stationary_log_has_zero_slack() {
        let log = log_of(&[2.0, 2.0, 2.0], &[1.0, 1.0, 1.0]);
        let b = SmoothnessBounds::new(1.0, 0.0, 2).unwrap();
        let r = check_sufficient_descent(&log, &b, 0.1).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.worst_margin, 0.0);
        let s = check_summability(&log, &b, 0.1, None).unwrap();
        assert_eq!(s.violations, 0);
        assert_eq!(s.worst_margin, 0.0);
    }

    #[test]
    fn summability_single_step() {
        // f = x^2/2, alpha = 0.5, x0 = 1 -> x1 = 0.5
        let log = log_of(&[0.5, 0.125], &[1.0, 0.5]);
        let b = SmoothnessBounds::new(1.0, 0.0, 0).unwrap();
        let r = check_summability(&log, &b, 0.5, Some(0.0)).unwrap();
        assert_eq!(r.violations, 0);
        // rhs = 0.375 / 1.5 = 0.25 = lhs
        assert!(r.worst_margin.abs() < 1e-15);
        assert!(check_summability(&log, &b, 2.0, None).is_err());
    }

    #[test]
    fn corrupted_objective_is_flagged() {
        let log = log_of(&[0.5, 0.6], &[1.0, 0.5]);
        let b = SmoothnessBounds::new(1.0, 0.0, 0).unwrap();
        let r = check_sufficient_descent(&log, &b, 0.5).unwrap();
        assert_eq!(r.violations, 1);
        assert_eq!(r.first_violation, Some(0));
    }

    #[test]
    fn delta_sequence_pads_with_zero() {
        assert_eq!(delta_sequence(&[1.0, 2.0, 4.0], 2), vec![0.0, 1.0, 3.0, 6.0]);
        assert_eq!(delta_sequence(&[1.0, 2.0], 0), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn lemma7_examples() {
        let v: Vec<f64> = (0..20).map(|k| 0.5f64.powi(k)).collect();
        let w = vec![0.0; 20];
        let out = lemma7_oracle(0.5, 0.0, 0.0, 1, &v, &w).unwrap();
        assert!(out.condition_holds && out.bound_holds);

        assert!((lemma7_condition_lhs(0.5, 0.1, 1) - 0.3).abs() < 1e-15);
        assert!(lemma7_oracle(0.5, 1.0, 0.1, 1, &v, &w).unwrap().condition_holds);
        assert!(!lemma7_oracle(0.9, 0.0, 1.0, 2, &v, &w).unwrap().condition_holds);
        assert!(lemma7_oracle(0.5, 1.0, 0.1, 1, &[-1.0], &[]).is_err());
        assert!(lemma7_oracle(1.0, 1.0, 0.1, 1, &v, &w).is_err());
    }

    #[test]
    fn lemma8_root_examples() {
        assert!((lemma8_root(0.3, 1).unwrap() - 0.3).abs() < 1e-12);
        let quad = (0.25 + (0.0625f64 + 1.0).sqrt()) / 2.0;
        assert!((lemma8_root(0.5, 2).unwrap() - quad).abs() < 1e-12);
        assert!(lemma8_root(1.0, 2).is_err());
        assert!(lemma8_root(0.5, 0).is_err());
    }

    #[test]
    fn lemma8_geometric_sequence() {
        let a: Vec<f64> = (0..200).map(|k| 2.0 * 0.7f64.powi(k)).collect();
        let out = lemma8_oracle(2.0, 0.7, 0.4, 3, &a).unwrap();
        assert!(out.holds);
    }

    #[test]
    fn lemma8_saturated_recursion() {
        let (b0, q, c, tau) = (1.0, 0.5f64, 0.5, 2usize);
        let mut a = vec![1.0, 1.0];
        for k in 2..200 {
            let next = b0 * q.powi(k as i32) + c / tau as f64 * (a[k - 1] + a[k - 2]);
            a.push(next);
        }
        let out = lemma8_oracle(b0, q, c, tau, &a).unwrap();
        assert!(out.holds);
        let tail = a[199] / a[198];
        assert!(tail <= 0.640388 + 1e-3, "{tail}");
    }

    #[test]
    fn lemma8_reports_bad_index() {
        let mut a: Vec<f64> = (0..50).map(|k| 0.5f64.powi(k)).collect();
        a[30] = 10.0;
        let err = lemma8_oracle(1.0, 0.5, 0.2, 2, &a).unwrap_err();
        assert!(err.to_string().contains("k = 30"), "{err}");
    }

    #[test]
    fn rate_fit_exact_geometric() {
        let vals: Vec<f64> = (0..40).map(|k| 0.5f64.powi(k)).collect();
        let fit = fit_rlinear_rate(&vals, 0.0, 0).unwrap();
        assert!((fit.rate - 0.5).abs() < 1e-12);
        assert!((fit.log_linear_r2 - 1.0).abs() < 1e-12);

        let vals: Vec<f64> = (0..60).map(|k| 3.0 * 0.8f64.powi(k) + 1.0).collect();
        let fit = fit_rlinear_rate(&vals, 1.0, 0).unwrap();
        assert!((fit.rate - 0.8).abs() < 1e-10);
        assert!((fit.log_linear_r2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rate_fit_errors() {
        let vals: Vec<f64> = (0..40).map(|k| 0.5f64.powi(k)).collect();
        assert!(fit_rlinear_rate(&vals, 0.1, 0).is_err());
        assert!(fit_rlinear_rate(&vals, 0.0, 35).is_err());
    }

    #[test]
    fn theorem2_coefficient_examples() {
        let c = TheoryConstants::new(1.0, 0.0, 1, 1.0).unwrap();
        // C2 / (22 - 1) = 1/21 < 1
        assert!(check_theorem2_coefficient(&c, c.c8).unwrap());
        let near = 1.0 / c.c1 * (1.0 - 1e-12);
        assert!(!check_theorem2_coefficient(&c, near).unwrap());
        assert!(check_theorem2_coefficient(&c, 1.0 / c.c1).is_err());
        let c0 = TheoryConstants::new(1.0, 0.0, 0, 1.0).unwrap();
        assert!(check_theorem2_coefficient(&c0, c0.c8).is_err());
    }

    proptest! {
        #[test]
        fn rate_fit_recovers_geometric_ratio(r in 0.05..0.99f64, scale in 1e-3..1e3f64) {
            let vals: Vec<f64> = (0..30).map(|k| scale * r.powi(k)).collect();
            let fit = fit_rlinear_rate(&vals, 0.0, 0).unwrap();
            prop_assert!((fit.rate - r).abs() < 1e-10);
            prop_assert!((fit.log_linear_r2 - 1.0).abs() < 1e-10);
        }

        #[test]
        fn lemma8_root_is_a_root(c in 0.001..0.999f64, tau in 1usize..=20) {
            let p = lemma8_root(c, tau).unwrap();
            prop_assert!(p >= c && p < 1.0);
            prop_assert!(lemma8_polynomial(p, c, tau).abs() <= 1e-10);
        }

        #[test]
        fn lemma8_root_nondecreasing_in_c(c in 0.001..0.99f64, dc in 0.0..0.009f64, tau in 1usize..=20) {
            prop_assert!(lemma8_root(c + dc, tau).unwrap() >= lemma8_root(c, tau).unwrap() - 1e-12);
        }
    }
}
