//! Quadratic test problems with exact smoothness constants and computable
//! stationary sets.
//!
//! Two families:
//! * quadratic + box: components may be nonconvex, `h` is the indicator of a
//!   box large enough to contain the interesting stationary points;
//! * quadratic + l1: components may be indefinite but their sum is strongly
//!   convex, so there is a unique minimizer.
//!
//! Quadratic objectives with polyhedral `h` satisfy the proximal error bound,
//! which is what makes the rate checks meaningful on these families.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PiagError, Result};
use crate::linalg::{self, random_gaussian_vector, random_orthogonal};
use crate::model::{NonsmoothTerm, Problem, Quadratic, Vector};
use crate::prox::{prox, prox_residual};

/// Largest supported instance sizes.
pub const MAX_DIMENSION: usize = 200;
pub const MAX_COMPONENTS: usize = 100;

/// Lower end of the component spectra in the l1 family.
pub const L1_FAMILY_MIN_EIGENVALUE: f64 = -0.25;

/// Required smallest eigenvalue of the aggregated matrix in the l1 family.
pub const L1_FAMILY_STRONG_CONVEXITY: f64 = 0.1;

const L1_FAMILY_MAX_TRIES: usize = 100;

fn check_size(n: usize, d: usize) -> Result<()> {
    if n == 0 || d == 0 || n > MAX_COMPONENTS || d > MAX_DIMENSION {
        return Err(PiagError::invalid(format!(
            "need 1 <= N <= {MAX_COMPONENTS} and 1 <= d <= {MAX_DIMENSION}, got N = {n}, d = {d}"
        )));
    }
    Ok(())
}

/// `Q diag(eigs) Q'` with exact constants taken from `eigs`.
fn quadratic_with_spectrum(eigs: &[f64], b: Vector, rng: &mut ChaCha8Rng) -> Result<Quadratic> {
    let d = eigs.len();
    let q = random_orthogonal(d, rng);
    let lam = DMatrix::from_diagonal(&Vector::from_column_slice(eigs));
    let a = &q * lam * q.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let lo = eigs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Quadratic::with_constants(a, b, 0.0, lo.abs().max(hi.abs()), (-lo).max(0.0))
}

fn aggregate(quads: &[&Quadratic]) -> (DMatrix<f64>, Vector, f64) {
    let d = quads[0].linear().len();
    let mut a = DMatrix::zeros(d, d);
    let mut b = Vector::zeros(d);
    let mut offset = 0.0;
    for q in quads {
        a += q.matrix();
        b += q.linear();
        offset += q.offset();
    }
    (a, b, offset)
}

/// `N` random quadratics with eigenvalues in `[-negative_curvature, 1]` plus
/// the indicator of `[-B, B]^d`, `B = 10 (1 + |sum b| / lambda_min^+(sum A))`.
pub fn make_quadratic_box(n: usize, d: usize, seed: u64, negative_curvature: f64) -> Result<Problem> {
    check_size(n, d)?;
    if !(negative_curvature >= 0.0) || !negative_curvature.is_finite() {
        return Err(PiagError::invalid("negative curvature must be finite and >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut quads = Vec::with_capacity(n);
    for _ in 0..n {
        let eigs: Vec<f64> = (0..d).map(|_| rng.random_range(-negative_curvature..=1.0)).collect();
        let b = random_gaussian_vector(d, 1.0, &mut rng);
        quads.push(quadratic_with_spectrum(&eigs, b, &mut rng)?);
    }
    let (a, b, offset) = aggregate(&quads.iter().collect::<Vec<_>>());
    let eigs = linalg::symmetric_eigenvalues(&a);
    let min_pos = eigs.iter().copied().find(|e| *e > 1e-12).unwrap_or(1.0);
    let half_width = 10.0 * (1.0 + b.norm() / min_pos);
    let lambda_min = eigs[0];
    let lower = 0.5 * lambda_min.min(0.0) * d as f64 * half_width * half_width - b.lp_norm(1) * half_width + offset;
    let mut problem = Problem::from_quadratics(quads, NonsmoothTerm::cube(d, half_width)?)?;
    problem.f_lower_bound_hint = Some(lower);
    Ok(problem)
}

/// `N` random quadratics, individually possibly indefinite, whose sum has
/// smallest eigenvalue at least 0.1, plus `lambda |x|_1`. Resamples up to 100
/// times.
pub fn make_quadratic_l1(n: usize, d: usize, seed: u64, lambda: f64) -> Result<Problem> {
    check_size(n, d)?;
    let h = NonsmoothTerm::l1(lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..L1_FAMILY_MAX_TRIES {
        let mut quads = Vec::with_capacity(n);
        for _ in 0..n {
            let eigs: Vec<f64> = (0..d).map(|_| rng.random_range(L1_FAMILY_MIN_EIGENVALUE..=1.0)).collect();
            let b = random_gaussian_vector(d, 1.0, &mut rng);
            quads.push(quadratic_with_spectrum(&eigs, b, &mut rng)?);
        }
        let (a, b, offset) = aggregate(&quads.iter().collect::<Vec<_>>());
        let eigs = linalg::symmetric_eigenvalues(&a);
        if eigs[0] >= L1_FAMILY_STRONG_CONVEXITY {
            // min of the smooth part; h >= 0
            let lower = offset - 0.5 * b.dot(&a.lu().solve(&b).unwrap_or_else(|| b.clone()));
            let mut problem = Problem::from_quadratics(quads, h)?;
            problem.f_lower_bound_hint = Some(lower);
            return Ok(problem);
        }
    }
    Err(PiagError::Generation(format!(
        "no strongly convex sum after {L1_FAMILY_MAX_TRIES} draws (N = {n}, d = {d}, seed = {seed})"
    )))
}

/// `-x^2/2` on `[-1, 1]`; stationary at `-1`, `0` and `1`.
pub fn scalar_box_example() -> Problem {
    let q = Quadratic::new(DMatrix::from_element(1, 1, -1.0), Vector::zeros(1), 0.0).expect("valid quadratic");
    Problem::from_quadratics(vec![q], NonsmoothTerm::cube(1, 1.0).expect("valid box")).expect("valid problem")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMethod {
    Analytic,
    KktEnumeration,
    FixedPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub stationary_points: Vec<Vector>,
    pub f_values: Vec<f64>,
    pub method: ReferenceMethod,
}

impl ReferenceSolution {
    /// Smallest objective value over the set.
    pub fn best_value(&self) -> f64 {
        self.f_values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Minimum distance between stationary points with different objective
    /// values; `None` when all values coincide.
    pub fn value_separation(&self) -> Option<f64> {
        let pts = &self.stationary_points;
        let mut best: Option<f64> = None;
        for i in 0..pts.len() {
            for j in 0..i {
                let (fi, fj) = (self.f_values[i], self.f_values[j]);
                if (fi - fj).abs() > 1e-9 * (1.0 + fi.abs().max(fj.abs())) {
                    let dist = (&pts[i] - &pts[j]).norm();
                    best = Some(best.map_or(dist, |b: f64| b.min(dist)));
                }
            }
        }
        best
    }
}

/// Dimension limit for stationary-set enumeration.
pub const ENUMERATION_MAX_DIMENSION: usize = 3;

/// Stationary set of a quadratic problem.
///
/// For `d <= 3` the set is enumerated over active-set patterns (each
/// coordinate at a bound, at zero, or free with a fixed sign), solving the
/// reduced linear system and checking the subgradient conditions. For larger
/// strongly convex problems the unique point comes from the normal equations
/// (`h = 0`) or a forward-backward fixed-point iteration.
pub fn reference_solution(problem: &Problem) -> Result<ReferenceSolution> {
    let quads = problem
        .quadratics()
        .ok_or_else(|| PiagError::NotAvailable("reference solutions need quadratic components".into()))?;
    let (a, b, _) = aggregate(&quads);
    let d = problem.dimension();
    let eigs = linalg::symmetric_eigenvalues(&a);
    let strongly_convex = eigs[0] > 1e-10 * (1.0 + eigs[d - 1].abs());

    let points = if d <= ENUMERATION_MAX_DIMENSION {
        (enumerate_kkt(problem.nonsmooth(), &a, &b)?, ReferenceMethod::KktEnumeration)
    } else if strongly_convex && problem.nonsmooth().fixed_dimension().is_none() && problem.nonsmooth().lambda() == 0.0 {
        let x = a.clone().lu().solve(&(-&b)).ok_or_else(|| PiagError::NotAvailable("singular system".into()))?;
        (vec![x], ReferenceMethod::Analytic)
    } else if strongly_convex {
        (vec![fixed_point(problem.nonsmooth(), &a, &b, eigs[d - 1])?], ReferenceMethod::FixedPoint)
    } else {
        return Err(PiagError::NotAvailable(format!(
            "no enumeration for d = {d} without a strongly convex sum"
        )));
    };
    let (stationary_points, method) = points;
    if stationary_points.is_empty() {
        return Err(PiagError::NotAvailable("enumeration found no stationary point".into()));
    }
    let (big, _) = problem.smoothness_totals();
    let mut f_values = Vec::with_capacity(stationary_points.len());
    for x in &stationary_points {
        let r = prox_residual(problem, 1.0 / big, x)?;
        if r > 1e-10 * (1.0 + x.norm()) {
            return Err(PiagError::NotAvailable(format!("reference point failed residual check ({r:e})")));
        }
        f_values.push(problem.eval_objective(x)?);
    }
    Ok(ReferenceSolution { stationary_points, f_values, method })
}

/// `dist(x, X)` for the enumerated set.
pub fn dist_to_stationary(x: &Vector, reference: &ReferenceSolution) -> Result<f64> {
    if reference.stationary_points.is_empty() {
        return Err(PiagError::invalid("reference set is empty"));
    }
    let mut best = f64::INFINITY;
    for p in &reference.stationary_points {
        if p.len() != x.len() {
            return Err(PiagError::invalid("point and reference differ in dimension"));
        }
        best = best.min((p - x).norm());
    }
    Ok(best)
}

/// Fits the error-bound constant: the largest observed
/// `dist(x, X) / |prox_{h/L}(x - grad f(x)/L) - x|` over random points within
/// `radius` of the stationary set (clamped into `dom h`).
pub fn fit_error_bound_constant(
    problem: &Problem,
    reference: &ReferenceSolution,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let (big, _) = problem.smoothness_totals();
    let d = problem.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let idx = rng.random_range(0..reference.stationary_points.len());
        let mut dir = random_gaussian_vector(d, 1.0, &mut rng);
        let norm = dir.norm();
        if norm == 0.0 {
            continue;
        }
        dir *= radius * rng.random::<f64>() / norm;
        let raw = &reference.stationary_points[idx] + dir;
        let x = Vector::from_fn(d, |j, _| {
            let (lo, hi) = problem.nonsmooth().bounds(j);
            raw[j].clamp(lo, hi)
        });
        let r = prox_residual(problem, 1.0 / big, &x)?;
        if r > 1e-14 {
            best = best.max(dist_to_stationary(&x, reference)? / r);
        }
    }
    if best > 0.0 {
        Ok(best)
    } else {
        Err(PiagError::NotAvailable("no sample with a positive residual".into()))
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum CoordState {
    Lower,
    Upper,
    Zero,
    Free(f64), // sign of the l1 subgradient, 0 without l1
}

fn coordinate_states(lo: f64, hi: f64, lambda: f64) -> Vec<CoordState> {
    let mut s = Vec::new();
    if lo.is_finite() {
        s.push(CoordState::Lower);
    }
    if hi.is_finite() && hi > lo {
        s.push(CoordState::Upper);
    }
    if lambda > 0.0 {
        if lo < 0.0 && hi > 0.0 {
            s.push(CoordState::Zero);
        }
        s.push(CoordState::Free(1.0));
        s.push(CoordState::Free(-1.0));
    } else if hi > lo {
        s.push(CoordState::Free(0.0));
    }
    s
}

/// Subdifferential interval of `lambda |t| + indicator[lo, hi]` at `t`.
fn subdifferential(t: f64, lo: f64, hi: f64, lambda: f64) -> (f64, f64) {
    let left = if t <= lo { f64::NEG_INFINITY } else if t > 0.0 { lambda } else { -lambda };
    let right = if t >= hi { f64::INFINITY } else if t < 0.0 { -lambda } else { lambda };
    (left, right)
}

fn enumerate_kkt(h: &NonsmoothTerm, a: &DMatrix<f64>, b: &Vector) -> Result<Vec<Vector>> {
    let d = b.len();
    let lambda = h.lambda();
    let states: Vec<Vec<CoordState>> = (0..d)
        .map(|j| {
            let (lo, hi) = h.bounds(j);
            coordinate_states(lo, hi, lambda)
        })
        .collect();
    let scale = 1.0 + a.amax() + b.amax();
    let mut found: Vec<Vector> = Vec::new();
    let mut pattern = vec![0usize; d];
    loop {
        let chosen: Vec<CoordState> = (0..d).map(|j| states[j][pattern[j]]).collect();
        if let Some(x) = solve_pattern(h, a, b, &chosen, lambda)? {
            let g = a * &x + b;
            let feasible = (0..d).all(|j| {
                let (lo, hi) = h.bounds(j);
                let tol = 1e-9 * (1.0 + x[j].abs());
                if x[j] < lo - tol || x[j] > hi + tol {
                    return false;
                }
                let (left, right) = subdifferential(x[j], lo, hi, lambda);
                let gt = 1e-9 * scale * (1.0 + x.amax());
                -g[j] >= left - gt && -g[j] <= right + gt
            }) && chosen.iter().zip(x.iter()).all(|(s, v)| match s {
                CoordState::Free(sign) if *sign != 0.0 => v * sign > 0.0,
                _ => true,
            });
            if feasible {
                let x = Vector::from_fn(d, |j, _| {
                    let (lo, hi) = h.bounds(j);
                    x[j].clamp(lo, hi)
                });
                if !found.iter().any(|p| (p - &x).norm() <= 1e-9 * (1.0 + x.norm())) {
                    found.push(x);
                }
            }
        }
        // next pattern
        let mut j = 0;
        loop {
            if j == d {
                return Ok(found);
            }
            pattern[j] += 1;
            if pattern[j] < states[j].len() {
                break;
            }
            pattern[j] = 0;
            j += 1;
        }
    }
}

fn solve_pattern(
    h: &NonsmoothTerm,
    a: &DMatrix<f64>,
    b: &Vector,
    chosen: &[CoordState],
    lambda: f64,
) -> Result<Option<Vector>> {
    let d = b.len();
    let mut x = Vector::zeros(d);
    let mut free = Vec::new();
    for (j, s) in chosen.iter().enumerate() {
        let (lo, hi) = h.bounds(j);
        match s {
            CoordState::Lower => x[j] = lo,
            CoordState::Upper => x[j] = hi,
            CoordState::Zero => x[j] = 0.0,
            CoordState::Free(_) => free.push(j),
        }
    }
    if free.is_empty() {
        return Ok(Some(x));
    }
    let m = free.len();
    let sub = DMatrix::from_fn(m, m, |r, c| a[(free[r], free[c])]);
    let rhs = Vector::from_fn(m, |r, _| {
        let j = free[r];
        let sign = match chosen[j] {
            CoordState::Free(s) => s,
            _ => 0.0,
        };
        let fixed: f64 = (0..d).filter(|c| !free.contains(c)).map(|c| a[(j, c)] * x[c]).sum();
        -b[j] - lambda * sign - fixed
    });
    let eig = SymmetricEigen::new(sub.clone());
    let max_abs = eig.eigenvalues.amax();
    let min_abs = eig.eigenvalues.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
    if min_abs <= 1e-12 * (1.0 + max_abs) {
        return Err(PiagError::NotAvailable(
            "singular reduced system: the stationary set may be a continuum".into(),
        ));
    }
    let sol = sub.lu().solve(&rhs).ok_or_else(|| PiagError::NotAvailable("singular reduced system".into()))?;
    for (r, j) in free.iter().enumerate() {
        x[*j] = sol[r];
    }
    Ok(Some(x))
}

/// Forward-backward iteration on the aggregated quadratic with step `1/lambda_max`.
fn fixed_point(h: &NonsmoothTerm, a: &DMatrix<f64>, b: &Vector, lambda_max: f64) -> Result<Vector> {
    let step = 1.0 / lambda_max;
    let mut x = Vector::zeros(b.len());
    for _ in 0..2_000_000 {
        let g = a * &x + b;
        let next = prox(h, step, &(&x - g * step))?;
        let moved = (&next - &x).norm();
        x = next;
        if moved <= 1e-15 * (1.0 + x.norm()) {
            return Ok(x);
        }
    }
    Err(PiagError::NotAvailable("fixed-point iteration did not settle".into()))
}
