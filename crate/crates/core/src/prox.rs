//! Closed-form proximal operators and the prox-residual stationarity measure.

use crate::error::{PiagError, Result};
use crate::model::{NonsmoothTerm, Problem, Vector};

/// `prox_{scale * term}(anchor)`.
#[derive(Debug, Clone, Copy)]
pub struct ProxQuery<'a> {
    pub term: &'a NonsmoothTerm,
    pub scale: f64,
    pub anchor: &'a Vector,
}

impl ProxQuery<'_> {
    pub fn evaluate(&self) -> Result<Vector> {
        prox(self.term, self.scale, self.anchor)
    }
}

/// Soft-threshold; `|y| <= t` maps to zero.
#[inline]
pub fn soft_threshold(y: f64, t: f64) -> f64 {
    if y > t {
        y - t
    } else if y < -t {
        y + t
    } else {
        0.0
    }
}

/// The unique minimizer of `h(x) + |x - anchor|^2 / (2 scale)`.
pub fn prox(term: &NonsmoothTerm, scale: f64, anchor: &Vector) -> Result<Vector> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(PiagError::invalid(format!("prox scale must be positive, got {scale}")));
    }
    if let Some(d) = term.fixed_dimension() {
        if d != anchor.len() {
            return Err(PiagError::invalid(format!(
                "prox anchor has dimension {}, term has {d}",
                anchor.len()
            )));
        }
    }
    Ok(match term {
        NonsmoothTerm::Zero => anchor.clone(),
        NonsmoothTerm::L1 { lambda } => {
            let t = scale * lambda;
            anchor.map(|y| soft_threshold(y, t))
        }
        NonsmoothTerm::Box { lo, hi } => {
            Vector::from_fn(anchor.len(), |j, _| anchor[j].clamp(lo[j], hi[j]))
        }
        NonsmoothTerm::BoxPlusL1 { lo, hi, lambda } => {
            let t = scale * lambda;
            Vector::from_fn(anchor.len(), |j, _| soft_threshold(anchor[j], t).clamp(lo[j], hi[j]))
        }
    })
}

/// `|prox_{scale h}(x - scale grad f(x)) - x|`, evaluated with the exact full
/// gradient. Vanishes exactly at stationary points of `F`.
pub fn prox_residual(problem: &Problem, scale: f64, x: &Vector) -> Result<f64> {
    let g = problem.full_gradient(x)?;
    residual_with_gradient(problem, scale, x, &g)
}

pub(crate) fn residual_with_gradient(problem: &Problem, scale: f64, x: &Vector, g: &Vector) -> Result<f64> {
    let y = x - g * scale;
    let z = prox(problem.nonsmooth(), scale, &y)?;
    Ok((z - x).norm())
}

/// Checks that `t -> |prox_{t h}(x - t grad f(x)) - x| / t` is nonincreasing over
/// an ascending grid of positive scales, up to an absolute tolerance of `1e-10`.
pub fn check_prox_scaling_monotonicity(problem: &Problem, x: &Vector, t_grid: &[f64]) -> Result<bool> {
    if t_grid.is_empty() {
        return Err(PiagError::invalid("scale grid is empty"));
    }
    if t_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(PiagError::invalid("scale grid entries must be positive and finite"));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(PiagError::invalid("scale grid must be sorted ascending"));
    }
    if !problem.nonsmooth().contains(x) {
        return Err(PiagError::invalid("point lies outside dom h"));
    }
    let g = problem.full_gradient(x)?;
    let mut previous = f64::INFINITY;
    for &t in t_grid {
        let q = residual_with_gradient(problem, t, x, &g)? / t;
        if q > previous + 1e-10 {
            return Ok(false);
        }
        previous = q;
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Quadratic;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    /// Golden-section minimization of a unimodal scalar function on [a, b].
    fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        while (b - a).abs() > 1e-11 {
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - r * (b - a);
            d = a + r * (b - a);
        }
        0.5 * (a + b)
    }

    fn scalar_problem(a: f64, h: NonsmoothTerm) -> Problem {
        let q = Quadratic::new(DMatrix::from_element(1, 1, a), Vector::zeros(1), 0.0).unwrap();
        Problem::from_quadratics(vec![q], h).unwrap()
    }

    #[test]
    fn zero_term_is_identity() {
        let y = v(&[1.5, -2.0, 1e300]);
        assert_eq!(prox(&NonsmoothTerm::Zero, 0.7, &y).unwrap(), y);
    }

    #[test]
    fn l1_against_golden_section() {
        let h = NonsmoothTerm::l1(1.0).unwrap();
        let got = prox(&h, 1.0, &v(&[2.5, -0.3])).unwrap();
        for (j, y) in [2.5, -0.3].into_iter().enumerate() {
            let oracle = golden_min(|x| x.abs() + 0.5 * (x - y) * (x - y), -10.0, 10.0);
            assert!((got[j] - oracle).abs() < 1e-6, "{} vs {}", got[j], oracle);
        }
        assert_eq!(got, v(&[1.5, 0.0]));
    }

    #[test]
    fn box_against_golden_section() {
        let h = NonsmoothTerm::cube(2, 1.0).unwrap();
        let got = prox(&h, 0.5, &v(&[3.0, -0.2])).unwrap();
        for (j, y) in [3.0, -0.2].into_iter().enumerate() {
            let oracle = golden_min(|x| (x - y) * (x - y) / (2.0 * 0.5), -1.0, 1.0);
            assert!((got[j] - oracle).abs() < 1e-6);
        }
        assert_eq!(got, v(&[1.0, -0.2]));
    }

    #[test]
    fn box_plus_l1_against_grid() {
        let h = NonsmoothTerm::box_plus_l1(v(&[-1.0]), v(&[1.0]), 1.0).unwrap();
        let got = prox(&h, 1.0, &v(&[2.5])).unwrap()[0];
        let (mut best, mut best_val) = (0.0, f64::INFINITY);
        let steps = 2_000_000;
        for i in 0..=steps {
            let x = -1.0 + 2.0 * i as f64 / steps as f64;
            let val = x.abs() + 0.5 * (x - 2.5) * (x - 2.5);
            if val < best_val {
                best_val = val;
                best = x;
            }
        }
        assert!((got - best).abs() <= 1e-6);
        assert_eq!(got, 1.0);
    }

    #[test]
    fn soft_threshold_tie_maps_to_zero() {
        assert_eq!(soft_threshold(0.5, 0.5), 0.0);
        assert_eq!(soft_threshold(-0.5, 0.5), 0.0);
    }

    #[test]
    fn nonpositive_scale_rejected() {
        for s in [0.0, -1.0, f64::NAN] {
            assert!(prox(&NonsmoothTerm::Zero, s, &v(&[1.0])).is_err());
        }
        let q = ProxQuery { term: &NonsmoothTerm::Zero, scale: -0.1, anchor: &v(&[1.0]) };
        assert!(q.evaluate().is_err());
    }

    #[test]
    fn residual_examples() {
        let p = scalar_problem(1.0, NonsmoothTerm::Zero);
        assert_eq!(prox_residual(&p, 0.3, &v(&[0.0])).unwrap(), 0.0);
        assert!((prox_residual(&p, 0.5, &v(&[1.0])).unwrap() - 0.5).abs() < 1e-15);

        let p = scalar_problem(-1.0, NonsmoothTerm::cube(1, 1.0).unwrap());
        assert_eq!(prox_residual(&p, 0.1, &v(&[1.0])).unwrap(), 0.0);
    }

    #[test]
    fn monotonicity_examples() {
        let p = scalar_problem(1.0, NonsmoothTerm::Zero);
        assert!(check_prox_scaling_monotonicity(&p, &v(&[3.0]), &[0.1, 0.2, 1.0, 5.0]).unwrap());

        let p = scalar_problem(1.0, NonsmoothTerm::l1(1.0).unwrap());
        assert!(check_prox_scaling_monotonicity(&p, &v(&[2.0]), &[0.1, 0.5, 1.0]).unwrap());
        assert!(check_prox_scaling_monotonicity(&p, &v(&[2.0]), &[]).is_err());
        assert!(check_prox_scaling_monotonicity(&p, &v(&[2.0]), &[1.0, 0.5]).is_err());
    }

    fn term_strategy() -> impl Strategy<Value = NonsmoothTerm> {
        prop_oneof![
            Just(NonsmoothTerm::Zero),
            (0.0..3.0f64).prop_map(|l| NonsmoothTerm::L1 { lambda: l }),
            (0.1..3.0f64, 0.1..3.0f64).prop_map(|(a, b)| NonsmoothTerm::Box {
                lo: Vector::from_element(3, -a),
                hi: Vector::from_element(3, b)
            }),
            (0.1..3.0f64, 0.1..3.0f64, 0.0..2.0f64).prop_map(|(a, b, l)| NonsmoothTerm::BoxPlusL1 {
                lo: Vector::from_element(3, -a),
                hi: Vector::from_element(3, b),
                lambda: l
            }),
        ]
    }

    fn vec3() -> impl Strategy<Value = Vector> {
        proptest::collection::vec(-5.0..5.0f64, 3).prop_map(Vector::from_vec)
    }

    proptest! {
        #[test]
        fn prox_is_nonexpansive(h in term_strategy(), s in 0.01..5.0f64, y1 in vec3(), y2 in vec3()) {
            let z1 = prox(&h, s, &y1).unwrap();
            let z2 = prox(&h, s, &y2).unwrap();
            prop_assert!((z1 - z2).norm() <= (y1 - y2).norm() + 1e-12);
        }

        #[test]
        fn prox_satisfies_optimality(h in term_strategy(), s in 0.01..5.0f64, y in vec3()) {
            let z = prox(&h, s, &y).unwrap();
            prop_assert!(h.contains(&z));
            let lambda = h.lambda();
            for j in 0..3 {
                let (lo, hi) = h.bounds(j);
                // (y - z)/s must lie in the subdifferential of lambda|.| + box indicator at z_j
                let u = (y[j] - z[j]) / s;
                let left = if z[j] <= lo { f64::NEG_INFINITY } else if z[j] > 0.0 { lambda } else { -lambda };
                let right = if z[j] >= hi { f64::INFINITY } else if z[j] < 0.0 { -lambda } else { lambda };
                prop_assert!(u >= left - 1e-9 && u <= right + 1e-9, "j={} u={} [{}, {}]", j, u, left, right);
            }
        }
    }
}
