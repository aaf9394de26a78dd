//! Composite objective `F = sum_i f_i + h`, smooth component metadata and the
//! difference-of-convex split of a smooth component.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{PiagError, Result};
use crate::linalg;

pub type Vector = DVector<f64>;

/// A smooth term `f_i` together with its declared smoothness constants.
///
/// `lipschitz` is `L_i`, a Lipschitz constant of the gradient. `concave_modulus`
/// is `l_i`: the smoothness of the concave part in a split
/// `f_i = f_i^(1) - f_i^(2)` with both parts convex, so `f_i + l_i |x|^2 / 2`
/// is convex. Implementations must keep `0 <= l_i <= L_i`.
pub trait SmoothComponent: Send + Sync + fmt::Debug {
    fn dimension(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
    fn lipschitz(&self) -> f64;
    fn concave_modulus(&self) -> f64;

    /// Exposes the quadratic data when the component is a quadratic, which
    /// lets reference solvers work on the aggregated system.
    fn as_quadratic(&self) -> Option<&Quadratic> {
        None
    }
}

/// `f(x) = x'Ax/2 + b'x + offset` with symmetric `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    a: DMatrix<f64>,
    b: Vector,
    offset: f64,
    lipschitz: f64,
    concave_modulus: f64,
}

/// Test-problem realization of a smooth component.
pub type QuadraticSpec = Quadratic;

impl Quadratic {
    /// Builds the quadratic and computes `L = |A|_2` and `l = max(0, -lambda_min(A))`
    /// from a symmetric eigendecomposition.
    pub fn new(a: DMatrix<f64>, b: Vector, offset: f64) -> Result<Self> {
        Self::check_shapes(&a, &b)?;
        let (lipschitz, concave_modulus) = linalg::quadratic_constants(&a);
        Ok(Self { a, b, offset, lipschitz, concave_modulus })
    }

    /// Builds the quadratic with constants known from its construction.
    pub fn with_constants(
        a: DMatrix<f64>,
        b: Vector,
        offset: f64,
        lipschitz: f64,
        concave_modulus: f64,
    ) -> Result<Self> {
        Self::check_shapes(&a, &b)?;
        if !(lipschitz.is_finite() && concave_modulus >= 0.0 && concave_modulus <= lipschitz) {
            return Err(PiagError::invalid(format!(
                "need 0 <= l_i <= L_i < inf, got L_i = {lipschitz}, l_i = {concave_modulus}"
            )));
        }
        Ok(Self { a, b, offset, lipschitz, concave_modulus })
    }

    fn check_shapes(a: &DMatrix<f64>, b: &Vector) -> Result<()> {
        if a.nrows() == 0 || a.nrows() != a.ncols() || a.nrows() != b.len() {
            return Err(PiagError::invalid(format!(
                "quadratic needs a square A matching b: A is {}x{}, b has {}",
                a.nrows(),
                a.ncols(),
                b.len()
            )));
        }
        if !linalg::is_symmetric(a, 1e-12) {
            return Err(PiagError::invalid("quadratic matrix A is not symmetric"));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(PiagError::invalid("quadratic data contains non-finite entries"));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn linear(&self) -> &Vector {
        &self.b
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

impl SmoothComponent for Quadratic {
    fn dimension(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &Vector) -> f64 {
        let ax = &self.a * x;
        0.5 * x.dot(&ax) + self.b.dot(x) + self.offset
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let mut g = &self.a * x;
        g += &self.b;
        g
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn concave_modulus(&self) -> f64 {
        self.concave_modulus
    }

    fn as_quadratic(&self) -> Option<&Quadratic> {
        Some(self)
    }
}

/// `c |x|^2 / 2`.
#[derive(Debug, Clone)]
pub struct HalfSquaredNorm {
    dimension: usize,
    weight: f64,
}

impl HalfSquaredNorm {
    pub fn new(dimension: usize, weight: f64) -> Self {
        Self { dimension, weight }
    }
}

impl SmoothComponent for HalfSquaredNorm {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * self.weight * x.norm_squared()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        x * self.weight
    }

    fn lipschitz(&self) -> f64 {
        self.weight
    }

    fn concave_modulus(&self) -> f64 {
        0.0
    }
}

/// `f + c |x|^2 / 2` for a component `f` with `L_f < c`; convex by construction.
#[derive(Debug, Clone)]
pub struct ShiftedComponent {
    inner: Arc<dyn SmoothComponent>,
    shift: HalfSquaredNorm,
}

impl SmoothComponent for ShiftedComponent {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn value(&self, x: &Vector) -> f64 {
        self.inner.value(x) + self.shift.value(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.inner.gradient(x) + self.shift.gradient(x)
    }

    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz() + self.shift.weight
    }

    fn concave_modulus(&self) -> f64 {
        0.0
    }
}

/// `f_i = f1 - f2` with both parts convex and smooth.
#[derive(Debug, Clone)]
pub struct DCSplit {
    pub f1: Arc<dyn SmoothComponent>,
    pub f2: Arc<dyn SmoothComponent>,
    pub c: f64,
}

/// Splits `f` as `(f + c|x|^2/2) - c|x|^2/2`; requires `c > L_f`.
pub fn dc_decompose(component: Arc<dyn SmoothComponent>, c: f64) -> Result<DCSplit> {
    let lip = component.lipschitz();
    if !(c > lip) || !c.is_finite() {
        return Err(PiagError::invalid(format!(
            "shift c = {c} must exceed the component's Lipschitz constant {lip}"
        )));
    }
    let d = component.dimension();
    let f1 = ShiftedComponent { inner: component, shift: HalfSquaredNorm::new(d, c) };
    Ok(DCSplit { f1: Arc::new(f1), f2: Arc::new(HalfSquaredNorm::new(d, c)), c })
}

/// The convex nonsmooth term `h`. Box bounds are inclusive and componentwise.
#[derive(Debug, Clone, PartialEq)]
pub enum NonsmoothTerm {
    Zero,
    L1 { lambda: f64 },
    Box { lo: Vector, hi: Vector },
    BoxPlusL1 { lo: Vector, hi: Vector, lambda: f64 },
}

impl NonsmoothTerm {
    pub fn l1(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(NonsmoothTerm::L1 { lambda })
    }

    pub fn boxed(lo: Vector, hi: Vector) -> Result<Self> {
        check_bounds(&lo, &hi)?;
        Ok(NonsmoothTerm::Box { lo, hi })
    }

    pub fn box_plus_l1(lo: Vector, hi: Vector, lambda: f64) -> Result<Self> {
        check_bounds(&lo, &hi)?;
        check_lambda(lambda)?;
        Ok(NonsmoothTerm::BoxPlusL1 { lo, hi, lambda })
    }

    /// Symmetric box `[-half_width, half_width]^d`.
    pub fn cube(d: usize, half_width: f64) -> Result<Self> {
        Self::boxed(Vector::from_element(d, -half_width), Vector::from_element(d, half_width))
    }

    pub fn lambda(&self) -> f64 {
        match self {
            NonsmoothTerm::L1 { lambda } | NonsmoothTerm::BoxPlusL1 { lambda, .. } => *lambda,
            _ => 0.0,
        }
    }

    /// Lower and upper bound of coordinate `j` (infinite when unconstrained).
    pub fn bounds(&self, j: usize) -> (f64, f64) {
        match self {
            NonsmoothTerm::Box { lo, hi } | NonsmoothTerm::BoxPlusL1 { lo, hi, .. } => (lo[j], hi[j]),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Dimension the term is tied to, if any.
    pub fn fixed_dimension(&self) -> Option<usize> {
        match self {
            NonsmoothTerm::Box { lo, .. } | NonsmoothTerm::BoxPlusL1 { lo, .. } => Some(lo.len()),
            _ => None,
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        match self {
            NonsmoothTerm::Zero | NonsmoothTerm::L1 { .. } => true,
            NonsmoothTerm::Box { lo, hi } | NonsmoothTerm::BoxPlusL1 { lo, hi, .. } => {
                x.iter().zip(lo.iter().zip(hi.iter())).all(|(v, (l, h))| *l <= *v && *v <= *h)
            }
        }
    }

    /// `h(x)`, with `+inf` outside the box.
    pub fn value(&self, x: &Vector) -> f64 {
        if !self.contains(x) {
            return f64::INFINITY;
        }
        match self {
            NonsmoothTerm::Zero | NonsmoothTerm::Box { .. } => 0.0,
            NonsmoothTerm::L1 { lambda } | NonsmoothTerm::BoxPlusL1 { lambda, .. } => {
                lambda * x.lp_norm(1)
            }
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(PiagError::invalid(format!("l1 weight must be finite and >= 0, got {lambda}")))
    }
}

fn check_bounds(lo: &Vector, hi: &Vector) -> Result<()> {
    if lo.len() != hi.len() || lo.is_empty() {
        return Err(PiagError::invalid("box bounds must be nonempty and of equal length"));
    }
    if lo.iter().zip(hi.iter()).any(|(l, h)| l.is_nan() || h.is_nan() || l > h) {
        return Err(PiagError::invalid("box bounds need lo <= hi componentwise"));
    }
    Ok(())
}

/// `min F(x) = sum_i f_i(x) + h(x)` over `R^d`.
#[derive(Debug, Clone)]
pub struct Problem {
    components: Vec<Arc<dyn SmoothComponent>>,
    nonsmooth: NonsmoothTerm,
    dimension: usize,
    /// Declared lower bound on `F` when one is known.
    pub f_lower_bound_hint: Option<f64>,
}

impl Problem {
    pub fn new(components: Vec<Arc<dyn SmoothComponent>>, nonsmooth: NonsmoothTerm) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(PiagError::invalid("a problem needs at least one smooth component"));
        };
        let dimension = first.dimension();
        if dimension == 0 {
            return Err(PiagError::invalid("dimension must be positive"));
        }
        if let Some(i) = components.iter().position(|c| c.dimension() != dimension) {
            return Err(PiagError::invalid(format!(
                "component {i} has dimension {} but component 0 has {dimension}",
                components[i].dimension()
            )));
        }
        if let Some(hd) = nonsmooth.fixed_dimension() {
            if hd != dimension {
                return Err(PiagError::invalid(format!(
                    "nonsmooth term has dimension {hd}, components have {dimension}"
                )));
            }
        }
        for (i, c) in components.iter().enumerate() {
            let (big, small) = (c.lipschitz(), c.concave_modulus());
            if !(big.is_finite() && small >= 0.0 && small <= big) {
                return Err(PiagError::invalid(format!(
                    "component {i}: need 0 <= l_i <= L_i < inf, got L_i = {big}, l_i = {small}"
                )));
            }
        }
        Ok(Self { components, nonsmooth, dimension, f_lower_bound_hint: None })
    }

    pub fn from_quadratics(quadratics: Vec<Quadratic>, nonsmooth: NonsmoothTerm) -> Result<Self> {
        let comps = quadratics
            .into_iter()
            .map(|q| Arc::new(q) as Arc<dyn SmoothComponent>)
            .collect();
        Self::new(comps, nonsmooth)
    }

    pub fn components(&self) -> &[Arc<dyn SmoothComponent>] {
        &self.components
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn nonsmooth(&self) -> &NonsmoothTerm {
        &self.nonsmooth
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn check_dimension(&self, x: &Vector) -> Result<()> {
        if x.len() == self.dimension {
            Ok(())
        } else {
            Err(PiagError::invalid(format!(
                "point has dimension {}, problem has {}",
                x.len(),
                self.dimension
            )))
        }
    }

    /// `f(x) = sum_i f_i(x)`, accumulated in component order.
    pub fn eval_f(&self, x: &Vector) -> Result<f64> {
        self.check_dimension(x)?;
        let mut acc = 0.0;
        for c in &self.components {
            acc += c.value(x);
        }
        Ok(acc)
    }

    /// `F(x) = f(x) + h(x)`; `+inf` outside `dom h`.
    pub fn eval_objective(&self, x: &Vector) -> Result<f64> {
        Ok(self.eval_f(x)? + self.nonsmooth.value(x))
    }

    /// `grad f(x)`, accumulated in component order starting from zero.
    pub fn full_gradient(&self, x: &Vector) -> Result<Vector> {
        self.check_dimension(x)?;
        let mut g = Vector::zeros(self.dimension);
        for c in &self.components {
            g += c.gradient(x);
        }
        Ok(g)
    }

    /// `(L, l) = (sum_i L_i, sum_i l_i)`.
    pub fn smoothness_totals(&self) -> (f64, f64) {
        let big = self.components.iter().map(|c| c.lipschitz()).sum();
        let small = self.components.iter().map(|c| c.concave_modulus()).sum();
        (big, small)
    }

    /// All components as quadratics, or `None` if any is not quadratic.
    pub fn quadratics(&self) -> Option<Vec<&Quadratic>> {
        self.components.iter().map(|c| c.as_quadratic()).collect()
    }
}
