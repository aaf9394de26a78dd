//! Small dense linear-algebra helpers shared by the model and the generators.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::model::Vector;

/// Returns true when `a` is square and `|a_ij - a_ji| <= tol * (1 + max|a|)`.
pub fn is_symmetric(a: &DMatrix<f64>, tol: f64) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    let scale = 1.0 + a.amax();
    (0..a.nrows()).all(|i| (0..i).all(|j| (a[(i, j)] - a[(j, i)]).abs() <= tol * scale))
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// `(L, l)` for the quadratic `x'Ax/2`: the spectral norm and the smallest
/// valid modulus of the concave part, `max(0, -lambda_min)`.
pub fn quadratic_constants(a: &DMatrix<f64>) -> (f64, f64) {
    let ev = symmetric_eigenvalues(a);
    match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) => (lo.abs().max(hi.abs()), (-lo).max(0.0)),
        _ => (0.0, 0.0),
    }
}

/// Haar-ish random orthogonal matrix: Q factor of a Gaussian matrix with the
/// column signs fixed by the diagonal of R.
pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn random_gaussian_vector<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> Vector {
    Vector::from_fn(d, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

pub(crate) fn squared_distance(x: &Vector, y: &Vector) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = random_orthogonal(6, &mut rng);
        let err = (q.transpose() * &q - DMatrix::<f64>::identity(6, 6)).amax();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn constants_of_indefinite_diagonal() {
        let a = DMatrix::from_diagonal(&Vector::from_vec(vec![-3.0, 0.5, 2.0]));
        let (big, concave) = quadratic_constants(&a);
        assert!((big - 3.0).abs() < 1e-12);
        assert!((concave - 3.0).abs() < 1e-12);
        let psd = DMatrix::from_diagonal(&Vector::from_vec(vec![0.0, 4.0]));
        assert_eq!(quadratic_constants(&psd).1, 0.0);
    }

    #[test]
    fn symmetry_check() {
        let mut a = DMatrix::<f64>::identity(3, 3);
        assert!(is_symmetric(&a, 1e-12));
        a[(0, 2)] = 1e-6;
        assert!(!is_symmetric(&a, 1e-12));
        assert!(!is_symmetric(&DMatrix::<f64>::zeros(2, 3), 1e-12));
    }
}
