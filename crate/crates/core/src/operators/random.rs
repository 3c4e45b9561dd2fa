//! Seeded generators for random test operators and probe vectors.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{CMatrix, CVector, DiagonalOperator, MatrixOperator};
use crate::error::{Error, Result};

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    CVector::from_fn(n, |_, _| gaussian(rng))
}

/// Complex Ginibre matrix with entries of variance `1/n`.
pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let s = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |_, _| gaussian(rng) * s)
}

/// Haar-distributed unitary matrix (QR of a Ginibre matrix with phase fix).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Ginibre matrix shifted so that its spectral abscissa equals `-margin`.
pub fn random_stable_matrix<R: Rng + ?Sized>(n: usize, margin: f64, rng: &mut R) -> CMatrix {
    let g = ginibre(n, rng);
    let abscissa = g
        .clone()
        .schur()
        .eigenvalues()
        .map(|ev| ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
        .unwrap_or(0.0);
    g - CMatrix::from_diagonal_element(n, n, Complex64::new(abscissa + margin, 0.0))
}

/// Random stable matrix that passes `MatrixOperator` validation; redraws on
/// the (rare) ill-conditioned sample.
pub fn random_stable_operator<R: Rng + ?Sized>(n: usize, margin: f64, rng: &mut R) -> MatrixOperator {
    loop {
        if let Ok(op) = MatrixOperator::new(random_stable_matrix(n, margin, rng)) {
            return op;
        }
    }
}

/// `U D U*` for a random unitary `U`: a dense normal matrix with the same
/// spectrum (and therefore the same norms of spectral functions) as the
/// first `N` modes of `diag`.
pub fn unitary_conjugate<R: Rng + ?Sized>(diag: &DiagonalOperator, rng: &mut R) -> Result<MatrixOperator> {
    let n = diag.dim();
    let u = random_unitary(n, rng);
    let d = CMatrix::from_diagonal(&CVector::from_column_slice(diag.eigenvalues()));
    MatrixOperator::new(&u * d * u.adjoint())
}

/// `S D S⁻¹` with a well-conditioned random similarity `S = I + G/2`.
pub fn similar_to_diagonal<R: Rng + ?Sized>(eigenvalues: &[Complex64], rng: &mut R) -> Result<MatrixOperator> {
    let n = eigenvalues.len();
    let s = CMatrix::identity(n, n) + ginibre(n, rng) * Complex64::new(0.5, 0.0);
    let s_inv = s
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularSystem("random similarity is singular".into()))?;
    let d = CMatrix::from_diagonal(&CVector::from_column_slice(eigenvalues));
    MatrixOperator::new(&s * d * s_inv)
}
