use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const DEFAULT_CONDITION_CEILING: f64 = 1e8;
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

/// Spectral norm (largest singular value).
pub fn norm2(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// `‖m‖₂ · ‖m⁻¹‖₂` from the singular values; infinite for singular input.
pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Smallest eigenvalue of the hermitian part `(m + m*)/2`.
pub fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvectors of an upper-triangular matrix by back-substitution, one unit
/// column per diagonal entry.
fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let n = t.nrows();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let small = f64::EPSILON * scale;
    let mut y = CMatrix::zeros(n, n);
    for i in 0..n {
        let lambda = t[(i, i)];
        y[(i, i)] = Complex64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in j + 1..=i {
                acc += t[(j, l)] * y[(l, i)];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            y[(j, i)] = -acc / denom;
        }
        let norm = y.column(i).norm();
        y.column_mut(i).unscale_mut(norm);
    }
    y
}

/// Dense stable generator with cached eigendecomposition `A = V D V⁻¹`.
#[derive(Debug, Clone)]
pub struct MatrixOperator {
    entries: CMatrix,
    eigenvalues: Vec<Complex64>,
    eigvecs: CMatrix,
    eigvecs_inv: CMatrix,
    condition: f64,
}

impl MatrixOperator {
    pub fn new(entries: CMatrix) -> Result<Self> {
        Self::with_ceiling(entries, DEFAULT_CONDITION_CEILING)
    }

    pub fn with_ceiling(entries: CMatrix, ceiling: f64) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n.max(1),
                got: entries.ncols(),
            });
        }
        if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::DomainError("matrix entries must be finite".into()));
        }

        let (q, t) = entries.clone().schur().unpack();
        let eigenvalues: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
        if let Some(bad) = eigenvalues.iter().find(|mu| mu.re >= 0.0) {
            return Err(Error::NotStable(*bad));
        }

        let eigvecs = q * triangular_eigenvectors(&t);
        let eigvecs_inv = eigvecs
            .clone()
            .try_inverse()
            .ok_or(Error::NotDiagonalizable {
                residual: f64::INFINITY,
            })?;

        let d = CMatrix::from_diagonal(&CVector::from_vec(eigenvalues.clone()));
        let reconstruction = &eigvecs * d * &eigvecs_inv;
        let scale = norm2(&entries).max(f64::MIN_POSITIVE);
        let residual = norm2(&(reconstruction - &entries)) / scale;
        if !(residual <= RECONSTRUCTION_TOL) {
            return Err(Error::NotDiagonalizable { residual });
        }

        let condition = condition_number(&eigvecs);
        if !(condition <= ceiling) {
            return Err(Error::IllConditionedEigenbasis { condition, ceiling });
        }

        Ok(MatrixOperator {
            entries,
            eigenvalues,
            eigvecs,
            eigvecs_inv,
            condition,
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn eigvecs(&self) -> &CMatrix {
        &self.eigvecs
    }

    pub fn eigvecs_inv(&self) -> &CMatrix {
        &self.eigvecs_inv
    }

    /// `‖V‖₂‖V⁻¹‖₂` for unit-column eigenvectors.
    pub fn eigvec_condition(&self) -> f64 {
        self.condition
    }

    /// `V · diag(values) · V⁻¹`.
    pub fn from_eigen_diagonal(&self, values: &[Complex64]) -> CMatrix {
        let mut scaled = self.eigvecs.clone();
        for (j, v) in values.iter().enumerate() {
            let mut col = scaled.column_mut(j);
            col *= *v;
        }
        scaled * &self.eigvecs_inv
    }

    /// Functional calculus `f(A) = V f(D) V⁻¹`.
    pub fn apply_function<F>(&self, f: F) -> CMatrix
    where
        F: Fn(Complex64) -> Complex64,
    {
        let values: Vec<Complex64> = self.eigenvalues.iter().map(|mu| f(*mu)).collect();
        self.from_eigen_diagonal(&values)
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        self.entries
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::SingularSystem("generator is not invertible".into()))
    }
}
