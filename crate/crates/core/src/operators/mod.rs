//! Concrete stable generators: explicit diagonal (normal) operators and dense
//! diagonalizable matrices, with their spectra, fractional-power weights and
//! resolvent action.

mod diagonal;
mod json;
mod matrix;
pub mod random;
mod spectrum;

pub use diagonal::{
    DiagonalOperator, SupEval, INTERIOR_MARGIN, MAX_REFINED_TRUNCATION, REFINEMENT_TOL,
    SPECTRUM_FLOOR,
};
pub use json::{operator_from_json, operator_from_value};
pub use matrix::{
    condition_number, min_hermitian_eigenvalue, norm2, CMatrix, CVector, MatrixOperator,
    DEFAULT_CONDITION_CEILING, RECONSTRUCTION_TOL,
};
pub use spectrum::{SpectrumFormula, SpectrumModel};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::linear_regression;

/// A validated stable generator.
#[derive(Debug, Clone)]
pub enum OperatorHandle {
    Diagonal(DiagonalOperator),
    Matrix(MatrixOperator),
}

impl From<DiagonalOperator> for OperatorHandle {
    fn from(op: DiagonalOperator) -> Self {
        OperatorHandle::Diagonal(op)
    }
}

impl From<MatrixOperator> for OperatorHandle {
    fn from(op: MatrixOperator) -> Self {
        OperatorHandle::Matrix(op)
    }
}

impl OperatorHandle {
    /// Eigenvalues of `A` (for diagonal operators: the current truncation).
    pub fn eigenvalues(&self) -> &[Complex64] {
        match self {
            OperatorHandle::Diagonal(d) => d.eigenvalues(),
            OperatorHandle::Matrix(m) => m.eigenvalues(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            OperatorHandle::Diagonal(d) => d.dim(),
            OperatorHandle::Matrix(m) => m.dim(),
        }
    }

    pub fn as_diagonal(&self) -> Option<&DiagonalOperator> {
        match self {
            OperatorHandle::Diagonal(d) => Some(d),
            OperatorHandle::Matrix(_) => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&MatrixOperator> {
        match self {
            OperatorHandle::Matrix(m) => Some(m),
            OperatorHandle::Diagonal(_) => None,
        }
    }

    pub fn check_dim(&self, x: &CVector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Distance from `z` to the (truncated) spectrum.
    pub fn spectrum_distance(&self, z: Complex64) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|mu| (z - mu).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// A norm computed either as a supremum over a diagonal spectrum or as a
/// matrix 2-norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEval {
    pub value: f64,
    /// Natural log of `value`; finite even when `value` underflows.
    pub log_value: f64,
    /// 1-based maximizing mode (diagonal operators only).
    pub argmax: Option<usize>,
    pub truncation: usize,
    /// Maximizer well inside the truncation (always true for matrices).
    pub interior: bool,
}

impl NormEval {
    pub fn from_sup(s: SupEval) -> Self {
        NormEval {
            value: s.value(),
            log_value: s.log_value,
            argmax: Some(s.argmax),
            truncation: s.truncation,
            interior: s.interior,
        }
    }

    pub fn from_matrix_norm(value: f64, dim: usize) -> Self {
        NormEval {
            value,
            log_value: value.ln(),
            argmax: None,
            truncation: dim,
            interior: true,
        }
    }
}

/// Principal-branch `(−μ)^(−β)`; well defined since `−μ` avoids `(−∞, 0]`.
pub fn frac_power(mu: Complex64, beta: f64) -> Complex64 {
    if beta == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    ((-mu).ln() * (-beta)).exp()
}

/// `(−μ_k)^(−β)` for every eigenvalue; for matrices these act in the eigenbasis.
pub fn frac_power_weights(op: &OperatorHandle, beta: f64) -> Vec<Complex64> {
    op.eigenvalues().iter().map(|mu| frac_power(*mu, beta)).collect()
}

/// `(z − A)⁻¹ x`.
pub fn apply_resolvent(op: &OperatorHandle, z: Complex64, x: &CVector) -> Result<CVector> {
    op.check_dim(x)?;
    let distance = op.spectrum_distance(z);
    if !(distance > SPECTRUM_FLOOR) {
        return Err(Error::SpectrumHit { z, distance });
    }
    match op {
        OperatorHandle::Diagonal(d) => Ok(CVector::from_iterator(
            x.len(),
            x.iter().zip(d.eigenvalues()).map(|(xk, mu)| xk / (z - mu)),
        )),
        OperatorHandle::Matrix(m) => {
            let shifted = CMatrix::from_diagonal_element(m.dim(), m.dim(), z) - m.entries();
            shifted
                .lu()
                .solve(x)
                .ok_or_else(|| Error::SingularSystem(format!("z - A is singular at z = {z}")))
        }
    }
}

/// Outcome of fitting `|Im λ| ≥ C (Re λ)^(−1/α)` on `σ(−A)` near the axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricAlpha {
    pub alpha: f64,
    /// Largest `C` for which the inequality holds on every fitted point.
    pub constant: f64,
    pub points: usize,
}

pub fn geometric_alpha(op: &OperatorHandle, window: f64) -> Result<GeometricAlpha> {
    let lambdas: Vec<Complex64> = op
        .eigenvalues()
        .iter()
        .map(|mu| -mu)
        .filter(|l| l.re <= window)
        .collect();
    let fit_points: Vec<(f64, f64)> = lambdas
        .iter()
        .filter(|l| l.im != 0.0)
        .map(|l| (-l.re.ln(), l.im.abs().ln()))
        .collect();
    if fit_points.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            found: fit_points.len(),
        });
    }
    let line = linear_regression(&fit_points)?;
    if !(line.slope > 0.0) {
        return Err(Error::DegenerateWindow(format!(
            "|Im λ| does not grow as Re λ → 0 (slope {})",
            line.slope
        )));
    }
    let alpha = 1.0 / line.slope;
    let constant = lambdas
        .iter()
        .map(|l| l.im.abs() * l.re.powf(1.0 / alpha))
        .fold(f64::INFINITY, f64::min);
    Ok(GeometricAlpha {
        alpha,
        constant,
        points: fit_points.len(),
    })
}
