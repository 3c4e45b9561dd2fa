use num_complex::Complex64;

use super::spectrum::{SpectrumFormula, SpectrumModel};
use crate::error::{Error, Result};

/// Eigenvalues closer to the origin than this are rejected.
pub const SPECTRUM_FLOOR: f64 = 1e-12;

/// Relative change of a refined supremum below which refinement stops.
pub const REFINEMENT_TOL: f64 = 1e-6;

/// The maximizing mode must lie below `truncation / INTERIOR_MARGIN`.
pub const INTERIOR_MARGIN: usize = 10;

/// Hard cap on automatic truncation growth.
pub const MAX_REFINED_TRUNCATION: usize = 1 << 24;

/// Result of a supremum over the spectrum, evaluated in the log domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupEval {
    pub log_value: f64,
    /// 1-based index of the maximizing mode.
    pub argmax: usize,
    /// Number of modes inspected.
    pub truncation: usize,
    /// False when the maximizer sits too close to the truncation edge,
    /// i.e. the true supremum of the untruncated operator may be larger.
    pub interior: bool,
}

impl SupEval {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

/// Normal operator `A e_k = μ_k e_k` on `ℓ²`, truncated to its first `N` modes.
///
/// Formula-backed operators can generate further modes on demand; suprema over
/// the spectrum double the truncation until the supremum settles and the
/// maximizer is well inside the inspected range.
#[derive(Debug, Clone)]
pub struct DiagonalOperator {
    model: SpectrumModel,
    eigenvalues: Vec<Complex64>,
    auto_refine: bool,
}

fn check_point(index: usize, mu: Complex64) -> Result<()> {
    if !(mu.re.is_finite() && mu.im.is_finite()) {
        return Err(Error::SpectrumViolation {
            index,
            value: mu,
            reason: "is not finite",
        });
    }
    if mu.re >= 0.0 {
        return Err(Error::SpectrumViolation {
            index,
            value: mu,
            reason: "lies in the closed right half-plane",
        });
    }
    if mu.norm() < SPECTRUM_FLOOR {
        return Err(Error::SpectrumViolation {
            index,
            value: mu,
            reason: "is too close to the origin",
        });
    }
    Ok(())
}

impl DiagonalOperator {
    pub fn new(model: SpectrumModel) -> Result<Self> {
        if model.truncation() == 0 {
            return Err(Error::DomainError("truncation must be at least 1".into()));
        }
        if let Some(formula) = model.formula() {
            formula.check_parameters().map_err(Error::DomainError)?;
        }
        let eigenvalues = model.generate();
        for (i, mu) in eigenvalues.iter().enumerate() {
            check_point(i + 1, *mu)?;
        }
        let auto_refine = model.formula().is_some();
        Ok(DiagonalOperator {
            model,
            eigenvalues,
            auto_refine,
        })
    }

    pub fn from_eigenvalues(eigenvalues: Vec<Complex64>) -> Result<Self> {
        Self::new(SpectrumModel::Explicit(eigenvalues))
    }

    pub fn paper_example(truncation: usize) -> Result<Self> {
        Self::new(SpectrumModel::paper_example(truncation))
    }

    /// Disables automatic truncation growth: every computation uses exactly
    /// the first `N` modes.
    pub fn fixed(mut self) -> Self {
        self.auto_refine = false;
        self
    }

    pub fn with_auto_refine(mut self, on: bool) -> Self {
        self.auto_refine = on && self.model.formula().is_some();
        self
    }

    pub fn auto_refine(&self) -> bool {
        self.auto_refine
    }

    pub fn model(&self) -> &SpectrumModel {
        &self.model
    }

    pub fn formula(&self) -> Option<&SpectrumFormula> {
        self.model.formula()
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalue of mode `k` (1-based); modes past the truncation are
    /// generated from the formula when there is one.
    pub fn mode(&self, k: usize) -> Option<Complex64> {
        if k >= 1 && k <= self.eigenvalues.len() {
            return Some(self.eigenvalues[k - 1]);
        }
        self.formula().filter(|_| k >= 1).map(|f| f.eigenvalue(k))
    }

    /// `sup_k log_term(μ_k)`, refined as described on the type.
    ///
    /// Terms evaluating to NaN are skipped; `-inf` is a legitimate value
    /// (zero factor).
    pub fn sup_log<F>(&self, log_term: F) -> SupEval
    where
        F: Fn(Complex64) -> f64,
    {
        let mut best = f64::NEG_INFINITY;
        let mut argmax = 1;
        for (i, mu) in self.eigenvalues.iter().enumerate() {
            let v = log_term(*mu);
            if v > best {
                best = v;
                argmax = i + 1;
            }
        }
        let mut truncation = self.eigenvalues.len();
        let formula = match (self.auto_refine, self.formula()) {
            (true, Some(f)) => f,
            _ => {
                return SupEval {
                    log_value: best,
                    argmax,
                    truncation,
                    interior: true,
                }
            }
        };

        loop {
            let previous = best;
            let next = (truncation * 2).min(MAX_REFINED_TRUNCATION);
            for k in truncation + 1..=next {
                let v = log_term(formula.eigenvalue(k));
                if v > best {
                    best = v;
                    argmax = k;
                }
            }
            truncation = next;
            let settled = if best == f64::NEG_INFINITY {
                true
            } else {
                (best - previous).exp_m1().abs() < REFINEMENT_TOL
            };
            let interior = argmax * INTERIOR_MARGIN <= truncation;
            if (settled && interior) || truncation >= MAX_REFINED_TRUNCATION {
                return SupEval {
                    log_value: best,
                    argmax,
                    truncation,
                    interior,
                };
            }
        }
    }
}
