//! Weighted semigroup norms `‖T(t)(−A)^(−β)‖`, orbit norms and decay fits.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{loglog_fit_logs, BoundCheck, DecayFit, GridSpec};
use crate::operators::{frac_power, norm2, CMatrix, CVector, MatrixOperator, NormEval, OperatorHandle};

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::DomainError(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// `e^{tμ}(−μ)^{−β}` as one complex exponential.
fn weighted_exp(mu: Complex64, t: f64, beta: f64) -> Complex64 {
    let log_weight = if beta == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        (-mu).ln() * (-beta)
    };
    (mu * t + log_weight).exp()
}

/// `V e^{tD} (−D)^{−β} V⁻¹`.
pub fn semigroup_matrix(op: &MatrixOperator, t: f64, beta: f64) -> CMatrix {
    op.apply_function(|mu| weighted_exp(mu, t, beta))
}

/// `‖T(t)(−A)^{−β}‖` with truncation diagnostics.
pub fn semigroup_norm_eval(op: &OperatorHandle, t: f64, beta: f64) -> Result<NormEval> {
    check_time(t)?;
    match op {
        OperatorHandle::Diagonal(d) => {
            let s = d.sup_log(|mu| {
                let weight = if beta == 0.0 { 0.0 } else { -beta * mu.norm().ln() };
                // t = 0 must not turn into 0·(−∞)
                let decay = if t == 0.0 { 0.0 } else { t * mu.re };
                decay + weight
            });
            Ok(NormEval::from_sup(s))
        }
        OperatorHandle::Matrix(m) => Ok(NormEval::from_matrix_norm(
            norm2(&semigroup_matrix(m, t, beta)),
            m.dim(),
        )),
    }
}

pub fn semigroup_weighted_norm(op: &OperatorHandle, t: f64, beta: f64) -> Result<f64> {
    semigroup_norm_eval(op, t, beta).map(|e| e.value)
}

/// `‖T(t)(−A)^{−β} x‖`.
pub fn orbit_weighted_norm(op: &OperatorHandle, t: f64, beta: f64, x: &CVector) -> Result<f64> {
    check_time(t)?;
    op.check_dim(x)?;
    match op {
        OperatorHandle::Diagonal(d) => Ok(d
            .eigenvalues()
            .iter()
            .zip(x.iter())
            .map(|(mu, xk)| (weighted_exp(*mu, t, beta) * xk).norm_sqr())
            .sum::<f64>()
            .sqrt()),
        OperatorHandle::Matrix(m) => Ok((semigroup_matrix(m, t, beta) * x).norm()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecaySample {
    pub arg: f64,
    pub value: f64,
    pub log_value: f64,
    pub argmax: Option<usize>,
    pub truncation: usize,
    pub interior: bool,
}

impl DecaySample {
    pub(crate) fn new(arg: f64, e: NormEval) -> Self {
        DecaySample {
            arg,
            value: e.value,
            log_value: e.log_value,
            argmax: e.argmax,
            truncation: e.truncation,
            interior: e.interior,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRun {
    pub fit: DecayFit,
    pub samples: Vec<DecaySample>,
}

impl DecayRun {
    /// Every sample's maximizer lies inside its truncation.
    pub fn interior(&self) -> bool {
        self.samples.iter().all(|s| s.interior)
    }

    pub(crate) fn fit_samples(samples: Vec<DecaySample>) -> Result<Self> {
        let logs: Vec<(f64, f64)> = samples.iter().map(|s| (s.arg, s.log_value)).collect();
        let fit = loglog_fit_logs(&logs, None)?;
        Ok(DecayRun { fit, samples })
    }
}

/// Evaluates the weighted norm on every grid point (in parallel) and fits a
/// power law in the log domain.
pub fn semigroup_decay_run(op: &OperatorHandle, beta: f64, grid: &GridSpec) -> Result<DecayRun> {
    grid.validate()?;
    let samples = grid
        .values()
        .par_iter()
        .map(|&t| semigroup_norm_eval(op, t, beta).map(|e| DecaySample::new(t, e)))
        .collect::<Result<Vec<_>>>()?;
    DecayRun::fit_samples(samples)
}

pub fn semigroup_decay_fit(op: &OperatorHandle, beta: f64, grid: &GridSpec) -> Result<DecayFit> {
    semigroup_decay_run(op, beta, grid).map(|r| r.fit)
}

/// `‖(−A)^{aθ}x‖ ≤ ‖x‖^{1−θ} ‖(−A)^a x‖^θ` for a diagonal (normal) operator.
pub fn moment_inequality_check(op: &OperatorHandle, x: &CVector, a: f64, theta: f64) -> Result<BoundCheck> {
    let d = op.as_diagonal().ok_or(Error::NonDiagonal)?;
    op.check_dim(x)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::DomainError(format!("moment exponent a must be positive, got {a}")));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::DomainError(format!("theta must lie in (0, 1), got {theta}")));
    }
    let apply = |power: f64| -> f64 {
        d.eigenvalues()
            .iter()
            .zip(x.iter())
            .map(|(mu, xk)| (frac_power(*mu, -power) * xk).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let lhs = apply(a * theta);
    let rhs = x.norm().powf(1.0 - theta) * apply(a).powf(theta);
    Ok(BoundCheck::new(lhs, rhs))
}
