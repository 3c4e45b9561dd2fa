//! Cayley transform `A_d = (I + A)(I − A)⁻¹`: multipliers, weighted power
//! norms, power bounds, envelope checks and the Guo–Zwart inequality.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lyapunov::LyapunovSolution;
use crate::numerics::{BoundCheck, DecayFit, GridSpec};
use crate::operators::{frac_power, norm2, CMatrix, CVector, MatrixOperator, NormEval, OperatorHandle};
use crate::semigroup::{DecayRun, DecaySample};

/// Largest power accepted for diagonal operators.
pub const DIAGONAL_HORIZON: u64 = 100_000_000;
/// Largest power accepted for matrix operators.
pub const MATRIX_HORIZON: u64 = 1_000_000;
/// Relative slack in the Guo–Zwart comparison.
pub const GUO_ZWART_SLACK: f64 = 1e-8;
/// Tolerance on the `ξ` carried by a Lyapunov solution.
pub const XI_MATCH_TOL: f64 = 1e-12;

pub fn cayley_multiplier(mu: Complex64) -> Complex64 {
    (1.0 + mu) / (1.0 - mu)
}

pub fn cayley_multipliers(op: &OperatorHandle) -> Vec<Complex64> {
    op.eigenvalues().iter().map(|mu| cayley_multiplier(*mu)).collect()
}

/// `ln |f_n(λ)|` for `f_n(λ) = ((1−λ)/(1+λ))^n λ^{−β}`, `λ = −μ`, using
/// `|(1−λ)/(1+λ)|² = 1 − 4 Re λ / |1+λ|²`.
pub fn log_weighted_multiplier(mu: Complex64, n: u64, beta: f64) -> f64 {
    let lambda = -mu;
    let weight = if beta == 0.0 { 0.0 } else { -beta * lambda.norm().ln() };
    if n == 0 {
        return weight;
    }
    let ratio = -4.0 * lambda.re / (1.0 + lambda).norm_sqr();
    0.5 * n as f64 * ratio.ln_1p() + weight
}

/// `(I + A)(I − A)⁻¹`, computed as `(I − A)⁻¹(I + A)` (the factors commute).
pub fn cayley_matrix(op: &MatrixOperator) -> Result<CMatrix> {
    let n = op.dim();
    let id = CMatrix::identity(n, n);
    let plus = &id + op.entries();
    let minus = id - op.entries();
    minus
        .lu()
        .solve(&plus)
        .ok_or_else(|| Error::SingularSystem("I - A is singular".into()))
}

/// `m^n` by repeated squaring.
pub fn matrix_power(m: &CMatrix, mut n: u64) -> CMatrix {
    let mut result = CMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

fn check_horizon(op: &OperatorHandle, n: u64) -> Result<()> {
    let horizon = match op {
        OperatorHandle::Diagonal(_) => DIAGONAL_HORIZON,
        OperatorHandle::Matrix(_) => MATRIX_HORIZON,
    };
    if n > horizon {
        return Err(Error::HorizonExceeded { n, horizon });
    }
    Ok(())
}

/// `A_dⁿ (−A)^{−β}` for a matrix operator.
pub fn cayley_power_matrix(op: &MatrixOperator, n: u64, beta: f64) -> Result<CMatrix> {
    let power = matrix_power(&cayley_matrix(op)?, n);
    if beta == 0.0 {
        return Ok(power);
    }
    Ok(power * op.apply_function(|mu| frac_power(mu, beta)))
}

/// `‖A_dⁿ(−A)^{−β}‖` with truncation diagnostics.
pub fn cayley_norm_eval(op: &OperatorHandle, n: u64, beta: f64) -> Result<NormEval> {
    check_horizon(op, n)?;
    match op {
        OperatorHandle::Diagonal(d) => Ok(NormEval::from_sup(
            d.sup_log(|mu| log_weighted_multiplier(mu, n, beta)),
        )),
        OperatorHandle::Matrix(m) => Ok(NormEval::from_matrix_norm(
            norm2(&cayley_power_matrix(m, n, beta)?),
            m.dim(),
        )),
    }
}

pub fn cayley_power_weighted_norm(op: &OperatorHandle, n: u64, beta: f64) -> Result<f64> {
    cayley_norm_eval(op, n, beta).map(|e| e.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerBound {
    /// `max ‖A_dⁿ‖` over `0 ≤ n ≤ horizon` (or the exact supremum when `certified`).
    pub m: f64,
    /// `‖A_d‖ ≤ 1`.
    pub contraction: bool,
    pub horizon: u64,
    /// Number of powers actually inspected.
    pub inspected: u64,
    /// The value is the supremum over all `n`, not only up to the horizon.
    pub certified: bool,
}

/// Power bound of the Cayley transform.
///
/// Diagonal operators: every multiplier has modulus ≤ 1, so `M = 1`. Matrices:
/// powers are formed one by one; once some `‖A_d^{n₀}‖ < 1`, submultiplicativity
/// bounds all later powers by earlier ones and the scan stops early.
pub fn power_bounded_check(op: &OperatorHandle, horizon: u64) -> Result<PowerBound> {
    check_horizon(op, horizon)?;
    match op {
        OperatorHandle::Diagonal(d) => {
            let max_mod = d
                .eigenvalues()
                .iter()
                .map(|mu| cayley_multiplier(*mu).norm())
                .fold(0.0, f64::max);
            let contraction = max_mod <= 1.0 + 1e-12;
            Ok(PowerBound {
                m: if contraction { 1.0 } else { f64::INFINITY },
                contraction,
                horizon,
                inspected: 1,
                certified: contraction,
            })
        }
        OperatorHandle::Matrix(m) => {
            let ad = cayley_matrix(m)?;
            let first = norm2(&ad);
            let mut best = 1.0f64;
            let mut power = CMatrix::identity(m.dim(), m.dim());
            let mut certified = false;
            let mut inspected = 0;
            for _ in 1..=horizon {
                power = &power * &ad;
                inspected += 1;
                let norm = norm2(&power);
                if norm < 1.0 {
                    certified = true;
                    break;
                }
                best = best.max(norm);
            }
            Ok(PowerBound {
                m: best,
                contraction: first <= 1.0 + 1e-12,
                horizon,
                inspected,
                certified,
            })
        }
    }
}

/// Weighted Cayley power norms on an integer-rounded grid plus a log-log fit.
pub fn cayley_decay_run(op: &OperatorHandle, beta: f64, grid: &GridSpec) -> Result<DecayRun> {
    grid.validate()?;
    let ns = grid.integer_values();
    let samples = ns
        .par_iter()
        .map(|&n| cayley_norm_eval(op, n, beta).map(|e| DecaySample::new(n as f64, e)))
        .collect::<Result<Vec<_>>>()?;
    DecayRun::fit_samples(samples)
}

pub fn cayley_decay_fit(op: &OperatorHandle, beta: f64, grid: &GridSpec) -> Result<DecayFit> {
    cayley_decay_run(op, beta, grid).map(|r| r.fit)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiminfScan {
    pub m: u64,
    /// `(n, n³‖A_d^{m n³}(−A)^{−3}‖)`.
    pub values: Vec<(u64, f64)>,
    pub min: f64,
    /// `e^{−2m}`.
    pub bound: f64,
    pub interior: bool,
}

/// `n³‖A_d^{m n³}(−A)^{−3}‖` for `n` in `range` (inclusive).
pub fn liminf_bound_check(op: &OperatorHandle, m: u64, range: (u64, u64)) -> Result<LiminfScan> {
    if m == 0 || range.0 == 0 || range.1 < range.0 {
        return Err(Error::DomainError(format!(
            "liminf scan needs m >= 1 and 1 <= n_min <= n_max, got m = {m}, range {range:?}"
        )));
    }
    let evals = (range.0..=range.1)
        .into_par_iter()
        .map(|n| {
            let cube = n.checked_pow(3).and_then(|c| c.checked_mul(m)).ok_or(Error::HorizonExceeded {
                n: u64::MAX,
                horizon: DIAGONAL_HORIZON,
            })?;
            let e = cayley_norm_eval(op, cube, 3.0)?;
            Ok((n, (n as f64).powi(3) * e.value, e.interior))
        })
        .collect::<Result<Vec<_>>>()?;
    let interior = evals.iter().all(|e| e.2);
    let values: Vec<(u64, f64)> = evals.into_iter().map(|(n, v, _)| (n, v)).collect();
    let min = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    Ok(LiminfScan {
        m,
        values,
        min,
        bound: (-2.0 * m as f64).exp(),
        interior,
    })
}

/// `g_n(s) = (n/s)(1 − C₂/s)^{n/2}` on `s ≥ C₂`.
pub fn gn(c2: f64, n: u64, s: f64) -> f64 {
    let n = n as f64;
    (n / s) * (1.0 - c2 / s).powf(0.5 * n)
}

/// Maximizer `s* = C₂(n+2)/2` and maximum `g_n(s*)` of `g_n` on `[C₂, ∞)`.
pub fn gn_envelope(c2: f64, n: u64) -> Result<(f64, f64)> {
    if !(c2 > 0.0 && c2.is_finite()) || n == 0 {
        return Err(Error::DomainError(format!("need C2 > 0 and n >= 1, got C2 = {c2}, n = {n}")));
    }
    let nf = n as f64;
    let s_star = c2 * (nf + 2.0) / 2.0;
    let g_max = (2.0 * nf / (c2 * (nf + 2.0))) * (1.0 - 2.0 / (nf + 2.0)).powf(0.5 * nf);
    Ok((s_star, g_max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    /// `(n, scaled value, running sup)`.
    pub series: Vec<(u64, f64, f64)>,
    pub sup: f64,
    /// Running sup changed by less than 1% over the last decade of `n`.
    pub stabilized: bool,
}

impl Envelope {
    fn from_values(values: Vec<(u64, f64)>) -> Self {
        let mut running = f64::NEG_INFINITY;
        let series: Vec<(u64, f64, f64)> = values
            .into_iter()
            .map(|(n, v)| {
                running = running.max(v);
                (n, v, running)
            })
            .collect();
        let sup = series.last().map(|s| s.2).unwrap_or(f64::NAN);
        let stabilized = match series.last() {
            Some(&(n_last, _, last)) => {
                let earlier = series
                    .iter()
                    .rev()
                    .find(|s| s.0 * 10 <= n_last)
                    .map(|s| s.2);
                match earlier {
                    Some(e) if last == 0.0 => e == 0.0,
                    Some(e) => ((last - e) / last).abs() < 0.01,
                    None => false,
                }
            }
            None => false,
        };
        Envelope {
            series,
            sup,
            stabilized,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeCheck {
    pub alpha: f64,
    /// `(n / ln n) · ‖A_dⁿ(−A)^{−α−2}‖`, `n ≥ 2`.
    pub with_log: Envelope,
    /// `n · ‖A_dⁿ(−A)^{−α−2}‖`.
    pub without_log: Envelope,
    pub interior: bool,
}

/// Both envelopes of `‖A_dⁿ(−A)^{−α−2}‖` over an integer grid.
pub fn dr_ct_envelope_check(op: &OperatorHandle, alpha: f64, grid: &GridSpec) -> Result<EnvelopeCheck> {
    grid.validate()?;
    let beta = alpha + 2.0;
    let evals = grid
        .integer_values()
        .par_iter()
        .map(|&n| cayley_norm_eval(op, n, beta).map(|e| (n, e)))
        .collect::<Result<Vec<_>>>()?;
    let interior = evals.iter().all(|(_, e)| e.interior);
    let without_log = evals.iter().map(|(n, e)| (*n, *n as f64 * e.value)).collect();
    let with_log = evals
        .iter()
        .filter(|(n, _)| *n >= 2)
        .map(|(n, e)| (*n, *n as f64 / (*n as f64).ln() * e.value))
        .collect();
    Ok(EnvelopeCheck {
        alpha,
        with_log: Envelope::from_values(with_log),
        without_log: Envelope::from_values(without_log),
        interior,
    })
}

/// `ξ` with `2ξ = (1 − r²)/(1 + r²)`.
pub fn xi_from_r(r: f64) -> f64 {
    (1.0 - r * r) / (2.0 * (1.0 + r * r))
}

/// `(n+1)|⟨y, rⁿA_dⁿ(I−A)⁻¹x⟩| ≤ M‖y‖√(⟨x,Qx⟩/(1−r⁴))`, with `M` the
/// power bound of `A_d` and `Q` solved at `ξ = (1−r²)/(2(1+r²))`.
pub fn guo_zwart_inequality_check(
    op: &MatrixOperator,
    x: &CVector,
    y: &CVector,
    r: f64,
    n: u64,
    q: &LyapunovSolution,
    m: f64,
) -> Result<BoundCheck> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::DomainError(format!("r must lie in (0, 1), got {r}")));
    }
    if n > MATRIX_HORIZON {
        return Err(Error::HorizonExceeded {
            n,
            horizon: MATRIX_HORIZON,
        });
    }
    for v in [x, y] {
        if v.len() != op.dim() {
            return Err(Error::DimensionMismatch {
                expected: op.dim(),
                got: v.len(),
            });
        }
    }
    let xi = xi_from_r(r);
    if (q.xi - xi).abs() > XI_MATCH_TOL {
        return Err(Error::MismatchedXi {
            expected: xi,
            found: q.xi,
        });
    }
    let id = CMatrix::identity(op.dim(), op.dim());
    let resolvent_x = (id - op.entries())
        .lu()
        .solve(x)
        .ok_or_else(|| Error::SingularSystem("I - A is singular".into()))?;
    let orbit = matrix_power(&cayley_matrix(op)?, n) * resolvent_x;
    let lhs = (n as f64 + 1.0) * r.powf(n as f64) * y.dotc(&orbit).norm();
    let form = q.quadratic_form(x)?.max(0.0);
    let rhs = m * y.norm() * (form / (1.0 - r.powi(4))).sqrt();
    Ok(BoundCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + GUO_ZWART_SLACK),
    })
}
