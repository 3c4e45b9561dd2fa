//! The shifted Lyapunov equation `(A − ξI)*Q + Q(A − ξI) = −I`, its integral
//! representation, resolvent energies and `ξ → 0+` scans.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{
    h_gamma, integrate, integrate_vec, BoundCheck, Bound, GridSpec, IdentityCheck, QuadOptions,
};
use crate::operators::{
    frac_power, min_hermitian_eigenvalue, norm2, CMatrix, CVector, MatrixOperator, OperatorHandle,
};

/// Smallest `ξ` accepted by limit scans.
pub const XI_FLOOR: f64 = 1e-8;
/// Relative slack for the trajectory bound.
pub const TRAJECTORY_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LyapunovMethod {
    Direct,
    Kronecker,
    Integral,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QForm {
    Dense(CMatrix),
    /// Diagonal entries of `Q` for a diagonal operator.
    Diagonal(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSolution {
    pub xi: f64,
    pub q: QForm,
    /// `‖(A−ξ)*Q + Q(A−ξ) + I‖₂`.
    pub residual: f64,
    pub method: LyapunovMethod,
}

impl LyapunovSolution {
    pub fn dim(&self) -> usize {
        match &self.q {
            QForm::Dense(m) => m.nrows(),
            QForm::Diagonal(d) => d.len(),
        }
    }

    /// `⟨x, Q x⟩` (real for self-adjoint `Q`).
    pub fn quadratic_form(&self, x: &CVector) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(match &self.q {
            QForm::Dense(m) => x.dotc(&(m * x)).re,
            QForm::Diagonal(d) => d.iter().zip(x.iter()).map(|(q, xk)| q * xk.norm_sqr()).sum(),
        })
    }

    pub fn dense(&self) -> CMatrix {
        match &self.q {
            QForm::Dense(m) => m.clone(),
            QForm::Diagonal(d) => {
                CMatrix::from_diagonal(&CVector::from_iterator(d.len(), d.iter().map(|v| Complex64::new(*v, 0.0))))
            }
        }
    }

    pub fn norm(&self) -> f64 {
        match &self.q {
            QForm::Dense(m) => norm2(m),
            QForm::Diagonal(d) => d.iter().fold(0.0, |a, v| a.max(v.abs())),
        }
    }

    /// `‖Q − Q*‖₂`.
    pub fn hermitian_defect(&self) -> f64 {
        match &self.q {
            QForm::Dense(m) => norm2(&(m - m.adjoint())),
            QForm::Diagonal(_) => 0.0,
        }
    }

    /// Smallest eigenvalue of the hermitian part of `Q`.
    pub fn min_eigenvalue(&self) -> f64 {
        match &self.q {
            QForm::Dense(m) => min_hermitian_eigenvalue(m),
            QForm::Diagonal(d) => d.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    /// Hermitian and PSD up to `10⁻¹⁰‖Q‖`.
    pub fn is_hermitian_psd(&self) -> bool {
        let scale = 1e-10 * self.norm();
        self.hermitian_defect() <= scale && self.min_eigenvalue() >= -scale
    }
}

fn check_xi(xi: f64) -> Result<()> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::DomainError(format!("xi must be positive, got {xi}")));
    }
    Ok(())
}

fn shifted(op: &MatrixOperator, xi: f64) -> CMatrix {
    op.entries() - CMatrix::from_diagonal_element(op.dim(), op.dim(), Complex64::new(xi, 0.0))
}

/// `‖S*Q + QS + I‖₂` with `S = A − ξI`.
pub fn lyapunov_residual(op: &MatrixOperator, xi: f64, q: &CMatrix) -> f64 {
    let s = shifted(op, xi);
    let r = s.adjoint() * q + q * &s + CMatrix::identity(op.dim(), op.dim());
    norm2(&r)
}

/// Bartels–Stewart solve on the complex Schur form `A = U T U*`.
pub fn lyapunov_solve_direct(op: &MatrixOperator, xi: f64) -> Result<LyapunovSolution> {
    check_xi(xi)?;
    let n = op.dim();
    let (u, t) = op.entries().clone().schur().unpack();
    let shift = Complex64::new(xi, 0.0);
    // (T−ξ)* X + X (T−ξ) = −I, column by column.
    let mut x = CMatrix::zeros(n, n);
    for j in 0..n {
        let rjj = t[(j, j)] - shift;
        let mut rhs = CVector::zeros(n);
        rhs[j] = Complex64::new(-1.0, 0.0);
        for l in 0..j {
            let rlj = t[(l, j)];
            if rlj != Complex64::new(0.0, 0.0) {
                for i in 0..n {
                    rhs[i] -= x[(i, l)] * rlj;
                }
            }
        }
        // lower-triangular (T−ξ)* + r_jj I, forward substitution
        for i in 0..n {
            let mut acc = rhs[i];
            for k in 0..i {
                acc -= t[(k, i)].conj() * x[(k, j)];
            }
            let diag = (t[(i, i)] - shift).conj() + rjj;
            if diag.norm() == 0.0 {
                return Err(Error::SingularSystem(format!("Lyapunov pivot vanishes at xi = {xi}")));
            }
            x[(i, j)] = acc / diag;
        }
    }
    let q = &u * x * u.adjoint();
    let residual = lyapunov_residual(op, xi, &q);
    Ok(LyapunovSolution {
        xi,
        q: QForm::Dense(q),
        residual,
        method: LyapunovMethod::Direct,
    })
}

/// The same equation as an `n² × n²` linear system; meant for small `n`.
pub fn lyapunov_solve_kronecker(op: &MatrixOperator, xi: f64) -> Result<LyapunovSolution> {
    check_xi(xi)?;
    let n = op.dim();
    let s = shifted(op, xi);
    let sa = s.adjoint();
    let mut k = CMatrix::zeros(n * n, n * n);
    // vec(S*Q + QS), column-major: row (i, j) ↦ i + j n, unknown Q_{ab} ↦ a + b n
    for j in 0..n {
        for i in 0..n {
            let row = i + j * n;
            for a in 0..n {
                k[(row, a + j * n)] += sa[(i, a)];
            }
            for b in 0..n {
                k[(row, i + b * n)] += s[(b, j)];
            }
        }
    }
    let mut rhs = CVector::zeros(n * n);
    for i in 0..n {
        rhs[i + i * n] = Complex64::new(-1.0, 0.0);
    }
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem(format!("Kronecker Lyapunov system at xi = {xi}")))?;
    let q = CMatrix::from_column_slice(n, n, sol.as_slice());
    let residual = lyapunov_residual(op, xi, &q);
    Ok(LyapunovSolution {
        xi,
        q: QForm::Dense(q),
        residual,
        method: LyapunovMethod::Kronecker,
    })
}

/// `Q_kk = 1 / (2(ξ − Re μ_k))`.
pub fn diagonal_lyapunov(eigenvalues: &[Complex64], xi: f64) -> Result<LyapunovSolution> {
    check_xi(xi)?;
    let q: Vec<f64> = eigenvalues.iter().map(|mu| 0.5 / (xi - mu.re)).collect();
    let residual = eigenvalues
        .iter()
        .zip(&q)
        .map(|(mu, qk)| (2.0 * (mu.re - xi) * qk + 1.0).abs())
        .fold(0.0, f64::max);
    Ok(LyapunovSolution {
        xi,
        q: QForm::Diagonal(q),
        residual,
        method: LyapunovMethod::ClosedForm,
    })
}

/// `Q(ξ) = ∫₀^∞ e^{−2ξt} T(t)*T(t) dt`.
///
/// Diagonal operators use the closed form. For matrices the integrand is
/// `V^{-*} [G_ij e^{t(μ̄_i + μ_j − 2ξ)}] V^{-1}` with `G = V*V`; the scalar
/// exponentials are integrated by adaptive quadrature.
pub fn lyapunov_integral(op: &OperatorHandle, xi: f64, tol: f64) -> Result<LyapunovSolution> {
    check_xi(xi)?;
    match op {
        OperatorHandle::Diagonal(d) => diagonal_lyapunov(d.eigenvalues(), xi),
        OperatorHandle::Matrix(m) => matrix_lyapunov_integral(m, xi, tol),
    }
}

fn matrix_lyapunov_integral(op: &MatrixOperator, xi: f64, tol: f64) -> Result<LyapunovSolution> {
    let n = op.dim();
    let mu = op.eigenvalues();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let rates: Vec<Complex64> = pairs
        .iter()
        .map(|&(i, j)| mu[i].conj() + mu[j] - Complex64::new(2.0 * xi, 0.0))
        .collect();
    let slowest = rates.iter().map(|z| -z.re).fold(f64::INFINITY, f64::min);
    let opts = QuadOptions {
        rel_tol: tol,
        abs_tol: 0.0,
        ..QuadOptions::default()
    }
    .tail_cut(2.0 / slowest);
    let quad = integrate_vec(
        |t, out: &mut [f64]| {
            for (k, z) in rates.iter().enumerate() {
                let e = (z * t).exp();
                out[2 * k] = e.re;
                out[2 * k + 1] = e.im;
            }
        },
        2 * pairs.len(),
        Bound::Finite(0.0),
        Bound::Infinity,
        &[],
        &opts,
    )?;
    let v = op.eigvecs();
    let g = v.adjoint() * v;
    let mut k = CMatrix::zeros(n, n);
    for (idx, &(i, j)) in pairs.iter().enumerate() {
        let integral = Complex64::new(quad.values[2 * idx], quad.values[2 * idx + 1]);
        k[(i, j)] = g[(i, j)] * integral;
        if i != j {
            k[(j, i)] = g[(j, i)] * integral.conj();
        }
    }
    let vinv = op.eigvecs_inv();
    let q = vinv.adjoint() * k * vinv;
    let residual = lyapunov_residual(op, xi, &q);
    Ok(LyapunovSolution {
        xi,
        q: QForm::Dense(q),
        residual,
        method: LyapunovMethod::Integral,
    })
}

/// `⟨x, Q(ξ)x⟩` via the closed form (diagonal) or the direct solver (matrix).
pub fn lyapunov_quadratic_form(op: &OperatorHandle, xi: f64, x: &CVector) -> Result<f64> {
    op.check_dim(x)?;
    match op {
        OperatorHandle::Diagonal(d) => diagonal_lyapunov(d.eigenvalues(), xi)?.quadratic_form(x),
        OperatorHandle::Matrix(m) => lyapunov_solve_direct(m, xi)?.quadratic_form(x),
    }
}

/// `∫_ℝ ‖R(ξ + iη, A) x‖² dη` by quadrature over `η`.
pub fn resolvent_energy(op: &OperatorHandle, xi: f64, x: &CVector, tol: f64) -> Result<f64> {
    check_xi(xi)?;
    op.check_dim(x)?;
    // Diagonal: only modes with x_k ≠ 0 contribute. Matrix: work in the eigenbasis.
    let (modes, coeffs, vecs): (Vec<Complex64>, Vec<Complex64>, Option<&CMatrix>) = match op {
        OperatorHandle::Diagonal(d) => {
            let (m, c) = d
                .eigenvalues()
                .iter()
                .zip(x.iter())
                .filter(|(_, xk)| xk.norm() > 0.0)
                .map(|(mu, xk)| (*mu, *xk))
                .unzip();
            (m, c, None)
        }
        OperatorHandle::Matrix(m) => {
            let c = m.eigvecs_inv() * x;
            (m.eigenvalues().to_vec(), c.iter().copied().collect(), Some(m.eigvecs()))
        }
    };
    if modes.is_empty() {
        return Ok(0.0);
    }
    let max_im = modes.iter().map(|mu| mu.im.abs()).fold(0.0, f64::max);
    let core = (10.0f64).max(10.0 * max_im);
    let mut breaks = Vec::with_capacity(3 * modes.len());
    for mu in &modes {
        let width = xi - mu.re;
        breaks.extend([mu.im - width, mu.im, mu.im + width]);
    }
    let opts = QuadOptions::with_rel_tol(tol).tail_cut(core);
    let q = integrate(
        |eta| {
            let z = Complex64::new(xi, eta);
            match vecs {
                None => modes
                    .iter()
                    .zip(&coeffs)
                    .map(|(mu, c)| (c / (z - mu)).norm_sqr())
                    .sum(),
                Some(v) => {
                    let w = CVector::from_iterator(
                        modes.len(),
                        modes.iter().zip(&coeffs).map(|(mu, c)| c / (z - mu)),
                    );
                    (v * w).norm_squared()
                }
            }
        },
        Bound::NegInfinity,
        Bound::Infinity,
        &breaks,
        &opts,
    )?;
    Ok(q.value)
}

/// `⟨x, Q(ξ)x⟩` against `(1/2π)∫‖R(ξ+iη, A)x‖²dη`.
pub fn plancherel_check(op: &OperatorHandle, xi: f64, x: &CVector) -> Result<IdentityCheck> {
    let lhs = lyapunov_quadratic_form(op, xi, x)?;
    let rhs = resolvent_energy(op, xi, x, 1e-10)? / (2.0 * PI);
    Ok(IdentityCheck::new(lhs, rhs))
}

/// `(ξ, value)` pairs ordered by decreasing `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSeries {
    entries: Vec<(f64, f64)>,
}

impl ScanSeries {
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.windows(2).any(|w| !(w[1].0 < w[0].0)) {
            return Err(Error::DomainError("scan xi values must strictly decrease".into()));
        }
        if let Some((xi, v)) = entries.iter().find(|(xi, v)| !(*xi > 0.0 && v.is_finite() && *v >= 0.0)) {
            return Err(Error::DomainError(format!("invalid scan entry ({xi}, {v})")));
        }
        Ok(ScanSeries { entries })
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    /// Last value over first value.
    pub fn decay_factor(&self) -> f64 {
        match (self.entries.first(), self.entries.last()) {
            (Some(f), Some(l)) if f.1 > 0.0 => l.1 / f.1,
            _ => f64::NAN,
        }
    }

    /// The second half of the scan is non-increasing.
    pub fn tail_monotone(&self) -> bool {
        let tail = &self.entries[self.entries.len() / 2..];
        tail.windows(2).all(|w| w[1].1 <= w[0].1)
    }

    /// Last value below a tenth of the first, with a monotone tail.
    pub fn vanishing(&self) -> bool {
        self.decay_factor() < 0.1 && self.tail_monotone()
    }
}

/// Scan `h_γ(ξ)·⟨y, Q(ξ)y⟩` with `y = (−A)^{−αγ}x` as `ξ` decreases over `grid`.
pub fn lyapunov_limit_scan(
    op: &OperatorHandle,
    alpha: f64,
    gamma_exp: f64,
    x: &CVector,
    grid: &GridSpec,
) -> Result<ScanSeries> {
    grid.validate()?;
    op.check_dim(x)?;
    if grid.start < XI_FLOOR || grid.stop >= 1.0 {
        return Err(Error::DomainError(format!(
            "scan grid must lie in [{XI_FLOOR}, 1), got [{}, {}]",
            grid.start, grid.stop
        )));
    }
    if !(gamma_exp > 0.0 && gamma_exp <= 0.5) {
        return Err(Error::DomainError(format!("gamma must lie in (0, 1/2], got {gamma_exp}")));
    }
    let power = alpha * gamma_exp;
    let y = match op {
        OperatorHandle::Diagonal(d) => CVector::from_iterator(
            x.len(),
            d.eigenvalues().iter().zip(x.iter()).map(|(mu, xk)| frac_power(*mu, power) * xk),
        ),
        OperatorHandle::Matrix(m) => m.apply_function(|mu| frac_power(mu, power)) * x,
    };
    let mut xis = grid.values();
    xis.reverse();
    let entries = xis
        .par_iter()
        .map(|&xi| {
            let form = lyapunov_quadratic_form(op, xi, &y)?;
            Ok((xi, h_gamma(gamma_exp, xi)? * form))
        })
        .collect::<Result<Vec<_>>>()?;
    ScanSeries::new(entries)
}

/// `‖T(t)x‖ ≤ M e^{ξt} / (2t√(πξ)) · (∫‖R(ξ+iη)x‖²dη)^{1/2}`.
pub fn trajectory_bound_check(op: &OperatorHandle, x: &CVector, xi: f64, t: f64, m: f64) -> Result<BoundCheck> {
    check_xi(xi)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::DomainError(format!("t must be positive, got {t}")));
    }
    let lhs = crate::semigroup::orbit_weighted_norm(op, t, 0.0, x)?;
    let energy = resolvent_energy(op, xi, x, 1e-10)?;
    let rhs = m * (xi * t).exp() / (2.0 * t * (PI * xi).sqrt()) * energy.sqrt();
    Ok(BoundCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + TRAJECTORY_SLACK),
    })
}

/// `max ‖T(t)‖` over a uniform grid of `[0, t_max]`: a lower estimate of the
/// semigroup bound (exactly 1 for diagonal operators).
pub fn semigroup_bound_estimate(op: &OperatorHandle, t_max: f64, points: usize) -> Result<f64> {
    match op {
        OperatorHandle::Diagonal(_) => Ok(1.0),
        OperatorHandle::Matrix(m) => {
            let steps = points.max(2);
            let values = (0..steps)
                .into_par_iter()
                .map(|i| {
                    let t = t_max * i as f64 / (steps - 1) as f64;
                    norm2(&crate::semigroup::semigroup_matrix(m, t, 0.0))
                })
                .collect::<Vec<_>>();
            Ok(values.into_iter().fold(1.0, f64::max))
        }
    }
}
