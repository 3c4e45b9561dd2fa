//! The perturbation `A + rA⁻¹`: spectrum map, resolvent factorization,
//! perturbed Lyapunov inequality and decay-rate guarantees.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lyapunov::lyapunov_solve_direct;
use crate::numerics::{GridSpec, IdentityCheck, Verdict};
use crate::operators::{
    apply_resolvent, min_hermitian_eigenvalue, norm2, CMatrix, CVector, DiagonalOperator, MatrixOperator,
    OperatorHandle, SpectrumFormula, SpectrumModel,
};
use crate::semigroup::{semigroup_decay_run, DecayRun};

/// Default `ε` in the `α < 2` guarantee `O(t^{−(1−ε)})`.
pub const DEFAULT_EPSILON: f64 = 0.05;
/// Allowed excess of a fitted exponent over its guarantee.
pub const RATE_TOLERANCE: f64 = 0.05;
/// Hermitian-part eigenvalue floor for the perturbed Lyapunov inequality.
pub const PERTURBED_LYAPUNOV_FLOOR: f64 = -1e-8;

#[derive(Debug, Clone)]
pub struct PerturbedOperator {
    pub base: OperatorHandle,
    pub r: f64,
    pub perturbed: OperatorHandle,
}

/// `A ↦ A + rA⁻¹`.
pub fn perturb(op: &OperatorHandle, r: f64) -> Result<PerturbedOperator> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::DomainError(format!("r must be finite and >= 0, got {r}")));
    }
    let perturbed = if r == 0.0 {
        op.clone()
    } else {
        match op {
            OperatorHandle::Diagonal(d) => {
                let model = match d.model() {
                    SpectrumModel::Formula { formula, truncation } => SpectrumModel::Formula {
                        formula: SpectrumFormula::Perturbed {
                            base: Box::new(formula.clone()),
                            r,
                        },
                        truncation: *truncation,
                    },
                    SpectrumModel::Explicit(points) => {
                        SpectrumModel::Explicit(points.iter().map(|mu| mu + r / mu).collect())
                    }
                };
                DiagonalOperator::new(model)?.with_auto_refine(d.auto_refine()).into()
            }
            OperatorHandle::Matrix(m) => {
                let inv = m.inverse()?;
                MatrixOperator::new(m.entries() + inv * Complex64::new(r, 0.0))?.into()
            }
        }
    };
    Ok(PerturbedOperator {
        base: op.clone(),
        r,
        perturbed,
    })
}

fn apply_operator(op: &OperatorHandle, x: &CVector) -> CVector {
    match op {
        OperatorHandle::Diagonal(d) => {
            CVector::from_iterator(x.len(), d.eigenvalues().iter().zip(x.iter()).map(|(mu, xk)| mu * xk))
        }
        OperatorHandle::Matrix(m) => m.entries() * x,
    }
}

/// `(iω − A − A⁻¹)⁻¹x` directly against `−A R(iω₁,A) R(iω₂,A) x` with
/// `ω₁,₂ = ω/2 ± √(1 + ω²/4)`. Reported sides are vector norms; `rel_err`
/// is `‖lhs − rhs‖ / ‖lhs‖`.
pub fn resolvent_factorization_check(op: &OperatorHandle, omega: f64, x: &CVector) -> Result<IdentityCheck> {
    op.check_dim(x)?;
    let perturbed = perturb(op, 1.0)?.perturbed;
    let lhs = apply_resolvent(&perturbed, Complex64::new(0.0, omega), x)?;
    let root = (1.0 + 0.25 * omega * omega).sqrt();
    let (w1, w2) = (0.5 * omega + root, 0.5 * omega - root);
    let inner = apply_resolvent(op, Complex64::new(0.0, w2), x)?;
    let outer = apply_resolvent(op, Complex64::new(0.0, w1), &inner)?;
    let rhs = -apply_operator(op, &outer);
    let scale = lhs.norm();
    Ok(IdentityCheck {
        lhs: scale,
        rhs: rhs.norm(),
        rel_err: if scale == 0.0 { (&lhs - &rhs).norm() } else { (&lhs - &rhs).norm() / scale },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbedLyapunovCheck {
    pub xi: f64,
    pub kappa: f64,
    /// `‖A⁻¹‖²`; the inequality is only guaranteed for `κ` above it.
    pub kappa_threshold: f64,
    pub kappa_too_small: bool,
    /// Smallest eigenvalue of the hermitian part of
    /// `S = −[(P−ξ)*Q₁ + Q₁(P−ξ)] − I`, `P = A + A⁻¹`, `Q₁ = Q(ξ/(1+κ))`.
    pub min_eig: f64,
    pub holds: bool,
}

pub fn perturbed_lyapunov_check(op: &MatrixOperator, xi: f64, kappa: f64) -> Result<PerturbedLyapunovCheck> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::DomainError(format!("xi must be positive, got {xi}")));
    }
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::DomainError(format!("kappa must be finite and >= 0, got {kappa}")));
    }
    let n = op.dim();
    let inv = op.inverse()?;
    let kappa_threshold = norm2(&inv).powi(2);
    let q1 = lyapunov_solve_direct(op, xi / (1.0 + kappa))?.dense();
    let shifted = op.entries() + inv - CMatrix::from_diagonal_element(n, n, Complex64::new(xi, 0.0));
    let s = -(shifted.adjoint() * &q1 + &q1 * &shifted) - CMatrix::identity(n, n);
    let min_eig = min_hermitian_eigenvalue(&s);
    Ok(PerturbedLyapunovCheck {
        xi,
        kappa,
        kappa_threshold,
        kappa_too_small: kappa <= kappa_threshold,
        min_eig,
        holds: min_eig >= PERTURBED_LYAPUNOV_FLOOR,
    })
}

/// Guaranteed decay of `‖T_r(t)(−A−rA⁻¹)^{−α}‖` when the base decays like `1/t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Guarantee {
    pub exponent: f64,
    pub log_factor: bool,
}

pub fn rate_guarantee(alpha: f64, epsilon: f64) -> Guarantee {
    if alpha > 2.0 {
        Guarantee {
            exponent: -1.0,
            log_factor: false,
        }
    } else if alpha == 2.0 {
        Guarantee {
            exponent: -1.0,
            log_factor: true,
        }
    } else {
        Guarantee {
            exponent: -(1.0 - epsilon),
            log_factor: false,
        }
    }
}

impl Guarantee {
    /// Local log-log slope of the guarantee at `t_mid`: `log t / t` looks like
    /// `t^{−1 + 1/ln t}`.
    pub fn effective_exponent(&self, t_mid: f64) -> f64 {
        if self.log_factor {
            self.exponent + 1.0 / t_mid.ln()
        } else {
            self.exponent
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedRate {
    pub alpha: f64,
    pub r: f64,
    pub base: DecayRun,
    pub perturbed: DecayRun,
    pub guarantee: Guarantee,
    pub effective_exponent: f64,
    pub verdict: Verdict,
}

/// Fits the decay of the perturbed semigroup at weight `α` and compares it
/// with the guarantee for `α`.
pub fn perturbed_rate_report(
    op: &OperatorHandle,
    alpha: f64,
    r: f64,
    grid: &GridSpec,
    epsilon: f64,
) -> Result<PerturbedRate> {
    if !(alpha > 0.0) {
        return Err(Error::DomainError(format!("alpha must be positive, got {alpha}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::DomainError(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let base = semigroup_decay_run(op, alpha, grid)?;
    let p = perturb(op, r)?;
    let perturbed = semigroup_decay_run(&p.perturbed, alpha, grid)?;
    let guarantee = rate_guarantee(alpha, epsilon);
    let t_mid = (perturbed.fit.window.0 * perturbed.fit.window.1).sqrt();
    let effective_exponent = guarantee.effective_exponent(t_mid);
    let verdict = Verdict::for_rate(
        &perturbed.fit,
        perturbed.interior(),
        perturbed.fit.exponent <= effective_exponent + RATE_TOLERANCE,
    );
    Ok(PerturbedRate {
        alpha,
        r,
        base,
        perturbed,
        guarantee,
        effective_exponent,
        verdict,
    })
}

/// `min_ω dist(iω, σ(A + A⁻¹))` over `omegas`.
pub fn imaginary_axis_gap(op: &OperatorHandle, omegas: &[f64]) -> Result<f64> {
    let p = perturb(op, 1.0)?.perturbed;
    Ok(omegas
        .iter()
        .map(|w| p.spectrum_distance(Complex64::new(0.0, *w)))
        .fold(f64::INFINITY, f64::min))
}

/// `max_k |(μ_k + r/μ_k) − √r(ν_k + 1/ν_k)|`, `ν_k = μ_k/√r`.
pub fn scaling_identity_error(eigenvalues: &[Complex64], r: f64) -> f64 {
    let s = r.sqrt();
    eigenvalues
        .iter()
        .map(|mu| {
            let nu = mu / s;
            let direct = mu + r / mu;
            let scaled = (nu + 1.0 / nu) * s;
            (direct - scaled).norm() / direct.norm().max(1.0)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn perturbed_spectra() {
        let scalar: OperatorHandle = DiagonalOperator::from_eigenvalues(vec![c(-1.0, 0.0)]).unwrap().into();
        assert_eq!(perturb(&scalar, 1.0).unwrap().perturbed.eigenvalues()[0], c(-2.0, 0.0));

        let op: OperatorHandle = DiagonalOperator::paper_example(4).unwrap().into();
        let p = perturb(&op, 1.0).unwrap();
        assert!((p.perturbed.eigenvalues()[0] - c(-1.5, 0.5)).norm() < 1e-15);
        let same = perturb(&op, 0.0).unwrap();
        assert_eq!(same.perturbed.eigenvalues(), op.eigenvalues());
    }

    #[test]
    fn factorization_on_scalar_at_zero() {
        let op: OperatorHandle = DiagonalOperator::from_eigenvalues(vec![c(-1.0, 0.0)]).unwrap().into();
        let chk = resolvent_factorization_check(&op, 0.0, &CVector::from_element(1, c(1.0, 0.0))).unwrap();
        assert!((chk.lhs - 0.5).abs() < 1e-15);
        assert!(chk.rel_err < 1e-12);
    }

    #[test]
    fn factorization_on_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m: OperatorHandle = random::random_stable_operator(8, 0.1, &mut rng).into();
        let x = random::random_vector(8, &mut rng);
        let chk = resolvent_factorization_check(&m, 1.0, &x).unwrap();
        assert!(chk.rel_err < 1e-8, "{chk:?}");
    }

    #[test]
    fn scalar_perturbed_lyapunov_chain() {
        let op = MatrixOperator::new(CMatrix::from_element(1, 1, c(-1.0, 0.0))).unwrap();
        let chk = perturbed_lyapunov_check(&op, 0.5, 2.0).unwrap();
        assert!((chk.min_eig - 8.0 / 7.0).abs() < 1e-13);
        assert!(chk.holds);
        assert!(!chk.kappa_too_small);
        let small = perturbed_lyapunov_check(&op, 0.5, 0.5).unwrap();
        assert!(small.kappa_too_small);
    }

    #[test]
    fn guarantees() {
        assert_eq!(rate_guarantee(3.0, 0.05).exponent, -1.0);
        assert!(rate_guarantee(2.0, 0.05).log_factor);
        assert!((rate_guarantee(1.0, 0.05).exponent + 0.95).abs() < 1e-15);
        let g = rate_guarantee(2.0, 0.05);
        assert!((g.effective_exponent(std::f64::consts::E) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn scaling_identity() {
        let op = DiagonalOperator::paper_example(50).unwrap();
        assert!(scaling_identity_error(op.eigenvalues(), 3.7) < 1e-12);
    }
}
