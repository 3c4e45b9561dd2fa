//! Scalar identities and bounds used as calibration checks.

use statrs::function::gamma::gamma;

use super::quad::{integrate, Bound, QuadOptions};
use super::{BoundCheck, IdentityCheck};
use crate::error::{Error, Result};

/// Rate function `h_γ(ξ)`: `ξ^(1−2γ)` for `γ < 1/2`, `1/ln(1/ξ)` for `γ = 1/2`.
pub fn h_gamma(gamma_exp: f64, xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::DomainError(format!("h_gamma needs 0 < xi < 1, got {xi}")));
    }
    if gamma_exp == 0.5 {
        Ok(1.0 / (1.0 / xi).ln())
    } else if gamma_exp > 0.0 && gamma_exp < 0.5 {
        Ok(xi.powf(1.0 - 2.0 * gamma_exp))
    } else {
        Err(Error::DomainError(format!(
            "h_gamma needs 0 < gamma <= 1/2, got {gamma_exp}"
        )))
    }
}

/// `∫₀^∞ e^{−2ξt} t^{−2γ} dt = Γ(1−2γ)/(2ξ)^(1−2γ)` for `0 ≤ γ < 1/2`.
pub fn gamma_tail_closed_form(gamma_exp: f64, xi: f64) -> Result<f64> {
    check_tail_args(gamma_exp, xi)?;
    let s = 1.0 - 2.0 * gamma_exp;
    Ok(gamma(s) / (2.0 * xi).powf(s))
}

/// The same integral by quadrature; after `t = (u/2ξ)` it is `∫ e^{−u}u^{−2γ}` scaled.
pub fn gamma_tail_quadrature(gamma_exp: f64, xi: f64) -> Result<f64> {
    check_tail_args(gamma_exp, xi)?;
    let s = 1.0 - 2.0 * gamma_exp;
    let p = -2.0 * gamma_exp;
    // Split at u = 1 so the singular piece and the exponential tail are separate.
    let opts = QuadOptions::with_rel_tol(1e-12).tail_cut(1.0);
    let head = integrate(
        |u| if u > 0.0 { (-u).exp() * u.powf(p) } else { 0.0 },
        Bound::Finite(0.0),
        Bound::Finite(1.0),
        &[],
        &opts,
    )?;
    let tail = integrate(|u| (-u).exp() * u.powf(p), Bound::Finite(1.0), Bound::Infinity, &[], &opts)?;
    Ok((head.value + tail.value) / (2.0 * xi).powf(s))
}

fn check_tail_args(gamma_exp: f64, xi: f64) -> Result<()> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::DomainError(format!("xi must be positive, got {xi}")));
    }
    if !(0.0..0.5).contains(&gamma_exp) {
        return Err(Error::DomainError(format!(
            "gamma tail needs 0 <= gamma < 1/2, got {gamma_exp}"
        )));
    }
    Ok(())
}

pub fn gamma_tail_check(gamma_exp: f64, xi: f64) -> Result<IdentityCheck> {
    Ok(IdentityCheck::new(
        gamma_tail_quadrature(gamma_exp, xi)?,
        gamma_tail_closed_form(gamma_exp, xi)?,
    ))
}

/// `∫_τ^∞ e^{−t}/t dt ≤ e^{−τ} ln(1 + 1/τ)`.
pub fn gautschi_bound_check(tau: f64) -> Result<BoundCheck> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::DomainError(format!("tau must be positive, got {tau}")));
    }
    // Integrate e^{−(t−τ)}/t from τ and rescale, so large τ does not underflow.
    let opts = QuadOptions::with_rel_tol(1e-12).tail_cut(tau.max(1.0));
    let q = integrate(
        |t| (-(t - tau)).exp() / t,
        Bound::Finite(tau),
        Bound::Infinity,
        &[],
        &opts,
    )?;
    let lhs = q.value;
    let rhs = (1.0 / tau).ln_1p();
    Ok(BoundCheck::scaled(lhs, rhs, (-tau).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gamma_at_half_is_sqrt_pi() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn h_gamma_branches() {
        assert!((h_gamma(0.25, 0.01).unwrap() - 0.1).abs() < 1e-15);
        assert!((h_gamma(0.5, (-2.0f64).exp()).unwrap() - 0.5).abs() < 1e-15);
        assert!(h_gamma(0.6, 0.1).is_err());
        assert!(h_gamma(0.25, 1.0).is_err());
    }

    #[test]
    fn gamma_tail_matches() {
        for (g, xi) in [(0.0, 0.3), (0.25, 1e-3), (0.4, 2.0)] {
            let c = gamma_tail_check(g, xi).unwrap();
            assert!(c.rel_err < 1e-9, "{g} {xi}: {c:?}");
        }
    }

    #[test]
    fn gautschi_holds_on_a_range() {
        for tau in [1e-3, 0.1, 1.0, 10.0, 500.0] {
            let b = gautschi_bound_check(tau).unwrap();
            assert!(b.holds, "{tau}: {b:?}");
        }
        // τ = 1: E₁(1) = 0.219383934395520...
        let b = gautschi_bound_check(1.0).unwrap();
        assert!((b.lhs - 0.219_383_934_395_520_3).abs() < 1e-11);
    }
}
