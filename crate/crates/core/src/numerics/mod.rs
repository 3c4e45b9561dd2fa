//! Quadrature, fitting and scalar special functions.

mod fit;
pub mod quad;
mod special;

pub use fit::{
    default_window, linear_regression, loglog_fit, loglog_fit_logs, DecayFit, GridSpec, LineFit,
    DEFAULT_DROP_FRACTION, POWER_LAW_R2,
};
pub use quad::{adaptive_quad, integrate, integrate_vec, Bound, QuadOptions, Quadrature, VecQuadrature};
pub use special::{
    gamma_tail_check, gamma_tail_closed_form, gamma_tail_quadrature, gautschi_bound_check, h_gamma,
};

use serde::{Deserialize, Serialize};

/// Relative slack allowed when comparing a computed left side to a bound.
pub const BOUND_SLACK: f64 = 1e-9;

/// `lhs ≤ rhs` up to `BOUND_SLACK` relative slack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl BoundCheck {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let holds = lhs.is_finite() && rhs.is_finite() && lhs <= rhs * (1.0 + BOUND_SLACK) + f64::MIN_POSITIVE;
        BoundCheck { lhs, rhs, holds }
    }

    /// Both sides multiplied by a common positive factor after the comparison.
    pub fn scaled(lhs: f64, rhs: f64, factor: f64) -> Self {
        let holds = BoundCheck::new(lhs, rhs).holds;
        BoundCheck {
            lhs: lhs * factor,
            rhs: rhs * factor,
            holds,
        }
    }

    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// Two routes to the same quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

impl IdentityCheck {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let rel_err = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
        IdentityCheck { lhs, rhs, rel_err }
    }

    pub fn within(&self, tol: f64) -> bool {
        self.rel_err <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// INCONCLUSIVE when the fit is not a confirmed power law or a maximizer
    /// sat at the truncation edge; otherwise PASS iff `meets_guarantee`.
    pub fn for_rate(fit: &DecayFit, interior: bool, meets_guarantee: bool) -> Self {
        if !fit.power_law_confirmed() || !interior {
            Verdict::Inconclusive
        } else if meets_guarantee {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}
