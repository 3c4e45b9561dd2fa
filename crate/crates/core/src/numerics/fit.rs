//! Grids, least-squares lines and log-log power-law fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `r²` at or above which a log-log fit counts as a confirmed power law.
pub const POWER_LAW_R2: f64 = 0.99;
/// Fraction of leading grid points dropped by the default fit window.
pub const DEFAULT_DROP_FRACTION: f64 = 0.1;

/// Geometric grid of `points` values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        let g = GridSpec { start, stop, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start > 0.0 && self.stop.is_finite() && self.stop > self.start) {
            return Err(Error::DomainError(format!(
                "grid needs 0 < start < stop, got [{}, {}]",
                self.start, self.stop
            )));
        }
        if self.points < 3 {
            return Err(Error::InsufficientPoints {
                needed: 3,
                found: self.points,
            });
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let (a, b) = (self.start.ln(), self.stop.ln());
        let m = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    self.start
                } else if i == self.points - 1 {
                    self.stop
                } else {
                    (a + (b - a) * i as f64 / m).exp()
                }
            })
            .collect()
    }

    /// Grid values rounded to integers, deduplicated (at least 1).
    pub fn integer_values(&self) -> Vec<u64> {
        let mut out: Vec<u64> = self
            .values()
            .into_iter()
            .map(|v| v.round().max(1.0) as u64)
            .collect();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_regression(points: &[(f64, f64)]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(Error::InsufficientPoints {
            needed: 2,
            found: points.len(),
        });
    }
    if points.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
        return Err(Error::DegenerateWindow("non-finite point in fit".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in points {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if !(sxx > 0.0) {
        return Err(Error::DegenerateWindow("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

/// `value ≈ C·arg^exponent` fitted on `window`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub log_constant: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
}

impl DecayFit {
    pub fn constant(&self) -> f64 {
        self.log_constant.exp()
    }

    pub fn power_law_confirmed(&self) -> bool {
        self.r_squared >= POWER_LAW_R2
    }
}

/// Window that drops the first 10% of the (sorted) abscissae.
pub fn default_window(args: &[f64]) -> Result<(f64, f64)> {
    let mut sorted: Vec<f64> = args.iter().copied().filter(|a| a.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    if sorted.len() < 2 {
        return Err(Error::InsufficientPoints {
            needed: 2,
            found: sorted.len(),
        });
    }
    let skip = ((sorted.len() as f64) * DEFAULT_DROP_FRACTION).floor() as usize;
    let skip = skip.min(sorted.len() - 2);
    Ok((sorted[skip], sorted[sorted.len() - 1]))
}

/// Fit on pairs `(arg, ln value)`; useful when values underflow `f64`.
pub fn loglog_fit_logs(log_points: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<DecayFit> {
    let window = match window {
        Some(w) => w,
        None => default_window(&log_points.iter().map(|p| p.0).collect::<Vec<_>>())?,
    };
    if !(window.0 > 0.0 && window.1 >= window.0) {
        return Err(Error::DegenerateWindow(format!(
            "fit window [{}, {}] must lie in (0, ∞)",
            window.0, window.1
        )));
    }
    let pts: Vec<(f64, f64)> = log_points
        .iter()
        .filter(|(a, _)| *a >= window.0 && *a <= window.1)
        .map(|(a, lv)| (a.ln(), *lv))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            found: pts.len(),
        });
    }
    if let Some((a, _)) = pts.iter().find(|(_, lv)| !lv.is_finite()) {
        return Err(Error::DegenerateWindow(format!(
            "non-positive or non-finite value at argument {}",
            a.exp()
        )));
    }
    let line = linear_regression(&pts)?;
    Ok(DecayFit {
        exponent: line.slope,
        log_constant: line.intercept,
        r_squared: line.r_squared,
        window,
        points: pts.len(),
    })
}

/// Least squares on `(ln arg, ln value)` restricted to `window`
/// (default: drop the first 10% of arguments).
pub fn loglog_fit(points: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<DecayFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|(a, v)| (*a, if *v > 0.0 { v.ln() } else { f64::NAN }))
        .collect();
    loglog_fit_logs(&logs, window)
}
