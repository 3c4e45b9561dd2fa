//! Globally adaptive Gauss–Kronrod (7/15) quadrature for scalar and
//! vector-valued integrands on finite, semi-infinite and infinite intervals.
//!
//! Infinite ranges are split into a finite core and tails; a tail `[c, ∞)`
//! is mapped to `s ∈ (0, 1]` by `x = c/s`, `dx = c/s² ds`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Absolute error floor for every quadrature.
pub const ABS_FLOOR: f64 = 1e-14;
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 5000;
/// Default length of the finite core before an infinite tail starts.
pub const DEFAULT_TAIL_CUT: f64 = 10.0;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    NegInfinity,
    Finite(f64),
    Infinity,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub tail_cut: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-10,
            abs_tol: ABS_FLOOR,
            max_subdivisions: DEFAULT_MAX_SUBDIVISIONS,
            tail_cut: DEFAULT_TAIL_CUT,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn tail_cut(mut self, cut: f64) -> Self {
        self.tail_cut = cut;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VecQuadrature {
    pub values: Vec<f64>,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    /// `x = c/s`
    RightTail(f64),
    /// `x = −c/s`
    LeftTail(f64),
}

impl Map {
    #[inline]
    fn apply(self, s: f64) -> (f64, f64) {
        match self {
            Map::Identity => (s, 1.0),
            Map::RightTail(c) => (c / s, c / (s * s)),
            Map::LeftTail(c) => (-c / s, c / (s * s)),
        }
    }
}

struct Interval {
    a: f64,
    b: f64,
    map: Map,
    values: Vec<f64>,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

struct Kronrod<'f, F> {
    f: &'f F,
    dim: usize,
    samples: Vec<Vec<f64>>,
}

impl<F> Kronrod<'_, F>
where
    F: Fn(f64, &mut [f64]),
{
    fn rule(&mut self, a: f64, b: f64, map: Map) -> Interval {
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        // samples[0] = center, samples[2j+1] / samples[2j+2] = center ∓ half·XGK[j]
        for (idx, sample) in self.samples.iter_mut().enumerate() {
            let s = if idx == 0 {
                center
            } else {
                let j = (idx - 1) / 2;
                let sign = if idx % 2 == 1 { -1.0 } else { 1.0 };
                center + sign * half * XGK[j]
            };
            let (x, w) = map.apply(s);
            (self.f)(x, sample);
            for v in sample.iter_mut() {
                *v *= w;
            }
        }

        let mut values = vec![0.0; self.dim];
        let mut error: f64 = 0.0;
        for c in 0..self.dim {
            let fc = self.samples[0][c];
            let mut resk = WGK[7] * fc;
            let mut resg = WG[3] * fc;
            let mut resabs = WGK[7] * fc.abs();
            for j in 0..7 {
                let f1 = self.samples[2 * j + 1][c];
                let f2 = self.samples[2 * j + 2][c];
                resk += WGK[j] * (f1 + f2);
                resabs += WGK[j] * (f1.abs() + f2.abs());
                if j % 2 == 1 {
                    resg += WG[j / 2] * (f1 + f2);
                }
            }
            let mean = 0.5 * resk;
            let mut resasc = WGK[7] * (fc - mean).abs();
            for j in 0..7 {
                let f1 = self.samples[2 * j + 1][c];
                let f2 = self.samples[2 * j + 2][c];
                resasc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
            }
            let h = half.abs();
            let (resk, resabs, resasc) = (resk * half, resabs * h, resasc * h);
            let mut err = ((resk - resg * half).abs()).max(0.0);
            if resasc != 0.0 && err != 0.0 {
                err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
            }
            if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
                err = err.max(50.0 * f64::EPSILON * resabs);
            }
            if !resk.is_finite() || !err.is_finite() {
                err = f64::INFINITY;
            }
            values[c] = resk;
            error = error.max(err);
        }
        Interval {
            a,
            b,
            map,
            values,
            error,
        }
    }
}

fn segments(lower: Bound, upper: Bound, breakpoints: &[f64], cut: f64) -> Result<Vec<(f64, f64, Map)>> {
    if !(cut > 0.0) {
        return Err(Error::DomainError("tail cut must be positive".into()));
    }
    let (core_lo, left_tail) = match lower {
        Bound::Finite(a) => (a, None),
        Bound::NegInfinity => {
            let c = match upper {
                Bound::Finite(b) if b < 0.0 => -b + cut,
                _ => cut,
            };
            (-c, Some(c))
        }
        Bound::Infinity => return Err(Error::DomainError("lower limit cannot be +inf".into())),
    };
    let (core_hi, right_tail) = match upper {
        Bound::Finite(b) => (b, None),
        Bound::Infinity => {
            let c = if core_lo >= 0.0 { core_lo + cut } else { cut };
            (c, Some(c))
        }
        Bound::NegInfinity => return Err(Error::DomainError("upper limit cannot be -inf".into())),
    };
    if !(core_lo.is_finite() && core_hi.is_finite()) || core_hi < core_lo {
        return Err(Error::DomainError(format!(
            "invalid integration range [{core_lo}, {core_hi}]"
        )));
    }

    let mut pts = vec![core_lo];
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|p| p.is_finite() && *p > core_lo && *p < core_hi)
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(core_hi);

    let mut out = Vec::new();
    if let Some(c) = left_tail {
        out.push((0.0, 1.0, Map::LeftTail(c)));
    }
    for w in pts.windows(2) {
        if w[1] > w[0] {
            out.push((w[0], w[1], Map::Identity));
        }
    }
    if let Some(c) = right_tail {
        out.push((0.0, 1.0, Map::RightTail(c)));
    }
    Ok(out)
}

/// Vector-valued integral of `f(x, out)` over `[lower, upper]`; the error is
/// measured in the max-norm over components.
pub fn integrate_vec<F>(
    f: F,
    dim: usize,
    lower: Bound,
    upper: Bound,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<VecQuadrature>
where
    F: Fn(f64, &mut [f64]),
{
    let mut rule = Kronrod {
        f: &f,
        dim,
        samples: vec![vec![0.0; dim]; 15],
    };
    let mut heap = BinaryHeap::new();
    let mut settled: Vec<Interval> = Vec::new();
    for (a, b, map) in segments(lower, upper, breakpoints, opts.tail_cut)? {
        heap.push(rule.rule(a, b, map));
    }

    let mut subdivisions = 0;
    loop {
        let mut total = vec![0.0; dim];
        let mut error = 0.0;
        for iv in heap.iter().chain(settled.iter()) {
            for (t, v) in total.iter_mut().zip(&iv.values) {
                *t += v;
            }
            error += iv.error;
        }
        let scale = total.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let target = (opts.rel_tol * scale).max(opts.abs_tol);
        if error <= target {
            return Ok(VecQuadrature {
                values: total,
                error,
            });
        }
        if subdivisions >= opts.max_subdivisions {
            return Err(Error::NoConvergence {
                subdivisions,
                error,
            });
        }
        let worst = match heap.pop() {
            Some(iv) => iv,
            None => {
                return Err(Error::NoConvergence {
                    subdivisions,
                    error,
                })
            }
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval at floating-point resolution: keep it as is.
            settled.push(worst);
            continue;
        }
        heap.push(rule.rule(worst.a, mid, worst.map));
        heap.push(rule.rule(mid, worst.b, worst.map));
        subdivisions += 1;
    }
}

pub fn integrate<F>(
    f: F,
    lower: Bound,
    upper: Bound,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    let r = integrate_vec(|x, out: &mut [f64]| out[0] = f(x), 1, lower, upper, breakpoints, opts)?;
    Ok(Quadrature {
        value: r.values[0],
        error: r.error,
    })
}

/// `∫_a^b f` to relative tolerance `tol` (absolute floor `ABS_FLOOR`).
pub fn adaptive_quad<F>(f: F, a: f64, b: Bound, tol: f64) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    integrate(f, Bound::Finite(a), b, &[], &QuadOptions::with_rel_tol(tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exponential_on_half_line() {
        let q = adaptive_quad(|t| (-t).exp(), 0.0, Bound::Infinity, 1e-12).unwrap();
        assert!((q.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lorentzian_on_real_line() {
        let xi = 0.5;
        let q = integrate(
            |eta| 1.0 / (xi * xi + eta * eta),
            Bound::NegInfinity,
            Bound::Infinity,
            &[],
            &QuadOptions::with_rel_tol(1e-12),
        )
        .unwrap();
        assert!((q.value - 2.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫₀^∞ e^{-t} t^{-1/2} dt = Γ(1/2) = √π
        let q = adaptive_quad(|t| (-t).exp() / t.sqrt(), 0.0, Bound::Infinity, 1e-12).unwrap();
        assert!((q.value - PI.sqrt()).abs() < 1e-8, "{}", q.value);
    }

    #[test]
    fn finite_interval_polynomial_is_exact() {
        let q = adaptive_quad(|x| x.powi(5) - 2.0 * x, -1.0, Bound::Finite(2.0), 1e-12).unwrap();
        assert!((q.value - (64.0 / 6.0 - 1.0 / 6.0 - 3.0)).abs() < 1e-13);
    }

    #[test]
    fn vector_integrand_with_breakpoints() {
        // Narrow Lorentzians centred on the breakpoints.
        let centers = [-3.0, 1.0, 7.0];
        let width = 1e-3;
        let q = integrate_vec(
            |x, out: &mut [f64]| {
                for (o, c) in out.iter_mut().zip(centers) {
                    *o = 1.0 / (width * width + (x - c) * (x - c));
                }
            },
            3,
            Bound::NegInfinity,
            Bound::Infinity,
            &centers,
            &QuadOptions::with_rel_tol(1e-10).tail_cut(20.0),
        )
        .unwrap();
        for v in q.values {
            assert!((v - PI / width).abs() < 1e-7 * PI / width);
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = QuadOptions {
            max_subdivisions: 3,
            ..QuadOptions::with_rel_tol(1e-14)
        };
        let r = integrate(|x| (50.0 * x).sin().abs(), Bound::Finite(0.0), Bound::Finite(10.0), &[], &opts);
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
    }
}
