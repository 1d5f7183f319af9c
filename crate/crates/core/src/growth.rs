//! The growth function `g`: increasing, log-convex, with a certified
//! constant `c > 1` such that `g(x + 2π) >= c g(x)` for `x >= x_growth`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::huge::HugeReal;

const TWO_PI: f64 = 2.0 * PI;
/// Shrink factor applied to the measured growth constant.
const C_SAFETY: f64 = 1.0 - 1e-9;
const C_GRID: usize = 10_000;
const C_SPAN: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrowthError {
    #[error("malformed growth profile: {0}")]
    Malformed(String),
    #[error("g is not strictly increasing (log-slope {slope} on segment {segment})")]
    NotIncreasing { segment: usize, slope: f64 },
    #[error("g' is not non-decreasing: log-slope drops from {left} to {right} at x = {x}")]
    DerivativeNotMonotone { x: f64, left: f64, right: f64 },
    #[error("growth constant c = {0} does not exceed 1")]
    NoGrowth(f64),
    #[error("{0} is not in the range of g")]
    OutOfRange(f64),
    #[error("x = {x} is below the certified threshold {threshold}")]
    BelowThreshold { x: f64, threshold: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum GrowthSpec {
    /// `g(x) = beta * exp(lambda * x)`.
    Exponential { beta: f64, lambda: f64 },
    /// `ln g` is piecewise linear through `(x, ln g(x))` breakpoints and
    /// continues affinely beyond the first and last one.
    LogConvexPolyline { breakpoints: Vec<(f64, f64)> },
}

impl GrowthSpec {
    pub fn exp() -> Self {
        GrowthSpec::Exponential { beta: 1.0, lambda: 1.0 }
    }
}

/// `ln g` as a list of knots and per-segment slopes. The exponential
/// variant is a single knot with equal slopes on both sides.
#[derive(Clone, Debug)]
struct LogPiecewise {
    xs: Vec<f64>,
    ls: Vec<f64>,
    /// `slopes[j]` is the slope left of knot `j`; `slopes[len]` is the right tail.
    slopes: Vec<f64>,
}

impl LogPiecewise {
    fn segment(&self, x: f64) -> usize {
        self.xs.partition_point(|&k| k <= x)
    }

    /// Index of the segment whose closure's right end is `x` (left-hand limit).
    fn segment_left(&self, x: f64) -> usize {
        self.xs.partition_point(|&k| k < x)
    }

    fn ln_g(&self, x: f64) -> f64 {
        let j = self.segment(x);
        let anchor = j.saturating_sub(1);
        self.ls[anchor] + self.slopes[j] * (x - self.xs[anchor])
    }

    fn invert_ln(&self, l: f64) -> f64 {
        let j = self.ls.partition_point(|&k| k <= l);
        let anchor = j.saturating_sub(1);
        self.xs[anchor] + (l - self.ls[anchor]) / self.slopes[j]
    }

    fn tail_slope(&self) -> f64 {
        self.slopes[self.slopes.len() - 1]
    }

    fn last(&self) -> (f64, f64) {
        let n = self.xs.len() - 1;
        (self.xs[n], self.ls[n])
    }
}

/// A validated growth function together with its growth constant.
#[derive(Clone, Debug)]
pub struct GrowthProfile {
    spec: GrowthSpec,
    shape: LogPiecewise,
    c: f64,
    x_growth: f64,
}

pub fn build_growth(spec: GrowthSpec, x_growth: f64) -> Result<GrowthProfile, GrowthError> {
    GrowthProfile::build(spec, x_growth)
}

impl GrowthProfile {
    pub fn build(spec: GrowthSpec, x_growth: f64) -> Result<Self, GrowthError> {
        if !x_growth.is_finite() {
            return Err(GrowthError::Malformed("x_growth must be finite".into()));
        }
        let shape = match &spec {
            GrowthSpec::Exponential { beta, lambda } => {
                if !(beta.is_finite() && *beta > 0.0 && lambda.is_finite()) {
                    return Err(GrowthError::Malformed("beta must be positive and finite".into()));
                }
                if *lambda <= 0.0 {
                    return Err(GrowthError::NotIncreasing { segment: 0, slope: *lambda });
                }
                LogPiecewise { xs: vec![0.0], ls: vec![beta.ln()], slopes: vec![*lambda, *lambda] }
            }
            GrowthSpec::LogConvexPolyline { breakpoints } => log_polyline(breakpoints)?,
        };
        let mut profile = Self { spec, shape, c: 0.0, x_growth };
        profile.c = profile.measure_c();
        if !(profile.c > 1.0) {
            return Err(GrowthError::NoGrowth(profile.c));
        }
        Ok(profile)
    }

    fn measure_c(&self) -> f64 {
        let mut inf = f64::INFINITY;
        let mut probe = |x: f64| {
            let r = (self.ln_g(x + TWO_PI) - self.ln_g(x)).exp();
            inf = inf.min(r);
        };
        for i in 0..=C_GRID {
            probe(self.x_growth + C_SPAN * i as f64 / C_GRID as f64);
        }
        // the ratio is piecewise monotone between the knots and their 2π-shifts
        for &k in &self.shape.xs {
            for x in [k, k - TWO_PI] {
                if x >= self.x_growth {
                    probe(x);
                }
            }
        }
        inf * C_SAFETY
    }

    pub fn spec(&self) -> &GrowthSpec {
        &self.spec
    }

    /// Certified growth constant `c > 1`.
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn x_growth(&self) -> f64 {
        self.x_growth
    }

    /// Points where `g'` jumps (empty for the exponential).
    pub fn breakpoints(&self) -> &[f64] {
        match self.spec {
            GrowthSpec::Exponential { .. } => &[],
            GrowthSpec::LogConvexPolyline { .. } => &self.shape.xs,
        }
    }

    /// Log-slope of `g` beyond the last breakpoint.
    pub fn tail_slope(&self) -> f64 {
        self.shape.tail_slope()
    }

    pub fn ln_g(&self, x: f64) -> f64 {
        self.shape.ln_g(x)
    }

    /// `g(x)`; overflows to `+inf` for very large `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.ln_g(x).exp()
    }

    /// Right-hand derivative `g'(x+)`.
    pub fn derivative(&self, x: f64) -> f64 {
        self.shape.slopes[self.shape.segment(x)] * self.eval(x)
    }

    /// Left-hand derivative `g'(x-)`; equals [`Self::derivative`] off breakpoints.
    pub fn derivative_left(&self, x: f64) -> f64 {
        self.shape.slopes[self.shape.segment_left(x)] * self.eval(x)
    }

    /// The `x` with `g(x) = v`.
    pub fn invert(&self, v: f64) -> Result<f64, GrowthError> {
        if !(v > 0.0) || !v.is_finite() {
            return Err(GrowthError::OutOfRange(v));
        }
        Ok(self.invert_ln(v.ln()))
    }

    /// The `x` with `ln g(x) = l`.
    pub fn invert_ln(&self, l: f64) -> f64 {
        self.shape.invert_ln(l)
    }

    /// `(c - 1)/(2π) g(x - 2π)`, a lower bound for `g'(x)` once `x >= x_growth + 2π`.
    pub fn gprime_lower(&self, x: f64) -> Result<f64, GrowthError> {
        let threshold = self.x_growth + TWO_PI;
        if x < threshold {
            return Err(GrowthError::BelowThreshold { x, threshold });
        }
        Ok((self.c - 1.0) / TWO_PI * self.eval(x - TWO_PI))
    }

    /// `C = min g(x) c^{-x/2π}` over one period starting at `x_growth`, so
    /// that `g(x) >= C c^{x/2π}` for `x >= x_growth`.
    pub fn envelope_constant(&self) -> f64 {
        let ln_c = self.c.ln();
        (0..=1000)
            .map(|i| self.x_growth + TWO_PI * i as f64 / 1000.0)
            .map(|x| self.ln_g(x) - x / TWO_PI * ln_c)
            .fold(f64::INFINITY, f64::min)
            .exp()
    }

    /// `ln g(x)` for a possibly huge `x`.
    pub fn ln_g_huge(&self, x: HugeReal) -> HugeReal {
        match x.as_plain() {
            Some(v) if v.abs() < 1e290 => HugeReal::from_f64(self.ln_g(v)),
            _ => {
                let (xk, lk) = self.shape.last();
                x.scale(self.tail_slope()).add(lk - self.tail_slope() * xk)
            }
        }
    }

    pub fn g_huge(&self, x: HugeReal) -> HugeReal {
        self.ln_g_huge(x).exp()
    }

    /// The `x` with `ln g(x) = l`, for a possibly huge `l`.
    pub fn invert_ln_huge(&self, l: HugeReal) -> HugeReal {
        match l.as_plain() {
            Some(v) if v.abs() < 1e290 => HugeReal::from_f64(self.invert_ln(v)),
            _ => {
                let (xk, lk) = self.shape.last();
                let s = self.tail_slope();
                l.add(s * xk - lk).scale(1.0 / s)
            }
        }
    }

    /// `g(x + 2π)/g(x)` for a possibly huge `x`.
    pub fn period_ratio_huge(&self, x: HugeReal) -> f64 {
        match x.as_plain() {
            Some(v) if v.abs() < 1e290 => (self.ln_g(v + TWO_PI) - self.ln_g(v)).exp(),
            _ => (TWO_PI * self.tail_slope()).exp(),
        }
    }
}

fn log_polyline(bp: &[(f64, f64)]) -> Result<LogPiecewise, GrowthError> {
    if bp.len() < 2 {
        return Err(GrowthError::Malformed("need at least two breakpoints".into()));
    }
    if bp.iter().any(|(x, l)| !(x.is_finite() && l.is_finite())) {
        return Err(GrowthError::Malformed("non-finite breakpoint".into()));
    }
    if bp.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(GrowthError::Malformed("breakpoints must be strictly increasing in x".into()));
    }
    let inner: Vec<f64> = bp.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    if let Some((segment, &slope)) = inner.iter().enumerate().find(|(_, s)| **s <= 0.0) {
        return Err(GrowthError::NotIncreasing { segment, slope });
    }
    for (j, w) in inner.windows(2).enumerate() {
        if w[1] < w[0] {
            return Err(GrowthError::DerivativeNotMonotone { x: bp[j + 1].0, left: w[0], right: w[1] });
        }
    }
    let mut slopes = Vec::with_capacity(inner.len() + 2);
    slopes.push(inner[0]);
    slopes.extend_from_slice(&inner);
    slopes.push(inner[inner.len() - 1]);
    Ok(LogPiecewise {
        xs: bp.iter().map(|p| p.0).collect(),
        ls: bp.iter().map(|p| p.1).collect(),
        slopes,
    })
}
