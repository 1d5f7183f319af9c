//! The curve map `h`: a biLipschitz parametrisation of a curve from `-i` to
//! `i` through the right half-disc, extended to all of ℝ by
//! `h(y + π) = -h(y)`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::Mat2;

/// Default number of samples used to validate a curve and estimate its constants.
pub const DEFAULT_CURVE_GRID: usize = 4096;

/// Shrink factor applied to `h_min`, `c_h` and the lower Lipschitz bound.
const SAFETY: f64 = 1.0 - 1e-6;
const ENDPOINT_TOL: f64 = 1e-12;
const DEGENERATE_LIP: f64 = 1e-9;
/// Subgrid used for the all-pairs lower Lipschitz estimate.
const PAIR_GRID: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("malformed curve: {0}")]
    Malformed(String),
    #[error("curve must start at (-pi/2, -i) and end at (pi/2, i)")]
    EndpointMismatch,
    #[error("curve point {index} ({point}) is outside {{Re z > 0, |z| <= 1}}")]
    PointOutsideHalfDisc { index: usize, point: Complex64 },
    #[error("argument of h is not strictly increasing near y = {y}")]
    NonMonotoneArgument { y: f64 },
    #[error("lower Lipschitz bound {0:e} is degenerate")]
    DegenerateLipschitz(f64),
    #[error("h is not differentiable at y = {0}")]
    NotDifferentiableHere(f64),
}

/// A point of the curve table: parameter `y` in `[-π/2, π/2]` and its image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveVertex {
    pub y: f64,
    pub point: Complex64,
}

impl CurveVertex {
    pub fn new(y: f64, re: f64, im: f64) -> Self {
        Self { y, point: Complex64::new(re, im) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CurveSpec {
    /// `h(y) = cos y + i sin y`.
    UnitCircle,
    /// Vertex list, linearly interpolated.
    Polyline(Vec<CurveVertex>),
    /// Dense samples, linearly interpolated.
    SampledTable(Vec<CurveVertex>),
}

impl CurveSpec {
    /// The diamond `-i → 1 → i`, made of
    /// two straight segments.
    pub fn diamond() -> Self {
        CurveSpec::Polyline(vec![
            CurveVertex::new(-FRAC_PI_2, 0.0, -1.0),
            CurveVertex::new(0.0, 1.0, 0.0),
            CurveVertex::new(FRAC_PI_2, 0.0, 1.0),
        ])
    }
}

#[derive(Clone, Debug)]
enum Shape {
    Circle,
    Piecewise { ys: Vec<f64>, points: Vec<Complex64> },
}

/// A curve that passed validation, with its measured constants.
#[derive(Clone, Debug)]
pub struct ValidatedCurve {
    spec: CurveSpec,
    shape: Shape,
    h_min: f64,
    lip_upper: f64,
    lip_lower: f64,
    c_h: f64,
}

pub fn build_curve(spec: CurveSpec) -> Result<ValidatedCurve, CurveError> {
    ValidatedCurve::build(spec, DEFAULT_CURVE_GRID)
}

impl ValidatedCurve {
    pub fn build(spec: CurveSpec, grid: usize) -> Result<Self, CurveError> {
        if grid < 16 {
            return Err(CurveError::Malformed(format!("grid of {grid} samples is too coarse")));
        }
        let shape = match &spec {
            CurveSpec::UnitCircle => Shape::Circle,
            CurveSpec::Polyline(v) | CurveSpec::SampledTable(v) => piecewise_shape(v)?,
        };
        let mut curve = Self { spec, shape, h_min: 0.0, lip_upper: 0.0, lip_lower: 0.0, c_h: 0.0 };
        curve.check_grid(grid)?;
        curve.measure(grid)?;
        Ok(curve)
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    /// Lower bound for `|h|` on ℝ.
    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    /// Upper Lipschitz bound `L >= 1`.
    pub fn lip_upper(&self) -> f64 {
        self.lip_upper
    }

    pub fn lip_lower(&self) -> f64 {
        self.lip_lower
    }

    /// Infimum of the smallest singular value of the matrix with columns `h`, `h'`.
    pub fn c_h(&self) -> f64 {
        self.c_h
    }

    /// Interior and end vertices of a piecewise curve (empty for the circle).
    pub fn vertices(&self) -> &[f64] {
        match &self.shape {
            Shape::Circle => &[],
            Shape::Piecewise { ys, .. } => ys,
        }
    }

    /// `h(y)` for any real `y`.
    pub fn eval(&self, y: f64) -> Complex64 {
        let (base, odd) = reduce(y);
        let p = self.eval_base(base);
        if odd {
            -p
        } else {
            p
        }
    }

    /// `h'(y)` where it exists.
    pub fn derivative(&self, y: f64) -> Result<Complex64, CurveError> {
        let (base, odd) = reduce(y);
        let d = match &self.shape {
            Shape::Circle => Complex64::new(-base.sin(), base.cos()),
            Shape::Piecewise { ys, points } => {
                if ys.iter().any(|v| (v - base).abs() <= ENDPOINT_TOL) {
                    return Err(CurveError::NotDifferentiableHere(y));
                }
                let j = segment_index(ys, base);
                (points[j + 1] - points[j]) / (ys[j + 1] - ys[j])
            }
        };
        Ok(if odd { -d } else { d })
    }

    /// The parameter `y' ∈ [-π/2, π/2]` with `arg h(y') = theta`.
    pub fn arg_inverse(&self, theta: f64) -> f64 {
        let theta = theta.clamp(-FRAC_PI_2, FRAC_PI_2);
        if matches!(self.shape, Shape::Circle) || theta.abs() == FRAC_PI_2 {
            return theta;
        }
        let (mut lo, mut hi) = (-FRAC_PI_2, FRAC_PI_2);
        for _ in 0..200 {
            if hi - lo <= 1e-15 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.eval_base(mid).arg() < theta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `|h(y')|` for the parameter whose image has argument `theta`.
    pub fn modulus_at_arg(&self, theta: f64) -> (f64, f64) {
        let y = self.arg_inverse(theta);
        (y, self.eval_base(y).norm())
    }

    fn eval_base(&self, y: f64) -> Complex64 {
        match &self.shape {
            Shape::Circle => Complex64::new(y.cos(), y.sin()),
            Shape::Piecewise { ys, points } => {
                let j = segment_index(ys, y);
                let t = (y - ys[j]) / (ys[j + 1] - ys[j]);
                points[j] + (points[j + 1] - points[j]) * t
            }
        }
    }

    fn grid(n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |i| -FRAC_PI_2 + PI * i as f64 / (n - 1) as f64)
    }

    fn check_grid(&self, n: usize) -> Result<(), CurveError> {
        let mut prev = f64::NEG_INFINITY;
        for y in Self::grid(n) {
            let p = self.eval_base(y);
            let interior = y > -FRAC_PI_2 && y < FRAC_PI_2;
            if interior && !(p.re > 0.0 && p.norm() <= 1.0 + ENDPOINT_TOL) {
                return Err(CurveError::PointOutsideHalfDisc { index: 0, point: p });
            }
            let arg = p.arg();
            if arg <= prev {
                return Err(CurveError::NonMonotoneArgument { y });
            }
            prev = arg;
        }
        Ok(())
    }

    fn measure(&mut self, n: usize) -> Result<(), CurveError> {
        if matches!(self.shape, Shape::Circle) {
            // exact: |h| = 1, [h, h'] is a rotation, the widest chord is the diameter
            self.h_min = 1.0;
            self.lip_upper = 1.0;
            self.lip_lower = 2.0 / PI;
            self.c_h = 1.0;
            return Ok(());
        }
        let samples: Vec<(f64, Complex64)> =
            Self::grid(n).map(|y| (y, self.eval_base(y))).collect();

        let mut h_min = samples.iter().map(|(_, p)| p.norm()).fold(f64::INFINITY, f64::min);
        let mut lip_upper: f64 = 1.0;
        let mut lip_lower = f64::INFINITY;
        let mut c_h = f64::INFINITY;

        if let Shape::Piecewise { ys, points } = &self.shape {
            for j in 0..ys.len() - 1 {
                let (p0, p1) = (points[j], points[j + 1]);
                h_min = h_min.min(segment_distance_to_origin(p0, p1));
                let d = (p1 - p0) / (ys[j + 1] - ys[j]);
                let speed = d.norm();
                lip_upper = lip_upper.max(speed);
                lip_lower = lip_lower.min(speed);
                // |det| is constant on a segment and the largest singular value
                // peaks at an end, so the infimum sits at one of the two ends.
                for p in [p0, p1] {
                    let m = Mat2::from_columns((p.re, p.im), (d.re, d.im));
                    c_h = c_h.min(m.min_stretch());
                }
            }
        }

        for w in samples.windows(2) {
            lip_lower = lip_lower.min(chord_ratio(w[0], w[1]));
        }
        let stride = (n / PAIR_GRID).max(1);
        let coarse: Vec<_> = samples.iter().step_by(stride).chain(samples.last()).copied().collect();
        for (i, a) in coarse.iter().enumerate() {
            for b in &coarse[i + 1..] {
                if b.0 > a.0 {
                    lip_lower = lip_lower.min(chord_ratio(*a, *b));
                }
            }
        }

        self.h_min = (h_min * SAFETY).min(1.0);
        self.lip_upper = lip_upper;
        self.lip_lower = lip_lower * SAFETY;
        self.c_h = c_h * SAFETY;
        if !(self.lip_lower >= DEGENERATE_LIP) {
            return Err(CurveError::DegenerateLipschitz(self.lip_lower));
        }
        if !(self.c_h > 0.0) || !(self.h_min > 0.0) {
            return Err(CurveError::DegenerateLipschitz(self.c_h.min(self.h_min)));
        }
        Ok(())
    }
}

/// Splits `y = y' + pπ` with `y' ∈ [-π/2, π/2)`; returns `(y', p odd)`.
pub fn reduce(y: f64) -> (f64, bool) {
    let p = ((y + FRAC_PI_2) / PI).floor();
    let base = (y - p * PI).clamp(-FRAC_PI_2, FRAC_PI_2);
    (base, p.rem_euclid(2.0) == 1.0)
}

fn piecewise_shape(v: &[CurveVertex]) -> Result<Shape, CurveError> {
    if v.len() < 2 {
        return Err(CurveError::Malformed("need at least two vertices".into()));
    }
    if v.iter().any(|c| !(c.y.is_finite() && c.point.re.is_finite() && c.point.im.is_finite())) {
        return Err(CurveError::Malformed("non-finite vertex".into()));
    }
    if v.windows(2).any(|w| w[1].y <= w[0].y) {
        return Err(CurveError::Malformed("vertex parameters must be strictly increasing".into()));
    }
    let (first, last) = (v[0], v[v.len() - 1]);
    let close = |a: f64, b: f64| (a - b).abs() <= ENDPOINT_TOL;
    if !(close(first.y, -FRAC_PI_2)
        && close(last.y, FRAC_PI_2)
        && close(first.point.re, 0.0)
        && close(first.point.im, -1.0)
        && close(last.point.re, 0.0)
        && close(last.point.im, 1.0))
    {
        return Err(CurveError::EndpointMismatch);
    }
    for (index, c) in v.iter().enumerate().skip(1).take(v.len() - 2) {
        if !(c.point.re > 0.0 && c.point.norm() <= 1.0 + ENDPOINT_TOL) {
            return Err(CurveError::PointOutsideHalfDisc { index, point: c.point });
        }
    }
    for w in v.windows(2) {
        let (a, b) = (w[0].point, w[1].point);
        if a.re * b.im - a.im * b.re <= 0.0 {
            return Err(CurveError::NonMonotoneArgument { y: w[0].y });
        }
    }
    let mut ys: Vec<f64> = v.iter().map(|c| c.y).collect();
    let mut points: Vec<Complex64> = v.iter().map(|c| c.point).collect();
    let n = ys.len();
    ys[0] = -FRAC_PI_2;
    ys[n - 1] = FRAC_PI_2;
    points[0] = Complex64::new(0.0, -1.0);
    points[n - 1] = Complex64::new(0.0, 1.0);
    Ok(Shape::Piecewise { ys, points })
}

fn segment_index(ys: &[f64], y: f64) -> usize {
    ys.partition_point(|&v| v <= y).clamp(1, ys.len() - 1) - 1
}

fn segment_distance_to_origin(p0: Complex64, p1: Complex64) -> f64 {
    let d = p1 - p0;
    let len2 = d.norm_sqr();
    let t = if len2 > 0.0 { (-(p0.re * d.re + p0.im * d.im) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p0 + d * t).norm()
}

fn chord_ratio(a: (f64, Complex64), b: (f64, Complex64)) -> f64 {
    (b.1 - a.1).norm() / (b.0 - a.0).abs()
}
