//! The map `f(z) = g(Re z) h(Im z) - a` and the constants that make its
//! dynamics tractable.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::curve::{CurveError, ValidatedCurve};
use crate::growth::GrowthProfile;
use crate::linalg::Mat2;

const SCAN_LO: f64 = -1000.0;
const SCAN_HI: f64 = 1000.0;
const SCAN_TOL: f64 = 1e-9;
const FIXED_POINT_STEP: f64 = 1e-12;
const FIXED_POINT_RESIDUAL: f64 = 1e-9;
const FIXED_POINT_MAX_ITER: usize = 10_000;
const MAX_HEADSTART_Q: u32 = 64;
/// Relative tolerance for membership in the closure of `H`.
pub const CLOSURE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Every hypothesis of the theory is checked and enforced.
    Certified,
    /// Hypotheses are reported but not enforced; outputs carry no guarantee.
    Uncertified,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("certification failed: c = {c} does not exceed 1/h_min = {bound}")]
    CertificationFailed { c: f64, bound: f64 },
    #[error("a = {a} does not exceed a_min = {a_min}")]
    NotCertified { a: f64, a_min: f64 },
    #[error("expansion factor {0} is not reached on [-1000, 1000]")]
    NoSuchM(f64),
    #[error("no contraction threshold m on [-1000, 1000]")]
    NoSuchm,
    #[error("fixed-point iteration did not converge (residual {0:e})")]
    NoConvergence(f64),
    #[error("head-start search exhausted at q = {0}")]
    HeadStartSearchExhausted(u32),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Constants derived from `(g, h, a)` and the expansion target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedConstants {
    /// Expansion factor: the Jacobian stretches every vector by at least `mu` on `Re z >= M`.
    pub mu: f64,
    /// Expansion threshold `M > 0`.
    pub big_m: f64,
    /// Contraction threshold `m < 0`.
    pub small_m: f64,
    pub a_min: f64,
    /// Attracting fixed point; always present for certified maps.
    pub xi: Option<Complex64>,
    /// Head-start constant; always present for certified maps.
    pub k: Option<f64>,
    pub lip: f64,
    pub h_min: f64,
    pub c_h: f64,
    pub c: f64,
}

/// `M`, `m` and `a_min` (no fixed point, no head start).
pub fn compute_constants(
    curve: &ValidatedCurve,
    growth: &GrowthProfile,
    mu_target: f64,
) -> Result<DerivedConstants, MapError> {
    if !(mu_target > 1.0) || !mu_target.is_finite() {
        return Err(MapError::InvalidParameter(format!("mu_target must exceed 1, got {mu_target}")));
    }
    let c_h = curve.c_h();
    let lip = curve.lip_upper();

    // c_h g and c_h g'(x-) are non-decreasing, so the condition holds on a half-line.
    let expands = |x: f64| c_h * growth.eval(x).min(growth.derivative_left(x)) >= mu_target;
    if !expands(SCAN_HI) {
        return Err(MapError::NoSuchM(mu_target));
    }
    let big_m = if expands(SCAN_LO) { SCAN_LO } else { bisect(SCAN_LO, SCAN_HI, expands).1 };
    let big_m = big_m.max(1e-6);

    let bound = 1.0 / (2.0 * (1.0 + lip));
    let contracts = |x: f64| growth.eval(x) + growth.derivative(x) <= bound;
    if !contracts(SCAN_LO) {
        return Err(MapError::NoSuchm);
    }
    let small_m = if contracts(SCAN_HI) { SCAN_HI } else { bisect(SCAN_LO, SCAN_HI, |x| !contracts(x)).0 };
    let small_m = small_m.min(-1e-6);

    let g_m = growth.eval(big_m);
    let a_min = 0f64.max(g_m - small_m).max(g_m - big_m);
    Ok(DerivedConstants {
        mu: mu_target,
        big_m,
        small_m,
        a_min,
        xi: None,
        k: None,
        lip,
        h_min: curve.h_min(),
        c_h,
        c: growth.c(),
    })
}

/// Bisection for a monotone predicate false at `lo` and true at `hi`.
/// Returns the final `(false, true)` bracket.
fn bisect(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> (f64, f64) {
    while hi - lo > SCAN_TOL {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// The head-start constant `K = 2πq` for the smallest `q` meeting both
/// growth estimates that keep a factor-`K` lead in real part.
pub fn head_start_constant(h_min: f64, c: f64, g_big_m: f64, big_m: f64, a: f64) -> Result<f64, MapError> {
    for q in 1..=MAX_HEADSTART_Q {
        let k = 2.0 * PI * q as f64;
        let cq = c.powi(q as i32);
        let first = (0.5 * h_min * cq - 1.0 - k) * 2.0 * a >= a + PI;
        let second = (h_min * cq * g_big_m / (2.0 * a) - k) * big_m >= 3.0 * a + PI;
        if first && second {
            return Ok(k);
        }
    }
    Err(MapError::HeadStartSearchExhausted(MAX_HEADSTART_Q))
}

/// A generalised exponential map with its constants.
#[derive(Clone, Debug)]
pub struct GenExpMap {
    curve: ValidatedCurve,
    growth: GrowthProfile,
    a: f64,
    constants: DerivedConstants,
    mode: Mode,
}

impl GenExpMap {
    pub fn new(
        curve: ValidatedCurve,
        growth: GrowthProfile,
        a: f64,
        mu_target: f64,
        mode: Mode,
    ) -> Result<Self, MapError> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(MapError::InvalidParameter(format!("a must be positive, got {a}")));
        }
        let bound = 1.0 / curve.h_min();
        if mode == Mode::Certified && !(growth.c() > bound) {
            return Err(MapError::CertificationFailed { c: growth.c(), bound });
        }
        let mut constants = compute_constants(&curve, &growth, mu_target)?;
        if mode == Mode::Certified && !(a > constants.a_min) {
            return Err(MapError::NotCertified { a, a_min: constants.a_min });
        }
        let mut map = Self { curve, growth, a, constants, mode };

        let xi = map.iterate_to_fixed_point();
        let k = head_start_constant(
            constants.h_min,
            constants.c,
            map.growth.eval(constants.big_m),
            constants.big_m,
            a,
        );
        match mode {
            Mode::Certified => {
                constants.xi = Some(xi?);
                constants.k = Some(k?);
            }
            Mode::Uncertified => {
                constants.xi = xi.ok();
                constants.k = k.ok();
            }
        }
        map.constants = constants;
        Ok(map)
    }

    fn iterate_to_fixed_point(&self) -> Result<Complex64, MapError> {
        let mut z = Complex64::new(self.constants.small_m, 0.0);
        for _ in 0..FIXED_POINT_MAX_ITER {
            let next = self.eval_f(z);
            if !(next.re.is_finite() && next.im.is_finite()) {
                break;
            }
            let step = (next - z).norm();
            z = next;
            if step <= FIXED_POINT_STEP {
                break;
            }
        }
        let residual = (self.eval_f(z) - z).norm();
        if residual <= FIXED_POINT_RESIDUAL {
            Ok(z)
        } else {
            Err(MapError::NoConvergence(residual))
        }
    }

    pub fn curve(&self) -> &ValidatedCurve {
        &self.curve
    }

    pub fn growth(&self) -> &GrowthProfile {
        &self.growth
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn constants(&self) -> &DerivedConstants {
        &self.constants
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_certified(&self) -> bool {
        self.mode == Mode::Certified
    }

    pub fn mu(&self) -> f64 {
        self.constants.mu
    }

    pub fn big_m(&self) -> f64 {
        self.constants.big_m
    }

    pub fn small_m(&self) -> f64 {
        self.constants.small_m
    }

    /// `g(M)`, the inner radius of `H` around `-a` along the real direction.
    pub fn g_big_m(&self) -> f64 {
        self.growth.eval(self.constants.big_m)
    }

    /// The attracting fixed point, if it was located.
    pub fn fixed_point(&self) -> Option<Complex64> {
        self.constants.xi
    }

    pub fn head_start(&self) -> Option<f64> {
        self.constants.k
    }

    /// `Z(z) = g(Re z) h(Im z)`.
    pub fn eval_z(&self, z: Complex64) -> Complex64 {
        let g = self.growth.eval(z.re);
        let h = self.curve.eval(z.im);
        Complex64::new(safe_mul(g, h.re), safe_mul(g, h.im))
    }

    /// `f(z) = Z(z) - a`.
    pub fn eval_f(&self, z: Complex64) -> Complex64 {
        let w = self.eval_z(z);
        Complex64::new(w.re - self.a, w.im)
    }

    /// Real Jacobian of `Z` (equal to that of `f`) at a differentiability point.
    pub fn jacobian(&self, z: Complex64) -> Result<Mat2, MapError> {
        let hp = self.curve.derivative(z.im)?;
        let h = self.curve.eval(z.im);
        let g = self.growth.eval(z.re);
        let gp = self.growth.derivative(z.re);
        Ok(Mat2::new(gp * h.re, g * hp.re, gp * h.im, g * hp.im))
    }

    /// Membership in `H = f(T_0)`.
    pub fn in_h(&self, w: Complex64) -> bool {
        let zeta = w + self.a;
        if !(zeta.re > 0.0) {
            return false;
        }
        let (_, modulus) = self.curve.modulus_at_arg(zeta.arg());
        zeta.norm() > self.g_big_m() * modulus
    }

    /// Membership in the closure of `H`, with relative tolerance [`CLOSURE_TOL`].
    pub fn in_h_closure(&self, w: Complex64) -> bool {
        let zeta = w + self.a;
        let r = zeta.norm();
        if !(zeta.re >= -CLOSURE_TOL * r) || !r.is_finite() {
            return false;
        }
        let theta = zeta.im.atan2(zeta.re.max(0.0));
        let (_, modulus) = self.curve.modulus_at_arg(theta);
        r >= self.g_big_m() * modulus * (1.0 - CLOSURE_TOL)
    }
}

/// `x * y` with `inf * 0 = 0`: a zero component of `h` kills any growth.
fn safe_mul(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        x * y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{build_curve, CurveSpec};
    use crate::growth::{build_growth, GrowthSpec};

    fn exp_circle(a: f64) -> GenExpMap {
        GenExpMap::new(
            build_curve(CurveSpec::UnitCircle).unwrap(),
            build_growth(GrowthSpec::exp(), 0.0).unwrap(),
            a,
            2.0,
            Mode::Certified,
        )
        .unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let f = exp_circle(5.0);
        assert_eq!(f.eval_z(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
        assert_eq!(f.eval_f(Complex64::new(0.0, 0.0)), Complex64::new(-4.0, 0.0));
        let w = f.eval_f(Complex64::new(0.0, PI));
        assert!((w - Complex64::new(-6.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn exp_circle_constants() {
        let f = exp_circle(5.0);
        let k = f.constants();
        assert!((k.big_m - 2f64.ln()).abs() < 2e-9 && k.big_m >= 2f64.ln());
        assert!((k.small_m - (0.125f64).ln()).abs() < 2e-9 && k.small_m <= 0.125f64.ln());
        assert!((k.a_min - (2.0 - 0.125f64.ln())).abs() < 1e-8);
        assert_eq!(k.k, Some(2.0 * PI));
    }

    #[test]
    fn fixed_point_matches_newton() {
        // Newton on e^x - x = 5, negative root
        let mut x: f64 = -5.0;
        for _ in 0..50 {
            x -= (x.exp() - x - 5.0) / (x.exp() - 1.0);
        }
        let f = exp_circle(5.0);
        let xi = f.fixed_point().unwrap();
        assert!((xi.re - x).abs() < 1e-9 && xi.im == 0.0);
        assert!((f.eval_f(xi) - xi).norm() <= 1e-9);
        assert!(xi.re <= f.small_m());
    }

    #[test]
    fn jacobian_examples() {
        let f = exp_circle(5.0);
        let j = f.jacobian(Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(j, Mat2::new(1.0, 0.0, 0.0, 1.0));
        let j = f.jacobian(Complex64::new(2f64.ln(), 0.7)).unwrap();
        assert!((j.min_stretch() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn h_membership_examples() {
        let f = exp_circle(5.0);
        assert!(f.in_h(Complex64::new(5.0, 0.0)));
        assert!(!f.in_h(Complex64::new(-5.0, 0.0)));
        // zeta = 2 sits on the boundary circle |zeta| = g(M) = 2 (M rounded up)
        assert!(!f.in_h(Complex64::new(-3.0, 0.0)));
        assert!(f.in_h_closure(Complex64::new(-3.0 + 1e-6, 0.0)));
        assert!(f.in_h_closure(Complex64::new(-5.0, 3.0)));
        assert!(!f.in_h_closure(Complex64::new(-5.0, 1.0)));
    }

    #[test]
    fn rejects_bad_parameters() {
        let curve = build_curve(CurveSpec::UnitCircle).unwrap();
        let growth = build_growth(GrowthSpec::exp(), 0.0).unwrap();
        assert!(matches!(
            compute_constants(&curve, &growth, 0.5),
            Err(MapError::InvalidParameter(_))
        ));
        let err = GenExpMap::new(curve.clone(), growth.clone(), 2.0, 2.0, Mode::Certified).unwrap_err();
        assert!(matches!(err, MapError::NotCertified { .. }));
        assert!(GenExpMap::new(curve, growth, 2.0, 2.0, Mode::Uncertified).is_ok());
    }

    #[test]
    fn diamond_certifies_growth() {
        let curve = build_curve(CurveSpec::diamond()).unwrap();
        let growth = build_growth(GrowthSpec::exp(), 0.0).unwrap();
        assert!(growth.c() > 1.0 / curve.h_min());
        let k = compute_constants(&curve, &growth, 2.0).unwrap();
        assert!(k.a_min > 5.9 && k.a_min < 6.1);
        let fig = GenExpMap::new(curve, growth, 2.0, 2.0, Mode::Uncertified).unwrap();
        let xi = fig.fixed_point().unwrap();
        assert!((xi.re + 1.841_405_660_436_960_6).abs() < 1e-9);
    }

    #[test]
    fn head_start_shrinks_with_growth() {
        let slow = head_start_constant(1.0, 3.0, 2.0, 0.7, 5.0).unwrap();
        let fast = head_start_constant(1.0, 535.0, 2.0, 0.7, 5.0).unwrap();
        assert!(fast <= slow);
        assert!(fast > 1.0);
    }
}
