//! Points with a possibly huge real part.
//!
//! Forward orbits inside the tracts grow like towers of exponentials, while
//! imaginary parts stay within a few multiples of `2π` along the orbits the
//! library cares about. [`FarPoint`] keeps the real part as a [`HugeReal`]
//! and the imaginary part as a plain `f64`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::huge::HugeReal;
use crate::map::GenExpMap;
use crate::pullback::{inverse_branch, PullbackError};
use crate::symbolic::{tract_of, OutsideTract};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FarPoint {
    pub re: HugeReal,
    pub im: f64,
}

impl FarPoint {
    pub fn new(re: HugeReal, im: f64) -> Self {
        Self { re, im }
    }

    pub fn to_complex(&self) -> Option<Complex64> {
        self.re.as_plain().map(|re| Complex64::new(re, self.im))
    }

    pub fn is_plain(&self) -> bool {
        self.re.is_plain()
    }

    pub fn add_im(&self, d: f64) -> Self {
        Self { re: self.re, im: self.im + d }
    }
}

impl From<Complex64> for FarPoint {
    fn from(z: Complex64) -> Self {
        Self { re: HugeReal::from_f64(z.re), im: z.im }
    }
}

impl GenExpMap {
    /// `f(p)`, or `None` when the image leaves the representable range
    /// (huge negative real part or huge imaginary part).
    pub fn eval_f_far(&self, p: FarPoint) -> Option<FarPoint> {
        if let Some(z) = p.to_complex() {
            let w = self.eval_f(z);
            if w.re.is_finite() && w.im.is_finite() {
                return Some(w.into());
            }
        }
        let g = self.growth().g_huge(p.re);
        let h = self.curve().eval(p.im);
        let re = if h.re > 0.0 {
            g.scale(h.re).add(-self.a())
        } else if h.re == 0.0 {
            HugeReal::from_f64(-self.a())
        } else {
            let v = g.to_f64() * h.re - self.a();
            if !v.is_finite() {
                return None;
            }
            HugeReal::from_f64(v)
        };
        let im = if h.im == 0.0 { 0.0 } else { g.scale(h.im.abs()).as_plain()?.copysign(h.im) };
        im.is_finite().then_some(FarPoint { re, im })
    }

    /// The tract containing `p`.
    pub fn tract_of_far(&self, p: FarPoint) -> Result<i64, OutsideTract> {
        match p.to_complex() {
            Some(z) => tract_of(self, z),
            None => tract_of(self, Complex64::new(f64::MAX, p.im)),
        }
    }
}

/// [`inverse_branch`] for a point with a possibly huge real part.
pub fn inverse_branch_far(map: &GenExpMap, k: i64, w: FarPoint) -> Result<FarPoint, PullbackError> {
    if let Some(z) = w.to_complex() {
        return inverse_branch(map, k, z).map(FarPoint::from);
    }
    // Re w is beyond the plain range: w + a is far inside H.
    let re_zeta = w.re.add(map.a());
    let t = w.im * re_zeta.recip();
    let (y, modulus) = map.curve().modulus_at_arg(t.atan());
    let ln_abs = re_zeta.ln().add(0.5 * (t * t).ln_1p() - modulus.ln());
    let x = map.growth().invert_ln_huge(ln_abs);
    Ok(FarPoint { re: x, im: y + 2.0 * PI * k as f64 })
}
