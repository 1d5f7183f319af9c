//! Level-index reals for orbits that leave the `f64` range.
//!
//! Iterates of a generalised exponential grow like towers of exponentials,
//! so after three or four steps a plain `f64` overflows. [`HugeReal`] stores
//! `exp^level(value)` and keeps `value` inside `(LN_CAP, PLAIN_CAP]` whenever
//! `level > 0`. Level 0 is an ordinary (signed) finite `f64`.

use std::cmp::Ordering;

/// Largest magnitude kept in plain form.
pub const PLAIN_CAP: f64 = 1e300;
/// `ln(PLAIN_CAP)`.
pub const LN_CAP: f64 = 690.775_527_898_213_7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HugeReal {
    level: u32,
    value: f64,
}

impl HugeReal {
    /// Wraps a finite `f64`. Values above [`PLAIN_CAP`] are lifted.
    pub fn from_f64(x: f64) -> Self {
        debug_assert!(!x.is_nan());
        Self { level: 0, value: x }.normalized()
    }

    /// `exp^level(value)`; `value` must be finite.
    pub fn from_level(level: u32, value: f64) -> Self {
        Self { level, value }.normalized()
    }

    fn normalized(mut self) -> Self {
        loop {
            if self.value > PLAIN_CAP {
                self.level += 1;
                self.value = self.value.ln();
            } else if self.level > 0 && self.value <= LN_CAP {
                self.level -= 1;
                self.value = self.value.exp();
            } else {
                return self;
            }
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// The plain value, if this number is representable as an `f64`.
    pub fn as_plain(&self) -> Option<f64> {
        (self.level == 0).then_some(self.value)
    }

    /// Lossy conversion: `+inf` beyond the plain range.
    pub fn to_f64(&self) -> f64 {
        self.as_plain().unwrap_or(f64::INFINITY)
    }

    pub fn is_plain(&self) -> bool {
        self.level == 0
    }

    /// Natural logarithm. Level-0 inputs must be positive.
    pub fn ln(&self) -> Self {
        match self.level {
            0 => Self::from_f64(self.value.ln()),
            l => Self { level: l - 1, value: self.value },
        }
    }

    pub fn exp(&self) -> Self {
        match self.level {
            0 if self.value <= LN_CAP => Self::from_f64(self.value.exp()),
            l => Self { level: l + 1, value: self.value },
        }
    }

    /// `self + c` for a finite shift `c`.
    pub fn add(&self, c: f64) -> Self {
        match self.level {
            0 => {
                let s = self.value + c;
                if s.is_finite() {
                    Self::from_f64(s)
                } else {
                    // only reachable for |c| near f64::MAX
                    Self::from_level(1, self.value.ln() + (1.0 + c / self.value).ln())
                }
            }
            // ln(x + c) = ln x + ln(1 + c/x), with x = e^value
            1 => Self::from_level(1, self.value + (c * (-self.value).exp()).ln_1p()),
            // c/x is below f64 resolution of ln x
            _ => *self,
        }
    }

    /// `k * self` for a positive finite factor `k`.
    pub fn scale(&self, k: f64) -> Self {
        debug_assert!(k > 0.0);
        match self.level {
            0 => {
                let p = self.value * k;
                if p.is_finite() {
                    Self::from_f64(p)
                } else {
                    Self::from_level(1, self.value.ln() + k.ln())
                }
            }
            _ => self.ln().add(k.ln()).exp(),
        }
    }

    /// `1 / self`, underflowing to zero past the plain range.
    pub fn recip(&self) -> f64 {
        match self.level {
            0 => 1.0 / self.value,
            1 => (-self.value).exp(),
            _ => 0.0,
        }
    }

    pub fn gt_f64(&self, x: f64) -> bool {
        self.level > 0 || self.value > x
    }
}

impl From<f64> for HugeReal {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl PartialOrd for HugeReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.level.cmp(&other.level) {
            Ordering::Equal => self.value.partial_cmp(&other.value),
            o => Some(o),
        }
    }
}

impl std::fmt::Display for HugeReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.level == 0 {
            write!(f, "{}", self.value)
        } else {
            write!(f, "exp^{}({})", self.level, self.value)
        }
    }
}
