//! Closed-form 2x2 real matrix helpers.

/// Row-major 2x2 real matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// Matrix whose columns are `u` and `v`.
    pub fn from_columns(u: (f64, f64), v: (f64, f64)) -> Self {
        Self::new(u.0, v.0, u.1, v.1)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul_vec(&self, v: (f64, f64)) -> (f64, f64) {
        (self.a * v.0 + self.b * v.1, self.c * v.0 + self.d * v.1)
    }

    /// Singular values `(largest, smallest)`.
    pub fn singular_values(&self) -> (f64, f64) {
        let s = self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d;
        let det = self.det();
        let disc = (s * s - 4.0 * det * det).max(0.0).sqrt();
        let largest = ((s + disc) / 2.0).sqrt();
        // |det| = largest * smallest; avoids cancellation in (s - disc).
        let smallest = if largest > 0.0 { det.abs() / largest } else { 0.0 };
        (largest, smallest)
    }

    /// Smallest singular value, `inf_{|w| = 1} |A w|`.
    pub fn min_stretch(&self) -> f64 {
        self.singular_values().1
    }

    /// Operator norm, `sup_{|w| = 1} |A w|`.
    pub fn operator_norm(&self) -> f64 {
        self.singular_values().0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_has_unit_singular_values() {
        let t: f64 = 0.7;
        let m = Mat2::new(t.cos(), -t.sin(), t.sin(), t.cos());
        let (hi, lo) = m.singular_values();
        assert!((hi - 1.0).abs() < 1e-15 && (lo - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_singular_values() {
        let m = Mat2::new(3.0, 0.0, 0.0, -0.25);
        let (hi, lo) = m.singular_values();
        assert!((hi - 3.0).abs() < 1e-15);
        assert!((lo - 0.25).abs() < 1e-15);
    }

    #[test]
    fn singular_values_match_brute_force() {
        let m = Mat2::new(1.3, -0.4, 2.2, 0.9);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..100_000 {
            let t = i as f64 * std::f64::consts::TAU / 100_000.0;
            let (x, y) = m.mul_vec((t.cos(), t.sin()));
            let n = x.hypot(y);
            lo = lo.min(n);
            hi = hi.max(n);
        }
        let (s_hi, s_lo) = m.singular_values();
        assert!((s_hi - hi).abs() < 1e-8);
        assert!((s_lo - lo).abs() < 1e-8);
    }
}
