//! Fixtures shared by the benchmarks.

use genexp_core::{build_curve, build_growth, CurveSpec, GenExpMap, GrowthSpec, Mode};

/// `g(x) = e^x`, `h` the unit circle, `a = 5`.
pub fn exp_circle_map() -> GenExpMap {
    GenExpMap::new(
        build_curve(CurveSpec::UnitCircle).expect("unit circle is valid"),
        build_growth(GrowthSpec::exp(), 0.0).expect("exp is valid"),
        5.0,
        2.0,
        Mode::Certified,
    )
    .expect("a = 5 is certified")
}

/// The two-segment diamond curve with `g(x) = e^x` and `a = 2`, below `a_min`.
pub fn diamond_map() -> GenExpMap {
    GenExpMap::new(
        build_curve(CurveSpec::diamond()).expect("diamond is valid"),
        build_growth(GrowthSpec::exp(), 0.0).expect("exp is valid"),
        2.0,
        2.0,
        Mode::Uncertified,
    )
    .expect("uncertified maps only need valid parts")
}
