//! Generalised exponential maps `f(x + iy) = g(x) h(y) - a`.
//!
//! A map is assembled from a curve `h` ([`curve`]), a growth function `g`
//! ([`growth`]) and a shift `a > 0` ([`map`]). The remaining modules work on
//! the assembled map: tracts and external addresses ([`symbolic`]), inverse
//! branches, hairs and endpoints ([`pullback`]), and basin rendering
//! ([`classify`]).
//!
//! ```
//! use genexp_core::{build_curve, build_growth, CurveSpec, GenExpMap, GrowthSpec, Mode};
//!
//! let map = GenExpMap::new(
//!     build_curve(CurveSpec::UnitCircle)?,
//!     build_growth(GrowthSpec::exp(), 0.0)?,
//!     5.0,
//!     2.0,
//!     Mode::Certified,
//! )?;
//! let xi = map.fixed_point().unwrap();
//! assert!((map.eval_f(xi) - xi).norm() < 1e-9);
//! # Ok::<(), genexp_core::Error>(())
//! ```

pub mod classify;
pub mod curve;
pub mod far;
pub mod growth;
pub mod huge;
pub mod linalg;
pub mod map;
pub mod pullback;
pub mod symbolic;

pub use classify::{
    classify_point, encode_ppm, read_grid_csv, render_grid, write_grid_csv, write_ppm, write_trace_csv,
    Classification, Grid, GridJob, RenderError, Verdict, Window,
};
pub use curve::{build_curve, CurveError, CurveSpec, CurveVertex, ValidatedCurve};
pub use far::{inverse_branch_far, FarPoint};
pub use growth::{build_growth, GrowthError, GrowthProfile, GrowthSpec};
pub use huge::HugeReal;
pub use linalg::Mat2;
pub use map::{compute_constants, head_start_constant, DerivedConstants, GenExpMap, MapError, Mode};
pub use num_complex::Complex64;
pub use pullback::{
    accumulate, endpoint, inverse_branch, pullback_n, speed_compare, trace_hair, Accumulation, Endpoint,
    HairSample, HairTrace, PullbackError, SpeedVerdict,
};
pub use symbolic::{
    build_shadow_params, is_g_bounded, partial_address, tract_of, verify_shadowing, AddressStatus,
    ExternalAddress, GBoundedness, LevelReport, OutsideTract, PartialAddress, ShadowParams, SymbolicError,
    Tail,
};

/// Any error produced by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Pullback(#[from] PullbackError),
    #[error(transparent)]
    Render(#[from] RenderError),
}
