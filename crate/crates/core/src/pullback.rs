//! Inverse branches and everything built from them: composite pullbacks,
//! endpoints, hair traces, accumulation sequences and the speed ordering.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::far::{inverse_branch_far, FarPoint};
use crate::map::GenExpMap;
use crate::symbolic::{is_g_bounded, tract_of, ExternalAddress, GBoundedness, OutsideTract};

const TWO_PI: f64 = 2.0 * PI;
const MAX_ENDPOINT_LEVELS: usize = 200;
/// Relative slack on expansion-based bounds.
pub const BOUND_SLACK: f64 = 1e-6;
/// Forward iterates beyond this size are compared by magnitude class only.
pub const FORWARD_CAP: f64 = 1e300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PullbackError {
    #[error("point is not in the closure of H at pullback stage {stage}")]
    NotInH { stage: usize },
    #[error("address {0} is not certified g-bounded")]
    NotGBounded(String),
    #[error("endpoint bound not reached within {levels} levels")]
    NoConvergence { levels: usize },
    #[error("orbits have different addresses at step {step}")]
    AddressMismatch { step: usize },
    #[error("orbit leaves the tracts at step {step} ({reason:?})")]
    LeftTract { step: usize, reason: OutsideTract },
    #[error("orbit is no longer representable at step {step}")]
    PrecisionLost { step: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// `f_k^{-1}(w)`: the preimage of `w` in the closed tract `T_k`.
pub fn inverse_branch(map: &GenExpMap, k: i64, w: Complex64) -> Result<Complex64, PullbackError> {
    if !map.in_h_closure(w) {
        return Err(PullbackError::NotInH { stage: 0 });
    }
    let zeta = w + map.a();
    let theta = zeta.im.atan2(zeta.re.max(0.0));
    let (y, modulus) = map.curve().modulus_at_arg(theta);
    let x = map.growth().invert_ln(zeta.norm().ln() - modulus.ln());
    Ok(Complex64::new(x, y + TWO_PI * k as f64))
}

/// `f_{k_1}^{-1} ∘ ... ∘ f_{k_n}^{-1}(w)`; the last branch is applied first.
/// A failure reports the stage counted from the innermost branch.
pub fn pullback_n(map: &GenExpMap, branches: &[i64], w: Complex64) -> Result<Complex64, PullbackError> {
    branches.iter().rev().enumerate().try_fold(w, |z, (stage, &k)| {
        inverse_branch(map, k, z).map_err(|_| PullbackError::NotInH { stage })
    })
}

/// A point approximating the endpoint of a hair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Endpoint {
    pub z: Complex64,
    /// Number of pullback levels used.
    pub levels: usize,
    /// Guaranteed distance to the limit.
    pub error_bound: f64,
    /// Base point that was pulled back.
    pub anchor: Complex64,
}

/// The base point `g(M + 1) + a` used for endpoint computations.
pub fn endpoint_anchor(map: &GenExpMap) -> Complex64 {
    Complex64::new(map.growth().eval(map.big_m() + 1.0) + map.a(), 0.0)
}

fn require_g_bounded(map: &GenExpMap, addr: &ExternalAddress, levels: usize) -> Result<(), PullbackError> {
    let x_max = TWO_PI * addr.sup() as f64 + 100.0;
    match is_g_bounded(map, addr, levels, x_max) {
        GBoundedness::Bounded { .. } => Ok(()),
        GBoundedness::Inconclusive => Err(PullbackError::NotGBounded(addr.to_string())),
    }
}

/// The endpoint of the hair with address `addr`, to within `tol`.
///
/// With `w*` the anchor and `D = max_k |f_k^{-1}(w*) - w*|` over the entries
/// of `addr`, successive pullbacks differ by at most `D μ^{-n}`, so stopping at
/// the first `n` with `D μ^{-n} μ/(μ-1) <= tol` bounds the distance to the limit.
pub fn endpoint(map: &GenExpMap, addr: &ExternalAddress, tol: f64) -> Result<Endpoint, PullbackError> {
    if !(tol > 0.0) {
        return Err(PullbackError::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    require_g_bounded(map, addr, addr.prefix().len() + 1)?;
    let anchor = endpoint_anchor(map);
    let mu = map.mu();
    let mut d_max: f64 = 0.0;
    for k in addr.distinct_entries() {
        d_max = d_max.max((inverse_branch(map, k, anchor)? - anchor).norm());
    }
    let tail_factor = mu / (mu - 1.0);
    let levels = (0..=MAX_ENDPOINT_LEVELS)
        .find(|&n| d_max * mu.powi(-(n as i32)) * tail_factor <= tol)
        .ok_or(PullbackError::NoConvergence { levels: MAX_ENDPOINT_LEVELS })?;
    let z = pullback_n(map, &addr.entries(levels), anchor)?;
    Ok(Endpoint { z, levels, error_bound: d_max * mu.powi(-(levels as i32)) * tail_factor, anchor })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HairSample {
    pub t: f64,
    pub z: Complex64,
    /// `|z_d(t) - z_{d-1}(t)|`, or the endpoint error bound at `t = 0`.
    pub cauchy_gap: f64,
    /// Expansion bound for `cauchy_gap`.
    pub gap_bound: f64,
}

/// Polyline approximation of the hair with a given address.
#[derive(Clone, Debug)]
pub struct HairTrace {
    pub address: ExternalAddress,
    pub depth: usize,
    /// Real part of the anchor ray at `t = 0`.
    pub anchor_base: f64,
    pub samples: Vec<HairSample>,
    pub endpoint_estimate: Complex64,
    /// Largest per-sample gap.
    pub cauchy_gap: f64,
}

/// Real part from which the whole vertical line lies in `H`.
pub fn hair_anchor_base(map: &GenExpMap) -> f64 {
    map.big_m().max(map.g_big_m() - map.a()) + 1.0
}

/// Samples `z(t) = f^{-depth}_{s_0 ... s_{depth-1}}(X_t + 2πi s_depth)` with
/// `X_t = R + t` on an even grid `t ∈ [0, t_max]`; the `t = 0` sample is the
/// endpoint.
pub fn trace_hair(
    map: &GenExpMap,
    addr: &ExternalAddress,
    depth: usize,
    t_max: f64,
    samples: usize,
) -> Result<HairTrace, PullbackError> {
    if depth == 0 || samples < 2 || !(t_max > 0.0) || !t_max.is_finite() {
        return Err(PullbackError::InvalidArgument(
            "trace needs depth >= 1, samples >= 2 and a positive t_max".into(),
        ));
    }
    require_g_bounded(map, addr, depth)?;
    let base = hair_anchor_base(map);
    let branches = addr.entries(depth);
    let mu = map.mu();
    let anchor = |t: f64, level: usize| Complex64::new(base + t, TWO_PI * addr.entry(level) as f64);

    let tip = endpoint(map, addr, 1e-10)?;
    let mut out: Vec<HairSample> = (1..samples)
        .into_par_iter()
        .map(|i| {
            let t = t_max * i as f64 / (samples - 1) as f64;
            let z = pullback_n(map, &branches, anchor(t, depth))?;
            let shallow = pullback_n(map, &branches[..depth - 1], anchor(t, depth - 1))?;
            let inner = inverse_branch(map, branches[depth - 1], anchor(t, depth))? - anchor(t, depth - 1);
            Ok(HairSample {
                t,
                z,
                cauchy_gap: (z - shallow).norm(),
                gap_bound: inner.norm() * mu.powi(1 - depth as i32) * (1.0 + BOUND_SLACK),
            })
        })
        .collect::<Result<_, PullbackError>>()?;
    out.insert(0, HairSample { t: 0.0, z: tip.z, cauchy_gap: tip.error_bound, gap_bound: tip.error_bound });
    let cauchy_gap = out[1..].iter().map(|s| s.cauchy_gap).fold(0.0, f64::max);
    Ok(HairTrace {
        address: addr.clone(),
        depth,
        anchor_base: base,
        samples: out,
        endpoint_estimate: tip.z,
        cauchy_gap,
    })
}

/// The pair `z_p^± = φ(f^p(z_0) ± 2πi)` with `φ` the pullback along the first
/// `p` tract entries of `z_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Accumulation {
    pub z_minus: Complex64,
    pub z_plus: Complex64,
    /// Tract entries `s_0, ..., s_p` of `z_0`.
    pub base_entries: Vec<i64>,
    /// Tract entries along the pullback chain of `z_p^-`.
    pub minus_entries: Vec<i64>,
    /// Tract entries along the pullback chain of `z_p^+`.
    pub plus_entries: Vec<i64>,
}

pub fn accumulate(map: &GenExpMap, z0: Complex64, p: usize) -> Result<Accumulation, PullbackError> {
    let mut orbit = FarPoint::from(z0);
    let mut base_entries = Vec::with_capacity(p + 1);
    for step in 0..=p {
        let s = map
            .tract_of_far(orbit)
            .map_err(|reason| PullbackError::LeftTract { step, reason })?;
        base_entries.push(s);
        if step < p {
            orbit = map.eval_f_far(orbit).ok_or(PullbackError::PrecisionLost { step: step + 1 })?;
        }
    }
    let chain = |sign: f64| -> Result<(Complex64, Vec<i64>), PullbackError> {
        let mut c = orbit.add_im(sign * TWO_PI);
        let mut entries = vec![0; p + 1];
        for j in (0..=p).rev() {
            if j < p {
                c = inverse_branch_far(map, base_entries[j], c)
                    .map_err(|_| PullbackError::NotInH { stage: p - 1 - j })?;
            }
            entries[j] = map
                .tract_of_far(c)
                .map_err(|reason| PullbackError::LeftTract { step: j, reason })?;
        }
        let z = c.to_complex().ok_or(PullbackError::PrecisionLost { step: 0 })?;
        Ok((z, entries))
    };
    let (z_minus, minus_entries) = chain(-1.0)?;
    let (z_plus, plus_entries) = chain(1.0)?;
    Ok(Accumulation { z_minus, z_plus, base_entries, minus_entries, plus_entries })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpeedVerdict {
    /// `Re f^k(z) > K Re f^k(w)`.
    ZFaster(usize),
    /// `Re f^k(w) > K Re f^k(z)`.
    WFaster(usize),
    Undecided,
}

/// First `k <= max_iter` at which one orbit leads the other by the head-start
/// factor `K`. Both orbits must share tract entries along the way.
pub fn speed_compare(
    map: &GenExpMap,
    z: Complex64,
    w: Complex64,
    max_iter: usize,
) -> Result<SpeedVerdict, PullbackError> {
    let k_const = map
        .head_start()
        .ok_or_else(|| PullbackError::InvalidArgument("head-start constant unavailable".into()))?;
    let huge = |x: f64| !x.is_finite() || x > FORWARD_CAP;
    let (mut z, mut w) = (z, w);
    for k in 1..=max_iter {
        match (tract_of(map, z), tract_of(map, w)) {
            (Ok(a), Ok(b)) if a == b => {}
            (Err(_), Err(_)) => return Ok(SpeedVerdict::Undecided),
            _ => return Err(PullbackError::AddressMismatch { step: k - 1 }),
        }
        z = map.eval_f(z);
        w = map.eval_f(w);
        match (huge(z.re), huge(w.re)) {
            (true, true) => return Ok(SpeedVerdict::Undecided),
            (true, false) => return Ok(SpeedVerdict::ZFaster(k)),
            (false, true) => return Ok(SpeedVerdict::WFaster(k)),
            (false, false) => {}
        }
        if z.re > k_const * w.re {
            return Ok(SpeedVerdict::ZFaster(k));
        }
        if w.re > k_const * z.re {
            return Ok(SpeedVerdict::WFaster(k));
        }
    }
    Ok(SpeedVerdict::Undecided)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{build_curve, CurveSpec};
    use crate::growth::{build_growth, GrowthSpec};
    use crate::map::Mode;
    use crate::symbolic::partial_address;

    fn exp_circle() -> GenExpMap {
        GenExpMap::new(
            build_curve(CurveSpec::UnitCircle).unwrap(),
            build_growth(GrowthSpec::exp(), 0.0).unwrap(),
            5.0,
            2.0,
            Mode::Certified,
        )
        .unwrap()
    }

    fn repelling_fixed_point() -> f64 {
        let mut x: f64 = 2.0;
        for _ in 0..50 {
            x -= (x.exp() - x - 5.0) / (x.exp() - 1.0);
        }
        x
    }

    #[test]
    fn inverse_branch_examples() {
        let f = exp_circle();
        let z = inverse_branch(&f, 0, Complex64::new(5.0, 0.0)).unwrap();
        assert!((z - Complex64::new(10f64.ln(), 0.0)).norm() < 1e-15);
        let z = inverse_branch(&f, 1, Complex64::new(5.0, 0.0)).unwrap();
        assert!((z - Complex64::new(10f64.ln(), TWO_PI)).norm() < 1e-14);
        assert_eq!(
            inverse_branch(&f, 0, Complex64::new(-5.0, 0.0)),
            Err(PullbackError::NotInH { stage: 0 })
        );
    }

    #[test]
    fn two_level_pullback() {
        let f = exp_circle();
        let w = Complex64::new(5.0, 0.0);
        assert_eq!(pullback_n(&f, &[], w).unwrap(), w);
        let z = pullback_n(&f, &[0, 0], w).unwrap();
        assert!((z.re - (10f64.ln() + 5.0).ln()).abs() < 1e-14);
        assert!((f.eval_f(f.eval_f(z)) - w).norm() < 1e-12);
    }

    #[test]
    fn pullback_order_is_innermost_last_entry() {
        let f = exp_circle();
        let w = Complex64::new(7.0, 1.0);
        let z = pullback_n(&f, &[2, -1], w).unwrap();
        assert_eq!(tract_of(&f, z), Ok(2));
        assert_eq!(tract_of(&f, f.eval_f(z)), Ok(-1));
    }

    #[test]
    fn endpoint_of_zero_hair_is_the_repelling_fixed_point() {
        let f = exp_circle();
        let e = endpoint(&f, &ExternalAddress::constant(0), 1e-8).unwrap();
        assert!((e.z.re - repelling_fixed_point()).abs() < 1e-8);
        assert!(e.z.im.abs() < 1e-15);
        assert!(e.levels <= 40);
        assert!((f.eval_f(e.z) - e.z).norm() < 1e-6);
    }

    #[test]
    fn endpoint_of_period_two_address() {
        let f = exp_circle();
        let e = endpoint(&f, &"|per:0,1".parse().unwrap(), 1e-9).unwrap();
        assert!((f.eval_f(f.eval_f(e.z)) - e.z).norm() < 1e-6);
        assert_eq!(partial_address(&f, e.z, 4).entries, vec![0, 1, 0, 1]);
    }

    #[test]
    fn zero_hair_is_real_and_increasing() {
        let f = exp_circle();
        let trace = trace_hair(&f, &ExternalAddress::constant(0), 8, 20.0, 41).unwrap();
        assert_eq!(trace.samples.len(), 41);
        assert!(trace.samples.iter().all(|s| s.z.im.abs() <= 1e-9));
        assert!(trace.samples.windows(2).all(|w| w[1].z.re > w[0].z.re));
        assert!(trace.samples[1..].iter().all(|s| s.cauchy_gap <= s.gap_bound));
    }

    #[test]
    fn accumulation_at_depth_one() {
        let f = exp_circle();
        let z0 = Complex64::new(repelling_fixed_point() + 1.0, 0.0);
        let acc = accumulate(&f, z0, 1).unwrap();
        assert_eq!(acc.base_entries, vec![0, 0]);
        assert_eq!(acc.plus_entries, vec![0, 1]);
        assert_eq!(acc.minus_entries, vec![0, -1]);
        assert!((acc.z_plus - z0).norm() <= TWO_PI / f.mu());
        assert!((acc.z_plus.conj() - acc.z_minus).norm() < 1e-12);

        let zero = accumulate(&f, z0, 0).unwrap();
        assert_eq!(zero.z_plus, z0 + Complex64::new(0.0, TWO_PI));
    }

    #[test]
    fn speed_ordering_examples() {
        let f = exp_circle();
        let (z, w) = (Complex64::new(3.0, 0.0), Complex64::new(2.5, 0.0));
        let v = speed_compare(&f, z, w, 5).unwrap();
        assert!(matches!(v, SpeedVerdict::ZFaster(k) if k <= 5));
        assert!(matches!(speed_compare(&f, w, z, 5).unwrap(), SpeedVerdict::WFaster(_)));
        assert_eq!(speed_compare(&f, z, z, 5).unwrap(), SpeedVerdict::Undecided);
        assert_eq!(
            speed_compare(&f, z, Complex64::new(3.0, TWO_PI), 5),
            Err(PullbackError::AddressMismatch { step: 0 })
        );
    }
}
