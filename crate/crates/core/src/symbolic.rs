//! Tracts, external addresses and the shadowing squares behind admissibility.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::huge::HugeReal;
use crate::map::GenExpMap;

const TWO_PI: f64 = 2.0 * PI;
/// Iterates with a larger imaginary part cannot be assigned a tract reliably.
pub const IM_RESOLUTION_LIMIT: f64 = 1e15;
/// Boundary samples per side of a shadowing square.
pub const SQUARE_SAMPLES_PER_SIDE: usize = 256;
const KAPPA_CAP: f64 = 1e3;
const RATIO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolicError {
    #[error("periodic tail must be non-empty")]
    EmptyPeriod,
    #[error("cannot parse address {0:?}: expected \"s0,s1,...|const:k\", \"|per:a,b,...\" or \"|zero\"")]
    BadAddress(String),
    #[error("address {0} is not certified g-bounded")]
    NotGBounded(String),
    #[error("shadowing needs c > 1/h_min (c = {c}, h_min = {h_min})")]
    NoShadowingRoom { c: f64, h_min: f64 },
    #[error("no x satisfies the shadowing growth condition")]
    NoShadowingRadius,
}

/// The repeating part of an external address.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tail {
    Constant(i64),
    Periodic(Vec<i64>),
    Zero,
}

/// `s_0 s_1 s_2 ...` as a finite prefix followed by a tail rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExternalAddress {
    prefix: Vec<i64>,
    tail: Tail,
}

impl ExternalAddress {
    pub fn new(prefix: Vec<i64>, tail: Tail) -> Result<Self, SymbolicError> {
        if matches!(&tail, Tail::Periodic(p) if p.is_empty()) {
            return Err(SymbolicError::EmptyPeriod);
        }
        Ok(Self { prefix, tail })
    }

    pub fn constant(k: i64) -> Self {
        Self { prefix: Vec::new(), tail: Tail::Constant(k) }
    }

    pub fn zero() -> Self {
        Self { prefix: Vec::new(), tail: Tail::Zero }
    }

    pub fn periodic(period: Vec<i64>) -> Result<Self, SymbolicError> {
        Self::new(Vec::new(), Tail::Periodic(period))
    }

    pub fn prefix(&self) -> &[i64] {
        &self.prefix
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn entry(&self, n: usize) -> i64 {
        if let Some(&s) = self.prefix.get(n) {
            return s;
        }
        match &self.tail {
            Tail::Constant(k) => *k,
            Tail::Zero => 0,
            Tail::Periodic(p) => p[(n - self.prefix.len()) % p.len()],
        }
    }

    /// The first `n` entries.
    pub fn entries(&self, n: usize) -> Vec<i64> {
        (0..n).map(|i| self.entry(i)).collect()
    }

    /// `σ(s_0 s_1 ...) = s_1 s_2 ...`.
    pub fn shift(&self) -> Self {
        if !self.prefix.is_empty() {
            return Self { prefix: self.prefix[1..].to_vec(), tail: self.tail.clone() };
        }
        let tail = match &self.tail {
            Tail::Periodic(p) => {
                let mut q = p.clone();
                q.rotate_left(1);
                Tail::Periodic(q)
            }
            t => t.clone(),
        };
        Self { prefix: Vec::new(), tail }
    }

    /// `k s_0 s_1 ...`.
    pub fn prepend(&self, k: i64) -> Self {
        let mut prefix = Vec::with_capacity(self.prefix.len() + 1);
        prefix.push(k);
        prefix.extend_from_slice(&self.prefix);
        Self { prefix, tail: self.tail.clone() }
    }

    fn period(&self) -> usize {
        match &self.tail {
            Tail::Periodic(p) => p.len(),
            _ => 1,
        }
    }

    /// Lexicographic order on the entry sequences.
    pub fn compare_lex(&self, other: &Self) -> Ordering {
        let head = self.prefix.len().max(other.prefix.len());
        let (p, q) = (self.period(), other.period());
        let span = head + p / gcd(p, q) * q;
        (0..span)
            .map(|n| self.entry(n).cmp(&other.entry(n)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }

    fn tail_values(&self) -> &[i64] {
        match &self.tail {
            Tail::Constant(k) => std::slice::from_ref(k),
            Tail::Periodic(p) => p,
            Tail::Zero => &[0],
        }
    }

    /// `sup |s_n|` over the tail.
    pub fn tail_sup(&self) -> u64 {
        self.tail_values().iter().map(|s| s.unsigned_abs()).max().unwrap_or(0)
    }

    /// `sup |s_n|` over the whole address.
    pub fn sup(&self) -> u64 {
        self.prefix.iter().map(|s| s.unsigned_abs()).max().unwrap_or(0).max(self.tail_sup())
    }

    /// Distinct entry values (prefix and tail).
    pub fn distinct_entries(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.prefix.iter().chain(self.tail_values()).copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn join(v: &[i64]) -> String {
    v.iter().map(i64::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for ExternalAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|", join(&self.prefix))?;
        match &self.tail {
            Tail::Constant(k) => write!(f, "const:{k}"),
            Tail::Periodic(p) => write!(f, "per:{}", join(p)),
            Tail::Zero => write!(f, "zero"),
        }
    }
}

impl FromStr for ExternalAddress {
    type Err = SymbolicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SymbolicError::BadAddress(s.to_string());
        let list = |t: &str| -> Result<Vec<i64>, SymbolicError> {
            let t = t.trim();
            if t.is_empty() {
                return Ok(Vec::new());
            }
            t.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
        };
        let (head, tail) = s.split_once('|').ok_or_else(bad)?;
        let prefix = list(head)?;
        let tail = tail.trim();
        let tail = if tail == "zero" {
            Tail::Zero
        } else if let Some(k) = tail.strip_prefix("const:") {
            Tail::Constant(k.trim().parse().map_err(|_| bad())?)
        } else if let Some(p) = tail.strip_prefix("per:") {
            Tail::Periodic(list(p)?)
        } else {
            return Err(bad());
        };
        Self::new(prefix, tail)
    }
}

/// Why a point is not in any tract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutsideTract {
    /// `Re z <= M`.
    LeftOfM,
    /// `Im z` lies strictly between two tracts.
    GapStrip,
    /// `Im z` lies on a horizontal tract boundary.
    Boundary,
}

/// The `k` with `z ∈ T_k = {Re z > M, |Im z - 2πk| < π/2}`.
pub fn tract_of(map: &GenExpMap, z: Complex64) -> Result<i64, OutsideTract> {
    if !(z.re > map.big_m()) {
        return Err(OutsideTract::LeftOfM);
    }
    let k = (z.im / TWO_PI).round();
    let d = (z.im - TWO_PI * k).abs();
    match d.partial_cmp(&FRAC_PI_2) {
        Some(Ordering::Less) => Ok(k as i64),
        Some(Ordering::Equal) => Err(OutsideTract::Boundary),
        _ => Err(OutsideTract::GapStrip),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AddressStatus {
    /// Every requested iterate was in a tract.
    AllInTracts,
    /// The `n`-th iterate is outside every tract.
    LeftTractAt(usize),
    /// The `n`-th iterate is no longer resolvable in double precision.
    PrecisionLost(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialAddress {
    pub entries: Vec<i64>,
    pub status: AddressStatus,
}

/// Tract indices of `z, f(z), ..., f^{n-1}(z)`, stopping early when the orbit
/// leaves the tracts.
pub fn partial_address(map: &GenExpMap, z: Complex64, n: usize) -> PartialAddress {
    let mut entries = Vec::with_capacity(n);
    let mut z = z;
    for i in 0..n {
        if !(z.re.is_finite() && z.im.is_finite()) || z.im.abs() > IM_RESOLUTION_LIMIT {
            return PartialAddress { entries, status: AddressStatus::PrecisionLost(i) };
        }
        match tract_of(map, z) {
            Ok(k) => entries.push(k),
            Err(_) => return PartialAddress { entries, status: AddressStatus::LeftTractAt(i) },
        }
        if i + 1 < n {
            z = map.eval_f(z);
        }
    }
    PartialAddress { entries, status: AddressStatus::AllInTracts }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GBoundedness {
    /// `2π|s_n| <= g^n(witness)` for every `n`.
    Bounded { witness: f64 },
    /// No witness up to the search limit.
    Inconclusive,
}

/// Whether `2π|s_n| <= g^n(x)` holds for all `n`, certified as follows: the
/// inequality is checked explicitly until the orbit of `x` is past the prefix,
/// dominates `2π sup|tail|` and satisfies `g(v) > v`; from there on `g^n(x)` is
/// non-decreasing. The search examines up to `prefix + max(n, 1)` iterates.
pub fn is_g_bounded(map: &GenExpMap, addr: &ExternalAddress, n: usize, x_max: f64) -> GBoundedness {
    let horizon = addr.prefix().len() + n.max(1);
    let certified = |x: f64| certify_g_bounded(map, addr, horizon, x);
    if !certified(x_max) {
        return GBoundedness::Inconclusive;
    }
    if certified(0.0) {
        return GBoundedness::Bounded { witness: 0.0 };
    }
    let (mut lo, mut hi) = (0.0, x_max);
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if certified(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    GBoundedness::Bounded { witness: hi }
}

fn certify_g_bounded(map: &GenExpMap, addr: &ExternalAddress, horizon: usize, x: f64) -> bool {
    let growth = map.growth();
    let tail_bound = TWO_PI * addr.tail_sup() as f64;
    let mut v = HugeReal::from_f64(x);
    for i in 0..=horizon {
        if v < HugeReal::from_f64(TWO_PI * addr.entry(i).unsigned_abs() as f64) {
            return false;
        }
        if i >= addr.prefix().len() && !(v < HugeReal::from_f64(tail_bound)) {
            let next = growth.g_huge(v);
            if next > v {
                return true;
            }
        }
        v = growth.g_huge(v);
    }
    false
}

/// Closed square of side `2π` with bottom-left corner `(re, im)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Square {
    pub re: HugeReal,
    pub im: f64,
}

impl Square {
    pub const SIDE: f64 = TWO_PI;
}

/// The nested squares `D_n` realising an address.
#[derive(Clone, Debug)]
pub struct ShadowParams {
    address: ExternalAddress,
    pub kappa: f64,
    pub delta: f64,
    /// Smallest `x` with `max{3π/2, 4π|s_n|} <= κ g̃^n(x)` for the levels in use.
    pub x0_pp: f64,
    pub r0: f64,
    /// `r_0, ..., r_N` with `r_{k+1} = h_min g(r_k)`.
    pub r_seq: Vec<HugeReal>,
}

impl ShadowParams {
    pub fn address(&self) -> &ExternalAddress {
        &self.address
    }

    pub fn levels(&self) -> usize {
        self.r_seq.len() - 1
    }

    pub fn squares(&self) -> Vec<Square> {
        self.r_seq
            .iter()
            .enumerate()
            .map(|(n, r)| Square { re: *r, im: (4 * self.address.entry(n) - 1) as f64 * FRAC_PI_2 })
            .collect()
    }

    /// The same construction started from a different `r_0`.
    pub fn with_initial_radius(&self, map: &GenExpMap, r0: f64) -> Self {
        Self { r0, r_seq: radius_sequence(map, r0, self.levels()), ..self.clone() }
    }
}

fn g_tilde(map: &GenExpMap, x: HugeReal) -> HugeReal {
    map.growth().g_huge(x).scale(map.curve().h_min())
}

fn radius_sequence(map: &GenExpMap, r0: f64, levels: usize) -> Vec<HugeReal> {
    let mut seq = Vec::with_capacity(levels + 1);
    let mut r = HugeReal::from_f64(r0);
    seq.push(r);
    for _ in 0..levels {
        r = g_tilde(map, r);
        seq.push(r);
    }
    seq
}

pub fn build_shadow_params(
    map: &GenExpMap,
    addr: &ExternalAddress,
    levels: usize,
) -> Result<ShadowParams, SymbolicError> {
    let (c, h_min) = (map.constants().c, map.curve().h_min());
    let ratio2 = (c / h_min).powi(2);
    if !(ratio2 > 1.0) {
        return Err(SymbolicError::NoShadowingRoom { c, h_min });
    }
    let x_max = TWO_PI * addr.sup() as f64 + 100.0;
    if is_g_bounded(map, addr, levels, x_max) == GBoundedness::Inconclusive {
        return Err(SymbolicError::NotGBounded(addr.to_string()));
    }
    let kappa = (0.5 * (ratio2 - 1.0).sqrt()).min(KAPPA_CAP);
    let delta = 0.5 * ((ratio2 - kappa * kappa).sqrt() - 1.0);

    let holds = |x: f64| {
        let mut v = HugeReal::from_f64(x);
        for n in 0..=levels {
            let need = (1.5 * PI).max(2.0 * TWO_PI * addr.entry(n).unsigned_abs() as f64);
            if v.scale(kappa) < HugeReal::from_f64(need) {
                return false;
            }
            v = g_tilde(map, v);
        }
        true
    };
    let x0_pp = if holds(0.0) {
        0.0
    } else {
        let mut hi = 1.0;
        while !holds(hi) {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(SymbolicError::NoShadowingRadius);
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            if hi - lo <= 1e-12 * hi.max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if holds(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };

    // the g(M) - a term puts every point with real part >= r_0 inside H
    let r0 = map
        .big_m()
        .max(x0_pp)
        .max((TWO_PI + map.a()) / delta)
        .max(map.g_big_m() - map.a())
        + 1.0;
    Ok(ShadowParams {
        address: addr.clone(),
        kappa,
        delta,
        x0_pp,
        r0,
        r_seq: radius_sequence(map, r0, levels),
    })
}

/// Outcome of the shadowing check at one level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelReport {
    pub level: usize,
    /// `f_{s_n}^{-1}(∂D_{n+1}) ⊂ D_n`.
    pub pullback_contained: bool,
    /// `∂D_{n+1}` lies in the annulus `h_min g(r_n) <= |w + a| <= c g(r_n)`.
    pub annulus_contains: bool,
    /// Boundary samples of `D_{n+1}` outside the closure of `H`.
    pub outside_h: usize,
    /// Range of `g(Re z)/g(r_n)` over the pulled-back samples; containment
    /// means it lies in `[1, g(r_n + 2π)/g(r_n)]`.
    pub ratio_range: (f64, f64),
}

/// Pulls the boundary of each `D_{n+1}` back through the branch of `T_{s_n}`
/// and checks that it lands in `D_n`.
///
/// Works with `q = |w + a| / r_{n+1}`: the preimage has real part `x` with
/// `g(x)/g(r_n) = h_min q / |h(y')|`, which stays accurate when `r_n` is far
/// beyond the `f64` range.
pub fn verify_shadowing(map: &GenExpMap, params: &ShadowParams, levels: usize) -> Vec<LevelReport> {
    let levels = levels.min(params.levels());
    let squares = params.squares();
    let h_min = map.curve().h_min();
    let annulus_outer = map.constants().c / h_min;
    (0..levels)
        .map(|n| {
            let target = squares[n + 1];
            let r_next = target.re;
            let rinv = r_next.recip();
            let growth_ratio = map.growth().period_ratio_huge(params.r_seq[n]);
            let mut report = LevelReport {
                level: n,
                pullback_contained: true,
                annulus_contains: true,
                outside_h: 0,
                ratio_range: (f64::INFINITY, 0.0),
            };
            for (u, v) in square_boundary(target.im) {
                let (q, theta) = match r_next.as_plain() {
                    Some(r) => {
                        let w = Complex64::new(r + u, v);
                        if !map.in_h_closure(w) {
                            report.outside_h += 1;
                            report.pullback_contained = false;
                            continue;
                        }
                        let zeta = w + map.a();
                        (zeta.norm() / r, zeta.arg())
                    }
                    None => {
                        let re = 1.0 + (u + map.a()) * rinv;
                        let im = v * rinv;
                        (re.hypot(im), im.atan2(re))
                    }
                };
                let (_, modulus) = map.curve().modulus_at_arg(theta);
                let rho = h_min * q / modulus;
                report.ratio_range.0 = report.ratio_range.0.min(rho);
                report.ratio_range.1 = report.ratio_range.1.max(rho);
                if rho < 1.0 - RATIO_TOL || rho > growth_ratio * (1.0 + RATIO_TOL) {
                    report.pullback_contained = false;
                }
                if q < 1.0 - RATIO_TOL || q > annulus_outer * (1.0 + RATIO_TOL) {
                    report.annulus_contains = false;
                }
            }
            report
        })
        .collect()
}

/// Offsets `(u, v)` of boundary samples of the square `[0, 2π] × [im, im + 2π]`
/// relative to its left edge.
fn square_boundary(im: f64) -> impl Iterator<Item = (f64, f64)> {
    let n = SQUARE_SAMPLES_PER_SIDE;
    let step = TWO_PI / n as f64;
    (0..n).flat_map(move |i| {
        let t = step * i as f64;
        [(t, im), (TWO_PI, im + t), (TWO_PI - t, im + TWO_PI), (0.0, im + TWO_PI - t)]
    })
}
