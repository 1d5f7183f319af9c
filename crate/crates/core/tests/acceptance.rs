//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use genexp_core::{
    accumulate, build_curve, build_growth, build_shadow_params, encode_ppm, endpoint, inverse_branch,
    partial_address, render_grid, trace_hair, verify_shadowing, Complex64, CurveSpec, ExternalAddress, GenExpMap,
    GridJob, GrowthSpec, Mode, Verdict, Window,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

const TWO_PI: f64 = 2.0 * PI;

/// SHA-256 of the 512x512 diamond render below.
const DIAMOND_GOLDEN: &str = "f2f9de23d4ce79ff20cbcf3ade5709ecf2e9b394d3aca81a12857509e127adde";

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

fn diamond() -> GenExpMap {
    GenExpMap::new(
        build_curve(CurveSpec::diamond()).unwrap(),
        build_growth(GrowthSpec::exp(), 0.0).unwrap(),
        2.0,
        2.0,
        Mode::Uncertified,
    )
    .unwrap()
}

/// Newton's method on `e^x - x - a`.
fn newton_root(a: f64, mut x: f64) -> f64 {
    for _ in 0..100 {
        let step = (x.exp() - x - a) / (x.exp() - 1.0);
        x -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    x
}

type Outcome = Result<String, String>;
type Criterion = Box<dyn FnOnce(&mut ChaCha8Rng) -> Outcome>;

fn check(cond: bool, ok: String, fail: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(fail)
    }
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let map = exp_circle(5.0);
    let xi = map.fixed_point().ok_or("no fixed point")?;
    let elapsed = start.elapsed();
    let oracle = newton_root(5.0, -5.0);
    let err = (xi - Complex64::new(oracle, 0.0)).norm();
    check(
        err <= 1e-9 && elapsed < Duration::from_millis(10),
        format!("xi = {:.12}, Newton {oracle:.12}, err {err:.1e}, {elapsed:?}", xi.re),
        format!("xi = {xi}, Newton {oracle}, err {err:.1e}, {elapsed:?}"),
    )
}

fn ac2() -> Outcome {
    let map = exp_circle(5.0);
    let start = Instant::now();
    let e = endpoint(&map, &ExternalAddress::zero(), 1e-7).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let oracle = newton_root(5.0, 2.0);
    let err = (e.z - Complex64::new(oracle, 0.0)).norm();
    check(
        err <= 1e-6 && e.levels <= 40 && elapsed < Duration::from_millis(100),
        format!("endpoint {:.10} vs {oracle:.10}, err {err:.1e}, depth {}, {elapsed:?}", e.z.re, e.levels),
        format!("endpoint {} vs {oracle}, err {err:.1e}, depth {}, {elapsed:?}", e.z, e.levels),
    )
}

fn ac3(rng: &mut ChaCha8Rng) -> Outcome {
    let map = exp_circle(5.0);
    let a = map.a();
    let (mut tried, mut worst) = (0, 0.0f64);
    while tried < 10_000 {
        let w = Complex64::new(rng.gen_range(a..a + 100.0), rng.gen_range(-50.0..50.0));
        if !map.in_h_closure(w) {
            continue;
        }
        tried += 1;
        let k = rng.gen_range(-3..=3);
        let z = inverse_branch(&map, k, w).map_err(|e| format!("{w}: {e}"))?;
        worst = worst.max((map.eval_f(z) - w).norm() / (1.0 + w.norm()));
    }
    check(worst <= 1e-9, format!("10000/10000, worst {worst:.1e}"), format!("worst relative residual {worst:.1e}"))
}

fn ac4(rng: &mut ChaCha8Rng) -> Outcome {
    let map = exp_circle(5.0);
    let m = map.small_m();
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let mut pick = || Complex64::new(rng.gen_range(m - 50.0..m), rng.gen_range(-50.0..50.0));
        let (z1, z2) = (pick(), pick());
        if z1 == z2 {
            continue;
        }
        worst = worst.max((map.eval_f(z1) - map.eval_f(z2)).norm() / (z1 - z2).norm());
    }
    check(worst <= 0.5 + 1e-12, format!("10000/10000, worst ratio {worst:.6}"), format!("worst ratio {worst}"))
}

/// Uniform point of the tract `T_j`, real part in `(M, M + 100)`.
fn tract_point(rng: &mut ChaCha8Rng, map: &GenExpMap, j: i64) -> Complex64 {
    let big_m = map.big_m();
    Complex64::new(
        rng.gen_range(big_m..big_m + 100.0).max(big_m + 1e-9),
        TWO_PI * j as f64 + rng.gen_range(-FRAC_PI_2 + 1e-9..FRAC_PI_2 - 1e-9),
    )
}

fn ac5(rng: &mut ChaCha8Rng) -> Outcome {
    let map = exp_circle(5.0);
    let bound = 1.0 / map.mu() + 1e-9;
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let j = rng.gen_range(-3..=3);
        let (w1, w2) = (tract_point(rng, &map, j), tract_point(rng, &map, j));
        let k = rng.gen_range(-3..=3);
        let z1 = inverse_branch(&map, k, w1).map_err(|e| e.to_string())?;
        let z2 = inverse_branch(&map, k, w2).map_err(|e| e.to_string())?;
        worst = worst.max((z1 - z2).norm() / (w1 - w2).norm());
    }
    check(worst <= bound, format!("10000/10000, worst ratio {worst:.6} <= {bound:.6}"), format!("worst ratio {worst}"))
}

fn ac6() -> Outcome {
    let map = exp_circle(5.0);
    let addr: ExternalAddress = "|per:0,1".parse().map_err(|e| format!("{e}"))?;
    let trace = trace_hair(&map, &addr, 20, 10.0, 100).map_err(|e| e.to_string())?;
    let mut passed = 0;
    for s in &trace.samples {
        let here = partial_address(&map, s.z, 6).entries;
        let next = partial_address(&map, map.eval_f(s.z), 5).entries;
        if here == [0, 1, 0, 1, 0, 1] && next == [1, 0, 1, 0, 1] {
            passed += 1;
        }
    }
    let n = trace.samples.len();
    check(passed == n && n == 100, format!("{passed}/{n}"), format!("{passed}/{n}"))
}

fn ac7() -> Outcome {
    let map = exp_circle(5.0);
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut all = true;
    for addr in [ExternalAddress::zero(), ExternalAddress::periodic(vec![0, 1]).unwrap()] {
        let params = build_shadow_params(&map, &addr, 6).map_err(|e| e.to_string())?;
        let reports = verify_shadowing(&map, &params, 6);
        let ok = reports.len() == 6 && reports.iter().all(|r| r.pullback_contained);
        all &= ok;
        notes.push(format!("{addr}: {}/6", reports.iter().filter(|r| r.pullback_contained).count()));
    }
    let elapsed = start.elapsed();
    check(
        all && elapsed < Duration::from_secs(1),
        format!("{}, {elapsed:?}", notes.join(", ")),
        format!("{}, {elapsed:?}", notes.join(", ")),
    )
}

/// Point of `T_k` with real part `x` whose image has imaginary part `v`,
/// or `None` if no such point exists.
fn point_with_image_im(x: f64, k: i64, v: f64) -> Option<Complex64> {
    let s = v / x.exp();
    (s.abs() < 1.0).then(|| Complex64::new(x, TWO_PI * k as f64 + s.asin()))
}

fn ac8(rng: &mut ChaCha8Rng) -> Outcome {
    let map = exp_circle(5.0);
    let big_k = map.head_start().ok_or("no head-start constant")?;
    let big_m = map.big_m();
    let strip = |z: Complex64| {
        let j = (z.im / TWO_PI).round();
        (z.re > big_m && (z.im - TWO_PI * j).abs() < FRAC_PI_2).then_some(j as i64)
    };
    let (mut built, mut passed) = (0, 0);
    while built < 10_000 {
        let k = rng.gen_range(-3..=3);
        let j = rng.gen_range(-3..=3);
        let x0 = rng.gen_range(big_m..8.0);
        let x1 = big_k * x0 + rng.gen_range(0.0..5.0);
        let v = |r: &mut ChaCha8Rng| TWO_PI * j as f64 + r.gen_range(-FRAC_PI_2 + 1e-9..FRAC_PI_2 - 1e-9);
        let (v0, v1) = (v(rng), v(rng));
        let (Some(z0), Some(z1)) = (point_with_image_im(x0, k, v0), point_with_image_im(x1, k, v1)) else {
            continue;
        };
        let (w0, w1) = (map.eval_f(z0), map.eval_f(z1));
        if strip(z0) != Some(k) || strip(z1) != Some(k) || strip(w0) != Some(j) || strip(w1) != Some(j) {
            continue;
        }
        built += 1;
        if w1.re >= big_k * w0.re {
            passed += 1;
        }
    }
    check(passed == built, format!("{passed}/{built}, K = {big_k:.6}"), format!("{passed}/{built}"))
}

fn ac9() -> Outcome {
    let map = exp_circle(5.0);
    let tip = endpoint(&map, &ExternalAddress::zero(), 1e-12).map_err(|e| e.to_string())?;
    let z0 = tip.z + 1.0;
    let mu = map.mu();
    let mut passed = 0;
    let mut first_failure = None;
    for p in 1..=10usize {
        let acc = accumulate(&map, z0, p).map_err(|e| format!("p = {p}: {e}"))?;
        let bound = TWO_PI * mu.powi(-(p as i32)) * (1.0 + 1e-6);
        let close = (acc.z_minus - z0).norm() <= bound && (acc.z_plus - z0).norm() <= bound;
        let differs_at_p = |entries: &[i64], delta: i64| {
            entries.len() == p + 1
                && (0..=p).all(|i| {
                    let expected = acc.base_entries[i] + if i == p { delta } else { 0 };
                    entries[i] == expected
                })
        };
        if close && differs_at_p(&acc.minus_entries, -1) && differs_at_p(&acc.plus_entries, 1) {
            passed += 1;
        } else if first_failure.is_none() {
            first_failure = Some(format!("p = {p}: {acc:?}"));
        }
    }
    check(passed == 10, format!("{passed}/10"), format!("{passed}/10; {}", first_failure.unwrap_or_default()))
}

fn ac10() -> Outcome {
    let map = diamond();
    let job = GridJob {
        window: Window { x_min: -4.0, x_max: 4.0, y_min: -4.0, y_max: 4.0 },
        width: 512,
        height: 512,
        max_iter: 50,
    };
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let timed = |n: usize| {
        pool(n).install(|| {
            let start = Instant::now();
            let grid = render_grid(&map, &job).unwrap();
            (grid, start.elapsed())
        })
    };
    let (grid, t1) = timed(1);
    let (grid4, t4) = timed(4);

    let big_m = map.big_m();
    let mut problems = Vec::new();
    let mut j_count = 0;
    for row in 0..job.height {
        for col in 0..job.width {
            let z = job.pixel_center(col, row);
            let c = grid.get(col, row);
            if z.re <= -3.0 && !c.is_attracted() {
                problems.push(format!("pixel {z} with Re <= -3 not attracted"));
            }
            if let Verdict::JCandidate { .. } = c.verdict {
                j_count += 1;
                let j = (z.im / TWO_PI).round();
                if !(z.re >= big_m && (z.im - TWO_PI * j).abs() <= FRAC_PI_2) {
                    problems.push(format!("J-candidate {z} outside the closed tract strips"));
                }
            }
        }
    }
    if j_count == 0 {
        problems.push("no J-candidates".into());
    }
    let bytes = encode_ppm(&grid);
    if bytes != encode_ppm(&grid4) {
        problems.push("1-thread and 4-thread renders differ".into());
    }
    let digest = hex::encode(Sha256::digest(&bytes));
    if digest != DIAMOND_GOLDEN {
        problems.push(format!("digest {digest} differs from the pinned image"));
    }
    if t1 >= Duration::from_secs(10) || t4 >= Duration::from_secs(3) {
        problems.push(format!("too slow: {t1:?} on 1 thread, {t4:?} on 4"));
    }
    let summary = format!("{j_count} J-candidates, {t1:?} on 1 thread, {t4:?} on 4");
    if problems.is_empty() {
        Ok(summary)
    } else {
        problems.truncate(5);
        Err(format!("{summary}; {}", problems.join("; ")))
    }
}

fn ac11(rng: &mut ChaCha8Rng) -> Outcome {
    let maps = [exp_circle(5.0), diamond()];
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < 1000 {
        let map = &maps[done % 2];
        let z = Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-10.0..10.0));
        // stay clear of the diamond's corners at multiples of π/2
        let off = (z.im / FRAC_PI_2 - (z.im / FRAC_PI_2).round()).abs() * FRAC_PI_2;
        if off < 1e-3 {
            continue;
        }
        let Ok(jac) = map.jacobian(z) else { continue };
        done += 1;
        let theta: f64 = rng.gen_range(0.0..TWO_PI);
        let dir = Complex64::new(theta.cos(), theta.sin());
        let eps = 1e-6;
        let fd = (map.eval_f(z + dir * eps) - map.eval_f(z - dir * eps)) / (2.0 * eps);
        let (jx, jy) = jac.mul_vec((dir.re, dir.im));
        let exact = Complex64::new(jx, jy);
        worst = worst.max((fd - exact).norm() / exact.norm());
    }
    check(worst <= 1e-5, format!("1000/1000, worst relative error {worst:.1e}"), format!("worst {worst:.1e}"))
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let criteria: Vec<(&str, Criterion)> = vec![
        ("AC1 fixed point", Box::new(|_| ac1())),
        ("AC2 endpoint", Box::new(|_| ac2())),
        ("AC3 inverse roundtrip", Box::new(ac3)),
        ("AC4 contraction", Box::new(ac4)),
        ("AC5 expansion", Box::new(ac5)),
        ("AC6 shift equivariance", Box::new(|_| ac6())),
        ("AC7 shadowing", Box::new(|_| ac7())),
        ("AC8 head-start", Box::new(ac8)),
        ("AC9 accumulation", Box::new(|_| ac9())),
        ("AC10 diamond render", Box::new(|_| ac10())),
        ("AC11 jacobian", Box::new(ac11)),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        match run(&mut rng) {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
