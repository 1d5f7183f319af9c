//! Seeded spot checks of the invariants a validated map must satisfy.

use std::f64::consts::PI;

use genexp_core::{inverse_branch, Complex64, GenExpMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 1000;

pub struct Report {
    pub lines: Vec<String>,
    pub all_passed: bool,
}

struct Checks {
    rng: ChaCha8Rng,
    report: Report,
}

impl Checks {
    fn run(&mut self, name: &str, mut trial: impl FnMut(&mut ChaCha8Rng) -> bool) {
        let passed = (0..SAMPLES).filter(|_| trial(&mut self.rng)).count();
        let verdict = if passed == SAMPLES { "pass" } else { "FAIL" };
        self.report.all_passed &= passed == SAMPLES;
        self.report.lines.push(format!("{name} = {verdict} ({passed}/{SAMPLES})"));
    }

    fn skip(&mut self, name: &str, why: &str) {
        self.report.lines.push(format!("{name} = skipped ({why})"));
    }
}

pub fn run_checks(map: &GenExpMap, seed: u64) -> Report {
    let mut c = Checks {
        rng: ChaCha8Rng::seed_from_u64(seed),
        report: Report { lines: Vec::new(), all_passed: true },
    };
    let curve = map.curve();
    let growth = map.growth();
    let k = *map.constants();
    let (big_m, small_m, a) = (k.big_m, k.small_m, map.a());

    c.run("curve_modulus_bounds", |r| {
        let m = curve.eval(r.gen_range(-20.0..20.0)).norm();
        m >= k.h_min * (1.0 - 1e-12) && m <= 1.0 + 1e-12
    });
    c.run("curve_parity", |r| {
        let y = r.gen_range(-20.0..20.0);
        (curve.eval(y + PI) + curve.eval(y)).norm() <= 1e-12 && (curve.eval(y + 2.0 * PI) - curve.eval(y)).norm() <= 1e-12
    });
    c.run("arg_inverse_roundtrip", |r| {
        let t = r.gen_range(-PI / 2.0..PI / 2.0);
        (curve.eval(curve.arg_inverse(t)).arg() - t).abs() <= 1e-10
    });
    c.run("curve_bilipschitz", |r| {
        let (y1, y2) = (r.gen_range(-PI / 2.0..PI / 2.0), r.gen_range(-PI / 2.0..PI / 2.0));
        if y1 == y2 {
            return true;
        }
        let q = (curve.eval(y1) - curve.eval(y2)).norm() / (y1 - y2).abs();
        q >= curve.lip_lower() * (1.0 - 1e-6) && q <= curve.lip_upper() * (1.0 + 1e-6)
    });
    c.run("growth_constant", |r| {
        let x = growth.x_growth() + r.gen_range(0.0..100.0);
        growth.ln_g(x + 2.0 * PI) - growth.ln_g(x) >= k.c.ln() - 1e-12
    });
    c.run("growth_inverse", |r| {
        let x = r.gen_range(-50.0..50.0);
        (growth.invert(growth.eval(x)).unwrap_or(f64::NAN) - x).abs() <= 1e-10
    });
    let envelope = growth.envelope_constant();
    c.run("growth_envelope", |r| {
        let x = growth.x_growth() + r.gen_range(0.0..100.0);
        growth.ln_g(x) >= envelope.ln() + x / (2.0 * PI) * k.c.ln() - 1e-9
    });
    c.run("expansion", |r| {
        let z = Complex64::new(big_m + r.gen_range(0.0..10.0), r.gen_range(-20.0..20.0));
        match map.jacobian(z) {
            Ok(j) => j.min_stretch() >= k.mu * (1.0 - 1e-9),
            Err(_) => true,
        }
    });
    c.run("contraction", |r| {
        let mut pt = || Complex64::new(small_m - r.gen_range(0.0..20.0), r.gen_range(-20.0..20.0));
        let (z1, z2) = (pt(), pt());
        (map.eval_f(z1) - map.eval_f(z2)).norm() <= 0.5 * (z1 - z2).norm() + 1e-12
    });
    if map.is_certified() {
        c.run("absorption", |r| {
            let z = Complex64::new(big_m - r.gen_range(0.0..30.0), r.gen_range(-20.0..20.0));
            map.eval_f(z).re <= small_m
        });
    } else {
        c.skip("absorption", "uncertified");
    }
    c.run("periodicity", |r| {
        let z = Complex64::new(r.gen_range(-10.0..10.0), r.gen_range(-20.0..20.0));
        let (w1, w2) = (map.eval_f(z), map.eval_f(z + Complex64::new(0.0, 2.0 * PI)));
        (w1 - w2).norm() <= 1e-12 * (1.0 + w1.norm())
    });
    c.run("inverse_roundtrip", |r| {
        let w = Complex64::new(a + r.gen_range(0.0..100.0), r.gen_range(-50.0..50.0));
        if !map.in_h_closure(w) {
            return true;
        }
        let kk = r.gen_range(-3..=3);
        inverse_branch(map, kk, w).is_ok_and(|z| (map.eval_f(z) - w).norm() <= 1e-9 * (1.0 + w.norm()))
    });
    c.report
}
