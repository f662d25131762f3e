//! Acceptance gate: one PASS/FAIL line per criterion, tolerances fixed here.
//!
//! Criterion 10 is a known failure: its principal-value difference test
//! assumes the finite cutoff only shifts the level shift by a constant,
//! but a Lorentzian cutoff also adds a term linear in frequency. The
//! harness reports it as FAIL and exits nonzero only for failures outside
//! `KNOWN_FAILURES` (or if a known failure starts passing).

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use dicke_core::bath::{pv_level_shift_oracle, Bath, Sheet};
use dicke_core::greens::{inverse_retarded, SpectrumEvaluator};
use dicke_core::observables::{exponent_fits, population, ExponentFit, WindowConfig};
use dicke_core::oracle::distance_to_bath_free_pole;
use dicke_core::poles::{char_fn, default_y_grid, soft_mode_sweep, Branch};
use dicke_core::quad::QuadConfig;
use dicke_core::validation::lower_half_plane_points;
use dicke_core::{Complex64, ModelParams};

const KNOWN_FAILURES: &[u32] = &[10];

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

type Criterion = (u32, &'static str, Duration, Box<dyn Fn() -> Verdict>);

fn figure() -> ModelParams {
    ModelParams::default()
}

fn c1_critical_coupling() -> Verdict {
    let y_c = figure().critical_coupling().unwrap();
    verdict(
        (y_c - 2.0).abs() <= 2.0 * f64::EPSILON,
        format!("y_c = {y_c:.17}"),
    )
}

fn c2_vacuum() -> Verdict {
    let cfg = QuadConfig::default();
    let mut worst: f64 = 0.0;
    for gamma in [0.0, 0.1, 0.5] {
        let r = population(&figure().with_gamma(gamma), 0.0, &cfg).unwrap();
        worst = worst.max(r.n_a.abs()).max(r.n_b.abs());
    }
    verdict(worst < 1e-6, format!("max |n| = {worst:.2e} (tol 1e-6)"))
}

fn c3_lorentzian() -> Verdict {
    let p = figure();
    let eval = SpectrumEvaluator::new(&p).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let w = -10.0 + 20.0 * k as f64 / 999.0;
        let c = eval.sample(w).unwrap().c_a;
        let want = 2.0 * p.kappa / ((w - p.omega_a).powi(2) + p.kappa * p.kappa);
        worst = worst.max((c - want).abs());
    }
    verdict(
        worst < 1e-12,
        format!("max |c_a - L| = {worst:.2e} on 1000 points (tol 1e-12)"),
    )
}

fn c4_determinant() -> Verdict {
    let p = figure().with_y(1.3);
    let worst = lower_half_plane_points(20)
        .into_iter()
        .map(|z| {
            let det = inverse_retarded(z, &p, Sheet::Second).determinant();
            let f = char_fn(z, &p);
            (det - f).norm() / f.norm()
        })
        .fold(0.0, f64::max);
    verdict(
        worst < 1e-10,
        format!("max rel err = {worst:.2e} at 20 points (tol 1e-10)"),
    )
}

fn c5_bath_free_oracle() -> Verdict {
    let p = figure().with_gamma(0.0);
    let y_c = p.critical_coupling().unwrap();
    let grid: Vec<f64> = (0..50).map(|k| 0.999 * y_c * k as f64 / 49.0).collect();
    let traj = soft_mode_sweep(&p, &grid).unwrap();
    let worst = traj
        .samples
        .iter()
        .map(|s| distance_to_bath_free_pole(s.pole, &p.with_y(s.y)).unwrap())
        .fold(0.0, f64::max);
    verdict(
        worst < 1e-9,
        format!(
            "max distance = {worst:.2e} over {} samples (tol 1e-9)",
            traj.samples.len()
        ),
    )
}

fn c6_exceptional_point() -> Verdict {
    let p = figure();
    let y_c = p.critical_coupling().unwrap();
    let traj = soft_mode_sweep(&p, &default_y_grid(y_c, 100)).unwrap();
    let ep = traj.bifurcation_y.map_or(f64::NAN, |b| b / y_c);
    let est = traj.extrapolated_critical_coupling().unwrap_or(f64::NAN);
    let rel = (est / y_c - 1.0).abs();
    let last = traj
        .branch(Branch::Upper)
        .last()
        .map_or(f64::NAN, |s| s.pole.im);
    verdict(
        (ep - 0.93).abs() <= 0.02 && rel < 1e-4,
        format!("EP at {ep:.5} y_c (0.93 +- 0.02); upper branch -> 0 at y = {est:.8} (rel {rel:.1e}, tol 1e-4); Im at 0.9999 y_c = {last:.3e}"),
    )
}

fn c7_shifted_resonance() -> Verdict {
    let eval = SpectrumEvaluator::new(&figure()).unwrap();
    let c_b = |w: f64| eval.sample(w).unwrap().c_b;
    let (mut best, mut best_w) = (f64::NEG_INFINITY, 0.0);
    for k in 1..=3000 {
        let w = 1e-3 * k as f64;
        let c = c_b(w);
        if c > best {
            best = c;
            best_w = w;
        }
    }
    // Golden-section refinement within one grid cell.
    let (mut a, mut b) = (best_w - 1e-3, best_w + 1e-3);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..40 {
        let (x1, x2) = (b - g * (b - a), a + g * (b - a));
        if c_b(x1) > c_b(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let peak = 0.5 * (a + b);
    verdict(
        (peak - 0.5).abs() <= 0.05,
        format!("argmax C_b = {peak:.5} omega_b (0.5 +- 0.05)"),
    )
}

fn fits(params: &ModelParams) -> [ExponentFit; 2] {
    exponent_fits(params, &WindowConfig::default(), &QuadConfig::default()).unwrap()
}

fn c8_markovian_exponent() -> Verdict {
    let [a, b] = fits(&figure().with_gamma(0.0));
    verdict(
        (a.exponent - 1.0).abs() <= 0.03,
        format!(
            "nu_a = {:.5} +- {:.1e}, nu_b = {:.5} (1.00 +- 0.03)",
            a.exponent, a.stderr, b.exponent
        ),
    )
}

fn c9_sub_ohmic_exponents() -> Verdict {
    let mut ok = true;
    let mut last = f64::NEG_INFINITY;
    let mut parts = Vec::new();
    for s in [0.5, 0.6, 0.7, 0.8] {
        let [a, b] = fits(&figure().with_s(s));
        ok &= a.exponent < 0.97 && b.exponent < 0.97;
        ok &= a.exponent > last;
        ok &= (a.exponent - b.exponent).abs() < 0.05;
        last = a.exponent;
        parts.push(format!(
            "s={s}: nu_a={:.4} nu_b={:.4}",
            a.exponent, b.exponent
        ));
    }
    verdict(ok, parts.join("; "))
}

fn c10_kernel_consistency() -> Verdict {
    let p = figure();
    let bath = Bath::new(&p);
    let omegas: Vec<f64> = (0..=80)
        .map(|k| 10f64.powf(-4.0 + 0.1 * k as f64))
        .collect();
    let mut im_err: f64 = 0.0;
    let mut real_err: f64 = 0.0;
    let mut sheet_err: f64 = 0.0;
    for &w in &omegas {
        let (kr, _) = bath.level_shift_real_axis(w);
        im_err = im_err.max((kr.im + PI * bath.power_law_density(w)).abs());
        real_err = real_err.max(bath.level_shift_real_axis(-w).0.im.abs());
        for x in [w, -w] {
            let k1 = bath.level_shift_real_axis(x).0;
            let k2 = bath.second_sheet(Complex64::new(x, 0.0));
            sheet_err = sheet_err.max((k1 - k2).norm() / k1.norm());
        }
    }
    let structural = im_err < 1e-12 && real_err == 0.0 && sheet_err < 1e-12;

    let cut = ModelParams {
        omega_m: Some(1e4),
        ..p
    };
    let cfg = QuadConfig::default();
    let pv = |w: f64| pv_level_shift_oracle(w, &cut, &cfg).unwrap();
    let (w1, w2) = (0.5, 1.5);
    let diff_pv = pv(w1).re - pv(w2).re;
    let diff_closed = bath.level_shift_real_axis(w1).0.re - bath.level_shift_real_axis(w2).0.re;
    let discrepancy = diff_pv - diff_closed;
    let tol = 1e-3 * p.gamma;

    // Same oracle against the exact finite-cutoff kernel.
    let cut_bath = Bath::new(&cut);
    let exact = (pv(w1) - cut_bath.cutoff_level_shift(w1).unwrap())
        .norm()
        .max((pv(w2) - cut_bath.cutoff_level_shift(w2).unwrap()).norm());

    verdict(
        structural && discrepancy.abs() <= tol,
        format!(
            "Im K = -pi rho err {im_err:.1e}, Im K(w<=0) = {real_err:.1e}, sheet err {sheet_err:.1e}; \
             PV difference test: {discrepancy:+.4e} vs tol {tol:.1e}; PV vs exact cutoff kernel {exact:.1e}"
        ),
    )
}

fn c11_determinism(dir: &std::path::Path) -> Verdict {
    let bin = env!("CARGO_BIN_EXE_dicke");
    let run = |jobs: &str| {
        let out = dir.join(format!("sweep_jobs{jobs}.csv"));
        let status = Command::new(bin)
            .args(["sweep", "--jobs", jobs, "--output"])
            .arg(&out)
            .status()
            .expect("run dicke");
        assert!(status.success(), "sweep with jobs={jobs} failed");
        std::fs::read(&out).unwrap()
    };
    let (a, b, c) = (run("1"), run("8"), run("8"));
    let rows = a
        .iter()
        .filter(|&&ch| ch == b'\n')
        .count()
        .saturating_sub(1);
    verdict(
        a == b && b == c,
        format!("{rows} rows, {} bytes, jobs=1 vs jobs=8 twice", a.len()),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let criteria: Vec<Criterion> = vec![
        (
            1,
            "critical coupling",
            Duration::from_millis(1),
            Box::new(c1_critical_coupling),
        ),
        (
            2,
            "vacuum baselines",
            Duration::from_secs(5),
            Box::new(c2_vacuum),
        ),
        (
            3,
            "y=0 photon Lorentzian",
            Duration::from_secs(1),
            Box::new(c3_lorentzian),
        ),
        (
            4,
            "determinant identity",
            Duration::from_secs(1),
            Box::new(c4_determinant),
        ),
        (
            5,
            "bath-free oracle",
            Duration::from_secs(2),
            Box::new(c5_bath_free_oracle),
        ),
        (
            6,
            "exceptional point",
            Duration::from_secs(30),
            Box::new(c6_exceptional_point),
        ),
        (
            7,
            "bath-shifted resonance",
            Duration::from_secs(5),
            Box::new(c7_shifted_resonance),
        ),
        (
            8,
            "Markovian exponent",
            Duration::from_secs(300),
            Box::new(c8_markovian_exponent),
        ),
        (
            9,
            "sub-Ohmic exponents",
            Duration::from_secs(1800),
            Box::new(c9_sub_ohmic_exponents),
        ),
        (
            10,
            "kernel consistency",
            Duration::from_secs(60),
            Box::new(c10_kernel_consistency),
        ),
        (
            11,
            "determinism",
            Duration::from_secs(1800),
            Box::new(move || c11_determinism(dir.path())),
        ),
    ];

    let mut unexpected = Vec::new();
    for (id, name, limit, check) in &criteria {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let passed = v.passed && in_time;
        let tag = if passed { "PASS" } else { "FAIL" };
        let timing = format!(
            "{:.3}s, limit {:.3}s",
            elapsed.as_secs_f64(),
            limit.as_secs_f64()
        );
        let known = KNOWN_FAILURES.contains(id);
        let note = match (passed, known) {
            (false, true) => " [known failure, see README]",
            (true, true) => " [listed as known failure but passed]",
            _ => "",
        };
        println!("{tag} {id:>2} {name}: {} ({timing}){note}", v.detail);
        if passed == known {
            unexpected.push(*id);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
