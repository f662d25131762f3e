//! Invariant suite run by `dicke validate`.
//!
//! Each check evaluates a structural property (symmetry, sum rule, oracle
//! agreement) for a given parameter set and reports pass/fail with the
//! worst deviation found.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::bath::{pv_level_shift_oracle, Bath, Sheet};
use crate::greens::{inverse_retarded, SpectrumEvaluator};
use crate::model::ModelParams;
use crate::observables::population;
use crate::oracle::distance_to_bath_free_pole;
use crate::poles::{char_fn, default_y_grid, find_pole, soft_mode_sweep, Branch, DEFAULT_POLE_TOL};
use crate::quad::QuadConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Low-discrepancy points in the unit square (golden-ratio sequence).
pub fn quasi_random(n: usize) -> impl Iterator<Item = (f64, f64)> {
    const G1: f64 = 0.754_877_666_246_692_7;
    const G2: f64 = 0.569_840_290_998_053_2;
    (1..=n).map(|k| ((0.5 + G1 * k as f64).fract(), (0.5 + G2 * k as f64).fract()))
}

/// `n` points in the lower half-plane with `|Re| <= 3` and `-3 <= Im < 0`.
pub fn lower_half_plane_points(n: usize) -> Vec<Complex64> {
    quasi_random(n)
        .map(|(u, v)| Complex64::new(6.0 * u - 3.0, -3.0 * v - 1e-3))
        .collect()
}

struct Suite {
    out: Vec<CheckOutcome>,
}

impl Suite {
    fn check(&mut self, module: &'static str, name: &'static str, worst: f64, limit: f64) {
        let passed = worst.is_finite() && worst <= limit;
        self.out.push(CheckOutcome {
            module,
            name,
            passed,
            detail: format!("worst {worst:.3e} (limit {limit:.1e})"),
        });
    }

    fn fail(&mut self, module: &'static str, name: &'static str, err: impl std::fmt::Display) {
        self.out.push(CheckOutcome {
            module,
            name,
            passed: false,
            detail: err.to_string(),
        });
    }
}

pub fn run_invariant_suite(params: &ModelParams) -> Vec<CheckOutcome> {
    let mut suite = Suite { out: Vec::new() };
    let p = params.with_y(0.0);
    if let Err(e) = p.validated() {
        suite.fail("model", "parameters", e);
        return suite.out;
    }
    let y_c = p.critical_coupling().expect("validated");
    model_checks(&mut suite, &p);
    bath_checks(&mut suite, &p);
    greens_checks(&mut suite, &p, y_c);
    pole_checks(&mut suite, &p, y_c);
    observable_checks(&mut suite, &p, y_c);
    suite.out
}

fn model_checks(suite: &mut Suite, p: &ModelParams) {
    let base = p.critical_coupling().unwrap();
    let mut worst: f64 = 0.0;
    for k in 1..=10 {
        let dk = 0.1 * k as f64;
        let more_kappa = ModelParams {
            kappa: p.kappa + dk,
            ..*p
        }
        .critical_coupling()
        .unwrap();
        let more_wb = ModelParams {
            omega_b: p.omega_b + dk,
            ..*p
        }
        .critical_coupling()
        .unwrap();
        if more_kappa <= base || more_wb <= base {
            worst = 1.0;
        }
    }
    suite.check(
        "model",
        "critical coupling increases with kappa and omega_b",
        worst,
        0.0,
    );

    let lossless = ModelParams { kappa: 0.0, ..*p };
    let y0 = lossless.critical_coupling().unwrap();
    let dev = (y0 - (p.omega_a * p.omega_b).sqrt()).abs() / y0;
    suite.check(
        "model",
        "lossless critical coupling is sqrt(omega_a omega_b)",
        dev,
        4.0 * f64::EPSILON,
    );
}

fn bath_checks(suite: &mut Suite, p: &ModelParams) {
    let bath = Bath::new(p);
    let omegas: Vec<f64> = (0..=60)
        .map(|k| 10f64.powf(-4.0 + 0.1 * k as f64))
        .collect();

    let worst = omegas
        .iter()
        .map(|&w| {
            let (kr, _) = bath.level_shift_real_axis(w);
            let target = -PI * bath.power_law_density(w);
            if target == 0.0 {
                kr.im.abs()
            } else {
                (kr.im - target).abs() / target.abs()
            }
        })
        .fold(0.0, f64::max);
    suite.check("bath", "Im K^R = -pi rho on w > 0", worst, 1e-12);

    let worst = omegas
        .iter()
        .map(|&w| bath.level_shift_real_axis(-w).0.im.abs())
        .fold(0.0, f64::max);
    suite.check("bath", "K^R real on w <= 0", worst, 0.0);

    let worst = omegas
        .iter()
        .flat_map(|&w| [w, -w])
        .map(|w| {
            let (kr, ka) = bath.level_shift_real_axis(w);
            (ka - kr.conj()).norm()
        })
        .fold(0.0, f64::max);
    suite.check("bath", "K^A = conj K^R on the real axis", worst, 0.0);

    let worst = omegas
        .iter()
        .flat_map(|&w| [w, -w])
        .map(|w| {
            let (kr, _) = bath.level_shift_real_axis(w);
            let k2 = bath.second_sheet(Complex64::new(w, 0.0));
            if kr.norm() == 0.0 {
                k2.norm()
            } else {
                (k2 - kr).norm() / kr.norm()
            }
        })
        .fold(0.0, f64::max);
    suite.check(
        "bath",
        "second sheet agrees with K^R on both half-axes",
        worst,
        1e-12,
    );

    let worst = omegas
        .iter()
        .flat_map(|&w| [w, -w])
        .map(|w| {
            let (kr, _) = bath.level_shift_real_axis(w);
            (2.0 * PI * bath.power_law_density(w) + 2.0 * kr.im).abs()
        })
        .fold(0.0, f64::max);
    suite.check("bath", "Keldysh weight 2 pi rho = -2 Im K^R", worst, 1e-12);

    let bound = p.gamma / (PI * p.s).sin();
    let worst = quasi_random(200)
        .map(|(u, v)| {
            let z = Complex64::from_polar(10f64.powf(-12.0 * u), -PI * v);
            let gd = bath.gamma_delta(z);
            let scale = z.norm().powf(p.s);
            gd.gamma.norm().max(gd.delta.norm()) / scale
        })
        .fold(0.0, f64::max);
    suite.check(
        "bath",
        "|Gamma|, |Delta| <= C |z|^s near zero",
        worst,
        bound * (1.0 + 1e-12),
    );

    // Principal-value oracle against the exact finite-cutoff level shift.
    let cut = ModelParams {
        omega_m: Some(1e4),
        ..*p
    };
    let cut_bath = Bath::new(&cut);
    let mut worst: f64 = 0.0;
    for w in [0.5, 1.5] {
        match (
            pv_level_shift_oracle(w, &cut, &QuadConfig::default()),
            cut_bath.cutoff_level_shift(w),
        ) {
            (Ok(pv), Ok(exact)) => worst = worst.max((pv - exact).norm() / (1.0 + exact.norm())),
            (Err(e), _) | (_, Err(e)) => {
                suite.fail(
                    "bath",
                    "principal-value oracle matches cutoff closed form",
                    e,
                );
                return;
            }
        }
    }
    suite.check(
        "bath",
        "principal-value oracle matches cutoff closed form",
        worst,
        1e-6,
    );
}

fn greens_checks(suite: &mut Suite, p: &ModelParams, y_c: f64) {
    let py = p.with_y(0.7 * y_c);
    let worst = lower_half_plane_points(20)
        .into_iter()
        .map(|z| {
            let det = inverse_retarded(z, &py, Sheet::Second).determinant();
            let f = char_fn(z, &py);
            (det - f).norm() / f.norm()
        })
        .fold(0.0, f64::max);
    suite.check(
        "greens",
        "det [G^R]^-1 equals the characteristic function",
        worst,
        1e-10,
    );

    let omegas: Vec<f64> = (0..=200).map(|k| -8.0 + 0.08 * k as f64 + 1e-3).collect();
    let mut min_spectrum = f64::INFINITY;
    let mut worst_anti: f64 = 0.0;
    let mut worst_imag: f64 = 0.0;
    for frac in [0.0, 0.5, 0.9, 0.99] {
        let eval = match SpectrumEvaluator::new(&p.with_y(frac * y_c)) {
            Ok(e) => e,
            Err(e) => return suite.fail("greens", "spectra are non-negative", e),
        };
        for &w in &omegas {
            match eval.blocks(w) {
                Ok(b) => {
                    let norm = b.keldysh.norm();
                    worst_anti = worst_anti.max((b.keldysh.adjoint() + b.keldysh).norm() / norm);
                    for j in [0, 2] {
                        let c = Complex64::new(0.0, 1.0) * b.keldysh[(j, j)];
                        min_spectrum = min_spectrum.min(c.re);
                        worst_imag = worst_imag.max(c.im.abs() / norm);
                    }
                }
                Err(e) => return suite.fail("greens", "spectra are non-negative", e),
            }
        }
    }
    suite.check(
        "greens",
        "spectra are non-negative",
        (-min_spectrum).max(0.0),
        0.0,
    );
    suite.check("greens", "G^K is anti-Hermitian", worst_anti, 1e-10);
    suite.check("greens", "i G^K diagonal is real", worst_imag, 1e-10);
}

fn pole_checks(suite: &mut Suite, p: &ModelParams, y_c: f64) {
    let bare = p.with_gamma(0.0);
    let grid = default_y_grid(y_c, 50);
    match soft_mode_sweep(&bare, &grid) {
        Ok(traj) => {
            let worst = traj
                .samples
                .iter()
                .map(|s| {
                    distance_to_bath_free_pole(s.pole, &bare.with_y(s.y)).unwrap_or(f64::INFINITY)
                })
                .fold(0.0, f64::max);
            suite.check(
                "poles",
                "bath-free trajectory matches companion roots",
                worst,
                1e-9,
            );
        }
        Err(e) => suite.fail("poles", "bath-free trajectory matches companion roots", e),
    }

    let mut worst_residual: f64 = 0.0;
    let mut worst_half_plane = f64::NEG_INFINITY;
    let mut worst_axis: f64 = 0.0;
    let mut worst_yc: f64 = 0.0;
    for gamma in [0.0, 0.1, p.gamma] {
        let pg = p.with_gamma(gamma);
        let traj = match soft_mode_sweep(&pg, &grid) {
            Ok(t) => t,
            Err(e) => return suite.fail("poles", "soft-mode sweep", e),
        };
        for s in &traj.samples {
            worst_residual =
                worst_residual.max(char_fn(s.pole, &pg.with_y(s.y)).norm() / p.omega_b.powi(4));
            worst_half_plane = worst_half_plane.max(s.pole.im);
            if s.branch != Branch::PreBifurcation {
                worst_axis = worst_axis.max(s.pole.re.abs());
            }
        }
        let est = traj.extrapolated_critical_coupling().unwrap_or(f64::NAN);
        worst_yc = worst_yc.max((est / y_c - 1.0).abs());
    }
    suite.check("poles", "pole residuals", worst_residual, 1e-9);
    suite.check(
        "poles",
        "poles in the closed lower half-plane",
        worst_half_plane.max(0.0),
        1e-9,
    );
    suite.check(
        "poles",
        "post-bifurcation poles are imaginary",
        worst_axis,
        1e-9,
    );
    suite.check("poles", "upper branch reaches zero at y_c", worst_yc, 1e-4);

    let py = p.with_y(0.5 * y_c);
    let pairing = find_pole(Complex64::new(p.omega_b, -0.1), &py, DEFAULT_POLE_TOL).and_then(|z| {
        let m = find_pole(
            -z.conj() + Complex64::new(0.0, -1e-3),
            &py,
            DEFAULT_POLE_TOL,
        )?;
        Ok((m + z.conj()).norm())
    });
    match pairing {
        Ok(d) => suite.check("poles", "poles pair as (z, -z*)", d, 1e-9),
        Err(e) => suite.fail("poles", "poles pair as (z, -z*)", e),
    }
}

fn observable_checks(suite: &mut Suite, p: &ModelParams, y_c: f64) {
    let cfg = QuadConfig::default();
    let mut prev: Option<(f64, f64)> = None;
    let mut monotone = true;
    let mut vacuum: f64 = 0.0;
    for k in 0..10 {
        let y = 0.999 * y_c * k as f64 / 9.0;
        match population(p, y, &cfg) {
            Ok(r) => {
                if k == 0 {
                    vacuum = r.n_a.abs().max(r.n_b.abs());
                }
                if let Some((a, b)) = prev {
                    monotone &= r.n_a > a && r.n_b > b;
                }
                prev = Some((r.n_a, r.n_b));
            }
            Err(e) => return suite.fail("observables", "populations increase with y", e),
        }
    }
    suite.check(
        "observables",
        "vacuum populations vanish at y = 0",
        vacuum,
        1e-6,
    );
    suite.check(
        "observables",
        "populations increase with y",
        if monotone { 0.0 } else { 1.0 },
        0.0,
    );
}
