use std::f64::consts::PI;

use dicke_core::greens::SpectrumEvaluator;
use dicke_core::observables::{exponent_fits, population, WindowConfig};
use dicke_core::poles::{default_y_grid, soft_mode_sweep, Branch};
use dicke_core::quad::QuadConfig;
use dicke_core::ModelParams;

fn figure() -> ModelParams {
    ModelParams::default()
}

#[test]
fn vacuum_sum_rules_across_baths() {
    let cfg = QuadConfig::default();
    for gamma in [0.0, 0.1, 0.5, 1.0] {
        for s in [0.5, 0.65, 0.8] {
            let p = figure().with_gamma(gamma).with_s(s);
            let r = population(&p, 0.0, &cfg).unwrap();
            assert!(
                r.n_a.abs() < 1e-9 && r.n_b.abs() < 1e-9,
                "gamma={gamma} s={s}: {r:?}"
            );
        }
    }
}

#[test]
fn spectra_non_negative_below_critical_coupling() {
    for (gamma, s) in [(0.0, 0.8), (0.1, 0.8), (0.5, 0.5), (0.5, 0.8), (1.0, 0.7)] {
        let p = figure().with_gamma(gamma).with_s(s);
        let y_c = p.critical_coupling().unwrap();
        for frac in [0.1, 0.5, 0.9, 0.99] {
            let eval = SpectrumEvaluator::new(&p.with_y(frac * y_c)).unwrap();
            for k in 0..2000 {
                let w = -10.0 + 0.01 * k as f64 + 1e-4;
                let c = eval.sample(w).unwrap();
                assert!(
                    c.c_a >= 0.0 && c.c_b >= 0.0,
                    "gamma={gamma} s={s} y={frac}y_c w={w}: {c:?}"
                );
            }
        }
    }
}

#[test]
fn populations_match_brute_force_log_trapezoid() {
    let p = figure();
    let y = 1.2;
    let r = population(&p, y, &QuadConfig::default()).unwrap();
    let eval = SpectrumEvaluator::new(&p.with_y(y)).unwrap();
    let (lo, hi, n) = ((1e-25f64).ln(), (1e3f64).ln(), 400_000);
    let h = (hi - lo) / n as f64;
    let mut c_a = 0.0;
    for i in 0..=n {
        let w = (lo + h * i as f64).exp();
        let weight = if i == 0 || i == n { 0.5 } else { 1.0 } * h * w;
        c_a += weight * (eval.sample(w).unwrap().c_a + eval.sample(-w).unwrap().c_a);
    }
    // c_a falls off as w^-2, so the remainder beyond 1e3 is ~ 4 kappa / 1e3.
    c_a += 4.0 * p.kappa / 1e3;
    let n_a = (c_a / (2.0 * PI) - 1.0) / 2.0;
    assert!(
        (n_a - r.n_a).abs() < 1e-5 * (1.0 + r.n_a),
        "{n_a} vs {}",
        r.n_a
    );
}

#[test]
fn populations_grow_monotonically() {
    let cfg = QuadConfig::default();
    for gamma in [0.0, 0.5] {
        let p = figure().with_gamma(gamma);
        let y_c = p.critical_coupling().unwrap();
        let mut last = (-1.0, -1.0);
        for k in 0..10 {
            let r = population(&p, 0.999 * y_c * k as f64 / 9.0, &cfg).unwrap();
            assert!(r.n_a > last.0 && r.n_b > last.1, "gamma={gamma} k={k}");
            last = (r.n_a, r.n_b);
        }
    }
}

#[test]
fn spin_to_photon_ratio_approaches_frequency_ratio() {
    // At y_c the zero-frequency null vector has |a|^2/|b|^2 = omega_b/omega_a.
    let cfg = QuadConfig::default();
    for (omega_a, gamma) in [(2.0, 0.0), (2.0, 0.5), (3.0, 0.5)] {
        let p = ModelParams {
            omega_a,
            gamma,
            ..figure()
        };
        let y_c = p.critical_coupling().unwrap();
        let r = population(&p, y_c * (1.0 - 1e-7), &cfg).unwrap();
        let ratio = r.n_b / r.n_a;
        assert!(
            (ratio - omega_a).abs() < 0.01 * omega_a,
            "omega_a={omega_a} gamma={gamma}: {ratio}"
        );
    }
}

#[test]
fn stronger_bath_moves_bifurcation_earlier() {
    let mut last = f64::INFINITY;
    for gamma in [0.0, 0.1, 0.5, 1.0] {
        let p = figure().with_gamma(gamma);
        let y_c = p.critical_coupling().unwrap();
        let traj = soft_mode_sweep(&p, &default_y_grid(y_c, 60)).unwrap();
        let b = traj.bifurcation_y.unwrap() / y_c;
        assert!(b < last, "gamma={gamma}: {b} !< {last}");
        last = b;
    }
}

#[test]
fn upper_branch_extrapolates_to_critical_coupling() {
    for (gamma, s) in [(0.0, 0.8), (0.1, 0.8), (0.5, 0.8), (0.5, 0.7), (0.5, 0.6)] {
        let p = figure().with_gamma(gamma).with_s(s);
        let y_c = p.critical_coupling().unwrap();
        let traj = soft_mode_sweep(&p, &default_y_grid(y_c, 60)).unwrap();
        let est = traj.extrapolated_critical_coupling().unwrap();
        assert!((est / y_c - 1.0).abs() < 1e-4, "gamma={gamma} s={s}: {est}");
        let upper: Vec<_> = traj.branch(Branch::Upper).collect();
        let lower: Vec<_> = traj.branch(Branch::Lower).collect();
        assert_eq!(upper.len(), lower.len());
        for (u, l) in upper.iter().zip(&lower) {
            assert!(u.pole.im > l.pole.im);
        }
    }
}

#[test]
fn exponents_stable_under_tighter_quadrature() {
    let p = figure();
    let w = WindowConfig::default();
    let cfg = QuadConfig::default();
    let base = exponent_fits(&p, &w, &cfg).unwrap();
    let tight = exponent_fits(&p, &w, &cfg.doubled()).unwrap();
    for (a, b) in base.iter().zip(&tight) {
        assert!(
            (a.exponent - b.exponent).abs() < a.stderr,
            "{} vs {}",
            a.exponent,
            b.exponent
        );
    }
    assert!((base[0].exponent - base[1].exponent).abs() < 0.05);
}

#[test]
fn markovian_exponent_is_one() {
    let p = figure().with_gamma(0.0);
    let fits = exponent_fits(&p, &WindowConfig::default(), &QuadConfig::default()).unwrap();
    for f in fits {
        assert!((f.exponent - 1.0).abs() < 1e-3, "{f:?}");
    }
}

#[test]
fn coarse_grids_follow_the_dense_trajectory() {
    for gamma in [0.0, 0.5, 1.0] {
        let p = figure().with_gamma(gamma);
        let y_c = p.critical_coupling().unwrap();
        let dense = soft_mode_sweep(&p, &default_y_grid(y_c, 200)).unwrap();
        let dense_at = |y: f64, branch: Branch| {
            dense
                .samples
                .iter()
                .find(|d| d.branch == branch && (d.y - y).abs() < 1e-12)
                .map(|d| d.pole)
        };
        for grid in [
            vec![0.0, 0.99 * y_c],
            vec![0.5 * y_c, 0.995 * y_c],
            vec![0.97 * y_c, 0.999 * y_c],
        ] {
            let coarse = soft_mode_sweep(&p, &grid).unwrap();
            let mut compared = 0;
            for s in &coarse.samples {
                if let Some(z) = dense_at(s.y, s.branch) {
                    assert!(
                        (z - s.pole).norm() < 1e-8,
                        "gamma={gamma} y={} {:?}",
                        s.y,
                        s.branch
                    );
                    compared += 1;
                }
            }
            assert!(compared >= 2, "gamma={gamma} {grid:?}");
        }
    }
}

#[test]
fn window_far_from_criticality_is_not_a_power_law() {
    let window = WindowConfig {
        eps_min: 1e-3,
        eps_max: 0.9,
        ..WindowConfig::default()
    };
    let err = exponent_fits(&figure(), &window, &QuadConfig::default()).unwrap_err();
    assert!(matches!(err, dicke_core::Error::NoPowerLaw { .. }), "{err}");
}
