//! Steady-state populations and the critical exponent of their divergence.
//!
//! The equal-time anticommutator is the frequency integral of the power
//! spectrum, `C(t=0) = int dw/2pi C(w)`, and the population is
//! `n = (C(t=0) - 1) / 2`. Close to `y_c` the spectra develop a peak at
//! `w = 0` of width `~ eps^(1/s)` (`eps = 1 - y/y_c`), and `n ~ eps^(-nu)`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greens::SpectrumEvaluator;
use crate::model::ModelParams;
use crate::quad::{geometric_mesh, integrate, merge_breakpoints, QuadConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationResult {
    pub y: f64,
    pub n_a: f64,
    pub n_b: f64,
    /// Absolute error estimate on the populations (largest of the two).
    pub quad_error_estimate: f64,
    pub evaluations: usize,
}

/// Which mode's population to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    A,
    B,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::A => "a",
            Mode::B => "b",
        }
    }
}

/// Innermost panels reach down to this fraction of the peak width.
const FLOOR_FRACTION: f64 = 1e-15;

/// Where the log mesh stops and the power-law tail takes over, in units
/// of the outer breakpoint. Chosen so that the next-to-leading tail
/// correction, of relative size `X^(s-1)`, is negligible.
fn tail_start(params: &ModelParams, outer: f64) -> f64 {
    let decades = if params.gamma > 0.0 {
        (7.0 / (1.0 - params.s)).clamp(8.0, 55.0)
    } else {
        8.0
    };
    outer * 10f64.powf(decades)
}

/// `C_a(t=0)` and `C_b(t=0)` with their error estimates and the number of
/// spectrum evaluations.
fn equal_time_correlators(
    params: &ModelParams,
    cfg: &QuadConfig,
) -> Result<([f64; 2], [f64; 2], usize)> {
    let eval = SpectrumEvaluator::new(params)?;
    let eps = params.epsilon()?;
    let wb = params.omega_b;
    let peak = (10.0 * eps.powf(1.0 / params.s)).max(1e-12) * wb;
    let outer = 50.0 * params.omega_a.max(params.omega_b).max(params.kappa);
    let floor = peak * FLOOR_FRACTION;
    let far = tail_start(params, outer);

    // Both signs of frequency at once: g(x) = C(x) + C(-x), x > 0.
    let folded = |x: f64| eval.folded(x);

    let core = integrate(folded, &[0.0, floor], cfg)?;

    let mut mesh = geometric_mesh(floor, far, cfg.panels_per_decade);
    mesh.extend([peak, outer]);
    let log_mesh: Vec<f64> = merge_breakpoints(mesh).into_iter().map(f64::ln).collect();
    let body = integrate(
        |u: f64| {
            let x = u.exp();
            let g = folded(x);
            [g[0] * x, g[1] * x]
        },
        &log_mesh,
        cfg,
    )?;

    // Algebraic tail g ~ x^-p beyond `far`, with p measured over the last decade.
    let g_far = folded(far);
    let g_prev = folded(far / 10.0);
    let mut tail = [0.0; 2];
    for k in 0..2 {
        if g_far[k] == 0.0 {
            continue;
        }
        let p = (g_prev[k] / g_far[k]).log10();
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Quadrature {
                estimate: core.value[k] + body.value[k],
                error_bound: f64::INFINITY,
            });
        }
        tail[k] = g_far[k] * far / (p - 1.0);
    }

    let mut value = [0.0; 2];
    let mut error = [0.0; 2];
    for k in 0..2 {
        value[k] = (core.value[k] + body.value[k] + tail[k]) / (2.0 * PI);
        error[k] = (core.error[k] + body.error[k]) / (2.0 * PI);
    }
    // An undamped, decoupled b oscillator carries its whole unit weight in
    // a delta function at omega_b that no quadrature sees.
    if params.gamma == 0.0 && params.y == 0.0 {
        value[1] += 1.0;
    }
    Ok((value, error, core.evaluations + body.evaluations + 4))
}

/// Steady-state populations `n_a`, `n_b` at coupling `y < y_c`.
pub fn population(params: &ModelParams, y: f64, cfg: &QuadConfig) -> Result<PopulationResult> {
    let y_c = params.critical_coupling()?;
    if !(y < y_c) {
        return Err(Error::Domain(format!(
            "population needs y < y_c = {y_c}, got y = {y}"
        )));
    }
    let params = params.with_y(y).validated()?;
    let (c, err, evaluations) = equal_time_correlators(&params, cfg)?;
    Ok(PopulationResult {
        y,
        n_a: (c[0] - 1.0) / 2.0,
        n_b: (c[1] - 1.0) / 2.0,
        quad_error_estimate: 0.5 * err[0].max(err[1]),
        evaluations,
    })
}

/// Populations on a list of couplings, evaluated in parallel, returned in order.
pub fn population_grid(
    params: &ModelParams,
    ys: &[f64],
    cfg: &QuadConfig,
) -> Result<Vec<PopulationResult>> {
    ys.par_iter().map(|&y| population(params, y, cfg)).collect()
}

/// Sampling window in `eps = 1 - y/y_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowConfig {
    pub eps_min: f64,
    pub eps_max: f64,
    pub points: usize,
    /// Largest acceptable RMS residual of the log-log line. Crossover
    /// windows between Markovian and sub-Ohmic scaling reach about 0.05.
    pub max_rms_residual: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            eps_min: 1e-6,
            eps_max: 5e-5,
            points: 8,
            max_rms_residual: 0.1,
        }
    }
}

impl WindowConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.eps_min > 0.0 && self.eps_max > self.eps_min && self.eps_max < 1.0) {
            return Err(Error::Config(format!(
                "window needs 0 < eps_min < eps_max < 1, got [{}, {}]",
                self.eps_min, self.eps_max
            )));
        }
        if self.points < 5 {
            return Err(Error::Config("exponent fit needs at least 5 points".into()));
        }
        if !(self.max_rms_residual > 0.0) {
            return Err(Error::Config("max_rms_residual must be positive".into()));
        }
        Ok(())
    }

    /// Log-uniform cell midpoints, so every sample is strictly inside the window.
    pub fn samples(&self) -> Vec<f64> {
        let (lo, hi) = (self.eps_min.ln(), self.eps_max.ln());
        let n = self.points as f64;
        (0..self.points)
            .map(|k| (lo + (k as f64 + 0.5) * (hi - lo) / n).exp())
            .collect()
    }
}

/// Fitted `n ~ eps^(-nu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub gamma: f64,
    pub s: f64,
    pub mode: Mode,
    /// `(eps, n)` samples.
    pub points: Vec<(f64, f64)>,
    pub exponent: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    pub rms_residual: f64,
}

/// Ordinary least-squares line with the standard error of its slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub rms_residual: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 3, "need at least three points");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    LineFit {
        slope,
        intercept,
        slope_stderr: (ssr / (n - 2.0) / sxx).sqrt(),
        rms_residual: (ssr / n).sqrt(),
    }
}

fn fit_mode(
    params: &ModelParams,
    mode: Mode,
    window: &WindowConfig,
    pops: &[(f64, PopulationResult)],
) -> Result<ExponentFit> {
    let points: Vec<(f64, f64)> = pops
        .iter()
        .map(|(eps, p)| (*eps, if mode == Mode::A { p.n_a } else { p.n_b }))
        .collect();
    if let Some((eps, n)) = points.iter().find(|(_, n)| !(*n > 0.0)) {
        return Err(Error::Domain(format!(
            "population n_{} = {n} at eps = {eps:e} is not positive",
            mode.label()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|(e, _)| e.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, n)| n.ln()).collect();
    let line = fit_line(&xs, &ys);
    if line.rms_residual > window.max_rms_residual {
        return Err(Error::NoPowerLaw {
            residual: line.rms_residual,
            threshold: window.max_rms_residual,
        });
    }
    Ok(ExponentFit {
        gamma: params.gamma,
        s: params.s,
        mode,
        points,
        exponent: -line.slope,
        stderr: line.slope_stderr,
        window: (window.eps_min, window.eps_max),
        rms_residual: line.rms_residual,
    })
}

fn window_populations(
    params: &ModelParams,
    window: &WindowConfig,
    cfg: &QuadConfig,
) -> Result<Vec<(f64, PopulationResult)>> {
    let params = params.validated_ignoring_y()?;
    window.check()?;
    cfg.check()?;
    let y_c = params.critical_coupling()?;
    window
        .samples()
        .into_par_iter()
        .map(|eps| {
            population(&params, y_c * (1.0 - eps), cfg)
                .map(|p| (eps, p))
                .map_err(|e| Error::Population {
                    epsilon: eps,
                    source: Box::new(e),
                })
        })
        .collect()
}

/// Critical exponent of one mode's population. `params.y` is ignored.
pub fn exponent_fit(
    params: &ModelParams,
    mode: Mode,
    window: &WindowConfig,
    cfg: &QuadConfig,
) -> Result<ExponentFit> {
    let pops = window_populations(params, window, cfg)?;
    fit_mode(params, mode, window, &pops)
}

/// Exponents of both modes from one set of population samples.
pub fn exponent_fits(
    params: &ModelParams,
    window: &WindowConfig,
    cfg: &QuadConfig,
) -> Result<[ExponentFit; 2]> {
    let pops = window_populations(params, window, cfg)?;
    Ok([
        fit_mode(params, Mode::A, window, &pops)?,
        fit_mode(params, Mode::B, window, &pops)?,
    ])
}

/// Leading-order exponent from the low-frequency structure of the
/// spectrum: the denominator behaves as `eps + c |w|^s`, which gives
/// `nu = 2 - 1/s` with a bath and `nu = 1` without. Finite windows see
/// corrections of relative order `w^(1-s)`.
pub fn asymptotic_exponent(params: &ModelParams) -> f64 {
    if params.gamma > 0.0 {
        2.0 - 1.0 / params.s
    } else {
        1.0
    }
}
