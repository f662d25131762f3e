//! Resonance poles of the retarded Green's function and continuation of the
//! soft mode in the coupling `y`.
//!
//! Poles solve `det [G^R]^-1(z) = 0` on the second sheet:
//!
//! ```text
//! [(z + i kappa)^2 - wa^2] [(z - i Gamma(z))^2 - (wb + Delta(z))^2] - y^2 wa (wb + Delta(z)) = 0
//! ```
//!
//! They come in pairs `(z, -z*)` or sit on the negative imaginary axis.
//! Below the exceptional point the soft mode is such a pair (only the
//! `Re z >= 0` member is kept); past it the pair collapses onto the
//! imaginary axis and splits into an upper and a lower branch. The upper
//! branch reaches `z = 0` at `y_c`.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::bath::{Bath, Sheet};
use crate::error::{Error, Result};
use crate::model::ModelParams;

pub const MAX_NEWTON_ITERATIONS: usize = 200;
/// Default residual tolerance for [`find_pole`], relative to the size of the
/// terms in the characteristic function.
pub const DEFAULT_POLE_TOL: f64 = 1e-12;
const STEP_TOL: f64 = 1e-12;
const DERIVATIVE_STEP: f64 = 1e-7;
const ESCAPE_TOL: f64 = 1e-6;

/// `Re(pole)` below this (times `omega_b`) marks the collapse onto the
/// imaginary axis.
pub const BIFURCATION_THRESHOLD: f64 = 1e-6;
/// Seed displacement along the imaginary axis for the two post-bifurcation branches.
pub const BRANCH_SEED_OFFSET: f64 = 1e-3;
/// Resolution of the bisection that locates the exceptional point, in units of `y_c`.
/// Largest continuation step before the exceptional point, in units of `y_c`.
pub const MAX_PRE_STEP: f64 = 0.02;
pub const BIFURCATION_RESOLUTION: f64 = 1e-5;

/// Characteristic function with kernels from an explicit sheet.
#[derive(Debug, Clone, Copy)]
pub struct CharacteristicFn {
    params: ModelParams,
    bath: Bath,
    sheet: Sheet,
}

impl CharacteristicFn {
    pub fn new(params: &ModelParams) -> Self {
        Self::on_sheet(params, Sheet::Second)
    }

    /// Only [`Sheet::Second`] gives resonance poles; the first sheet is
    /// exposed for comparison.
    pub fn on_sheet(params: &ModelParams, sheet: Sheet) -> Self {
        Self {
            params: *params,
            bath: Bath::new(params),
            sheet,
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let p = &self.params;
        let gd = self.bath.gamma_delta_on(z, self.sheet);
        let i = Complex64::new(0.0, 1.0);
        let a = (z + i * p.kappa).powi(2) - p.omega_a * p.omega_a;
        let w = gd.delta + p.omega_b;
        let b = (z - i * gd.gamma).powi(2) - w * w;
        a * b - w * (p.y * p.y * p.omega_a)
    }

    /// Magnitude of the individual terms at `z`, used to make residuals relative.
    pub fn scale(&self, z: Complex64) -> f64 {
        let p = &self.params;
        let r2 = z.norm_sqr();
        (r2 + p.omega_a * p.omega_a + p.kappa * p.kappa) * (r2 + p.omega_b * p.omega_b)
            + p.y * p.y * p.omega_a * p.omega_b
    }

    fn derivative(&self, z: Complex64) -> Complex64 {
        let h = DERIVATIVE_STEP * z.norm().max(self.params.omega_b);
        (self.eval(z + h) - self.eval(z - h)) / (2.0 * h)
    }

    /// Damped Newton iteration that keeps iterates in the closed lower half-plane.
    pub fn find_root(&self, z0: Complex64, tol: f64) -> Result<Complex64> {
        let wb = self.params.omega_b;
        let mut z = z0;
        let mut f = self.eval(z);
        for _ in 0..MAX_NEWTON_ITERATIONS {
            let df = self.derivative(z);
            if df.norm() == 0.0 || !df.is_finite() {
                break;
            }
            let mut step = f / df;
            let mut next = z - step;
            let mut halvings = 0;
            while next.im > 0.0 && halvings < 60 {
                step *= 0.5;
                next = z - step;
                halvings += 1;
            }
            if next.im > 0.0 {
                next.im = 0.0;
            }
            z = next;
            f = self.eval(z);
            let small_residual = f.norm() < tol * self.scale(z);
            let small_step = step.norm() < STEP_TOL * z.norm().max(wb);
            if small_residual && small_step {
                if z.im > ESCAPE_TOL * wb {
                    return Err(Error::Instability(z));
                }
                return Ok(z);
            }
        }
        Err(Error::Convergence {
            iterations: MAX_NEWTON_ITERATIONS,
            last: z,
            residual: f.norm(),
        })
    }
}

/// Left-hand side of the characteristic equation, second-sheet kernels.
pub fn char_fn(z: Complex64, params: &ModelParams) -> Complex64 {
    CharacteristicFn::new(params).eval(z)
}

/// Newton root of [`char_fn`] from `z0`.
///
/// Converged when `|char_fn| < tol * scale` and the last step is below
/// `1e-12 * max(|z|, omega_b)`; gives up after 200 iterations.
pub fn find_pole(z0: Complex64, params: &ModelParams, tol: f64) -> Result<Complex64> {
    if z0.im > ESCAPE_TOL * params.omega_b {
        return Err(Error::Domain(format!(
            "pole seed {z0} lies in the upper half-plane"
        )));
    }
    CharacteristicFn::new(params).find_root(z0, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    PreBifurcation,
    Upper,
    Lower,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::PreBifurcation => "pre",
            Branch::Upper => "upper",
            Branch::Lower => "lower",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleSample {
    pub y: f64,
    pub pole: Complex64,
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftModeTrajectory {
    /// Ordered by `y`; past the bifurcation each `y` carries an upper and a
    /// lower sample.
    pub samples: Vec<PoleSample>,
    pub bifurcation_y: Option<f64>,
    pub params: ModelParams,
}

impl SoftModeTrajectory {
    pub fn branch(&self, branch: Branch) -> impl Iterator<Item = &PoleSample> + '_ {
        self.samples.iter().filter(move |s| s.branch == branch)
    }

    /// Extrapolates the upper branch to `Im z = 0`.
    ///
    /// Near `y_c` the upper pole is `z = -i t` with
    /// `y_c - y = a t^p + b t^q + ...`, where `(p, q) = (s, 1)` with a bath and
    /// `(1, 2)` without. The last three upper samples fix `(y_c, a, b)`.
    pub fn extrapolated_critical_coupling(&self) -> Option<f64> {
        let upper: Vec<_> = self.branch(Branch::Upper).collect();
        if upper.len() < 3 {
            return None;
        }
        let (p, q) = if self.params.gamma > 0.0 {
            (self.params.s, 1.0)
        } else {
            (1.0, 2.0)
        };
        let last = &upper[upper.len() - 3..];
        let m = Matrix3::from_fn(|r, c| {
            let t = -last[r].pole.im;
            match c {
                0 => 1.0,
                1 => -t.powf(p),
                _ => -t.powf(q),
            }
        });
        let rhs = Vector3::from_fn(|r, _| last[r].y);
        m.lu().solve(&rhs).map(|x| x[0])
    }
}

fn representative(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        -z.conj()
    } else {
        z
    }
}

enum Phase {
    Pre {
        y: f64,
        pole: Complex64,
    },
    Post {
        y: f64,
        upper: Complex64,
        lower: Complex64,
    },
}

/// Follows the soft mode along an ascending grid in `[0, y_c)`.
///
/// The pole grows out of the bath-dressed `b` resonance at `y = 0` and is
/// continued by seeding each solve with the previous root. When its real
/// part drops below `1e-6 omega_b`, the exceptional point is bracketed by
/// bisection and both imaginary branches are followed from seeds displaced
/// `+-1e-3 omega_b` along the imaginary axis.
pub fn soft_mode_sweep(params: &ModelParams, y_grid: &[f64]) -> Result<SoftModeTrajectory> {
    let params = params.validated_ignoring_y()?;
    let y_c = params.critical_coupling()?;
    if y_grid.is_empty() {
        return Err(Error::Config("empty y-grid".into()));
    }
    if y_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("y-grid must be strictly ascending".into()));
    }
    if let Some(&bad) = y_grid.iter().find(|&&y| !(0.0..y_c).contains(&y)) {
        return Err(Error::Domain(format!(
            "y = {bad} outside the normal phase [0, {y_c})"
        )));
    }

    let wb = params.omega_b;
    let solve = |seed: Complex64, y: f64| {
        find_pole(seed, &params.with_y(y), DEFAULT_POLE_TOL).map_err(|e| Error::Sweep {
            y,
            source: Box::new(e),
        })
    };

    let is_pre = |z: Complex64| z.re >= BIFURCATION_THRESHOLD * wb;
    // Pre-bifurcation continuation in steps of at most MAX_PRE_STEP y_c.
    // Returns the last pre-bifurcation point and, if the real part vanished
    // on the way, the coupling where that was first seen.
    let walk = |from: f64, to: f64, mut z: Complex64| -> Result<(f64, Complex64, Option<f64>)> {
        let steps = ((to - from) / (MAX_PRE_STEP * y_c)).ceil().max(1.0) as usize;
        let mut y = from;
        for k in 1..=steps {
            let next = if k == steps {
                to
            } else {
                from + (to - from) * k as f64 / steps as f64
            };
            let zn = representative(solve(z, next)?);
            if !is_pre(zn) {
                return Ok((y, z, Some(next)));
            }
            y = next;
            z = zn;
        }
        Ok((y, z, None))
    };

    // Dressed b resonance at y = 0.
    let pole = representative(solve(Complex64::new(wb, -1e-3 * wb), 0.0)?);

    let mut samples = Vec::with_capacity(y_grid.len() * 2);
    let mut bifurcation_y = None;
    let mut phase = Phase::Pre { y: 0.0, pole };

    for &y in y_grid {
        if let Phase::Pre {
            y: prev_y,
            pole: prev,
        } = phase
        {
            let (prev_y, prev, crossed) = walk(prev_y, y, prev)?;
            let Some(crossed) = crossed else {
                samples.push(PoleSample {
                    y,
                    pole: prev,
                    branch: Branch::PreBifurcation,
                });
                phase = Phase::Pre { y, pole: prev };
                continue;
            };

            // Bracket the exceptional point between prev_y and y.
            let (mut lo, mut lo_pole, mut hi) = (prev_y, prev, crossed);
            while hi - lo > BIFURCATION_RESOLUTION * y_c {
                let mid = 0.5 * (lo + hi);
                let zm = representative(solve(lo_pole, mid)?);
                if is_pre(zm) {
                    samples.push(PoleSample {
                        y: mid,
                        pole: zm,
                        branch: Branch::PreBifurcation,
                    });
                    lo = mid;
                    lo_pole = zm;
                } else {
                    hi = mid;
                }
            }
            bifurcation_y = Some(0.5 * (lo + hi));

            let (upper, lower) = split_branches(lo_pole, hi, wb, &solve)?;
            if hi < y {
                samples.push(PoleSample {
                    y: hi,
                    pole: upper,
                    branch: Branch::Upper,
                });
                samples.push(PoleSample {
                    y: hi,
                    pole: lower,
                    branch: Branch::Lower,
                });
            }
            phase = Phase::Post {
                y: hi,
                upper,
                lower,
            };
        }

        if let Phase::Post {
            y: from,
            upper,
            lower,
        } = phase
        {
            let (u, l) = advance_branches(from, y, upper, lower, wb, &solve)?;
            samples.push(PoleSample {
                y,
                pole: u,
                branch: Branch::Upper,
            });
            samples.push(PoleSample {
                y,
                pole: l,
                branch: Branch::Lower,
            });
            phase = Phase::Post {
                y,
                upper: u,
                lower: l,
            };
        }
    }

    Ok(SoftModeTrajectory {
        samples,
        bifurcation_y,
        params,
    })
}

/// Carries both imaginary branches from `from` to `to`, halving the step
/// whenever the two solves land on the same root or swap order.
fn advance_branches<F>(
    from: f64,
    to: f64,
    mut upper: Complex64,
    mut lower: Complex64,
    wb: f64,
    solve: &F,
) -> Result<(Complex64, Complex64)>
where
    F: Fn(Complex64, f64) -> Result<Complex64>,
{
    let min_step = 1e-12 * to.abs().max(wb);
    let mut y = from;
    let mut h = to - from;
    while y < to {
        let next = if y + h >= to { to } else { y + h };
        let u = solve(upper, next)?;
        let l = solve(lower, next)?;
        if (u - l).norm() > 1e-9 * wb && u.im > l.im {
            upper = u;
            lower = l;
            y = next;
            h *= 2.0;
        } else if h > min_step {
            h *= 0.5;
        } else {
            return Err(Error::Sweep {
                y: next,
                source: Box::new(Error::Domain("lost track of the imaginary branches".into())),
            });
        }
    }
    Ok((upper, lower))
}

fn split_branches<F>(
    coalesced: Complex64,
    y: f64,
    wb: f64,
    solve: &F,
) -> Result<(Complex64, Complex64)>
where
    F: Fn(Complex64, f64) -> Result<Complex64>,
{
    let center = Complex64::new(0.0, coalesced.im);
    for offset in [BRANCH_SEED_OFFSET, 10.0 * BRANCH_SEED_OFFSET] {
        let d = Complex64::new(0.0, offset * wb);
        let u = solve(center + d, y)?;
        let l = solve(center - d, y)?;
        if (u - l).norm() > 1e-9 * wb {
            return Ok(if u.im >= l.im { (u, l) } else { (l, u) });
        }
    }
    Err(Error::Sweep {
        y,
        source: Box::new(Error::Domain(
            "imaginary branches did not separate past the exceptional point".into(),
        )),
    })
}

/// `n` points evenly spaced on `[0, 0.99 y_c]`, followed by
/// `0.995, 0.999, 0.9995, 0.9999` times `y_c` to resolve the approach of
/// the upper branch to zero.
pub fn default_y_grid(y_c: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let mut grid: Vec<f64> = (0..n)
        .map(|i| 0.99 * y_c * i as f64 / (n - 1) as f64)
        .collect();
    grid.extend([0.995, 0.999, 0.9995, 0.9999].map(|f| f * y_c));
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::inverse_retarded;

    fn fig() -> ModelParams {
        ModelParams::default()
    }

    #[test]
    fn char_fn_vanishes_at_origin_on_critical_line() {
        for gamma in [0.0, 0.1, 0.5] {
            let p = fig().with_gamma(gamma).with_y(2.0);
            assert_eq!(char_fn(Complex64::new(0.0, 0.0), &p).norm(), 0.0);
        }
    }

    #[test]
    fn decoupled_photon_pole() {
        let p = fig().with_gamma(0.0);
        assert!(char_fn(Complex64::new(2.0, -2.0), &p).norm() < 1e-12);
    }

    #[test]
    fn determinant_identity() {
        let p = fig().with_y(1.3);
        for (re, im) in [(0.3, -0.2), (-1.7, -0.05), (2.4, -3.1), (0.0, -0.6)] {
            let z = Complex64::new(re, im);
            let det = inverse_retarded(z, &p, Sheet::Second).determinant();
            let f = char_fn(z, &p);
            assert!(
                (det - f).norm() <= 1e-12 * f.norm().max(1.0),
                "{z}: {det} vs {f}"
            );
        }
    }

    #[test]
    fn bare_b_pole() {
        let p = fig().with_gamma(0.0);
        let z = find_pole(Complex64::new(0.9, -0.1), &p, DEFAULT_POLE_TOL).unwrap();
        assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-12, "{z}");
    }

    #[test]
    fn bath_shifted_b_pole() {
        let z = find_pole(Complex64::new(1.0, 0.0), &fig(), DEFAULT_POLE_TOL).unwrap();
        assert!((z.re - 0.5).abs() < 0.05, "{z}");
        assert!(z.im < 0.0);
        assert!(char_fn(z, &fig()).norm() < 1e-9);
    }

    #[test]
    fn unreachable_tolerance_fails() {
        let err = find_pole(Complex64::new(0.9, -0.1), &fig(), 0.0).unwrap_err();
        match err {
            Error::Convergence { iterations, .. } => assert_eq!(iterations, MAX_NEWTON_ITERATIONS),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn upper_half_plane_seed_rejected() {
        assert!(find_pole(Complex64::new(1.0, 0.5), &fig(), DEFAULT_POLE_TOL).is_err());
    }

    #[test]
    fn pole_pairs_mirror() {
        let p = fig().with_y(1.2);
        let z = find_pole(Complex64::new(0.5, -0.2), &p, DEFAULT_POLE_TOL).unwrap();
        let m = find_pole(
            -z.conj() + Complex64::new(0.01, -0.01),
            &p,
            DEFAULT_POLE_TOL,
        )
        .unwrap();
        assert!((m + z.conj()).norm() < 1e-9, "{z} vs {m}");
        let f = char_fn(z, &p);
        let g = char_fn(-z.conj(), &p);
        assert!((g - f.conj()).norm() < 1e-12);
    }

    #[test]
    fn first_sheet_is_not_a_substitute() {
        // Solving with first-sheet kernels gives a point that is not a
        // resonance: its second-sheet residual is large.
        let p = fig().with_y(1.0);
        let wrong = CharacteristicFn::on_sheet(&p, Sheet::First)
            .find_root(Complex64::new(0.5, -0.2), DEFAULT_POLE_TOL);
        let right = find_pole(Complex64::new(0.5, -0.2), &p, DEFAULT_POLE_TOL).unwrap();
        if let Ok(w) = wrong {
            let scale = CharacteristicFn::new(&p).scale(w);
            assert!(char_fn(w, &p).norm() > 1e-4 * scale);
            assert!((w - right).norm() > 1e-3);
        }
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        assert!(matches!(
            soft_mode_sweep(&fig(), &[]),
            Err(Error::Config(_))
        ));
        assert!(soft_mode_sweep(&fig(), &[0.5, 0.4]).is_err());
        assert!(matches!(
            soft_mode_sweep(&fig(), &[0.5, 2.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sweep_bifurcates_with_bath() {
        let y_c = 2.0;
        let traj = soft_mode_sweep(&fig(), &default_y_grid(y_c, 100)).unwrap();
        let yb = traj.bifurcation_y.expect("no bifurcation");
        assert!((yb / y_c - 0.93).abs() < 0.02, "{}", yb / y_c);
        for s in &traj.samples {
            assert!(s.pole.im <= 1e-9, "{s:?}");
            if s.branch != Branch::PreBifurcation {
                assert!(s.pole.re.abs() <= 1e-9, "{s:?}");
            } else {
                assert!(s.pole.re >= 0.0);
            }
            let cf = CharacteristicFn::new(&fig().with_y(s.y));
            assert!(cf.eval(s.pole).norm() < 1e-9, "{s:?}");
        }
        let upper: Vec<_> = traj.branch(Branch::Upper).collect();
        assert!(upper.windows(2).all(|w| w[1].pole.im > w[0].pole.im));
        let yc_est = traj.extrapolated_critical_coupling().unwrap();
        assert!((yc_est / y_c - 1.0).abs() < 1e-4, "{yc_est}");
    }

    #[test]
    fn starting_mid_grid_stays_on_soft_mode() {
        let full = soft_mode_sweep(&fig(), &[0.2, 0.6, 1.0]).unwrap();
        let partial = soft_mode_sweep(&fig(), &[1.0]).unwrap();
        assert!((full.samples[2].pole - partial.samples[0].pole).norm() < 1e-10);
    }

    #[test]
    fn default_grid_shape() {
        let g = default_y_grid(2.0, 50);
        assert_eq!(g.len(), 54);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(*g.last().unwrap() < 2.0);
    }
}
