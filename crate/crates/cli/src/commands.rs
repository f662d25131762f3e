use std::path::{Path, PathBuf};

use dicke_core::greens::spectrum_grid;
use dicke_core::observables::{exponent_fit, population_grid, ExponentFit, Mode, WindowConfig};
use dicke_core::poles::soft_mode_sweep;
use dicke_core::quad::QuadConfig;
use dicke_core::validation::run_invariant_suite;
use dicke_core::{Error, ModelParams, Result};
use rayon::prelude::*;

use crate::args::{RunConfig, Task};
use crate::output::{describe, num, Csv};

/// What a successful command reports back: the one-line summary and
/// whether every check passed (only `validate` can come back false).
pub struct Outcome {
    pub summary: String,
    pub ok: bool,
}

fn done(summary: String) -> Result<Outcome> {
    Ok(Outcome { summary, ok: true })
}

pub fn run(rc: &RunConfig) -> Result<Outcome> {
    match &rc.task {
        Task::Validate => validate(&rc.params),
        Task::Softmode { y_grid, gammas } => match gammas {
            None => {
                let (mut csv, note) = softmode(&rc.params, y_grid)?;
                csv.write_atomic(&rc.output)?;
                done(format!(
                    "softmode: {} rows -> {} ({note})",
                    csv.rows(),
                    rc.output.display()
                ))
            }
            Some(gammas) => {
                let mut files = Vec::new();
                for &g in gammas {
                    let path = suffixed(&rc.output, &format!("gamma{g}"));
                    let (mut csv, note) = softmode(&rc.params.with_gamma(g), y_grid)?;
                    csv.write_atomic(&path)?;
                    files.push(format!("{} ({note})", path.display()));
                }
                done(format!(
                    "softmode: {} trajectories -> {}",
                    files.len(),
                    files.join(", ")
                ))
            }
        },
        Task::Spectrum { omegas } => {
            let samples = spectrum_grid(omegas, &rc.params)?;
            let mut csv = Csv::new(&["omega", "c_a", "c_b"]);
            for s in &samples {
                csv.row([num(s.omega), num(s.c_a), num(s.c_b)]);
            }
            csv.write_atomic(&rc.output)?;
            let peak = samples
                .iter()
                .max_by(|a, b| a.c_b.total_cmp(&b.c_b))
                .map_or(f64::NAN, |s| s.omega);
            done(format!(
                "spectrum: {} rows -> {} (c_b peaks at omega = {peak:.4})",
                csv.rows(),
                rc.output.display()
            ))
        }
        Task::Population { y_grid } => {
            let y_c = rc.params.critical_coupling()?;
            if let Some(&y) = y_grid.iter().find(|&&y| !(0.0..y_c).contains(&y)) {
                return Err(Error::Config(format!(
                    "y-grid value {y} outside [0, y_c = {y_c})"
                )));
            }
            let pops = population_grid(&rc.params, y_grid, &rc.quad)?;
            let mut csv = Csv::new(&["y", "n_a", "n_b", "err"]);
            for p in &pops {
                csv.row([num(p.y), num(p.n_a), num(p.n_b), num(p.quad_error_estimate)]);
            }
            csv.write_atomic(&rc.output)?;
            done(format!(
                "population: {} rows -> {}",
                csv.rows(),
                rc.output.display()
            ))
        }
        Task::Exponent {
            s_list,
            window,
            mode,
            dump_points,
        } => {
            let fits = fit_cells(
                &rc.params,
                &[rc.params.gamma],
                s_list,
                *mode,
                window,
                &rc.quad,
            )?;
            let mut csv = Csv::new(&["s", "exponent", "stderr", "eps_min", "eps_max"]);
            for f in &fits {
                csv.row([
                    num(f.s),
                    num(f.exponent),
                    num(f.stderr),
                    num(f.window.0),
                    num(f.window.1),
                ]);
            }
            csv.write_atomic(&rc.output)?;
            if let Some(path) = dump_points {
                let mut pts = Csv::new(&["s", "epsilon", "n"]);
                for f in &fits {
                    for &(eps, n) in &f.points {
                        pts.row([num(f.s), num(eps), num(n)]);
                    }
                }
                pts.write_atomic(path)?;
            }
            let list: Vec<String> = fits
                .iter()
                .map(|f| format!("{}: {:.4}", f.s, f.exponent))
                .collect();
            done(format!(
                "exponent: mode {} nu = [{}] -> {}",
                mode.label(),
                list.join(", "),
                rc.output.display()
            ))
        }
        Task::Sweep {
            s_list,
            gammas,
            window,
            mode,
        } => {
            let fits = fit_cells(&rc.params, gammas, s_list, *mode, window, &rc.quad)?;
            let mut csv = Csv::new(&["gamma", "s", "exponent", "stderr", "eps_min", "eps_max"]);
            for f in &fits {
                csv.row([
                    num(f.gamma),
                    num(f.s),
                    num(f.exponent),
                    num(f.stderr),
                    num(f.window.0),
                    num(f.window.1),
                ]);
            }
            csv.write_atomic(&rc.output)?;
            done(format!(
                "sweep: {} cells -> {}",
                csv.rows(),
                rc.output.display()
            ))
        }
    }
}

fn validate(params: &ModelParams) -> Result<Outcome> {
    let checks = run_invariant_suite(params);
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag} [{}] {}: {}", c.module, c.name, c.detail);
    }
    Ok(Outcome {
        summary: format!(
            "validate: {}/{} checks passed",
            checks.len() - failed,
            checks.len()
        ),
        ok: failed == 0,
    })
}

fn softmode(params: &ModelParams, y_grid: &[f64]) -> Result<(Csv, String)> {
    let traj = soft_mode_sweep(params, y_grid)?;
    let mut csv = Csv::new(&["y", "re_pole", "im_pole", "branch"]);
    for s in &traj.samples {
        csv.row([
            num(s.y),
            num(s.pole.re),
            num(s.pole.im),
            s.branch.label().to_string(),
        ]);
    }
    let y_c = params.critical_coupling()?;
    let note = match traj.bifurcation_y {
        Some(b) => format!(
            "gamma = {}, bifurcation at y = {:.4} y_c",
            params.gamma,
            b / y_c
        ),
        None => format!("gamma = {}, no bifurcation on grid", params.gamma),
    };
    Ok((csv, note))
}

/// One exponent fit per (gamma, s) cell, gamma-major, computed in parallel.
fn fit_cells(
    params: &ModelParams,
    gammas: &[f64],
    s_list: &[f64],
    mode: Mode,
    window: &WindowConfig,
    quad: &QuadConfig,
) -> Result<Vec<ExponentFit>> {
    let cells: Vec<ModelParams> = gammas
        .iter()
        .flat_map(|&g| s_list.iter().map(move |&s| params.with_gamma(g).with_s(s)))
        .collect();
    for p in &cells {
        p.validated_ignoring_y()?;
    }
    cells
        .par_iter()
        .map(|p| {
            exponent_fit(p, mode, window, quad)
                .map_err(|e| Error::Domain(format!("exponent fit failed ({}): {e}", describe(p))))
        })
        .collect()
}

/// `dir/stem.ext` -> `dir/stem_tag.ext`.
pub fn suffixed(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_{tag}.{ext}"),
        None => format!("{stem}_{tag}"),
    };
    path.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffix_keeps_extension() {
        assert_eq!(
            suffixed(Path::new("out/traj.csv"), "gamma0.1"),
            PathBuf::from("out/traj_gamma0.1.csv")
        );
        assert_eq!(
            suffixed(Path::new("traj"), "gamma0"),
            PathBuf::from("traj_gamma0")
        );
    }
}
