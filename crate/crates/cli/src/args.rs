use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dicke_core::observables::{Mode, WindowConfig};
use dicke_core::poles::default_y_grid;
use dicke_core::quad::QuadConfig;
use dicke_core::{Error, ModelParams, Result};

#[derive(Debug, Parser)]
#[command(
    name = "dicke",
    version,
    about = "Open Dicke model with a sub-Ohmic bath"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Flat key=value parameter file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub params: ParamFlags,

    #[command(flatten)]
    pub quad: QuadFlags,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    /// Output CSV path (default: <command>.csv).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct ParamFlags {
    #[arg(long, global = true, alias = "omega_a")]
    pub omega_a: Option<f64>,
    #[arg(long, global = true, alias = "omega_b")]
    pub omega_b: Option<f64>,
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub s: Option<f64>,
    /// Bath cutoff, a number or `inf`.
    #[arg(long, global = true, alias = "omega_m")]
    pub omega_m: Option<String>,
    #[arg(long, global = true)]
    pub y: Option<f64>,
}

#[derive(Debug, Args)]
pub struct QuadFlags {
    #[arg(long, global = true, alias = "rel_tol")]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true, alias = "abs_tol")]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true, alias = "max_subdivisions")]
    pub max_subdivisions: Option<usize>,
}

#[derive(Debug, Args)]
pub struct YGridFlags {
    /// Explicit comma-separated couplings.
    #[arg(long, alias = "y_grid", allow_hyphen_values = true)]
    pub y_grid: Option<String>,
    #[arg(long, alias = "y_points")]
    pub y_points: Option<usize>,
    /// Largest coupling as a fraction of y_c.
    #[arg(long, alias = "y_max_frac")]
    pub y_max_frac: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WindowFlags {
    #[arg(long, alias = "eps_min", default_value_t = WindowConfig::default().eps_min)]
    pub eps_min: f64,
    #[arg(long, alias = "eps_max", default_value_t = WindowConfig::default().eps_max)]
    pub eps_max: f64,
    #[arg(long, alias = "eps_points", default_value_t = WindowConfig::default().points)]
    pub eps_points: usize,
    /// Largest accepted RMS residual of the log-log fit.
    #[arg(long, alias = "max_rms_residual", default_value_t = WindowConfig::default().max_rms_residual)]
    pub max_rms_residual: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::A)]
    pub mode: ModeArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    A,
    B,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the invariant suite.
    Validate,
    /// Soft-mode pole trajectory versus coupling.
    Softmode {
        #[command(flatten)]
        grid: YGridFlags,
        /// One trajectory file per bath strength.
        #[arg(long, alias = "gamma_list", allow_hyphen_values = true)]
        gamma_list: Option<String>,
    },
    /// Photon and spin spectra on a frequency grid.
    Spectrum {
        #[arg(long, alias = "omega_grid", allow_hyphen_values = true)]
        omega_grid: Option<String>,
        #[arg(long, alias = "omega_min", default_value_t = -4.0, allow_hyphen_values = true)]
        omega_min: f64,
        #[arg(
            long,
            alias = "omega_max",
            default_value_t = 6.0,
            allow_hyphen_values = true
        )]
        omega_max: f64,
        #[arg(long, alias = "omega_points", default_value_t = 1000)]
        omega_points: usize,
    },
    /// Equal-time populations versus coupling.
    Population {
        #[command(flatten)]
        grid: YGridFlags,
    },
    /// Critical exponent for each bath exponent in the s-list.
    Exponent {
        #[arg(long, alias = "s_list", default_value = "0.5,0.6,0.7,0.8")]
        s_list: String,
        #[command(flatten)]
        window: WindowFlags,
        /// Also write the log-log samples behind each fit.
        #[arg(long, alias = "dump_points")]
        dump_points: Option<PathBuf>,
    },
    /// Critical exponent over a (gamma, s) grid.
    Sweep {
        #[arg(long, alias = "s_list", default_value = "0.5,0.6,0.7,0.8")]
        s_list: String,
        #[arg(long, alias = "gamma_list", default_value = "0.1,0.5")]
        gamma_list: String,
        #[command(flatten)]
        window: WindowFlags,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Softmode { .. } => "softmode",
            Command::Spectrum { .. } => "spectrum",
            Command::Population { .. } => "population",
            Command::Exponent { .. } => "exponent",
            Command::Sweep { .. } => "sweep",
        }
    }
}

/// Fully resolved run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub task: Task,
    pub output: PathBuf,
    pub quad: QuadConfig,
    pub jobs: usize,
}

#[derive(Debug, Clone)]
pub enum Task {
    Validate,
    Softmode {
        y_grid: Vec<f64>,
        gammas: Option<Vec<f64>>,
    },
    Spectrum {
        omegas: Vec<f64>,
    },
    Population {
        y_grid: Vec<f64>,
    },
    Exponent {
        s_list: Vec<f64>,
        window: WindowConfig,
        mode: Mode,
        dump_points: Option<PathBuf>,
    },
    Sweep {
        s_list: Vec<f64>,
        gammas: Vec<f64>,
        window: WindowConfig,
        mode: Mode,
    },
}

pub fn parse_list(name: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Config(format!("{name}: cannot parse {t:?} as a number")))
        })
        .collect()
}

pub fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(format!("{name} is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config(format!("{name} contains a non-finite value")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config(format!("{name} must be strictly ascending")));
    }
    Ok(())
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn window(flags: &WindowFlags) -> Result<(WindowConfig, Mode)> {
    let w = WindowConfig {
        eps_min: flags.eps_min,
        eps_max: flags.eps_max,
        points: flags.eps_points,
        max_rms_residual: flags.max_rms_residual,
    };
    w.check()?;
    let mode = match flags.mode {
        ModeArg::A => Mode::A,
        ModeArg::B => Mode::B,
    };
    Ok((w, mode))
}

fn y_grid(flags: &YGridFlags, params: &ModelParams, softmode: bool) -> Result<Vec<f64>> {
    if let Some(text) = &flags.y_grid {
        let grid = parse_list("y-grid", text)?;
        check_grid("y-grid", &grid)?;
        return Ok(grid);
    }
    let y_c = params
        .critical_coupling()
        .map_err(|e| Error::Config(e.to_string()))?;
    let points = flags.y_points.unwrap_or(if softmode { 100 } else { 20 });
    if points == 0 {
        return Err(Error::Config("y-grid is empty".into()));
    }
    let grid = match (softmode, flags.y_max_frac) {
        (true, None) => default_y_grid(y_c, points),
        (_, frac) => {
            let frac = frac.unwrap_or(0.99);
            if !(frac > 0.0 && frac < 1.0) {
                return Err(Error::Config(format!(
                    "y-max-frac must lie in (0,1), got {frac}"
                )));
            }
            linspace(0.0, frac * y_c, points)
        }
    };
    check_grid("y-grid", &grid)?;
    Ok(grid)
}

fn quad_config(flags: &QuadFlags) -> Result<QuadConfig> {
    let d = QuadConfig::default();
    let cfg = QuadConfig {
        rel_tol: flags.rel_tol.unwrap_or(d.rel_tol),
        abs_tol: flags.abs_tol.unwrap_or(d.abs_tol),
        max_subdivisions: flags.max_subdivisions.unwrap_or(d.max_subdivisions),
        ..d
    };
    cfg.check()?;
    Ok(cfg)
}

fn params(cli: &Cli) -> Result<ModelParams> {
    let mut p = ModelParams::default();
    if let Some(path) = &cli.config {
        let text = read_config(path)?;
        p = p.apply_config(&text)?;
    }
    let f = &cli.params;
    let numeric = [
        ("omega_a", f.omega_a),
        ("omega_b", f.omega_b),
        ("kappa", f.kappa),
        ("gamma", f.gamma),
        ("s", f.s),
        ("y", f.y),
    ];
    for (key, value) in numeric {
        if let Some(v) = value {
            p.set(key, &v.to_string())?;
        }
    }
    if let Some(m) = &f.omega_m {
        p.set("omega_m", m)?;
    }
    Ok(p)
}

fn read_config(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let params = params(cli)?;
        let quad = quad_config(&cli.quad)?;
        let task = match &cli.command {
            Command::Validate => Task::Validate,
            Command::Softmode { grid, gamma_list } => {
                let gammas = match gamma_list {
                    Some(text) => {
                        let g = parse_list("gamma-list", text)?;
                        check_grid("gamma-list", &g)?;
                        Some(g)
                    }
                    None => None,
                };
                Task::Softmode {
                    y_grid: y_grid(grid, &params, true)?,
                    gammas,
                }
            }
            Command::Spectrum {
                omega_grid,
                omega_min,
                omega_max,
                omega_points,
            } => {
                let omegas = match omega_grid {
                    Some(text) => parse_list("omega-grid", text)?,
                    None => linspace(*omega_min, *omega_max, *omega_points),
                };
                check_grid("omega-grid", &omegas)?;
                Task::Spectrum { omegas }
            }
            Command::Population { grid } => Task::Population {
                y_grid: y_grid(grid, &params, false)?,
            },
            Command::Exponent {
                s_list,
                window: w,
                dump_points,
            } => {
                let s_list = parse_list("s-list", s_list)?;
                check_grid("s-list", &s_list)?;
                let (window, mode) = window(w)?;
                Task::Exponent {
                    s_list,
                    window,
                    mode,
                    dump_points: dump_points.clone(),
                }
            }
            Command::Sweep {
                s_list,
                gamma_list,
                window: w,
            } => {
                let s_list = parse_list("s-list", s_list)?;
                check_grid("s-list", &s_list)?;
                let gammas = parse_list("gamma-list", gamma_list)?;
                check_grid("gamma-list", &gammas)?;
                let (window, mode) = window(w)?;
                Task::Sweep {
                    s_list,
                    gammas,
                    window,
                    mode,
                }
            }
        };
        let output = cli
            .output
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{}.csv", cli.command.name())));
        Ok(RunConfig {
            params,
            task,
            output,
            quad,
            jobs: cli.jobs,
        })
    }
}
