//! Globally adaptive 21-point Gauss-Kronrod quadrature over a list of
//! breakpoints, for vector-valued integrands.
//!
//! Several spectra are usually integrated over the same mesh, so the
//! integrand returns `[f64; N]` and the refinement is driven by whichever
//! component is furthest from its tolerance.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the number of live subintervals.
    pub max_subdivisions: usize,
    /// Density of the geometric breakpoint meshes built by callers.
    pub panels_per_decade: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 20_000,
            panels_per_decade: 2,
        }
    }
}

impl QuadConfig {
    /// Twice the mesh density and half the tolerances.
    pub fn doubled(&self) -> Self {
        Self {
            rel_tol: self.rel_tol / 2.0,
            abs_tol: self.abs_tol / 2.0,
            max_subdivisions: self.max_subdivisions * 2,
            panels_per_decade: self.panels_per_decade * 2,
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::Config("quadrature tolerances must be > 0".into()));
        }
        if self.max_subdivisions == 0 || self.panels_per_decade == 0 {
            return Err(Error::Config(
                "quadrature budget and panel density must be > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub evaluations: usize,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

#[derive(Debug, Clone, Copy)]
struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    roundoff: [f64; N],
    splittable: bool,
}

// QUADPACK error heuristic.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

fn kronrod21<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Result<Segment<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv1 = [[0.0; N]; 10];
    let mut fv2 = [[0.0; N]; 10];

    let mut eval = |x: f64| -> Result<[f64; N]> {
        let v = f(x);
        if v.iter().all(|c| c.is_finite()) {
            Ok(v)
        } else {
            Err(Error::Domain(format!("non-finite integrand at x = {x:e}")))
        }
    };

    let fc = eval(center)?;
    let mut gauss = [0.0; N];
    let mut kronrod = [0.0; N];
    let mut res_abs = [0.0; N];
    for k in 0..N {
        kronrod[k] = fc[k] * WGK[10];
        res_abs[k] = kronrod[k].abs();
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        for k in 0..N {
            kronrod[k] += WGK[j] * (f1[k] + f2[k]);
            res_abs[k] += WGK[j] * (f1[k].abs() + f2[k].abs());
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * (f1[k] + f2[k]);
            }
        }
    }

    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let mut roundoff = [0.0; N];
    for k in 0..N {
        let mean = 0.5 * kronrod[k];
        let mut res_asc = WGK[10] * (fc[k] - mean).abs();
        for j in 0..10 {
            res_asc += WGK[j] * ((fv1[j][k] - mean).abs() + (fv2[j][k] - mean).abs());
        }
        let w = half.abs();
        value[k] = kronrod[k] * half;
        error[k] = rescale_error((kronrod[k] - gauss[k]) * half, res_abs[k] * w, res_asc * w);
        roundoff[k] = 50.0 * f64::EPSILON * res_abs[k] * w;
    }
    let splittable =
        (b - a).abs() > 64.0 * f64::EPSILON * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    Ok(Segment {
        a,
        b,
        value,
        error,
        roundoff,
        splittable,
    })
}

/// Integrates `f` over `[breakpoints[0], breakpoints[last]]`.
///
/// Every breakpoint starts its own subinterval; the interval whose error is
/// worst relative to the tolerance is bisected until every component meets
/// `max(abs_tol, rel_tol * |I_k|)`.
pub fn integrate<const N: usize, F>(
    mut f: F,
    breakpoints: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    cfg.check()?;
    if breakpoints.len() < 2 {
        return Err(Error::Config("need at least two breakpoints".into()));
    }
    if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config(
            "breakpoints must be strictly ascending".into(),
        ));
    }

    let mut segments = Vec::with_capacity(breakpoints.len() * 4);
    for w in breakpoints.windows(2) {
        segments.push(kronrod21(&mut f, w[0], w[1])?);
    }
    let mut evaluations = 21 * segments.len();

    loop {
        let mut total = [0.0; N];
        let mut err = [0.0; N];
        let mut floor = [0.0; N];
        for seg in &segments {
            for k in 0..N {
                total[k] += seg.value[k];
                err[k] += seg.error[k];
                floor[k] += seg.roundoff[k];
            }
        }
        // A component that cancels to ~0 cannot beat its own rounding error.
        let tol: [f64; N] =
            std::array::from_fn(|k| cfg.abs_tol.max(cfg.rel_tol * total[k].abs()).max(floor[k]));
        if (0..N).all(|k| err[k] <= tol[k]) {
            return Ok(QuadResult {
                value: total,
                error: err,
                evaluations,
            });
        }

        let badness =
            |seg: &Segment<N>| (0..N).map(|k| seg.error[k] / tol[k]).fold(0.0f64, f64::max);
        let worst = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.splittable)
            .max_by(|(_, x), (_, y)| badness(x).total_cmp(&badness(y)))
            .map(|(i, _)| i);

        let give_up = |total: [f64; N], err: [f64; N]| {
            let k = (0..N)
                .max_by(|&i, &j| (err[i] / tol[i]).total_cmp(&(err[j] / tol[j])))
                .unwrap_or(0);
            Error::Quadrature {
                estimate: total.get(k).copied().unwrap_or(0.0),
                error_bound: err.get(k).copied().unwrap_or(0.0),
            }
        };

        let Some(i) = worst else {
            return Err(give_up(total, err));
        };
        if segments.len() >= cfg.max_subdivisions {
            return Err(give_up(total, err));
        }

        let seg = segments[i];
        let mid = 0.5 * (seg.a + seg.b);
        let left = kronrod21(&mut f, seg.a, mid)?;
        let right = kronrod21(&mut f, mid, seg.b)?;
        evaluations += 42;
        segments[i] = left;
        segments.insert(i + 1, right);
    }
}

/// Geometric breakpoints from `lo` to `hi` (both > 0), at least
/// `per_decade` per factor of ten, always including both ends.
pub fn geometric_mesh(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo, "geometric_mesh needs 0 < lo < hi");
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade.max(1) as f64).ceil() as usize).max(1);
    let ratio = (hi / lo).powf(1.0 / n as f64);
    let mut mesh: Vec<f64> = (0..n).map(|i| lo * ratio.powi(i as i32)).collect();
    mesh.push(hi);
    mesh
}

/// Merges breakpoint lists into a strictly ascending list, dropping
/// near-duplicates.
pub fn merge_breakpoints(mut points: Vec<f64>) -> Vec<f64> {
    points.retain(|x| x.is_finite());
    points.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(points.len());
    for x in points {
        match out.last() {
            Some(&last) if x - last <= 1e-13 * x.abs().max(last.abs()) => {}
            _ => out.push(x),
        }
    }
    out
}
