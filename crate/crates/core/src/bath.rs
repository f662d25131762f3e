//! Sub-Ohmic reservoir: coupling density and level-shift functions.
//!
//! The density is `rho(w) = Theta(w) (gamma/pi) (w/omega_b)^s / (1 + (w/omega_m)^2)`.
//! With an infinite cutoff the level shift has the closed form
//!
//! ```text
//! K(z) = gamma / sin(pi s) * (-z/omega_b)^s
//! ```
//!
//! whose cut lies on the positive real frequency axis; `K^R`/`K^A` are its
//! limits from above/below. Resonance poles live on the second sheet,
//! reached by continuing `K^R` through that cut:
//!
//! ```text
//! K^R_II(z) = gamma * exp(-i pi s) / sin(pi s) * (z/omega_b)^s
//! ```
//!
//! Complex powers always use the principal branch. A real argument (zero
//! imaginary part, either sign of zero) is evaluated on the upper lip of
//! the power's cut; this is what makes the second-sheet kernel agree with
//! the physical one on the negative frequency axis.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quad::{geometric_mesh, integrate, merge_breakpoints, QuadConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sheet {
    /// Physical sheet: `K^R` in the upper half-plane, `K^A` in the lower.
    First,
    /// Continuation of `K^R` through the positive-frequency cut.
    Second,
}

/// Reservoir quantities at one (possibly complex) frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathEval {
    pub omega_or_z: Complex64,
    /// Coupling density; only defined for real arguments.
    pub rho: Option<f64>,
    pub k_retarded: Complex64,
    pub k_advanced: Complex64,
    pub sheet: Sheet,
}

/// The combinations entering the characteristic equation,
/// `Gamma = (K1 - K2) / 2i` and `Delta = (K1 + K2) / 2` with
/// `K1 = K^R(z)` and `K2 = K^A(-z*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaDelta {
    pub gamma: Complex64,
    pub delta: Complex64,
}

impl GammaDelta {
    fn from_pair(k1: Complex64, k2: Complex64) -> Self {
        Self {
            gamma: (k1 - k2) / Complex64::new(0.0, 2.0),
            delta: (k1 + k2) * 0.5,
        }
    }
}

/// Precomputed reservoir constants for one parameter set.
#[derive(Debug, Clone, Copy)]
pub struct Bath {
    gamma: f64,
    s: f64,
    omega_b: f64,
    omega_m: Option<f64>,
    inv_sin: f64,
    cot: f64,
    // gamma * exp(-i pi s) / sin(pi s)
    second_sheet_prefactor: Complex64,
}

/// `w^s` on the principal branch, taking real arguments on the upper lip.
fn principal_pow(w: Complex64, s: f64) -> Complex64 {
    if w.re == 0.0 && w.im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    // -0.0 + 0.0 == +0.0
    Complex64::new(w.re, w.im + 0.0).powf(s)
}

impl Bath {
    pub fn new(params: &ModelParams) -> Self {
        let (sin, cos) = (PI * params.s).sin_cos();
        let inv_sin = 1.0 / sin;
        Self {
            gamma: params.gamma,
            s: params.s,
            omega_b: params.omega_b,
            omega_m: params.omega_m,
            inv_sin,
            cot: cos * inv_sin,
            second_sheet_prefactor: Complex64::from_polar(params.gamma * inv_sin, -PI * params.s),
        }
    }

    pub fn is_coupled(&self) -> bool {
        self.gamma != 0.0
    }

    /// Coupling density including the Lorentzian cutoff, if one is set.
    pub fn coupling_density(&self, omega: f64) -> f64 {
        let rho = self.power_law_density(omega);
        match self.omega_m {
            Some(m) if rho != 0.0 => rho / (1.0 + (omega / m).powi(2)),
            _ => rho,
        }
    }

    /// Coupling density with an infinite cutoff; the density consistent
    /// with the closed-form kernels.
    pub fn power_law_density(&self, omega: f64) -> f64 {
        if omega <= 0.0 || !self.is_coupled() {
            0.0
        } else {
            self.gamma / PI * (omega / self.omega_b).powf(self.s)
        }
    }

    /// `(K^R(w), K^A(w))` on the real axis, infinite cutoff.
    pub fn level_shift_real_axis(&self, omega: f64) -> (Complex64, Complex64) {
        if !self.is_coupled() {
            return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        }
        let power = (omega.abs() / self.omega_b).powf(self.s);
        let kr = if omega > 0.0 {
            Complex64::new(self.gamma * power * self.cot, -self.gamma * power)
        } else {
            Complex64::new(self.gamma * self.inv_sin * power, 0.0)
        };
        (kr, kr.conj())
    }

    /// Closed-form `K(z)` on the physical sheet. On the real axis this is
    /// the retarded limit.
    pub fn first_sheet(&self, z: Complex64) -> Complex64 {
        if !self.is_coupled() {
            return Complex64::new(0.0, 0.0);
        }
        if z.im == 0.0 {
            return self.level_shift_real_axis(z.re).0;
        }
        principal_pow(-z / self.omega_b, self.s) * (self.gamma * self.inv_sin)
    }

    /// `K^R_II(z)`.
    pub fn second_sheet(&self, z: Complex64) -> Complex64 {
        if !self.is_coupled() {
            return Complex64::new(0.0, 0.0);
        }
        self.second_sheet_prefactor * principal_pow(z / self.omega_b, self.s)
    }

    pub fn retarded(&self, z: Complex64, sheet: Sheet) -> Complex64 {
        match sheet {
            Sheet::First => self.first_sheet(z),
            Sheet::Second => self.second_sheet(z),
        }
    }

    /// `K^A(-z*) = [K^R(-z*)]*`, the kernel seen by the negative-frequency
    /// copy of mode `b`. The composite is analytic in `z` off the real axis.
    pub fn mirrored_advanced(&self, z: Complex64, sheet: Sheet) -> Complex64 {
        self.retarded(-z.conj(), sheet).conj()
    }

    /// `Gamma(z)` and `Delta(z)` from second-sheet kernels.
    pub fn gamma_delta(&self, z: Complex64) -> GammaDelta {
        self.gamma_delta_on(z, Sheet::Second)
    }

    pub fn gamma_delta_on(&self, z: Complex64, sheet: Sheet) -> GammaDelta {
        GammaDelta::from_pair(self.retarded(z, sheet), self.mirrored_advanced(z, sheet))
    }

    /// Value bundle at `z`. `k_advanced` is the pointwise conjugate of
    /// `k_retarded`.
    pub fn evaluate(&self, z: Complex64, sheet: Sheet) -> BathEval {
        let k_retarded = self.retarded(z, sheet);
        BathEval {
            omega_or_z: z,
            rho: (z.im == 0.0).then(|| self.coupling_density(z.re)),
            k_retarded,
            k_advanced: k_retarded.conj(),
            sheet,
        }
    }

    /// Exact retarded level shift for the Lorentzian-cutoff density, real
    /// `omega`:
    ///
    /// ```text
    /// K_M(z) = gamma / (1 + x^2/m^2) * [ (-x)^s / sin(pi s)
    ///          + x m^(s-1) / (2 cos(pi s/2)) - m^s / (2 sin(pi s/2)) ]
    /// ```
    ///
    /// with `x = z/omega_b`, `m = omega_m/omega_b`. The last two terms are
    /// what a finite cutoff adds to the closed form: a constant of order
    /// `m^s` and a slope of order `m^(s-1)`.
    pub fn cutoff_level_shift(&self, omega: f64) -> Result<Complex64> {
        let m = self
            .omega_m
            .ok_or_else(|| Error::Domain("cutoff level shift needs a finite omega_m".into()))?
            / self.omega_b;
        if !self.is_coupled() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let x = omega / self.omega_b;
        let half = 0.5 * PI * self.s;
        let bracket = self.first_sheet(Complex64::new(omega, 0.0)) / self.gamma
            + x * m.powf(self.s - 1.0) / (2.0 * half.cos())
            - m.powf(self.s) / (2.0 * half.sin());
        Ok(bracket * self.gamma / (1.0 + (x / m).powi(2)))
    }

    fn density_log_derivative(&self, omega: f64) -> f64 {
        let mut d = self.s / omega;
        if let Some(m) = self.omega_m {
            let r = (omega / m).powi(2);
            d -= 2.0 * r / omega / (1.0 + r);
        }
        d
    }
}

pub fn coupling_density(omega: f64, params: &ModelParams) -> f64 {
    Bath::new(params).coupling_density(omega)
}

pub fn level_shift_real_axis(omega: f64, params: &ModelParams) -> (Complex64, Complex64) {
    Bath::new(params).level_shift_real_axis(omega)
}

pub fn level_shift_second_sheet(z: Complex64, params: &ModelParams) -> Complex64 {
    Bath::new(params).second_sheet(z)
}

pub fn gamma_delta(z: Complex64, params: &ModelParams) -> GammaDelta {
    Bath::new(params).gamma_delta(z)
}

/// Relative half-width of the interval excised around the pole of the
/// principal-value integrand.
pub const PV_EXCISION: f64 = 1e-6;

// Beyond this multiple of omega_m the integrand is a pure power law.
const PV_TAIL_FACTOR: f64 = 1e8;

/// Direct numerical evaluation of
/// `K^R(w) = P int_0^inf rho(w') / (w - w') dw' - i pi rho(w)`
/// for a finite cutoff.
///
/// The pole at `w' = w` is excised symmetrically with half-width
/// `h = 1e-6 * max(w, omega_b)`; the excised principal value is replaced
/// by its leading term `-2 h rho'(w)`. Each side is integrated adaptively on
/// meshes that are geometric in the distance to the pole, and the
/// `w'^(s-3)` tail beyond `1e8 * omega_m` is added in closed form.
pub fn pv_level_shift_oracle(
    omega: f64,
    params: &ModelParams,
    cfg: &QuadConfig,
) -> Result<Complex64> {
    let m = params
        .omega_m
        .filter(|m| m.is_finite() && *m > 0.0)
        .ok_or_else(|| Error::Domain("the principal-value oracle needs a finite omega_m".into()))?;
    if !(omega > 0.0) {
        return Err(Error::Domain(format!(
            "principal-value oracle needs omega > 0, got {omega}"
        )));
    }
    let bath = Bath::new(params);
    if !bath.is_coupled() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let h = PV_EXCISION * omega.max(params.omega_b);
    let per = cfg.panels_per_decade;
    let integrand = |x: f64| [bath.coupling_density(x) / (omega - x)];

    // Left of the pole: geometric toward 0 (the w'^s cusp) and toward w - h.
    let mut left = vec![0.0];
    left.extend(geometric_mesh(omega * 1e-14, 0.5 * omega, per));
    left.extend(
        geometric_mesh(h, 0.5 * omega, per)
            .into_iter()
            .map(|d| omega - d),
    );
    let left = integrate(integrand, &merge_breakpoints(left), cfg)?;

    // Right of the pole, out to the power-law tail.
    let far = PV_TAIL_FACTOR * m.max(omega);
    let mut right: Vec<f64> = geometric_mesh(h, omega, per)
        .into_iter()
        .map(|d| omega + d)
        .collect();
    right.extend(geometric_mesh(2.0 * omega, far, per));
    let right = integrate(integrand, &merge_breakpoints(right), cfg)?;

    // rho(x)/(w - x) ~ -(gamma/pi) m^2 omega_b^-s x^(s-3) for x >> m, w.
    let tail =
        -params.gamma / PI * m * m * params.omega_b.powf(-params.s) * far.powf(params.s - 2.0)
            / (2.0 - params.s);

    let rho = bath.coupling_density(omega);
    let excised = -2.0 * h * rho * bath.density_log_derivative(omega);
    let re = left.value[0] + right.value[0] + tail + excised;
    Ok(Complex64::new(re, -PI * rho))
}
