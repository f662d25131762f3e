//! Retarded, advanced and Keldysh Green's functions of the coupled modes.
//!
//! The counter-rotating coupling mixes each mode at `+w` with its partner
//! at `-w`, so the quadratic action closes on four components ordered as
//! `(a(+w), a(-w), b(+w), b(-w))`. In that basis
//!
//! ```text
//! [G^R]^-1 = | z-wa+ik      0          -y/2         -y/2        |
//!            | 0            -z-wa-ik   -y/2         -y/2        |
//!            | -y/2         -y/2       z-wb-K1      0           |
//!            | -y/2         -y/2       0            -z-wb-K2    |
//! ```
//!
//! with `K1 = K^R(z)` and `K2 = K^A(-z*)`. Its determinant is the
//! characteristic function of [`crate::poles::char_fn`]. At zero
//! temperature the Keldysh noise is `diag(2ik, 2ik, 2i pi rho(w), 2i pi rho(-w))`
//! and `G^K = -G^R D^K G^A`.

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::bath::{Bath, Sheet};
use crate::error::{Error, Result};
use crate::model::ModelParams;

pub type Mat4 = Matrix4<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct GreensBlocks {
    pub omega: f64,
    pub inv_retarded: Mat4,
    pub inv_advanced: Mat4,
    pub noise_keldysh: Mat4,
    pub retarded: Mat4,
    pub keldysh: Mat4,
}

/// Power spectra (Fourier transforms of the symmetrized correlators) at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSample {
    pub omega: f64,
    pub c_a: f64,
    pub c_b: f64,
}

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn assemble(z: Complex64, params: &ModelParams, bath: &Bath, sheet: Sheet) -> Mat4 {
    let g = c(-0.5 * params.y);
    let zero = c(0.0);
    let wa = params.omega_a;
    let wb = params.omega_b;
    let k = params.kappa;
    let k1 = bath.retarded(z, sheet);
    let k2 = bath.mirrored_advanced(z, sheet);
    Mat4::new(
        z - wa + I * k,
        zero,
        g,
        g,
        zero,
        -z - wa - I * k,
        g,
        g,
        g,
        g,
        z - wb - k1,
        zero,
        g,
        g,
        zero,
        -z - wb - k2,
    )
}

/// `[G^R]^-1(z)` with kernels from `sheet`. Use [`Sheet::First`] on the
/// real axis and [`Sheet::Second`] for resonance poles below it.
pub fn inverse_retarded(z: Complex64, params: &ModelParams, sheet: Sheet) -> Mat4 {
    assemble(z, params, &Bath::new(params), sheet)
}

fn noise_diagonal(omega: f64, params: &ModelParams, bath: &Bath) -> [f64; 4] {
    // Keldysh entries divided by 2i.
    [
        params.kappa,
        params.kappa,
        std::f64::consts::PI * bath.power_law_density(omega),
        std::f64::consts::PI * bath.power_law_density(-omega),
    ]
}

/// Zero-temperature Keldysh noise matrix `D^K(w)`. The `a` entries are
/// frequency independent; the `b` entries vanish wherever the bath has no
/// spectral weight.
pub fn noise_keldysh(omega: f64, params: &ModelParams) -> Mat4 {
    let d = noise_diagonal(omega, params, &Bath::new(params));
    Mat4::from_diagonal(&nalgebra::Vector4::from_fn(|i, _| {
        Complex64::new(0.0, 2.0 * d[i])
    }))
}

/// Evaluates spectra for one validated parameter set.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumEvaluator {
    params: ModelParams,
    bath: Bath,
}

impl SpectrumEvaluator {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let params = params.validated()?;
        Ok(Self {
            params,
            bath: Bath::new(&params),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    fn retarded(&self, omega: f64) -> Result<(Mat4, Mat4)> {
        let inv = assemble(c(omega), &self.params, &self.bath, Sheet::First);
        let g = inv
            .try_inverse()
            .filter(|g| g.iter().all(|x| x.is_finite()))
            .ok_or_else(|| {
                Error::Domain(format!(
                    "retarded Green's function is singular at omega = {omega}, y = {}",
                    self.params.y
                ))
            })?;
        Ok((inv, g))
    }

    /// All 4x4 blocks at real `omega`.
    pub fn blocks(&self, omega: f64) -> Result<GreensBlocks> {
        let (inv_retarded, retarded) = self.retarded(omega)?;
        let d = noise_diagonal(omega, &self.params, &self.bath);
        let noise_keldysh = Mat4::from_diagonal(&nalgebra::Vector4::from_fn(|i, _| {
            Complex64::new(0.0, 2.0 * d[i])
        }));
        let keldysh = -(retarded * noise_keldysh * retarded.adjoint());
        Ok(GreensBlocks {
            omega,
            inv_advanced: inv_retarded.adjoint(),
            inv_retarded,
            noise_keldysh,
            retarded,
            keldysh,
        })
    }

    /// `C_a = i G^K_11` and `C_b = i G^K_33`.
    ///
    /// Only the two needed diagonal entries of `-G^R D^K G^R†` are formed:
    /// `i G^K_jj = 2 sum_k d_k |G^R_jk|^2` with `D^K = 2i diag(d)`, which is
    /// real and non-negative term by term.
    pub fn sample(&self, omega: f64) -> Result<SpectrumSample> {
        let (_, g) = self.retarded(omega)?;
        let d = noise_diagonal(omega, &self.params, &self.bath);
        let diag = |row: usize| 2.0 * (0..4).map(|k| d[k] * g[(row, k)].norm_sqr()).sum::<f64>();
        Ok(SpectrumSample {
            omega,
            c_a: diag(0),
            c_b: diag(2),
        })
    }

    /// `C_a(w) + C_a(-w)` and `C_b(w) + C_b(-w)`, NaN where singular.
    pub(crate) fn folded(&self, omega: f64) -> [f64; 2] {
        match (self.sample(omega), self.sample(-omega)) {
            (Ok(p), Ok(m)) => [p.c_a + m.c_a, p.c_b + m.c_b],
            _ => [f64::NAN; 2],
        }
    }
}

pub fn greens_blocks(omega: f64, params: &ModelParams) -> Result<GreensBlocks> {
    SpectrumEvaluator::new(params)?.blocks(omega)
}

pub fn spectra(omega: f64, params: &ModelParams) -> Result<SpectrumSample> {
    SpectrumEvaluator::new(params)?.sample(omega)
}

/// Spectra on a frequency grid, evaluated in parallel and returned in grid order.
pub fn spectrum_grid(omegas: &[f64], params: &ModelParams) -> Result<Vec<SpectrumSample>> {
    let eval = SpectrumEvaluator::new(params)?;
    omegas.par_iter().map(|&w| eval.sample(w)).collect()
}
