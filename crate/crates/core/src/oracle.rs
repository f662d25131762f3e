//! Independent reference for the bath-free case.
//!
//! With `gamma = 0` the characteristic function is the quartic
//! `[(z + i kappa)^2 - wa^2](z^2 - wb^2) - y^2 wa wb`, whose roots are the
//! eigenvalues of its companion matrix. This path shares no code with the
//! Newton solver in [`crate::poles`].

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Coefficients `[c0, c1, c2, c3]` of the monic quartic
/// `z^4 + c3 z^3 + c2 z^2 + c1 z + c0`.
pub fn bath_free_quartic(params: &ModelParams) -> [Complex64; 4] {
    let (wa, wb, k, y) = (params.omega_a, params.omega_b, params.kappa, params.y);
    // (z^2 + 2ik z - k^2 - wa^2)(z^2 - wb^2) - y^2 wa wb
    let a0 = Complex64::new(-k * k - wa * wa, 0.0);
    let a1 = Complex64::new(0.0, 2.0 * k);
    let b0 = -wb * wb;
    [a0 * b0 - y * y * wa * wb, a1 * b0, a0 + b0, a1]
}

fn horner(c: &[Complex64; 4], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(1.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ci in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ci;
    }
    (p, dp)
}

/// All four roots of the bath-free quartic, sorted by real then imaginary part.
pub fn bath_free_poles(params: &ModelParams) -> Result<[Complex64; 4]> {
    let c = bath_free_quartic(params);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let companion = Matrix4::new(
        zero, zero, zero, -c[0], one, zero, zero, -c[1], zero, one, zero, -c[2], zero, zero, one,
        -c[3],
    );
    let eig = companion
        .eigenvalues()
        .ok_or_else(|| Error::Domain("companion matrix Schur form did not converge".into()))?;
    let mut roots = [zero; 4];
    for (r, e) in roots.iter_mut().zip(eig.iter()) {
        // Polish on the explicit polynomial.
        let mut z = *e;
        for _ in 0..3 {
            let (p, dp) = horner(&c, z);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.is_finite() || step.norm() > 1e-6 * z.norm().max(1.0) {
                break;
            }
            z -= step;
        }
        *r = z;
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

/// Distance from `z` to the nearest bath-free root.
pub fn distance_to_bath_free_pole(z: Complex64, params: &ModelParams) -> Result<f64> {
    Ok(bath_free_poles(params)?
        .iter()
        .map(|r| (r - z).norm())
        .fold(f64::INFINITY, f64::min))
}
