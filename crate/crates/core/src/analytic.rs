//! Closed-form references: disc monopole capacitance, the monopole
//! approximation to the mutual information and its two-disc far-field form.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_half_line, AdaptiveConfig};

/// Geometric constant of the monopole formula in three dimensions.
///
/// `[Ω(D−2)]²` is ambiguous for the 3D kernel; `16π²` is the value that
/// makes the monopole integral of two analytic discs reproduce the
/// far-field closed form, since `∫C⁰_A C⁰_B dλ = R_A²R_B² ln(R_B/R_A) / (2π(R_B − R_A))`
/// and `16π² · 2π = 32π³`.
pub const A3: f64 = 16.0 * PI * PI;

/// Approximate monopole capacitance of a disc, `R / (4λ/R + π/2)`.
///
/// Exact at `λ = 0` (`2R/π`) and in the transparent limit (`R²/4λ`).
pub fn disc_capacitance(radius: f64, lambda: f64) -> f64 {
    radius / (4.0 * lambda / radius + 0.5 * PI)
}

/// `∫₀^∞ C_A(λ) C_B(λ) dλ / (A₃ d²)`, the monopole approximation to QMI/ω_c.
///
/// `scale` sets the compactification `λ = scale · t/(1 − t)`; it should be
/// of the order of the body size. Fails when the integral does not settle.
pub fn qmi_monopole<FA, FB>(
    c_a: FA,
    c_b: FB,
    d: f64,
    scale: f64,
    cfg: &AdaptiveConfig,
) -> Result<f64>
where
    FA: Fn(f64) -> Result<f64> + Sync,
    FB: Fn(f64) -> Result<f64> + Sync,
{
    if !(d > 0.0 && d.is_finite()) {
        return invalid(format!("separation must be positive, got {d}"));
    }
    let r = integrate_half_line(|l| Ok(c_a(l)? * c_b(l)?), scale, cfg)?;
    if !r.converged || !r.value.is_finite() {
        return Err(Error::Quadrature(format!(
            "capacitance product integral did not converge (value {:e}, error {:e})",
            r.value, r.abs_error
        )));
    }
    Ok(r.value / (A3 * d * d))
}

/// Far-field two-disc closed form
/// `R_A² R_B² ln(R_B/R_A) / (32π³ (R_B − R_A) d²)`.
pub fn qmi_discs_far(r_a: f64, r_b: f64, d: f64) -> f64 {
    let pref = 1.0 / (32.0 * PI.powi(3) * d * d);
    let eps = (r_b - r_a) / r_a;
    // ln(1+ε)/ε → 1, expanded to keep full precision near equal radii
    let ratio = if eps.abs() < 1e-9 {
        1.0 - 0.5 * eps
    } else if eps.abs() < 1e-3 {
        eps.ln_1p() / eps
    } else {
        (r_b / r_a).ln() / (r_b / r_a - 1.0)
    };
    pref * r_a * r_b * r_b * ratio
}

/// `∫₀^∞ C⁰_A C⁰_B dλ = R_A² R_B² ln(R_B/R_A) / (2π (R_B − R_A))` for two
/// analytic disc capacitances.
pub fn disc_product_integral(r_a: f64, r_b: f64) -> f64 {
    qmi_discs_far(r_a, r_b, 1.0) * A3
}
