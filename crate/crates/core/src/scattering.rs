//! `λ`-dependent system matrices and generalized capacitances.
//!
//! In the indicator basis the inverse capacitance operator `λ δ + G₀` becomes
//! `K(λ) = λ·diag(area) + G`, symmetric positive definite for every `λ ≥ 0`.
//! `λ = 0` is the perfectly conducting (Dirichlet) plate, `λ → ∞` the
//! transparent one.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::KernelMatrix;

pub use crate::analytic::disc_capacitance as disc_capacitance_analytic;

/// Condition estimates above this are treated as numerically singular.
pub const MAX_CONDITION: f64 = 1e13;

/// Material and size parameters (units with `c = 1`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Resonant frequency `ω₀`.
    pub omega_0: f64,
    /// Plasma frequency `ω_p`.
    pub omega_p: f64,
    /// Characteristic body size `L`.
    pub length: f64,
}

impl PhysicalParams {
    pub fn new(omega_0: f64, omega_p: f64, length: f64) -> Result<Self> {
        for (name, v) in [("omega_0", omega_0), ("omega_p", omega_p), ("length", length)] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(Self {
            omega_0,
            omega_p,
            length,
        })
    }

    /// Coupling frequency `ω_c = 2π ω_p² / ω₀`.
    pub fn omega_c(&self) -> f64 {
        2.0 * PI * self.omega_p * self.omega_p / self.omega_0
    }

    /// Raised when `ω_c L ≥ 0.1`, outside the weak-coupling regime.
    pub fn weak_coupling_violated(&self) -> bool {
        self.omega_c() * self.length >= 0.1
    }
}

/// `K(λ) = λ·diag(area) + G_self` with its Cholesky factor.
#[derive(Clone, Debug)]
pub struct SystemMatrix {
    pub k: DMatrix<f64>,
    pub lambda: f64,
    factor: Cholesky<f64, Dyn>,
    condition: f64,
}

impl SystemMatrix {
    pub fn new(g_self: &DMatrix<f64>, areas: &[f64], lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return invalid(format!("λ must be a finite non-negative number, got {lambda}"));
        }
        if g_self.nrows() != g_self.ncols() || g_self.nrows() != areas.len() {
            return invalid(format!(
                "kernel block {}×{} does not match {} areas",
                g_self.nrows(),
                g_self.ncols(),
                areas.len()
            ));
        }
        let mut k = g_self.clone();
        for (i, a) in areas.iter().enumerate() {
            k[(i, i)] += lambda * a;
        }
        let (factor, condition) = factor_spd(&k)?;
        Ok(Self {
            k,
            lambda,
            factor,
            condition,
        })
    }

    pub fn factor(&self) -> &Cholesky<f64, Dyn> {
        &self.factor
    }

    /// Cheap condition estimate from the Cholesky diagonal (a lower bound).
    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    /// `log det K`.
    pub fn log_det(&self) -> f64 {
        let l = self.factor.l_dirty();
        2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>()
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.factor.solve(b)
    }

    /// `K⁻¹`, the capacitance matrix in the indicator basis.
    pub fn inverse(&self) -> DMatrix<f64> {
        self.factor.inverse()
    }
}

/// Cholesky factorization with a condition check. Failure reports the
/// eigenvalue-based condition number.
pub(crate) fn factor_spd(k: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    match k.clone().cholesky() {
        Some(ch) => {
            let l = ch.l_dirty();
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for i in 0..l.nrows() {
                lo = lo.min(l[(i, i)]);
                hi = hi.max(l[(i, i)]);
            }
            let cond = (hi / lo).powi(2);
            if !(cond < MAX_CONDITION) {
                return Err(Error::IllConditioned { condition: cond });
            }
            Ok((ch, cond))
        }
        None => {
            let ev = k.clone().symmetric_eigenvalues();
            let hi = ev.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let lo = ev.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
            let condition = if ev.min() <= 0.0 { f64::INFINITY } else { hi / lo };
            Err(Error::IllConditioned { condition })
        }
    }
}

/// Builds `K(λ)` from a self block.
pub fn system_matrix(g_self: &KernelMatrix, areas: &[f64], lambda: f64) -> Result<SystemMatrix> {
    if !g_self.is_self_block {
        return invalid("system matrix needs a self block");
    }
    SystemMatrix::new(&g_self.entries, areas, lambda)
}

/// Monopole generalized capacitance `C(λ) = aᵀ K(λ)⁻¹ a / 4π`.
///
/// `aᵀK⁻¹a` is the charge induced by a unit uniform external potential;
/// dividing by `4π` gives the coefficient of the far-field response
/// `θ ≈ 1 − C/r`, the normalization in which a conducting disc has
/// `C = 2R/π`.
pub fn monopole_capacitance(g_self: &KernelMatrix, areas: &[f64], lambda: f64) -> Result<f64> {
    let k = system_matrix(g_self, areas, lambda)?;
    Ok(induced_charge(&k, areas) / (4.0 * PI))
}

/// Total induced charge `aᵀ K⁻¹ a`.
pub fn induced_charge(k: &SystemMatrix, areas: &[f64]) -> f64 {
    let a = DVector::from_column_slice(areas);
    a.dot(&k.solve(&a))
}

/// Monopole capacitance at each `λ` of a grid.
pub fn capacitance_curve(
    g_self: &KernelMatrix,
    areas: &[f64],
    lambdas: &[f64],
) -> Result<Vec<(f64, f64)>> {
    lambdas
        .iter()
        .map(|&l| Ok((l, monopole_capacitance(g_self, areas, l)?)))
        .collect()
}
