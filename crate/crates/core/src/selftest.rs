//! Built-in invariant suite: kernel symmetry and definiteness, route
//! equivalence, swap symmetry, scale covariance, mesh convergence,
//! subadditivity and worldline event inclusion.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::entropy::{mutual_information, BodySystem, MeshOptions, Route};
use crate::error::Result;
use crate::geometry::{mesh_disc, mesh_rectangle, place_right_of, BodyShape, Grading};
use crate::kernel::assemble_self;
use crate::quadrature::AdaptiveConfig;
use crate::scattering::monopole_capacitance;
use crate::worldline::{dirichlet_ssa_counts, WorldlineConfig};

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SelfTestReport {
    pub checks: Vec<Check>,
}

impl SelfTestReport {
    pub fn all_passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

/// Sizes of the self-test problems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfTestOptions {
    /// Coarse refinement level; mesh convergence compares it with the next.
    pub refinement: u32,
    pub seed: u64,
}

impl Default for SelfTestOptions {
    fn default() -> Self {
        Self {
            refinement: 2,
            seed: 1,
        }
    }
}

fn run(report: &mut SelfTestReport, name: &str, f: impl FnOnce() -> Result<(bool, String)>) {
    let t = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    report.checks.push(Check {
        name: name.to_string(),
        passed,
        detail,
        seconds: t.elapsed().as_secs_f64(),
    });
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn run_selftest(opts: &SelfTestOptions) -> SelfTestReport {
    let mut report = SelfTestReport::default();
    let quad = AdaptiveConfig::default();
    let mesh = MeshOptions {
        refinement: opts.refinement,
        ..MeshOptions::default()
    };
    let square = BodyShape::rectangle(1.0, 1.0, [0.0, 0.0]);

    run(&mut report, "kernel_symmetry_pd", || {
        let mut worst_asym = 0.0f64;
        let mut min_eig = f64::INFINITY;
        for m in [mesh_rectangle(1.0, 1.0, 4)?, mesh_disc(1.0, opts.refinement)?] {
            let g = assemble_self(&m, 4)?;
            worst_asym = worst_asym.max(g.asymmetry());
            min_eig = min_eig.min(g.min_eigenvalue());
        }
        Ok((
            worst_asym == 0.0 && min_eig > 0.0,
            format!("max |G − Gᵀ| = {worst_asym:e}, min eigenvalue = {min_eig:e}"),
        ))
    });

    run(&mut report, "route_equivalence", || {
        let b = place_right_of(&square, &BodyShape::disc(0.6, [0.0, 0.0]), 0.4);
        let sys = BodySystem::from_shapes(&[square.clone(), b], &mesh)?;
        let mut worst = 0.0f64;
        for lam in [0.0, 0.01, 0.3, 3.0, 30.0] {
            let s = sys.delta_f(0, 1, lam, Route::Scattering)?;
            let d = sys.delta_f(0, 1, lam, Route::Direct)?;
            worst = worst.max(rel(s, d));
        }
        Ok((worst < 1e-8, format!("max relative difference {worst:.3e}")))
    });

    run(&mut report, "capacitance_scale_covariance", || {
        let m = mesh_disc(1.0, opts.refinement)?;
        let g = assemble_self(&m, 4)?;
        let s = 2.5;
        let ms = m.scale(s);
        let gs = assemble_self(&ms, 4)?;
        let mut worst = 0.0f64;
        for lam in [0.0, 0.3, 3.0] {
            let c = monopole_capacitance(&g, &m.areas, lam)?;
            let cs = monopole_capacitance(&gs, &ms.areas, lam * s)?;
            worst = worst.max(rel(cs, s * c));
        }
        Ok((worst < 1e-10, format!("max relative deviation {worst:.3e}")))
    });

    run(&mut report, "capacitance_monotone", || {
        let m = mesh_rectangle(1.0, 1.0, 4)?;
        let g = assemble_self(&m, 4)?;
        let grid = [0.0, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0];
        let c: Vec<f64> = grid
            .iter()
            .map(|&l| monopole_capacitance(&g, &m.areas, l))
            .collect::<Result<_>>()?;
        let ok = c.windows(2).all(|w| w[1] < w[0]);
        Ok((ok, format!("C(0) = {:.6}, C(10) = {:.6}", c[0], c[c.len() - 1])))
    });

    run(&mut report, "qmi_swap_symmetry", || {
        let b = place_right_of(&square, &BodyShape::disc(0.4, [0.0, 0.0]), 0.5);
        let ab = mutual_information(&square, &b, &mesh, Route::Scattering, &quad)?;
        let ba = mutual_information(&b, &square, &mesh, Route::Scattering, &quad)?;
        let r = rel(ab.value, ba.value);
        Ok((
            r <= quad.rel_tol && ab.converged && ba.converged,
            format!("I(A,B) = {:.6e}, I(B,A) = {:.6e}", ab.value, ba.value),
        ))
    });

    run(&mut report, "qmi_scale_covariance", || {
        let b = place_right_of(&square, &square, 0.5);
        let s = 3.0;
        let base = mutual_information(&square, &b, &mesh, Route::Scattering, &quad)?;
        let scaled = mutual_information(&square.scaled(s), &b.scaled(s), &mesh, Route::Scattering, &quad)?;
        let r = rel(scaled.value, s * base.value);
        Ok((
            r < 1e-8,
            format!("I(s·A, s·B) / (s·I(A,B)) − 1 = {:.3e}", scaled.value / (s * base.value) - 1.0),
        ))
    });

    run(&mut report, "mesh_convergence", || {
        let a = BodyShape::disc(1.0, [0.0, 0.0]);
        let b = BodyShape::disc(1.0, [20.0, 0.0]);
        let fine = MeshOptions {
            refinement: opts.refinement + 1,
            ..mesh
        };
        let q0 = mutual_information(&a, &b, &mesh, Route::Scattering, &quad)?;
        let q1 = mutual_information(&a, &b, &fine, Route::Scattering, &quad)?;
        let r = rel(q0.value, q1.value);
        Ok((
            r <= 0.03,
            format!(
                "discs d = 20: {:.6e} ({} panels) vs {:.6e} ({} panels), change {:.2}%",
                q0.value,
                q0.mesh_panels[0],
                q1.value,
                q1.mesh_panels[0],
                100.0 * r
            ),
        ))
    });

    run(&mut report, "strong_subadditivity", || {
        let b = place_right_of(&square, &square, 0.5);
        let c = place_right_of(&b, &square, 0.5);
        let sys = BodySystem::from_shapes(&[square.clone(), b, c], &mesh)?;
        let pts = sys.ssa_pointwise(0, 1, 2, &[0.0, 0.01, 0.1, 1.0, 10.0, 100.0])?;
        let pointwise = pts.iter().all(|p| p.holds);
        let i3 = sys.tripartite_information(0, 1, 2, &quad)?;
        let iac = sys.mutual_information(0, 2, Route::Scattering, &quad)?;
        Ok((
            pointwise && i3.value <= iac.value,
            format!("I(A,B,C) = {:.6e} ≤ I(A,C) = {:.6e}", i3.value, iac.value),
        ))
    });

    run(&mut report, "worldline_event_inclusion", || {
        let b = place_right_of(&square, &square, 0.5);
        let c = place_right_of(&b, &square, 0.5);
        let cfg = WorldlineConfig {
            n_loops: 1000,
            n_centers: 16,
            seed: opts.seed,
            ..WorldlineConfig::default()
        };
        let n = dirichlet_ssa_counts(&square, &b, &c, &cfg)?;
        Ok((
            n.holds(),
            format!("n_ABC = {} ≤ n_AC = {} over {} placements", n.n_abc, n.n_ac, n.samples),
        ))
    });

    run(&mut report, "dirichlet_disc_capacitance", || {
        let m = BodyShape::disc(1.0, [0.0, 0.0]).mesh(opts.refinement + 1, Grading::Edge)?;
        let g = assemble_self(&m, 4)?;
        let c = monopole_capacitance(&g, &m.areas, 0.0)?;
        let expect = 2.0 / std::f64::consts::PI;
        let r = rel(c, expect);
        Ok((
            r < 0.01,
            format!("C(0) = {c:.6} vs 2/π = {expect:.6} ({} panels)", m.len()),
        ))
    });

    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_does_not_pass() {
        assert!(!SelfTestReport::default().all_passed());
    }

    #[test]
    fn failures_are_captured() {
        let mut r = SelfTestReport::default();
        run(&mut r, "ok", || Ok((true, String::new())));
        run(&mut r, "err", || crate::error::invalid("boom"));
        assert!(!r.all_passed());
        assert!(r.checks[1].detail.contains("boom"));
    }
}
