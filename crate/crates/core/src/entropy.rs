//! Free-energy differences between bodies, their `λ` integrals (mutual and
//! tripartite information) and the strong-subadditivity check.
//!
//! For a set of panels `Ω` the discrete free energy is
//! `F_Ω(λ) = ½ log det(I + λ⁻¹ D⁻¹ G_ΩΩ)`. Only differences are ever needed;
//! the `λ log det D` terms cancel in them, so everything is written with
//! `K_Ω = λ D_Ω + G_ΩΩ`, which stays well defined at `λ = 0`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{boundary_gap, dist, place_right_of, BodyShape, Grading, Point2, TriangleMesh};
use crate::kernel::{assemble_cross, assemble_self, KernelMatrix};
use crate::quadrature::{integrate_half_line, AdaptiveConfig, CompensatedSum};
use crate::scattering::{factor_spd, PhysicalParams, SystemMatrix};

/// Which formula produced a free-energy difference.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// `½ Σ log(1 − μᵢ)` over the two-body scattering spectrum.
    #[default]
    Scattering,
    /// Difference of block log-determinants.
    Direct,
}

impl Route {
    pub fn as_str(&self) -> &'static str {
        match self {
            Route::Scattering => "scattering",
            Route::Direct => "direct",
        }
    }
}

/// `½ Σ log(1 − μᵢ)`, `μᵢ` the eigenvalues of `K_A⁻¹ G_AB K_B⁻¹ G_BA`.
///
/// The spectrum is obtained symmetrically: with `K = L Lᵀ`,
/// `X = L_A⁻¹ G_AB L_B⁻ᵀ` has `XXᵀ` similar to the operator above.
pub fn delta_f_scattering(
    g_aa: &KernelMatrix,
    g_bb: &KernelMatrix,
    g_ab: &KernelMatrix,
    areas_a: &[f64],
    areas_b: &[f64],
    lambda: f64,
) -> Result<f64> {
    if !g_aa.is_self_block || !g_bb.is_self_block || g_ab.is_self_block {
        return invalid("expected two self blocks and one cross block");
    }
    if g_ab.overlap {
        return invalid("bodies overlap");
    }
    if g_ab.nrows() != g_aa.nrows() || g_ab.ncols() != g_bb.nrows() {
        return invalid("cross block does not match the self blocks");
    }
    let ka = SystemMatrix::new(&g_aa.entries, areas_a, lambda)?;
    let kb = SystemMatrix::new(&g_bb.entries, areas_b, lambda)?;
    scattering_from_factors(&ka, &kb, &g_ab.entries)
}

fn scattering_from_factors(ka: &SystemMatrix, kb: &SystemMatrix, g_ab: &DMatrix<f64>) -> Result<f64> {
    let la = ka.factor().l();
    let lb = kb.factor().l();
    // Y = L_A⁻¹ G_AB, then X = Y L_B⁻ᵀ, i.e. Xᵀ = L_B⁻¹ Yᵀ
    let y = la
        .solve_lower_triangular(g_ab)
        .ok_or_else(|| Error::Assembly("singular factor".into()))?;
    let x = lb
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::Assembly("singular factor".into()))?;
    // x is Xᵀ (n_B × n_A); use the smaller Gram product
    let gram = if x.nrows() >= x.ncols() {
        x.transpose() * &x
    } else {
        &x * x.transpose()
    };
    let mu = gram.symmetric_eigenvalues();
    let mut acc = CompensatedSum::new();
    for &m in mu.iter() {
        if m >= 1.0 {
            return Err(Error::PhysicalInconsistency(format!(
                "scattering eigenvalue {m} ≥ 1; bodies overlap or the kernel is inaccurate"
            )));
        }
        acc.add((-m).ln_1p());
    }
    Ok(0.5 * acc.value())
}

/// `F_{A∪B} − F_A − F_B` from log-determinants of the full kernel over
/// `A ∪ B`, whose first `n_a` panels belong to `A`.
pub fn delta_f_direct(g_full: &KernelMatrix, areas: &[f64], n_a: usize, lambda: f64) -> Result<f64> {
    if !g_full.is_self_block {
        return invalid("direct route needs the full self block over A ∪ B");
    }
    let n = g_full.nrows();
    if n_a == 0 || n_a >= n {
        return invalid(format!("split {n_a} does not leave two non-empty bodies in {n} panels"));
    }
    let all: Vec<usize> = (0..n).collect();
    let ld = |idx: &[usize]| log_det_parts(&g_full.entries, areas, idx, lambda).map(|p| p.0);
    Ok(0.5 * (ld(&all)? - ld(&all[..n_a])? - ld(&all[n_a..])?))
}

/// `log det (λ D + G)` restricted to the given panel indices.
fn log_det_k(g: &DMatrix<f64>, areas: &[f64], idx: &[usize], lambda: f64) -> Result<f64> {
    let (unit, diag) = log_det_parts(g, areas, idx, lambda)?;
    Ok(unit + diag)
}

/// `log det` split as `(log det S K S, Σ ln K_ii)` with `S = diag(K)^{-1/2}`.
/// In alternating sums over subsets where every panel cancels, only the
/// first part survives, and it is free of the large `ln λ` terms.
fn log_det_parts(g: &DMatrix<f64>, areas: &[f64], idx: &[usize], lambda: f64) -> Result<(f64, f64)> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return invalid(format!("λ must be a finite non-negative number, got {lambda}"));
    }
    let diag: Vec<f64> = idx.iter().map(|&i| g[(i, i)] + lambda * areas[i]).collect();
    let scale: Vec<f64> = diag.iter().map(|d| d.sqrt().recip()).collect();
    let k = DMatrix::from_fn(idx.len(), idx.len(), |i, j| {
        if i == j {
            1.0
        } else {
            g[(idx[i], idx[j])] * scale[i] * scale[j]
        }
    });
    let unit = match unit_cholesky_log_det(&k) {
        Some(v) => v,
        None => {
            let condition = match factor_spd(&k) {
                Err(Error::IllConditioned { condition }) => condition,
                _ => f64::INFINITY,
            };
            return Err(Error::Assembly(format!(
                "kernel is not positive definite (condition {condition:e})"
            )));
        }
    };
    let diag = diag.iter().map(|d| d.ln()).collect::<CompensatedSum>().value();
    Ok((unit, diag))
}

/// `log det M` for symmetric `M` with unit diagonal. Each pivot is kept as
/// `1 − d_j`, `d_j = Σ_k L_jk²`, and contributes `ln_1p(−d_j)`, so the
/// result stays relatively accurate when `M` is close to the identity.
/// `None` if `M` is not positive definite.
fn unit_cholesky_log_det(m: &DMatrix<f64>) -> Option<f64> {
    let n = m.nrows();
    let mut l = vec![0.0; n * n];
    let mut pivot = vec![0.0; n];
    let mut sum = CompensatedSum::new();
    for j in 0..n {
        let (done, rest) = l.split_at_mut(j * n);
        let row = &mut rest[..n];
        for k in 0..j {
            let lk = &done[k * n..k * n + k];
            let dot: f64 = row[..k].iter().zip(lk).map(|(a, b)| a * b).sum();
            row[k] = (m[(j, k)] - dot) / pivot[k];
        }
        let d: f64 = row[..j].iter().map(|x| x * x).sum();
        if !(d < 1.0) {
            return None;
        }
        pivot[j] = (1.0 - d).sqrt();
        sum.add((-d).ln_1p());
    }
    Some(sum.value())
}

/// Meshes and kernel blocks for a small collection of disjoint bodies.
#[derive(Clone, Debug)]
pub struct BodySystem {
    pub shapes: Vec<Option<BodyShape>>,
    pub meshes: Vec<TriangleMesh>,
    /// Panel offsets of each body in the stacked ordering, `len = bodies + 1`.
    pub offsets: Vec<usize>,
    /// Full kernel over the union of all bodies.
    pub g: DMatrix<f64>,
    pub areas: Vec<f64>,
    pub quad_order: usize,
}

impl BodySystem {
    /// Assembles all self and cross blocks. Overlapping bodies are rejected.
    pub fn assemble(meshes: Vec<TriangleMesh>, quad_order: usize) -> Result<Self> {
        if meshes.is_empty() {
            return invalid("no bodies");
        }
        let mut offsets = vec![0];
        for m in &meshes {
            offsets.push(offsets.last().unwrap() + m.len());
        }
        let n = *offsets.last().unwrap();
        let mut g = DMatrix::zeros(n, n);
        for (i, mi) in meshes.iter().enumerate() {
            let s = assemble_self(mi, quad_order)?;
            g.view_mut((offsets[i], offsets[i]), (mi.len(), mi.len()))
                .copy_from(&s.entries);
            for (j, mj) in meshes.iter().enumerate().skip(i + 1) {
                let c = assemble_cross(mi, mj, quad_order)?;
                if c.overlap {
                    return invalid(format!("bodies {i} and {j} overlap"));
                }
                g.view_mut((offsets[i], offsets[j]), (mi.len(), mj.len()))
                    .copy_from(&c.entries);
                g.view_mut((offsets[j], offsets[i]), (mj.len(), mi.len()))
                    .copy_from(&c.entries.transpose());
            }
        }
        let areas = meshes.iter().flat_map(|m| m.areas.iter().copied()).collect();
        Ok(Self {
            shapes: vec![None; meshes.len()],
            meshes,
            offsets,
            g,
            areas,
            quad_order,
        })
    }

    /// Moves body `i` rigidly and reassembles its cross blocks. Self blocks
    /// are translation invariant and kept.
    pub fn translate_body(&mut self, i: usize, offset: Point2) -> Result<()> {
        self.check_index(&[i])?;
        self.meshes[i] = self.meshes[i].translate(offset);
        if let Some(s) = &self.shapes[i] {
            self.shapes[i] = Some(s.translated(offset));
        }
        for j in (0..self.bodies()).filter(|&j| j != i) {
            let c = assemble_cross(&self.meshes[i], &self.meshes[j], self.quad_order)?;
            if c.overlap {
                return invalid(format!("bodies {i} and {j} overlap"));
            }
            let (ri, rj) = (self.range(i), self.range(j));
            self.g
                .view_mut((ri.start, rj.start), (ri.len(), rj.len()))
                .copy_from(&c.entries);
            self.g
                .view_mut((rj.start, ri.start), (rj.len(), ri.len()))
                .copy_from(&c.entries.transpose());
        }
        Ok(())
    }

    /// Meshes each shape with the same refinement and grading, then assembles.
    pub fn from_shapes(shapes: &[BodyShape], mesh: &MeshOptions) -> Result<Self> {
        let meshes = shapes
            .iter()
            .map(|s| s.mesh(mesh.refinement, mesh.grading))
            .collect::<Result<Vec<_>>>()?;
        let mut sys = Self::assemble(meshes, mesh.quad_order)?;
        sys.shapes = shapes.iter().cloned().map(Some).collect();
        Ok(sys)
    }

    pub fn bodies(&self) -> usize {
        self.meshes.len()
    }

    fn range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    fn indices(&self, subset: &[usize]) -> Vec<usize> {
        subset.iter().flat_map(|&i| self.range(i)).collect()
    }

    fn areas_of(&self, i: usize) -> &[f64] {
        &self.areas[self.range(i)]
    }

    /// Kernel block between bodies `i` and `j` as a [`KernelMatrix`].
    pub fn block(&self, i: usize, j: usize) -> KernelMatrix {
        let (ri, rj) = (self.range(i), self.range(j));
        KernelMatrix {
            entries: self.g.view((ri.start, rj.start), (ri.len(), rj.len())).into_owned(),
            row_mesh: self.meshes[i].hash(),
            col_mesh: self.meshes[j].hash(),
            is_self_block: i == j,
            overlap: false,
        }
    }

    /// `log det K` over the union of the listed bodies.
    pub fn log_det(&self, subset: &[usize], lambda: f64) -> Result<f64> {
        log_det_k(&self.g, &self.areas, &self.indices(subset), lambda)
    }

    fn unit_log_det(&self, subset: &[usize], lambda: f64) -> Result<f64> {
        Ok(log_det_parts(&self.g, &self.areas, &self.indices(subset), lambda)?.0)
    }

    fn sub_matrix(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.g[(rows[i], cols[j])])
    }

    fn system(&self, idx: &[usize], lambda: f64) -> Result<SystemMatrix> {
        let areas: Vec<f64> = idx.iter().map(|&i| self.areas[i]).collect();
        SystemMatrix::new(&self.sub_matrix(idx, idx), &areas, lambda)
    }

    /// `F_{X∪Y} − F_X − F_Y` for two disjoint groups of bodies, from the
    /// scattering spectrum between the groups.
    pub fn delta_f_groups(&self, x: &[usize], y: &[usize], lambda: f64) -> Result<f64> {
        let all: Vec<usize> = x.iter().chain(y).copied().collect();
        self.check_index(&all)?;
        let (ix, iy) = (self.indices(x), self.indices(y));
        let kx = self.system(&ix, lambda)?;
        let ky = self.system(&iy, lambda)?;
        scattering_from_factors(&kx, &ky, &self.sub_matrix(&ix, &iy))
    }

    /// `ΔF` between two bodies.
    pub fn delta_f(&self, a: usize, b: usize, lambda: f64, route: Route) -> Result<f64> {
        self.check_index(&[a, b])?;
        match route {
            Route::Direct => {
                let ld = |s: &[usize]| self.unit_log_det(s, lambda);
                Ok(0.5 * (ld(&[a, b])? - ld(&[a])? - ld(&[b])?))
            }
            Route::Scattering => self.delta_f_groups(&[a], &[b], lambda),
        }
    }

    /// `Δ₃F = F_ABC − F_AB − F_AC − F_BC + F_A + F_B + F_C`.
    ///
    /// Evaluated as `ΔF(AB|C) − ΔF(A|C) − ΔF(B|C)`, which is the same
    /// combination regrouped into scattering terms. Each term keeps full
    /// relative precision as `λ → ∞`, where the seven log-determinants
    /// cancel to many digits.
    pub fn delta3_f(&self, a: usize, b: usize, c: usize, lambda: f64) -> Result<f64> {
        self.check_index(&[a, b, c])?;
        Ok(self.delta_f_groups(&[a, b], &[c], lambda)?
            - self.delta_f_groups(&[a], &[c], lambda)?
            - self.delta_f_groups(&[b], &[c], lambda)?)
    }

    /// `Δ₃F` from the seven subset log-determinants.
    pub fn delta3_f_direct(&self, a: usize, b: usize, c: usize, lambda: f64) -> Result<f64> {
        self.check_index(&[a, b, c])?;
        let ld = |s: &[usize]| self.unit_log_det(s, lambda);
        Ok(0.5
            * (ld(&[a, b, c])? - ld(&[a, b])? - ld(&[a, c])? - ld(&[b, c])?
                + ld(&[a])?
                + ld(&[b])?
                + ld(&[c])?))
    }

    fn check_index(&self, idx: &[usize]) -> Result<()> {
        for (k, &i) in idx.iter().enumerate() {
            if i >= self.bodies() {
                return invalid(format!("body {i} out of range ({} bodies)", self.bodies()));
            }
            if idx[..k].contains(&i) {
                return invalid(format!("body {i} listed twice"));
            }
        }
        Ok(())
    }

    /// Compactification length: the largest body size `√(area/π)`.
    pub fn length_scale(&self) -> f64 {
        self.meshes
            .iter()
            .map(|m| (m.total_area() / std::f64::consts::PI).sqrt())
            .fold(0.0, f64::max)
    }

    fn panels(&self) -> Vec<usize> {
        self.meshes.iter().map(TriangleMesh::len).collect()
    }

    fn descriptors(&self, idx: &[usize]) -> Vec<String> {
        idx.iter()
            .map(|&i| match &self.shapes[i] {
                Some(s) => s.tag(),
                None => self.meshes[i].shape_tag.clone(),
            })
            .collect()
    }

    fn separation(&self, a: usize, b: usize) -> (f64, f64) {
        match (&self.shapes[a], &self.shapes[b]) {
            (Some(sa), Some(sb)) => (dist(sa.center(), sb.center()), boundary_gap(sa, sb)),
            _ => {
                let c = |m: &TriangleMesh| {
                    let w = m.total_area();
                    let mut p = [0.0, 0.0];
                    for (q, a) in m.centroids.iter().zip(&m.areas) {
                        p[0] += q[0] * a / w;
                        p[1] += q[1] * a / w;
                    }
                    p
                };
                (dist(c(&self.meshes[a]), c(&self.meshes[b])), f64::NAN)
            }
        }
    }

    /// `QMI/ω_c = −2 ∫₀^∞ ΔF_AB(λ) dλ`.
    pub fn mutual_information(
        &self,
        a: usize,
        b: usize,
        route: Route,
        quad: &AdaptiveConfig,
    ) -> Result<QmiResult> {
        self.check_index(&[a, b])?;
        let r = integrate_half_line(|l| self.delta_f(a, b, l, route), self.length_scale(), quad)?;
        let (d, gap) = self.separation(a, b);
        Ok(QmiResult {
            value: -2.0 * r.value,
            abs_error: 2.0 * r.abs_error,
            converged: r.converged,
            evaluations: r.evaluations,
            route,
            d,
            gap,
            mesh_panels: self.panels(),
            mesh_hashes: self.meshes.iter().map(TriangleMesh::hash).collect(),
            bodies: self.descriptors(&[a, b]),
            curve: FreeEnergyCurve::from_samples(r.samples, route, self.descriptors(&[a, b])),
        })
    }

    /// `I(A,B,C)/ω_c = 2 ∫₀^∞ Δ₃F(λ) dλ`.
    pub fn tripartite_information(
        &self,
        a: usize,
        b: usize,
        c: usize,
        quad: &AdaptiveConfig,
    ) -> Result<QmiResult> {
        self.check_index(&[a, b, c])?;
        let r = integrate_half_line(|l| self.delta3_f(a, b, c, l), self.length_scale(), quad)?;
        let (d, gap) = self.separation(a, c);
        Ok(QmiResult {
            value: 2.0 * r.value,
            abs_error: 2.0 * r.abs_error,
            converged: r.converged,
            evaluations: r.evaluations,
            route: Route::Scattering,
            d,
            gap,
            mesh_panels: self.panels(),
            mesh_hashes: self.meshes.iter().map(TriangleMesh::hash).collect(),
            bodies: self.descriptors(&[a, b, c]),
            curve: FreeEnergyCurve::from_samples(
                r.samples,
                Route::Scattering,
                self.descriptors(&[a, b, c]),
            ),
        })
    }

    /// `Δ₃S_th(λ) ≤ ΔS_th(A,C; λ)` at each grid point.
    pub fn ssa_pointwise(&self, a: usize, b: usize, c: usize, lambdas: &[f64]) -> Result<Vec<SsaPoint>> {
        lambdas
            .iter()
            .map(|&l| {
                let d3 = self.delta3_f(a, b, c, l)?;
                let dac = -self.delta_f(a, c, l, Route::Scattering)?;
                Ok(SsaPoint {
                    lambda: l,
                    delta3_s: d3,
                    delta_s_ac: dac,
                    holds: d3 <= dac,
                })
            })
            .collect()
    }
}

/// Meshing and kernel options shared by the drivers. Edge grading is the
/// default: induced charge densities diverge at the body boundaries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshOptions {
    pub refinement: u32,
    #[serde(default = "default_grading")]
    pub grading: Grading,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
}

fn default_grading() -> Grading {
    Grading::Edge
}

fn default_quad_order() -> usize {
    4
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            refinement: 3,
            grading: Grading::Edge,
            quad_order: default_quad_order(),
        }
    }
}

/// `ΔF(λ)` sampled at the quadrature nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyCurve {
    pub lambda_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub route: Route,
    pub bodies: Vec<String>,
}

impl FreeEnergyCurve {
    fn from_samples(samples: Vec<(f64, f64)>, route: Route, bodies: Vec<String>) -> Self {
        let (lambda_grid, values) = samples.into_iter().unzip();
        Self {
            lambda_grid,
            values,
            route,
            bodies,
        }
    }
}

/// Integrated information, in units of `ω_c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QmiResult {
    pub value: f64,
    pub abs_error: f64,
    pub converged: bool,
    pub evaluations: usize,
    pub route: Route,
    /// Centre-to-centre distance of the (outer) pair.
    pub d: f64,
    /// Closest boundary distance of the (outer) pair.
    pub gap: f64,
    pub mesh_panels: Vec<usize>,
    pub mesh_hashes: Vec<String>,
    pub bodies: Vec<String>,
    pub curve: FreeEnergyCurve,
}

impl QmiResult {
    /// Absolute value `ω_c · value`.
    pub fn scaled(&self, params: &PhysicalParams) -> f64 {
        params.omega_c() * self.value
    }
}

/// QMI/ω_c between two placed bodies.
pub fn mutual_information(
    a: &BodyShape,
    b: &BodyShape,
    mesh: &MeshOptions,
    route: Route,
    quad: &AdaptiveConfig,
) -> Result<QmiResult> {
    BodySystem::from_shapes(&[a.clone(), b.clone()], mesh)?.mutual_information(0, 1, route, quad)
}

/// Tripartite information `I(A,B,C)/ω_c`.
pub fn tripartite_information(
    a: &BodyShape,
    b: &BodyShape,
    c: &BodyShape,
    mesh: &MeshOptions,
    quad: &AdaptiveConfig,
) -> Result<QmiResult> {
    BodySystem::from_shapes(&[a.clone(), b.clone(), c.clone()], mesh)?
        .tripartite_information(0, 1, 2, quad)
}

/// QMI of `b` placed at each gap to the right of `a`. Self blocks are
/// assembled once; each point only reassembles the cross block. Failures are
/// reported per point.
pub fn qmi_gap_sweep(
    a: &BodyShape,
    b: &BodyShape,
    gaps: &[f64],
    mesh: &MeshOptions,
    route: Route,
    quad: &AdaptiveConfig,
) -> Result<Vec<Result<QmiResult>>> {
    if gaps.is_empty() {
        return invalid("empty gap list");
    }
    if let Some(g) = gaps.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return invalid(format!("gaps must be positive, got {g}"));
    }
    let first = place_right_of(a, b, gaps[0]);
    let mut sys = BodySystem::from_shapes(&[a.clone(), first.clone()], mesh)?;
    let mut at = first;
    let mut out = Vec::with_capacity(gaps.len());
    for &gap in gaps {
        let target = place_right_of(a, b, gap);
        let (c0, c1) = (at.center(), target.center());
        let offset = [c1[0] - c0[0], c1[1] - c0[1]];
        if offset != [0.0, 0.0] {
            if let Err(e) = sys.translate_body(1, offset) {
                out.push(Err(e));
                continue;
            }
            at = target;
        }
        out.push(sys.mutual_information(0, 1, route, quad));
    }
    Ok(out)
}

/// One row of the pointwise subadditivity table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsaPoint {
    pub lambda: f64,
    pub delta3_s: f64,
    pub delta_s_ac: f64,
    pub holds: bool,
}

/// Pointwise strong subadditivity for three placed bodies.
pub fn ssa_pointwise_check(
    a: &BodyShape,
    b: &BodyShape,
    c: &BodyShape,
    mesh: &MeshOptions,
    lambdas: &[f64],
) -> Result<Vec<SsaPoint>> {
    BodySystem::from_shapes(&[a.clone(), b.clone(), c.clone()], mesh)?.ssa_pointwise(0, 1, 2, lambdas)
}

/// `1 − x − y − z + xy + yz + xz − xyz ≤ 1 − x − z + xz`, the scalar
/// inequality behind pointwise subadditivity of the intersection weights.
pub fn ssa_lemma_holds(x: f64, y: f64, z: f64) -> bool {
    let lhs = 1.0 - x - y - z + x * y + y * z + x * z - x * y * z;
    let rhs = 1.0 - x - z + x * z;
    // the difference is (x − 1) y (z − 1) ≥ 0; allow for rounding
    lhs <= rhs + 8.0 * f64::EPSILON
}

/// Least-squares line with its coefficient of determination.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return invalid("need at least two (x, y) pairs");
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 0.0 {
        return invalid("abscissae are all equal");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        points: xs.len(),
    })
}

/// Fit of `QMI/ω_c = intercept + slope · ln(R/d)` over the points with
/// `d/R ≤ 0.2`; at least four are required.
pub fn fit_short_distance_law(sweep: &[(f64, f64)], r: f64) -> Result<LinearFit> {
    let pts: Vec<_> = sweep.iter().filter(|(d, _)| *d > 0.0 && d / r <= 0.2).collect();
    if pts.len() < 4 {
        return invalid(format!(
            "short-distance fit needs at least 4 points with d/R ≤ 0.2, got {}",
            pts.len()
        ));
    }
    fit_log_law(&pts.into_iter().copied().collect::<Vec<_>>(), r)
}

/// Fit of `y = intercept + slope · ln(R/d)` over all points.
pub fn fit_log_law(sweep: &[(f64, f64)], r: f64) -> Result<LinearFit> {
    let xs: Vec<f64> = sweep.iter().map(|(d, _)| (r / d).ln()).collect();
    let ys: Vec<f64> = sweep.iter().map(|p| p.1).collect();
    linear_fit(&xs, &ys)
}

/// Fit of `ln y = intercept + slope · ln d`; the slope is the exponent.
pub fn fit_power_law(sweep: &[(f64, f64)]) -> Result<LinearFit> {
    if sweep.iter().any(|&(d, y)| !(d > 0.0 && y > 0.0)) {
        return invalid("power-law fit needs positive d and values");
    }
    let xs: Vec<f64> = sweep.iter().map(|(d, _)| d.ln()).collect();
    let ys: Vec<f64> = sweep.iter().map(|(_, y)| y.ln()).collect();
    linear_fit(&xs, &ys)
}

/// Induced charge `aᵀ K⁻¹ a` of one body of a system.
pub fn induced_charge(sys: &BodySystem, i: usize, lambda: f64) -> Result<f64> {
    let k = SystemMatrix::new(&sys.block(i, i).entries, sys.areas_of(i), lambda)?;
    let a = DVector::from_column_slice(sys.areas_of(i));
    Ok(a.dot(&k.solve(&a)))
}
