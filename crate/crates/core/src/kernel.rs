//! Galerkin matrices of the Coulomb kernel `G₀(x, x') = 1/(4π|x − x'|)` for
//! piecewise-constant (indicator) basis functions on triangle panels.
//!
//! Entry `(m, n)` is `∫_{T_m} ∫_{T_n} G₀ dx dx'`. Three regimes:
//!
//! * coincident panels: closed-form self integral of `1/r` over a triangle;
//! * touching or close panels (gap below twice the panel diameter): the
//!   inner integral is the exact potential of a uniformly charged triangle,
//!   the outer integral a tensor rule graded toward the outer panel's edges;
//! * separated panels: product rules on both panels, with the degree raised
//!   automatically until the multipole truncation estimate drops below
//!   [`FAR_FIELD_TARGET`].
//!
//! Every entry is computed with the two panels in a canonical order, so
//! `G(A, B)` and `G(B, A)ᵀ` agree bit for bit.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::geometry::{dist, Point2, Triangle, TriangleMesh};
use crate::quadrature::{gauss_legendre, CompensatedSum, TriangleRule};

/// Relative truncation target for separated panel pairs.
pub const FAR_FIELD_TARGET: f64 = 1e-10;

/// Panels closer than this many diameters use the singular path.
pub const NEAR_FACTOR: f64 = 2.0;

/// Gauss points per direction of the graded outer rule for close pairs.
const NEAR_POINTS: usize = 16;

/// Highest two-sided product-rule degree before switching to the
/// semi-analytic path.
const MAX_PRODUCT_DEGREE: usize = 8;

const MAX_OUTER_DEGREE: usize = 24;

/// Potential `∫_T dA' / |p − x'|` of a unit-density triangle at an in-plane
/// point `p` (no `1/4π`).
///
/// Each edge contributes `d · [asinh(ℓ₊/|d|) − asinh(ℓ₋/|d|)]` with `d` the
/// signed distance from `p` to the edge line (positive on the interior side)
/// and `ℓ±` the edge end points' coordinates along the edge, measured from
/// the foot of the perpendicular.
pub fn triangle_potential(p: Point2, tri: &Triangle) -> f64 {
    let sign = tri.signed_area().signum();
    let mut acc = 0.0;
    for i in 0..3 {
        let a = tri.vertices[i];
        let b = tri.vertices[(i + 1) % 3];
        let ex = b[0] - a[0];
        let ey = b[1] - a[1];
        let len = ex.hypot(ey);
        let (tx, ty) = (ex / len, ey / len);
        // outward normal of a counter-clockwise triangle
        let (nx, ny) = (ty * sign, -tx * sign);
        let d = (a[0] - p[0]) * nx + (a[1] - p[1]) * ny;
        if d.abs() <= 1e-15 * len {
            continue;
        }
        let lm = (a[0] - p[0]) * tx + (a[1] - p[1]) * ty;
        let lp = (b[0] - p[0]) * tx + (b[1] - p[1]) * ty;
        let ad = d.abs();
        acc += d * ((lp / ad).asinh() - (lm / ad).asinh());
    }
    acc
}

/// Closed-form `∫_T ∫_T dx dx' / |x − x'|` over a single triangle with side
/// lengths `a, b, c` and area `A`:
/// `(4A²/3) Σ_cyc (1/a) ln[((a + b)² − c²) / (b² − (a − c)²)]`.
pub fn coincident_integral(tri: &Triangle) -> f64 {
    let [p, q, r] = tri.vertices;
    let a = dist(p, q);
    let b = dist(q, r);
    let c = dist(r, p);
    let area = tri.area();
    let term = |a: f64, b: f64, c: f64| ((a + b).powi(2) - c * c).ln() / a - (b * b - (a - c).powi(2)).ln() / a;
    4.0 * area * area / 3.0 * (term(a, b, c) + term(b, c, a) + term(c, a, b))
}

fn check_panel(t: &Triangle) -> Result<()> {
    let d = t.diameter();
    if !(t.area() > 1e-14 * d * d) || !d.is_finite() {
        return invalid(format!("degenerate panel {:?}", t.vertices));
    }
    Ok(())
}

fn lex_cmp(a: &Triangle, b: &Triangle) -> Ordering {
    for (p, q) in a.vertices.iter().zip(&b.vertices) {
        for k in 0..2 {
            match p[k].total_cmp(&q[k]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
    }
    Ordering::Equal
}

/// Which integration path a panel pair takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairRegime {
    Coincident,
    Near,
    /// Semi-analytic with a fixed outer rule of the given degree.
    Intermediate(usize),
    /// Product rule of the given degree on both panels.
    Far(usize),
}

fn degree_for(ratio: f64, min_degree: usize) -> usize {
    if ratio <= 0.0 {
        return min_degree;
    }
    // smallest p with ratio^(p+1) ≤ target
    let p = (FAR_FIELD_TARGET.ln() / ratio.ln()).ceil() as usize;
    p.saturating_sub(1).max(min_degree)
}

/// Integration path for the (canonically ordered) pair.
pub fn classify(m: &Triangle, n: &Triangle, quad_order: usize) -> PairRegime {
    if m.same_as(n) {
        return PairRegime::Coincident;
    }
    let centre_dist = dist(m.centroid(), n.centroid());
    let (rm, rn) = (m.circumradius_about_centroid(), n.circumradius_about_centroid());
    let h = m.diameter().max(n.diameter());
    if centre_dist - rm - rn < NEAR_FACTOR * h {
        return PairRegime::Near;
    }
    let two_sided = degree_for((rm + rn) / centre_dist, quad_order.max(1));
    if two_sided <= MAX_PRODUCT_DEGREE.max(quad_order) {
        PairRegime::Far(two_sided)
    } else {
        let outer = degree_for(rm / (centre_dist - rn), quad_order.max(1));
        PairRegime::Intermediate(outer.min(MAX_OUTER_DEGREE))
    }
}

/// Outer integral of the exact inner potential over `outer`, using a tensor
/// Gauss rule on the three centroid sub-triangles, graded toward the outer
/// panel's edges and vertices where the potential's gradient is singular.
fn graded_outer(outer: &Triangle, inner: &Triangle, nodes: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (x, w) = nodes;
    let g = outer.centroid();
    let mut acc = CompensatedSum::new();
    for k in 0..3 {
        let e0 = outer.vertices[k];
        let e1 = outer.vertices[(k + 1) % 3];
        let sub_area = 0.5
            * ((e0[0] - g[0]) * (e1[1] - g[1]) - (e1[0] - g[0]) * (e0[1] - g[1])).abs();
        for (xi, wi) in x.iter().zip(w) {
            let s = 0.5 * (xi + 1.0);
            // radial coordinate, cubic grading toward the edge
            let r = 1.0 - (1.0 - s).powi(3);
            let dr = 3.0 * (1.0 - s).powi(2);
            for (xj, wj) in x.iter().zip(w) {
                let t = 0.5 * (xj + 1.0);
                // smoothstep grading toward both vertices
                let sig = t * t * (3.0 - 2.0 * t);
                let dsig = 6.0 * t * (1.0 - t);
                let p = [
                    g[0] + r * (e0[0] + sig * (e1[0] - e0[0]) - g[0]),
                    g[1] + r * (e0[1] + sig * (e1[1] - e0[1]) - g[1]),
                ];
                let jac = 0.25 * wi * wj * dr * dsig * r * 2.0 * sub_area;
                acc.add(jac * triangle_potential(p, inner));
            }
        }
    }
    acc.value()
}

fn fixed_outer(outer: &Triangle, inner: &Triangle, degree: usize) -> f64 {
    TriangleRule::with_degree(degree)
        .on(outer)
        .map(|(p, w)| w * triangle_potential(p, inner))
        .collect::<CompensatedSum>()
        .value()
}

fn product_rule(m: &Triangle, n: &Triangle, degree: usize) -> f64 {
    let rule = TriangleRule::with_degree(degree);
    let pn: Vec<(Point2, f64)> = rule.on(n).collect();
    let mut acc = CompensatedSum::new();
    for (x, wx) in rule.on(m) {
        let mut row = 0.0;
        for &(y, wy) in &pn {
            row += wy / dist(x, y);
        }
        acc.add(wx * row);
    }
    acc.value()
}

struct Integrator {
    quad_order: usize,
    near_nodes: (Vec<f64>, Vec<f64>),
}

impl Integrator {
    fn new(quad_order: usize) -> Self {
        Self {
            quad_order,
            near_nodes: gauss_legendre(NEAR_POINTS),
        }
    }

    /// `∫∫ 1/|x − x'|` for a canonically ordered pair (no `1/4π`).
    fn raw(&self, m: &Triangle, n: &Triangle) -> f64 {
        match classify(m, n, self.quad_order) {
            PairRegime::Coincident => coincident_integral(m),
            PairRegime::Near => graded_outer(m, n, &self.near_nodes),
            PairRegime::Intermediate(p) => fixed_outer(m, n, p),
            PairRegime::Far(p) => product_rule(m, n, p),
        }
    }

    fn entry(&self, m: &Triangle, n: &Triangle) -> f64 {
        let v = if lex_cmp(m, n) == Ordering::Greater {
            self.raw(n, m)
        } else {
            self.raw(m, n)
        };
        v / (4.0 * PI)
    }
}

/// `∫_{T_m} ∫_{T_n} dx dx' / (4π|x − x'|)`, finite for coincident and
/// touching panels. `quad_order` is the minimum polynomial degree of the
/// product rule used for separated pairs.
pub fn coulomb_entry(panel_m: &Triangle, panel_n: &Triangle, quad_order: usize) -> Result<f64> {
    if quad_order == 0 {
        return invalid("quadrature order must be at least 1");
    }
    check_panel(panel_m)?;
    check_panel(panel_n)?;
    Ok(Integrator::new(quad_order).entry(panel_m, panel_n))
}

/// Dense Galerkin matrix of the Coulomb kernel.
#[derive(Clone, Debug)]
pub struct KernelMatrix {
    pub entries: DMatrix<f64>,
    /// Hash of the row mesh ([`TriangleMesh::hash`]).
    pub row_mesh: String,
    pub col_mesh: String,
    pub is_self_block: bool,
    /// Set when some pair of panels from the two meshes overlaps.
    pub overlap: bool,
}

impl KernelMatrix {
    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    /// Largest `|G − Gᵀ|` entry.
    pub fn asymmetry(&self) -> f64 {
        if self.nrows() != self.ncols() {
            return f64::INFINITY;
        }
        (&self.entries - self.entries.transpose()).amax()
    }

    /// Smallest eigenvalue of the symmetric part.
    pub fn min_eigenvalue(&self) -> f64 {
        let sym = 0.5 * (&self.entries + self.entries.transpose());
        sym.symmetric_eigenvalues().min()
    }
}

fn check_mesh(mesh: &TriangleMesh) -> Result<()> {
    if mesh.is_empty() {
        return invalid("empty mesh");
    }
    mesh.panels.iter().try_for_each(check_panel)
}

/// `N × N` self block of a mesh. Only the upper triangle is integrated.
pub fn assemble_self(mesh: &TriangleMesh, quad_order: usize) -> Result<KernelMatrix> {
    if quad_order == 0 {
        return invalid("quadrature order must be at least 1");
    }
    check_mesh(mesh)?;
    let integ = Integrator::new(quad_order);
    let n = mesh.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| integ.entry(&mesh.panels[i], &mesh.panels[j]))
                .collect()
        })
        .collect();
    let mut g = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            g[(i, i + k)] = v;
            g[(i + k, i)] = v;
        }
    }
    let hash = mesh.hash();
    Ok(KernelMatrix {
        entries: g,
        row_mesh: hash.clone(),
        col_mesh: hash,
        is_self_block: true,
        overlap: false,
    })
}

/// `N_A × N_B` interaction block between two meshes.
pub fn assemble_cross(
    mesh_a: &TriangleMesh,
    mesh_b: &TriangleMesh,
    quad_order: usize,
) -> Result<KernelMatrix> {
    if quad_order == 0 {
        return invalid("quadrature order must be at least 1");
    }
    check_mesh(mesh_a)?;
    check_mesh(mesh_b)?;
    let integ = Integrator::new(quad_order);
    let (na, nb) = (mesh_a.len(), mesh_b.len());
    let rows: Vec<(Vec<f64>, bool)> = (0..na)
        .into_par_iter()
        .map(|i| {
            let tm = &mesh_a.panels[i];
            let mut overlap = false;
            let row = mesh_b
                .panels
                .iter()
                .map(|tn| {
                    if matches!(classify(tm, tn, quad_order), PairRegime::Near | PairRegime::Coincident) {
                        overlap |= triangles_overlap(tm, tn);
                    }
                    integ.entry(tm, tn)
                })
                .collect();
            (row, overlap)
        })
        .collect();
    let mut g = DMatrix::zeros(na, nb);
    let mut overlap = false;
    for (i, (row, ov)) in rows.into_iter().enumerate() {
        overlap |= ov;
        for (j, v) in row.into_iter().enumerate() {
            g[(i, j)] = v;
        }
    }
    Ok(KernelMatrix {
        entries: g,
        row_mesh: mesh_a.hash(),
        col_mesh: mesh_b.hash(),
        is_self_block: false,
        overlap,
    })
}

/// Interiors intersect (touching along an edge or at a vertex does not count).
pub fn triangles_overlap(a: &Triangle, b: &Triangle) -> bool {
    let scale = a.diameter().max(b.diameter());
    let eps = 1e-12 * scale;
    for t in [a, b] {
        for i in 0..3 {
            let p = t.vertices[i];
            let q = t.vertices[(i + 1) % 3];
            let axis = [q[1] - p[1], p[0] - q[0]];
            let norm = axis[0].hypot(axis[1]);
            let proj = |v: &Point2| (v[0] * axis[0] + v[1] * axis[1]) / norm;
            let (amin, amax) = minmax(a.vertices.iter().map(proj));
            let (bmin, bmax) = minmax(b.vertices.iter().map(proj));
            if amax <= bmin + eps || bmax <= amin + eps {
                return false;
            }
        }
    }
    true
}

fn minmax(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}
