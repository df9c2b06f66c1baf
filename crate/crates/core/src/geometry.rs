//! Planar regions in the plane `x₃ = 0` and their triangulations.
//!
//! Meshes are deterministic: discs use concentric rings of triangles,
//! rectangles a structured grid, polygons ear clipping followed by midpoint
//! subdivision. Disc meshes are inscribed, so their area approaches `πR²`
//! from below.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};

pub type Point2 = [f64; 2];

/// A flat triangle in the plane, vertices counter-clockwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triangle {
    pub vertices: [Point2; 3],
}

impl Triangle {
    pub fn new(a: Point2, b: Point2, c: Point2) -> Self {
        Self { vertices: [a, b, c] }
    }

    /// Signed area, positive for counter-clockwise orientation.
    pub fn signed_area(&self) -> f64 {
        let [a, b, c] = self.vertices;
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Point2 {
        let [a, b, c] = self.vertices;
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Longest edge length.
    pub fn diameter(&self) -> f64 {
        let [a, b, c] = self.vertices;
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    /// Largest distance from the centroid to a vertex.
    pub fn circumradius_about_centroid(&self) -> f64 {
        let g = self.centroid();
        self.vertices
            .iter()
            .map(|&v| dist(g, v))
            .fold(0.0, f64::max)
    }

    /// Point at barycentric coordinates `(1 − u − v, u, v)`.
    pub fn point_at(&self, u: f64, v: f64) -> Point2 {
        let [a, b, c] = self.vertices;
        [
            a[0] + u * (b[0] - a[0]) + v * (c[0] - a[0]),
            a[1] + u * (b[1] - a[1]) + v * (c[1] - a[1]),
        ]
    }

    /// Closed-triangle membership test with a relative tolerance on the
    /// barycentric coordinates.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        let [a, b, c] = self.vertices;
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let u = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
        let v = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
        u >= -tol && v >= -tol && u + v <= 1.0 + tol
    }

    /// Midpoint subdivision into four congruent children.
    pub fn split4(&self) -> [Triangle; 4] {
        let [a, b, c] = self.vertices;
        let ab = mid(a, b);
        let bc = mid(b, c);
        let ca = mid(c, a);
        [
            Triangle::new(a, ab, ca),
            Triangle::new(ab, b, bc),
            Triangle::new(ca, bc, c),
            Triangle::new(ab, bc, ca),
        ]
    }

    pub fn translated(&self, offset: Point2) -> Self {
        let mut t = *self;
        for v in &mut t.vertices {
            v[0] += offset[0];
            v[1] += offset[1];
        }
        t
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut t = *self;
        for v in &mut t.vertices {
            v[0] *= factor;
            v[1] *= factor;
        }
        t
    }

    /// True when both triangles have the same vertex set.
    pub fn same_as(&self, other: &Triangle) -> bool {
        self.vertices
            .iter()
            .all(|v| other.vertices.iter().any(|w| v == w))
    }
}

pub fn dist(a: Point2, b: Point2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn mid(a: Point2, b: Point2) -> Point2 {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// How grid lines are spaced inside a body.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grading {
    /// Equal spacing.
    #[default]
    Uniform,
    /// Cosine spacing that clusters panels at the boundary, where the
    /// induced charge density has its inverse-square-root edge singularity.
    Edge,
}

/// A planar body.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BodyShape {
    Disc {
        radius: f64,
        #[serde(default)]
        center: Point2,
    },
    Rectangle {
        width: f64,
        height: f64,
        #[serde(default)]
        center: Point2,
    },
    /// Simple polygon, counter-clockwise.
    Polygon { vertices: Vec<Point2> },
}

impl BodyShape {
    pub fn disc(radius: f64, center: Point2) -> Self {
        BodyShape::Disc { radius, center }
    }

    pub fn rectangle(width: f64, height: f64, center: Point2) -> Self {
        BodyShape::Rectangle {
            width,
            height,
            center,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BodyShape::Disc { radius, center } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return invalid(format!("disc radius must be positive, got {radius}"));
                }
                check_point(*center)
            }
            BodyShape::Rectangle {
                width,
                height,
                center,
            } => {
                if !(*width > 0.0 && *height > 0.0 && width.is_finite() && height.is_finite()) {
                    return invalid(format!(
                        "rectangle dimensions must be positive, got {width}×{height}"
                    ));
                }
                check_point(*center)
            }
            BodyShape::Polygon { vertices } => validate_polygon(vertices),
        }
    }

    /// Exact area of the region.
    pub fn area(&self) -> f64 {
        match self {
            BodyShape::Disc { radius, .. } => PI * radius * radius,
            BodyShape::Rectangle { width, height, .. } => width * height,
            BodyShape::Polygon { vertices } => polygon_signed_area(vertices),
        }
    }

    /// Area centroid.
    pub fn center(&self) -> Point2 {
        match self {
            BodyShape::Disc { center, .. } | BodyShape::Rectangle { center, .. } => *center,
            BodyShape::Polygon { vertices } => {
                let a = polygon_signed_area(vertices);
                let (mut cx, mut cy) = (0.0, 0.0);
                for i in 0..vertices.len() {
                    let p = vertices[i];
                    let q = vertices[(i + 1) % vertices.len()];
                    let cross = p[0] * q[1] - q[0] * p[1];
                    cx += (p[0] + q[0]) * cross;
                    cy += (p[1] + q[1]) * cross;
                }
                [cx / (6.0 * a), cy / (6.0 * a)]
            }
        }
    }

    /// Axis-aligned bounding box `([xmin, ymin], [xmax, ymax])`.
    pub fn bounding_box(&self) -> (Point2, Point2) {
        match self {
            BodyShape::Disc { radius, center } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            BodyShape::Rectangle {
                width,
                height,
                center,
            } => (
                [center[0] - width / 2.0, center[1] - height / 2.0],
                [center[0] + width / 2.0, center[1] + height / 2.0],
            ),
            BodyShape::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Characteristic size: radius of the disc with the same area.
    pub fn size(&self) -> f64 {
        (self.area() / PI).sqrt()
    }

    pub fn contains(&self, p: Point2) -> bool {
        match self {
            BodyShape::Disc { radius, center } => dist(p, *center) <= *radius,
            BodyShape::Rectangle {
                width,
                height,
                center,
            } => {
                (p[0] - center[0]).abs() <= width / 2.0 && (p[1] - center[1]).abs() <= height / 2.0
            }
            BodyShape::Polygon { vertices } => point_in_polygon(p, vertices),
        }
    }

    pub fn translated(&self, offset: Point2) -> Self {
        let shift = |c: &Point2| [c[0] + offset[0], c[1] + offset[1]];
        match self {
            BodyShape::Disc { radius, center } => BodyShape::Disc {
                radius: *radius,
                center: shift(center),
            },
            BodyShape::Rectangle {
                width,
                height,
                center,
            } => BodyShape::Rectangle {
                width: *width,
                height: *height,
                center: shift(center),
            },
            BodyShape::Polygon { vertices } => BodyShape::Polygon {
                vertices: vertices.iter().map(shift).collect(),
            },
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let sc = |c: &Point2| [c[0] * factor, c[1] * factor];
        match self {
            BodyShape::Disc { radius, center } => BodyShape::Disc {
                radius: radius * factor,
                center: sc(center),
            },
            BodyShape::Rectangle {
                width,
                height,
                center,
            } => BodyShape::Rectangle {
                width: width * factor,
                height: height * factor,
                center: sc(center),
            },
            BodyShape::Polygon { vertices } => BodyShape::Polygon {
                vertices: vertices.iter().map(sc).collect(),
            },
        }
    }

    /// Short provenance string stored in mesh metadata.
    pub fn tag(&self) -> String {
        match self {
            BodyShape::Disc { radius, center } => {
                format!("disc(r={radius},c=({},{}))", center[0], center[1])
            }
            BodyShape::Rectangle {
                width,
                height,
                center,
            } => format!("rect({width}x{height},c=({},{}))", center[0], center[1]),
            BodyShape::Polygon { vertices } => format!("polygon({} vertices)", vertices.len()),
        }
    }

    /// Triangulates the body. `refinement` maps to `2^refinement` rings for
    /// discs, `2^refinement` cells per side for rectangles and `refinement`
    /// midpoint subdivisions for polygons.
    pub fn mesh(&self, refinement: u32, grading: Grading) -> Result<TriangleMesh> {
        self.validate()?;
        let mut mesh = match self {
            BodyShape::Disc { radius, center } => {
                mesh_disc_graded(*radius, refinement, grading)?.translate(*center)
            }
            BodyShape::Rectangle {
                width,
                height,
                center,
            } => {
                let n = 1usize << refinement;
                let mut m = mesh_rectangle_graded(*width, *height, n, n, grading)?;
                m.refinement_level = refinement;
                m.translate(*center)
            }
            BodyShape::Polygon { vertices } => mesh_polygon(vertices, refinement)?,
        };
        mesh.shape_tag = self.tag();
        Ok(mesh)
    }
}

fn check_point(p: Point2) -> Result<()> {
    if p.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        invalid("non-finite coordinate")
    }
}

fn polygon_signed_area(v: &[Point2]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let p = v[i];
            let q = v[(i + 1) % n];
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

fn point_in_polygon(p: Point2, v: &[Point2]) -> bool {
    let mut inside = false;
    let n = v.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

fn segments_cross(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0)) && d1 != 0.0 && d3 != 0.0
}

fn validate_polygon(v: &[Point2]) -> Result<()> {
    if v.len() < 3 {
        return invalid("polygon needs at least 3 vertices");
    }
    for &p in v {
        check_point(p)?;
    }
    if polygon_signed_area(v) <= 0.0 {
        return invalid("polygon must be counter-clockwise with positive area");
    }
    let n = v.len();
    for i in 0..n {
        for j in (i + 1)..n {
            // adjacent edges share a vertex
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return invalid(format!("polygon edges {i} and {j} intersect"));
            }
        }
    }
    Ok(())
}

/// A triangulated planar region.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    pub panels: Vec<Triangle>,
    pub areas: Vec<f64>,
    pub centroids: Vec<Point2>,
    pub shape_tag: String,
    pub refinement_level: u32,
}

impl TriangleMesh {
    pub fn from_panels(panels: Vec<Triangle>, shape_tag: String, refinement_level: u32) -> Result<Self> {
        let mut areas = Vec::with_capacity(panels.len());
        for (i, t) in panels.iter().enumerate() {
            let a = t.signed_area();
            if !(a > 0.0) {
                return invalid(format!("panel {i} is degenerate or clockwise (area {a:e})"));
            }
            areas.push(a);
        }
        let centroids = panels.iter().map(Triangle::centroid).collect();
        Ok(Self {
            panels,
            areas,
            centroids,
            shape_tag,
            refinement_level,
        })
    }

    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Rigid shift of every vertex.
    pub fn translate(&self, offset: Point2) -> Self {
        let panels: Vec<_> = self.panels.iter().map(|t| t.translated(offset)).collect();
        Self {
            centroids: panels.iter().map(Triangle::centroid).collect(),
            panels,
            areas: self.areas.clone(),
            shape_tag: self.shape_tag.clone(),
            refinement_level: self.refinement_level,
        }
    }

    /// Dilation about the origin.
    pub fn scale(&self, factor: f64) -> Self {
        let panels: Vec<_> = self.panels.iter().map(|t| t.scaled(factor)).collect();
        Self {
            centroids: panels.iter().map(Triangle::centroid).collect(),
            areas: panels.iter().map(Triangle::area).collect(),
            panels,
            shape_tag: self.shape_tag.clone(),
            refinement_level: self.refinement_level,
        }
    }

    /// Concatenates panels of several meshes (used for unions of bodies).
    pub fn union(meshes: &[&TriangleMesh]) -> Self {
        let mut out = TriangleMesh {
            panels: Vec::new(),
            areas: Vec::new(),
            centroids: Vec::new(),
            shape_tag: meshes
                .iter()
                .map(|m| m.shape_tag.as_str())
                .collect::<Vec<_>>()
                .join("+"),
            refinement_level: meshes.iter().map(|m| m.refinement_level).max().unwrap_or(0),
        };
        for m in meshes {
            out.panels.extend_from_slice(&m.panels);
            out.areas.extend_from_slice(&m.areas);
            out.centroids.extend_from_slice(&m.centroids);
        }
        out
    }

    /// `([xmin, ymin], [xmax, ymax])` over all vertices.
    pub fn bounding_box(&self) -> (Point2, Point2) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for t in &self.panels {
            for v in &t.vertices {
                for k in 0..2 {
                    lo[k] = lo[k].min(v[k]);
                    hi[k] = hi[k].max(v[k]);
                }
            }
        }
        (lo, hi)
    }

    pub fn max_diameter(&self) -> f64 {
        self.panels.iter().map(Triangle::diameter).fold(0.0, f64::max)
    }

    /// SHA-256 of the vertex coordinates, hex encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.panels {
            for v in &t.vertices {
                h.update(v[0].to_le_bytes());
                h.update(v[1].to_le_bytes());
            }
        }
        h.finalize().iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// Plain-text dump: one triangle per line, `x0 y0 x1 y1 x2 y2`.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# {} panels, shape {}, refinement {}\n",
            self.len(),
            self.shape_tag,
            self.refinement_level
        );
        for t in &self.panels {
            let [a, b, c] = t.vertices;
            let _ = writeln!(
                s,
                "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
                a[0], a[1], b[0], b[1], c[0], c[1]
            );
        }
        s
    }
}

/// Mesh of a disc of the given radius centred at the origin, uniform rings.
pub fn mesh_disc(radius: f64, refinement: u32) -> Result<TriangleMesh> {
    mesh_disc_graded(radius, refinement, Grading::Uniform)
}

/// Ring mesh of a disc: `n = 2^refinement` rings, ring `j` carrying `10j`
/// vertices on its outer circle, `10n²` triangles in total.
pub fn mesh_disc_graded(radius: f64, refinement: u32, grading: Grading) -> Result<TriangleMesh> {
    if !(radius > 0.0 && radius.is_finite()) {
        return invalid(format!("disc radius must be positive, got {radius}"));
    }
    if refinement > 12 {
        return invalid("disc refinement above 12 is not supported");
    }
    let n = 1usize << refinement;
    let ring_radius = |j: usize| -> f64 {
        let s = j as f64 / n as f64;
        match grading {
            Grading::Uniform => radius * s,
            Grading::Edge => radius * (0.5 * PI * s).sin(),
        }
    };
    let circle = |j: usize| -> Vec<Point2> {
        let count = 10 * j;
        let r = if j == n { radius } else { ring_radius(j) };
        (0..count)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / count as f64;
                [r * th.cos(), r * th.sin()]
            })
            .collect()
    };

    let mut panels = Vec::with_capacity(10 * n * n);
    let center = [0.0, 0.0];
    let mut inner = circle(1);
    for i in 0..inner.len() {
        panels.push(Triangle::new(center, inner[i], inner[(i + 1) % inner.len()]));
    }
    for j in 2..=n {
        let outer = circle(j);
        let (si, so) = (inner.len(), outer.len());
        let (mut a, mut b) = (0usize, 0usize);
        while a < si || b < so {
            // angular position of the next vertex on each circle, in units of a full turn
            let next_in = (a + 1) as f64 / si as f64;
            let next_out = (b + 1) as f64 / so as f64;
            if a >= si || (b < so && next_out <= next_in) {
                panels.push(Triangle::new(inner[a % si], outer[b], outer[(b + 1) % so]));
                b += 1;
            } else {
                panels.push(Triangle::new(inner[a], outer[b % so], inner[(a + 1) % si]));
                a += 1;
            }
        }
        inner = outer;
    }
    TriangleMesh::from_panels(panels, format!("disc(r={radius})"), refinement)
}

/// Uniform `n_per_side × n_per_side` grid, each cell split into two triangles,
/// centred at the origin.
pub fn mesh_rectangle(width: f64, height: f64, n_per_side: usize) -> Result<TriangleMesh> {
    mesh_rectangle_graded(width, height, n_per_side, n_per_side, Grading::Uniform)
}

/// Structured `nx × ny` grid centred at the origin.
pub fn mesh_rectangle_graded(
    width: f64,
    height: f64,
    nx: usize,
    ny: usize,
    grading: Grading,
) -> Result<TriangleMesh> {
    if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
        return invalid(format!("rectangle dimensions must be positive, got {width}×{height}"));
    }
    if nx == 0 || ny == 0 {
        return invalid("rectangle needs at least one cell per side");
    }
    let lines = |len: f64, n: usize| -> Vec<f64> {
        (0..=n)
            .map(|i| {
                let s = i as f64 / n as f64;
                let u = match grading {
                    Grading::Uniform => s,
                    Grading::Edge => 0.5 * (1.0 - (PI * s).cos()),
                };
                // pin the end points so the covered region is exact
                if i == 0 {
                    -len / 2.0
                } else if i == n {
                    len / 2.0
                } else {
                    len * (u - 0.5)
                }
            })
            .collect()
    };
    let xs = lines(width, nx);
    let ys = lines(height, ny);
    let mut panels = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let p00 = [xs[i], ys[j]];
            let p10 = [xs[i + 1], ys[j]];
            let p11 = [xs[i + 1], ys[j + 1]];
            let p01 = [xs[i], ys[j + 1]];
            panels.push(Triangle::new(p00, p10, p11));
            panels.push(Triangle::new(p00, p11, p01));
        }
    }
    TriangleMesh::from_panels(panels, format!("rect({width}x{height})"), 0)
}

/// Ear-clipping triangulation of a simple counter-clockwise polygon followed
/// by `refinement` rounds of midpoint subdivision.
pub fn mesh_polygon(vertices: &[Point2], refinement: u32) -> Result<TriangleMesh> {
    validate_polygon(vertices)?;
    let mut idx: Vec<usize> = (0..vertices.len()).collect();
    let mut tris = Vec::with_capacity(vertices.len() - 2);
    while idx.len() > 3 {
        let n = idx.len();
        let ear = (0..n).find(|&k| {
            let (a, b, c) = (
                vertices[idx[(k + n - 1) % n]],
                vertices[idx[k]],
                vertices[idx[(k + 1) % n]],
            );
            if orient(a, b, c) <= 0.0 {
                return false;
            }
            let t = Triangle::new(a, b, c);
            !idx.iter().any(|&m| {
                let p = vertices[m];
                p != a && p != b && p != c && t.contains(p, 1e-12)
            })
        });
        let Some(k) = ear else {
            return invalid("polygon could not be triangulated");
        };
        tris.push(Triangle::new(
            vertices[idx[(k + n - 1) % n]],
            vertices[idx[k]],
            vertices[idx[(k + 1) % n]],
        ));
        idx.remove(k);
    }
    tris.push(Triangle::new(
        vertices[idx[0]],
        vertices[idx[1]],
        vertices[idx[2]],
    ));
    for _ in 0..refinement {
        tris = tris.iter().flat_map(|t| t.split4()).collect();
    }
    TriangleMesh::from_panels(
        tris,
        format!("polygon({} vertices)", vertices.len()),
        refinement,
    )
}

/// Translates `b` along `+x` so that the gap between the right edge of `a`'s
/// bounding box and the left edge of `b`'s equals `gap`, with `b` centred on
/// `a`'s `y` coordinate. For discs and axis-aligned rectangles this is the
/// distance between closest boundary points.
pub fn place_right_of(a: &BodyShape, b: &BodyShape, gap: f64) -> BodyShape {
    let (_, a_hi) = a.bounding_box();
    let (b_lo, _) = b.bounding_box();
    let dy = a.center()[1] - b.center()[1];
    b.translated([a_hi[0] + gap - b_lo[0], dy])
}

/// Minimum distance between the boundaries of two bodies, sampled on the
/// shapes' exact boundaries for discs and rectangles and on polygon edges.
pub fn boundary_gap(a: &BodyShape, b: &BodyShape) -> f64 {
    match (a, b) {
        (
            BodyShape::Disc {
                radius: ra,
                center: ca,
            },
            BodyShape::Disc {
                radius: rb,
                center: cb,
            },
        ) => dist(*ca, *cb) - ra - rb,
        _ => {
            let pa = boundary_points(a, 512);
            let pb = boundary_points(b, 512);
            let mut best = f64::INFINITY;
            for p in &pa {
                for q in &pb {
                    best = best.min(dist(*p, *q));
                }
            }
            best
        }
    }
}

fn boundary_points(s: &BodyShape, per_edge: usize) -> Vec<Point2> {
    let polygon = match s {
        BodyShape::Disc { radius, center } => {
            return (0..4 * per_edge)
                .map(|i| {
                    let th = 2.0 * PI * i as f64 / (4 * per_edge) as f64;
                    [center[0] + radius * th.cos(), center[1] + radius * th.sin()]
                })
                .collect()
        }
        BodyShape::Rectangle {
            width,
            height,
            center,
        } => {
            let (w, h) = (width / 2.0, height / 2.0);
            vec![
                [center[0] - w, center[1] - h],
                [center[0] + w, center[1] - h],
                [center[0] + w, center[1] + h],
                [center[0] - w, center[1] + h],
            ]
        }
        BodyShape::Polygon { vertices } => vertices.clone(),
    };
    let n = polygon.len();
    (0..n)
        .flat_map(|i| {
            let p = polygon[i];
            let q = polygon[(i + 1) % n];
            (0..per_edge).map(move |k| {
                let t = k as f64 / per_edge as f64;
                [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
            })
        })
        .collect()
}
