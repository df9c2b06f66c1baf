//! Quadrature building blocks: triangle rules, Gauss–Legendre nodes and an
//! adaptive Gauss–Kronrod integrator for smooth integrands on finite
//! intervals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Point2, Triangle};

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            x[0] = 0.0;
            w[0] = 2.0;
            break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Quadrature rule on the reference triangle in barycentric form:
/// `∫_T f ≈ area · Σ wᵢ f(point_at(uᵢ, vᵢ))`, `Σ wᵢ = 1`.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub nodes: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    /// Rule exact for polynomials of at least the given total degree.
    /// Symmetric rules up to degree 5, collapsed Gauss–Legendre products
    /// beyond.
    pub fn with_degree(degree: usize) -> Self {
        match degree {
            0 | 1 => Self {
                nodes: vec![(1.0 / 3.0, 1.0 / 3.0)],
                weights: vec![1.0],
                degree: 1,
            },
            2 => Self {
                nodes: vec![
                    (1.0 / 6.0, 1.0 / 6.0),
                    (2.0 / 3.0, 1.0 / 6.0),
                    (1.0 / 6.0, 2.0 / 3.0),
                ],
                weights: vec![1.0 / 3.0; 3],
                degree: 2,
            },
            3 | 4 => {
                let (a1, w1) = (0.445_948_490_915_965, 0.223_381_589_678_011);
                let (a2, w2) = (0.091_576_213_509_771, 0.109_951_743_655_322);
                let (b1, b2) = (1.0 - 2.0 * a1, 1.0 - 2.0 * a2);
                Self {
                    nodes: vec![
                        (a1, a1),
                        (b1, a1),
                        (a1, b1),
                        (a2, a2),
                        (b2, a2),
                        (a2, b2),
                    ],
                    weights: vec![w1, w1, w1, w2, w2, w2],
                    degree: 4,
                }
            }
            5 => Self::radon7(),
            _ => Self::collapsed((degree + 3) / 2),
        }
    }

    /// Seven-point degree-5 rule.
    pub fn radon7() -> Self {
        let s15 = 15f64.sqrt();
        let a1 = (6.0 - s15) / 21.0;
        let b1 = (9.0 + 2.0 * s15) / 21.0;
        let a2 = (6.0 + s15) / 21.0;
        let b2 = (9.0 - 2.0 * s15) / 21.0;
        let w0 = 9.0 / 40.0;
        let w1 = (155.0 - s15) / 1200.0;
        let w2 = (155.0 + s15) / 1200.0;
        Self {
            nodes: vec![
                (1.0 / 3.0, 1.0 / 3.0),
                (a1, a1),
                (b1, a1),
                (a1, b1),
                (a2, a2),
                (b2, a2),
                (a2, b2),
            ],
            weights: vec![w0, w1, w1, w1, w2, w2, w2],
            degree: 5,
        }
    }

    /// Conical product rule with `n` Gauss–Legendre points per direction,
    /// exact to total degree `2n − 2` (the collapse adds one power of `u`).
    pub fn collapsed(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut nodes = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            let u = 0.5 * (x[i] + 1.0);
            for j in 0..n {
                let s = 0.5 * (x[j] + 1.0);
                nodes.push((u, s * (1.0 - u)));
                // reference area is 1/2, the map's Jacobian is (1 − u)/4 on [-1,1]²
                weights.push(0.5 * w[i] * w[j] * (1.0 - u));
            }
        }
        Self {
            nodes,
            weights,
            degree: 2 * n - 2,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Physical points and area-scaled weights on a triangle.
    pub fn on(&self, t: &Triangle) -> impl Iterator<Item = (Point2, f64)> + '_ {
        let area = t.area();
        let t = *t;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&(u, v), &w)| (t.point_at(u, v), w * area))
    }

    pub fn integrate(&self, t: &Triangle, mut f: impl FnMut(Point2) -> f64) -> f64 {
        self.on(t).map(|(p, w)| w * f(p)).sum()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances for [`integrate_adaptive`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    /// Stop when the error estimate is below `rel_tol · |integral|` ...
    pub rel_tol: f64,
    /// ... or below `abs_tol`.
    pub abs_tol: f64,
    /// Upper bound on the number of subintervals.
    pub max_intervals: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-4,
            abs_tol: 0.0,
            max_intervals: 64,
        }
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Debug)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Every `(x, f(x))` evaluated, sorted by `x`.
    pub samples: Vec<(f64, f64)>,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F>(f: &F, a: f64, b: f64, samples: &mut Vec<(f64, f64)>) -> Result<Segment>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let xs: Vec<f64> = (0..15)
        .map(|k| match k {
            0..=6 => c - h * XGK[k],
            7 => c,
            _ => c + h * XGK[14 - k],
        })
        .collect();
    let fs = xs.par_iter().map(|&x| f(x)).collect::<Result<Vec<f64>>>()?;
    for (&x, &y) in xs.iter().zip(&fs) {
        if !y.is_finite() {
            return Err(Error::Quadrature(format!("integrand is {y} at {x}")));
        }
        samples.push((x, y));
    }
    let mut kron = CompensatedSum::new();
    let mut gauss = CompensatedSum::new();
    for k in 0..15 {
        let j = if k <= 7 { k } else { 14 - k };
        kron.add(WGK[j] * fs[k]);
        if j % 2 == 1 {
            gauss.add(WG[j / 2] * fs[k]);
        }
    }
    let value = h * kron.value();
    let error = (value - h * gauss.value()).abs();
    Ok(Segment { a, b, value, error })
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// The 15 nodes of each panel are evaluated through rayon; the result does
/// not depend on the number of worker threads. When the interval budget runs
/// out the partial result is returned with `converged = false`.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, cfg: &AdaptiveConfig) -> Result<Integral>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return invalid(format!("bad integration interval [{a}, {b}]"));
    }
    if !(cfg.rel_tol >= 0.0 && cfg.abs_tol >= 0.0) || cfg.max_intervals == 0 {
        return invalid("quadrature tolerances must be non-negative");
    }
    let mut samples = Vec::new();
    let mut segs = vec![gk15(&f, a, b, &mut samples)?];
    let converged = loop {
        let value: f64 = segs.iter().map(|s| s.value).collect::<CompensatedSum>().value();
        let error: f64 = segs.iter().map(|s| s.error).collect::<CompensatedSum>().value();
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
            break true;
        }
        if segs.len() >= cfg.max_intervals {
            break false;
        }
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let s = segs.swap_remove(worst);
        let m = 0.5 * (s.a + s.b);
        segs.push(gk15(&f, s.a, m, &mut samples)?);
        segs.push(gk15(&f, m, s.b, &mut samples)?);
    };
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    samples.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(Integral {
        value: segs.iter().map(|s| s.value).collect::<CompensatedSum>().value(),
        abs_error: segs.iter().map(|s| s.error).collect::<CompensatedSum>().value(),
        evaluations: samples.len(),
        converged,
        samples,
    })
}

/// Integral over `[0, ∞)` through `x = scale · t / (1 − t)`, `t ∈ [0, 1)`.
/// The samples of the returned [`Integral`] are reported in `x`, with the
/// original integrand values (no Jacobian).
pub fn integrate_half_line<F>(f: F, scale: f64, cfg: &AdaptiveConfig) -> Result<Integral>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(scale > 0.0 && scale.is_finite()) {
        return invalid(format!("compactification scale must be positive, got {scale}"));
    }
    let g = |t: f64| -> Result<f64> {
        let s = 1.0 - t;
        let x = scale * t / s;
        if !x.is_finite() {
            // an integrable f vanishes at infinity
            return Ok(0.0);
        }
        Ok(f(x)? * scale / (s * s))
    };
    let mut r = integrate_adaptive(g, 0.0, 1.0, cfg)?;
    for (t, y) in &mut r.samples {
        let s = 1.0 - *t;
        *t = scale * *t / s;
        *y *= s * s / scale;
    }
    Ok(r)
}
