//! Run configuration: one TOML file with flat sections per subcommand.

use std::path::{Path, PathBuf};

use qmi_core::entropy::{MeshOptions, Route};
use qmi_core::geometry::{BodyShape, Grading};
use qmi_core::quadrature::AdaptiveConfig;
use qmi_core::scattering::PhysicalParams;
use qmi_core::worldline::WorldlineConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub bodies: Vec<BodyShape>,
    #[serde(default)]
    pub mesh: MeshSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    pub physical: Option<PhysicalSection>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub route: Route,
    /// Length used to normalize reported QMI values; defaults to the size of
    /// the first body.
    pub reference_length: Option<f64>,
    #[serde(default)]
    pub output: OutputSection,
    pub sweep: Option<SweepSection>,
    pub capacitance: Option<CapacitanceSection>,
    #[serde(default)]
    pub ssa: SsaSection,
    #[serde(default)]
    pub worldline: WorldlineSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub refinement: Option<u32>,
    pub grading: Option<Grading>,
    pub quad_order: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_intervals: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSection {
    pub omega_0: f64,
    pub omega_p: f64,
    /// Defaults to the size of the first body.
    pub length: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    /// Write each body mesh as a text vertex/triangle list.
    #[serde(default)]
    pub dump_meshes: bool,
}

/// How a list of separations is interpreted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    /// Closest distance between the bounding boxes along `x`.
    #[default]
    Gap,
    /// Centre-to-centre distance.
    Center,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub distances: Vec<f64>,
    #[serde(default)]
    pub distance: Distance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitanceSection {
    pub lambdas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsaSection {
    /// Extra λ points for the pointwise table, on top of the quadrature nodes.
    #[serde(default)]
    pub lambdas: Vec<f64>,
    /// Run the worldline counting check.
    #[serde(default = "yes")]
    pub worldline: bool,
}

impl Default for SsaSection {
    fn default() -> Self {
        Self {
            lambdas: Vec::new(),
            worldline: true,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldlineSection {
    pub steps: Option<usize>,
    pub l_min: Option<f64>,
    pub l_max: Option<f64>,
    pub n_l: Option<usize>,
    pub n_loops: Option<usize>,
    pub n_centers: Option<usize>,
    /// Separations of the second body; the bodies are used as placed if
    /// absent.
    pub distances: Option<Vec<f64>>,
    #[serde(default)]
    pub distance: Distance,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub refinement: Option<u32>,
    pub out: Option<PathBuf>,
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn bad<T>(field: impl std::fmt::Display, msg: impl std::fmt::Display) -> Result<T, CliError> {
    Err(CliError::Config(format!("field `{field}`: {msg}")))
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        bad(field, format!("must be a positive number, got {v}"))
    }
}

fn positive_list(field: &str, vs: &[f64]) -> Result<(), CliError> {
    if vs.is_empty() {
        return bad(field, "must not be empty");
    }
    for (i, &v) in vs.iter().enumerate() {
        positive(&format!("{field}[{i}]"), v)?;
    }
    Ok(())
}

/// Fully resolved settings shared by the subcommands.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub bodies: Vec<BodyShape>,
    pub mesh: MeshOptions,
    pub quad: AdaptiveConfig,
    pub physical: Option<PhysicalParams>,
    pub seed: u64,
    pub route: Route,
    pub reference_length: f64,
    pub out: PathBuf,
}

impl RunConfig {
    /// Checks the sections every subcommand uses and applies overrides.
    pub fn resolve(&self, o: &Overrides, bodies_needed: Option<usize>) -> Result<Resolved, CliError> {
        if let Some(n) = bodies_needed {
            if self.bodies.len() != n {
                return bad("bodies", format!("this subcommand needs exactly {n} bodies, found {}", self.bodies.len()));
            }
        }
        for (i, b) in self.bodies.iter().enumerate() {
            if let Err(e) = b.validate() {
                return bad(format!("bodies[{i}]"), e);
            }
        }
        let defaults = MeshOptions::default();
        let mesh = MeshOptions {
            refinement: o.refinement.or(self.mesh.refinement).unwrap_or(defaults.refinement),
            grading: self.mesh.grading.unwrap_or(defaults.grading),
            quad_order: self.mesh.quad_order.unwrap_or(defaults.quad_order),
        };
        if mesh.refinement == 0 || mesh.refinement > 6 {
            return bad("mesh.refinement", format!("must be between 1 and 6, got {}", mesh.refinement));
        }
        if !(1..=7).contains(&mesh.quad_order) {
            return bad("mesh.quad_order", format!("must be between 1 and 7, got {}", mesh.quad_order));
        }
        let dq = AdaptiveConfig::default();
        let quad = AdaptiveConfig {
            rel_tol: self.quadrature.rel_tol.unwrap_or(dq.rel_tol),
            abs_tol: self.quadrature.abs_tol.unwrap_or(dq.abs_tol),
            max_intervals: self.quadrature.max_intervals.unwrap_or(dq.max_intervals),
        };
        positive("quadrature.rel_tol", quad.rel_tol)?;
        if !(quad.abs_tol >= 0.0 && quad.abs_tol.is_finite()) {
            return bad("quadrature.abs_tol", format!("must be non-negative, got {}", quad.abs_tol));
        }
        if quad.max_intervals == 0 {
            return bad("quadrature.max_intervals", "must be at least 1");
        }
        let size = self.bodies.first().map(BodyShape::size).unwrap_or(1.0);
        let reference_length = self.reference_length.unwrap_or(size);
        positive("reference_length", reference_length)?;
        let physical = match &self.physical {
            None => None,
            Some(p) => {
                positive("physical.omega_0", p.omega_0)?;
                positive("physical.omega_p", p.omega_p)?;
                let length = p.length.unwrap_or(size);
                positive("physical.length", length)?;
                Some(PhysicalParams::new(p.omega_0, p.omega_p, length).map_err(|e| CliError::Config(e.to_string()))?)
            }
        };
        Ok(Resolved {
            bodies: self.bodies.clone(),
            mesh,
            quad,
            physical,
            seed: o.seed.or(self.seed).unwrap_or(1),
            route: self.route,
            reference_length,
            out: o.out.clone().or_else(|| self.output.dir.clone()).unwrap_or_else(|| PathBuf::from(".")),
        })
    }

    pub fn sweep(&self) -> Result<&SweepSection, CliError> {
        let Some(s) = &self.sweep else {
            return bad("sweep", "section is required for qmi-sweep");
        };
        positive_list("sweep.distances", &s.distances)?;
        Ok(s)
    }

    pub fn capacitance_lambdas(&self) -> Result<Vec<f64>, CliError> {
        let lambdas = match &self.capacitance {
            Some(c) => c.lambdas.clone(),
            None => vec![0.0, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0],
        };
        if lambdas.is_empty() {
            return bad("capacitance.lambdas", "must not be empty");
        }
        for (i, &l) in lambdas.iter().enumerate() {
            if !(l >= 0.0 && l.is_finite()) {
                return bad(format!("capacitance.lambdas[{i}]"), format!("must be non-negative, got {l}"));
            }
            if i > 0 && l <= lambdas[i - 1] {
                return bad(format!("capacitance.lambdas[{i}]"), "must be strictly increasing");
            }
        }
        Ok(lambdas)
    }

    pub fn ssa_lambdas(&self) -> Result<Vec<f64>, CliError> {
        for (i, &l) in self.ssa.lambdas.iter().enumerate() {
            if !(l >= 0.0 && l.is_finite()) {
                return bad(format!("ssa.lambdas[{i}]"), format!("must be non-negative, got {l}"));
            }
        }
        Ok(self.ssa.lambdas.clone())
    }

    pub fn worldline_config(&self, seed: u64) -> Result<WorldlineConfig, CliError> {
        let d = WorldlineConfig::default();
        let w = &self.worldline;
        let cfg = WorldlineConfig {
            steps: w.steps.unwrap_or(d.steps),
            l_min: w.l_min.unwrap_or(d.l_min),
            l_max: w.l_max.unwrap_or(d.l_max),
            n_l: w.n_l.unwrap_or(d.n_l),
            n_loops: w.n_loops.unwrap_or(d.n_loops),
            n_centers: w.n_centers.unwrap_or(d.n_centers),
            seed,
        };
        cfg.validate().map_err(|e| CliError::Config(format!("section `worldline`: {e}")))?;
        if let Some(ds) = &w.distances {
            positive_list("worldline.distances", ds)?;
        }
        Ok(cfg)
    }
}

/// Second body placed on the `+x` side of `a` at the requested separation.
pub fn place(a: &BodyShape, b: &BodyShape, value: f64, kind: Distance) -> Result<BodyShape, CliError> {
    match kind {
        Distance::Gap => Ok(qmi_core::geometry::place_right_of(a, b, value)),
        Distance::Center => {
            let (ca, cb) = (a.center(), b.center());
            let placed = b.translated([ca[0] + value - cb[0], ca[1] - cb[1]]);
            let (_, a_hi) = a.bounding_box();
            let (b_lo, _) = placed.bounding_box();
            if b_lo[0] <= a_hi[0] {
                return bad("distances", format!("centre distance {value} makes the bodies overlap"));
            }
            Ok(placed)
        }
    }
}
