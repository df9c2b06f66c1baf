//! Subcommand drivers. Every driver validates its whole configuration before
//! it creates the output directory, so a rejected run leaves no files.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use qmi_core::analytic::disc_capacitance;
use qmi_core::entropy::{
    fit_log_law, fit_power_law, qmi_gap_sweep, BodySystem, LinearFit, MeshOptions, QmiResult, Route,
};
use qmi_core::geometry::{boundary_gap, dist, BodyShape};
use qmi_core::io::{fmt_float, write_json, write_mesh, Table};
use qmi_core::kernel::assemble_self;
use qmi_core::quadrature::AdaptiveConfig;
use qmi_core::scattering::{capacitance_curve, PhysicalParams};
use qmi_core::selftest::{run_selftest, SelfTestOptions};
use qmi_core::worldline::{dirichlet_delta_s, dirichlet_ssa_counts};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{self, Distance, Overrides, Resolved, RunConfig};
use crate::{CliError, Common};

pub struct Outcome {
    pub passed: bool,
    pub summary: String,
}

pub fn run(name: &str, common: &Common) -> Result<Outcome, CliError> {
    let overrides = Overrides {
        seed: common.seed,
        refinement: common.refinement,
        out: common.out.clone(),
    };
    let cfg = match (&common.config, name) {
        (Some(p), _) => config::load(p)?,
        (None, "selftest") => RunConfig::default(),
        (None, _) => return Err(CliError::Config("--config is required for this subcommand".into())),
    };
    match name {
        "qmi-sweep" => qmi_sweep(&cfg, &overrides),
        "capacitance" => capacitance(&cfg, &overrides),
        "ssa" => ssa(&cfg, &overrides),
        "tripartite" => tripartite(&cfg, &overrides),
        "worldline" => worldline(&cfg, &overrides),
        "selftest" => selftest(&cfg, &overrides, common.refinement),
        other => Err(CliError::Config(format!("unknown subcommand {other}"))),
    }
}

#[derive(Serialize)]
struct PhysicalReport {
    params: PhysicalParams,
    omega_c: f64,
    weak_coupling_violated: bool,
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    created_unix: u64,
    seed: u64,
    mesh: MeshOptions,
    quadrature: AdaptiveConfig,
    route: Route,
    reference_length: f64,
    physical: Option<PhysicalReport>,
    config: &'a RunConfig,
}

fn metadata<'a>(name: &'a str, r: &Resolved, cfg: &'a RunConfig) -> Metadata<'a> {
    Metadata {
        tool: "qmi",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: name,
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        seed: r.seed,
        mesh: r.mesh,
        quadrature: r.quad,
        route: r.route,
        reference_length: r.reference_length,
        physical: r.physical.map(|p| PhysicalReport {
            params: p,
            omega_c: p.omega_c(),
            weak_coupling_violated: p.weak_coupling_violated(),
        }),
        config: cfg,
    }
}

fn prepare_out(r: &Resolved, cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&r.out)?;
    if cfg.output.dump_meshes {
        for (i, b) in r.bodies.iter().enumerate() {
            let m = b.mesh(r.mesh.refinement, r.mesh.grading)?;
            write_mesh(&r.out.join(format!("mesh_{i}.txt")), &m)?;
        }
    }
    Ok(())
}

fn write_outputs(out: &Path, stem: &str, table: &Table, json: &Value) -> Result<(), CliError> {
    table.write_csv(&out.join(format!("{stem}.csv")))?;
    write_json(&out.join(format!("{stem}.json")), json)?;
    Ok(())
}

fn fit_report(fit: qmi_core::Result<LinearFit>) -> Value {
    match fit {
        Ok(f) => json!(f),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

const FLAT_HEADER: [&str; 7] = ["d", "lambda", "value", "error", "route", "mesh_panels", "quad_points"];

/// ΔF samples sorted by λ, then the integrated value.
fn flat_rows(t: &mut Table, d: f64, r: &QmiResult, scale: f64) {
    let panels = r.mesh_panels.iter().sum::<usize>().to_string();
    let mut curve: Vec<(f64, f64)> = r.curve.lambda_grid.iter().copied().zip(r.curve.values.iter().copied()).collect();
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (l, v) in curve {
        t.push(vec![
            fmt_float(d),
            fmt_float(l),
            fmt_float(v),
            String::new(),
            r.route.as_str().into(),
            panels.clone(),
            r.evaluations.to_string(),
        ]);
    }
    t.push(vec![
        fmt_float(d),
        "integrated".into(),
        fmt_float(r.value / scale),
        fmt_float(r.abs_error / scale),
        r.route.as_str().into(),
        panels,
        r.evaluations.to_string(),
    ]);
}

fn result_json(d: f64, r: &QmiResult, res: &Resolved) -> Value {
    json!({
        "d": d,
        "value_normalized": r.value / res.reference_length,
        "qmi_absolute": res.physical.map(|p| r.scaled(&p)),
        "result": r,
    })
}

fn qmi_sweep(cfg: &RunConfig, o: &Overrides) -> Result<Outcome, CliError> {
    let res = cfg.resolve(o, Some(2))?;
    let sweep = cfg.sweep()?;
    let (a, b) = (&res.bodies[0], &res.bodies[1]);
    // convert every requested separation to a bounding-box gap up front
    let mut gaps = Vec::with_capacity(sweep.distances.len());
    for &d in &sweep.distances {
        let placed = config::place(a, b, d, sweep.distance)?;
        gaps.push(placed.bounding_box().0[0] - a.bounding_box().1[0]);
    }
    prepare_out(&res, cfg)?;

    let results = qmi_gap_sweep(a, b, &gaps, &res.mesh, res.route, &res.quad)?;
    let mut table = Table::new(&FLAT_HEADER);
    let mut points = Vec::new();
    let mut ok = Vec::new();
    let mut failures = 0;
    for (&d, r) in sweep.distances.iter().zip(&results) {
        match r {
            Ok(r) => {
                flat_rows(&mut table, d, r, res.reference_length);
                points.push(result_json(d, r, &res));
                if r.converged {
                    ok.push((d, r.value / res.reference_length));
                } else {
                    failures += 1;
                }
            }
            Err(e) => {
                failures += 1;
                table.push(vec![
                    fmt_float(d),
                    "integrated".into(),
                    "nan".into(),
                    "nan".into(),
                    res.route.as_str().into(),
                    String::new(),
                    "0".into(),
                ]);
                points.push(json!({ "d": d, "error": e.to_string() }));
            }
        }
    }
    let fits = json!({
        "power_law": fit_report(fit_power_law(&ok)),
        "log_law": fit_report(fit_log_law(&ok, res.reference_length)),
    });
    let passed = failures == 0;
    let doc = json!({
        "metadata": metadata("qmi-sweep", &res, cfg),
        "distance": sweep.distance,
        "points": points,
        "fits": fits,
        "failures": failures,
        "passed": passed,
    });
    write_outputs(&res.out, "qmi_sweep", &table, &doc)?;
    let exponent = fits["power_law"]["slope"].as_f64();
    Ok(Outcome {
        passed,
        summary: format!(
            "qmi-sweep: {} points, {failures} failed, power-law exponent {}",
            sweep.distances.len(),
            exponent.map_or("n/a".into(), |e| format!("{e:.4}"))
        ),
    })
}

fn capacitance(cfg: &RunConfig, o: &Overrides) -> Result<Outcome, CliError> {
    let res = cfg.resolve(o, Some(1))?;
    let lambdas = cfg.capacitance_lambdas()?;
    prepare_out(&res, cfg)?;
    let body = &res.bodies[0];
    let mesh = body.mesh(res.mesh.refinement, res.mesh.grading)?;
    let g = assemble_self(&mesh, res.mesh.quad_order)?;
    let curve = capacitance_curve(&g, &mesh.areas, &lambdas)?;
    let analytic = |l: f64| match body {
        BodyShape::Disc { radius, .. } => Some(disc_capacitance(*radius, l)),
        _ => None,
    };
    let mut table = Table::new(&["lambda", "C_numeric", "C_analytic", "rel_err"]);
    let mut rows = Vec::new();
    for &(l, c) in &curve {
        let a = analytic(l);
        let rel = a.map(|a| c / a - 1.0);
        table.push(vec![
            fmt_float(l),
            fmt_float(c),
            a.map(fmt_float).unwrap_or_default(),
            rel.map(fmt_float).unwrap_or_default(),
        ]);
        rows.push(json!({ "lambda": l, "c_numeric": c, "c_analytic": a, "rel_err": rel }));
    }
    let monotone = curve.windows(2).all(|w| w[1].1 < w[0].1);
    let doc = json!({
        "metadata": metadata("capacitance", &res, cfg),
        "panels": mesh.len(),
        "mesh_hash": mesh.hash(),
        "rows": rows,
        "monotone_decreasing": monotone,
        "passed": monotone,
    });
    write_outputs(&res.out, "capacitance", &table, &doc)?;
    Ok(Outcome {
        passed: monotone,
        summary: format!(
            "capacitance: {} points on {} panels, C({}) = {:.6}, monotone {}",
            curve.len(),
            mesh.len(),
            curve[0].0,
            curve[0].1,
            monotone
        ),
    })
}

fn ssa(cfg: &RunConfig, o: &Overrides) -> Result<Outcome, CliError> {
    let res = cfg.resolve(o, Some(3))?;
    let extra = cfg.ssa_lambdas()?;
    let wl = if cfg.ssa.worldline {
        Some(cfg.worldline_config(res.seed)?)
    } else {
        None
    };
    prepare_out(&res, cfg)?;
    let sys = BodySystem::from_shapes(&res.bodies, &res.mesh)?;
    let i3 = sys.tripartite_information(0, 1, 2, &res.quad)?;
    let iac = sys.mutual_information(0, 2, Route::Scattering, &res.quad)?;
    let mut lambdas: Vec<f64> = i3.curve.lambda_grid.iter().chain(&extra).copied().collect();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    let pts = sys.ssa_pointwise(0, 1, 2, &lambdas)?;
    let mut table = Table::new(&["lambda", "delta3_s", "delta_s_ac", "holds"]);
    for p in &pts {
        table.push(vec![fmt_float(p.lambda), fmt_float(p.delta3_s), fmt_float(p.delta_s_ac), p.holds.to_string()]);
    }
    let pointwise = pts.iter().all(|p| p.holds);
    let integrated = i3.value <= iac.value;
    let counts = match &wl {
        Some(w) => Some(dirichlet_ssa_counts(&res.bodies[0], &res.bodies[1], &res.bodies[2], w)?),
        None => None,
    };
    let counting = counts.is_none_or(|c| c.holds());
    let converged = i3.converged && iac.converged;
    let passed = pointwise && integrated && counting && converged;
    let doc = json!({
        "metadata": metadata("ssa", &res, cfg),
        "pointwise": { "points": pts, "holds": pointwise },
        "integrated": {
            "tripartite": i3.value,
            "tripartite_error": i3.abs_error,
            "qmi_ac": iac.value,
            "qmi_ac_error": iac.abs_error,
            "converged": converged,
            "holds": integrated,
        },
        "worldline": counts.map(|c| json!({ "counts": c, "holds": c.holds() })),
        "passed": passed,
    });
    write_outputs(&res.out, "ssa", &table, &doc)?;
    Ok(Outcome {
        passed,
        summary: format!(
            "ssa: {} pointwise, I(A,B,C) = {:.6e} ≤ I(A,C) = {:.6e}: {integrated}, worldline {}",
            if pointwise { "holds" } else { "VIOLATED" },
            i3.value,
            iac.value,
            counts.map_or("skipped".to_string(), |c| format!("n_ABC = {} ≤ n_AC = {}", c.n_abc, c.n_ac)),
        ),
    })
}

fn tripartite(cfg: &RunConfig, o: &Overrides) -> Result<Outcome, CliError> {
    let res = cfg.resolve(o, Some(3))?;
    prepare_out(&res, cfg)?;
    let sys = BodySystem::from_shapes(&res.bodies, &res.mesh)?;
    let i3 = sys.tripartite_information(0, 1, 2, &res.quad)?;
    let mut table = Table::new(&FLAT_HEADER);
    flat_rows(&mut table, i3.d, &i3, res.reference_length);
    let doc = json!({
        "metadata": metadata("tripartite", &res, cfg),
        "tripartite": result_json(i3.d, &i3, &res),
        "passed": i3.converged,
    });
    write_outputs(&res.out, "tripartite", &table, &doc)?;
    Ok(Outcome {
        passed: i3.converged,
        summary: format!("tripartite: I(A,B,C)/ω_c = {:.6e} ± {:.1e}", i3.value, i3.abs_error),
    })
}

fn worldline(cfg: &RunConfig, o: &Overrides) -> Result<Outcome, CliError> {
    let res = cfg.resolve(o, Some(2))?;
    let wcfg = cfg.worldline_config(res.seed)?;
    let (a, b) = (&res.bodies[0], &res.bodies[1]);
    let kind = cfg.worldline.distance;
    let placements: Vec<(f64, BodyShape)> = match &cfg.worldline.distances {
        Some(ds) => ds
            .iter()
            .map(|&d| config::place(a, b, d, kind).map(|p| (d, p)))
            .collect::<Result<_, _>>()?,
        None => {
            let d = match kind {
                Distance::Gap => boundary_gap(a, b),
                Distance::Center => dist(a.center(), b.center()),
            };
            vec![(d, b.clone())]
        }
    };
    prepare_out(&res, cfg)?;
    let mut table = Table::new(&["l", "d", "estimate", "stderr", "n_samples"]);
    let mut points = Vec::new();
    let mut failures = 0;
    for (d, placed) in &placements {
        match dirichlet_delta_s(a, placed, &wcfg) {
            Ok(est) => {
                for lv in &est.levels {
                    table.push(vec![
                        fmt_float(lv.l),
                        fmt_float(*d),
                        fmt_float(lv.estimate),
                        fmt_float(lv.stderr),
                        lv.samples.to_string(),
                    ]);
                }
                table.push(vec![
                    "integrated".into(),
                    fmt_float(*d),
                    fmt_float(est.estimate),
                    fmt_float(est.stderr),
                    est.samples.to_string(),
                ]);
                points.push(json!({ "d": d, "estimate": est }));
            }
            Err(e) => {
                failures += 1;
                table.push(vec!["integrated".into(), fmt_float(*d), "nan".into(), "nan".into(), "0".into()]);
                points.push(json!({ "d": d, "error": e.to_string() }));
            }
        }
    }
    let passed = failures == 0;
    let doc = json!({
        "metadata": metadata("worldline", &res, cfg),
        "worldline": wcfg,
        "distance": kind,
        "points": points,
        "passed": passed,
    });
    write_outputs(&res.out, "worldline", &table, &doc)?;
    Ok(Outcome {
        passed,
        summary: format!("worldline: {} placements, {failures} failed", placements.len()),
    })
}

fn selftest(cfg: &RunConfig, o: &Overrides, refinement: Option<u32>) -> Result<Outcome, CliError> {
    let res = cfg.resolve(o, None)?;
    let opts = SelfTestOptions {
        refinement: refinement.or(cfg.mesh.refinement).unwrap_or(SelfTestOptions::default().refinement),
        seed: res.seed,
    };
    prepare_out(&res, cfg)?;
    let report = run_selftest(&opts);
    let mut table = Table::new(&["name", "passed", "detail"]);
    for c in &report.checks {
        table.push(vec![c.name.clone(), c.passed.to_string(), c.detail.clone()]);
        eprintln!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    let passed = report.all_passed();
    let doc = json!({
        "metadata": metadata("selftest", &res, cfg),
        "options": opts,
        "report": report,
        "passed": passed,
    });
    write_outputs(&res.out, "selftest", &table, &doc)?;
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    Ok(Outcome {
        passed,
        summary: format!("selftest: {} checks, {failed} failed", report.checks.len()),
    })
}
