use std::f64::consts::PI;

use qmi_core::analytic::{disc_capacitance, qmi_discs_far, A3};
use qmi_core::entropy::{
    fit_power_law, mutual_information, qmi_gap_sweep, tripartite_information, BodySystem, MeshOptions, Route,
};
use qmi_core::geometry::{place_right_of, BodyShape, Grading};
use qmi_core::io::{read_matrix_file, write_matrix_file, write_mesh};
use qmi_core::kernel::{assemble_cross, assemble_self};
use qmi_core::quadrature::AdaptiveConfig;
use qmi_core::scattering::monopole_capacitance;

fn mesh(refinement: u32) -> MeshOptions {
    MeshOptions {
        refinement,
        grading: Grading::Edge,
        quad_order: 4,
    }
}

#[test]
fn dirichlet_disc_capacitance() {
    let m = BodyShape::disc(1.0, [0.0, 0.0]).mesh(3, Grading::Edge).unwrap();
    let g = assemble_self(&m, 4).unwrap();
    let c = monopole_capacitance(&g, &m.areas, 0.0).unwrap();
    assert!((c / (2.0 / PI) - 1.0).abs() < 0.01, "{c}");
}

#[test]
fn large_lambda_capacitance_approaches_area_limit() {
    // C → A / (4π λ) = R² / (4λ) for a unit disc
    let m = BodyShape::disc(1.0, [0.0, 0.0]).mesh(2, Grading::Edge).unwrap();
    let g = assemble_self(&m, 4).unwrap();
    let lam = 1e4;
    let c = monopole_capacitance(&g, &m.areas, lam).unwrap();
    let limit = m.total_area() / (4.0 * PI * lam);
    assert!((c / limit - 1.0).abs() < 1e-3, "{c} vs {limit}");
    assert!((disc_capacitance(1.0, lam) / (0.25 / lam) - 1.0).abs() < 1e-3);
}

#[test]
fn far_discs_follow_inverse_square_law() {
    let disc = BodyShape::disc(1.0, [0.0, 0.0]);
    let gaps = [18.0, 38.0];
    let sweep = qmi_gap_sweep(&disc, &disc, &gaps, &mesh(1), Route::Scattering, &AdaptiveConfig::default()).unwrap();
    let pts: Vec<(f64, f64)> = sweep.into_iter().map(|r| r.unwrap()).map(|r| (r.d, r.value)).collect();
    let fit = fit_power_law(&pts).unwrap();
    assert!((fit.slope + 2.0).abs() < 0.1, "{}", fit.slope);
    // and sits within a few per cent of 16π² times the closed form
    let consistent = A3 * qmi_discs_far(1.0, 1.0, pts[0].0);
    assert!((pts[0].1 / consistent - 1.0).abs() < 0.1, "{} vs {consistent}", pts[0].1);
}

#[test]
fn routes_give_the_same_mutual_information() {
    let a = BodyShape::rectangle(1.0, 1.0, [0.0, 0.0]);
    let b = place_right_of(&a, &BodyShape::disc(0.5, [0.0, 0.0]), 0.3);
    let q = AdaptiveConfig {
        rel_tol: 1e-8,
        ..AdaptiveConfig::default()
    };
    let s = mutual_information(&a, &b, &mesh(1), Route::Scattering, &q).unwrap();
    let d = mutual_information(&a, &b, &mesh(1), Route::Direct, &q).unwrap();
    assert!((s.value / d.value - 1.0).abs() < 1e-7, "{} vs {}", s.value, d.value);
    assert!(s.converged && d.converged);
}

#[test]
fn tripartite_vanishes_when_middle_body_is_remote() {
    let a = BodyShape::rectangle(1.0, 1.0, [0.0, 0.0]);
    let c = place_right_of(&a, &a, 0.5);
    let far = BodyShape::rectangle(1.0, 1.0, [200.0, 0.0]);
    let near = BodyShape::rectangle(1.0, 1.0, [0.75, 1.5]);
    let q = AdaptiveConfig::default();
    let i_far = tripartite_information(&a, &far, &c, &mesh(1), &q).unwrap();
    let i_near = tripartite_information(&a, &near, &c, &mesh(1), &q).unwrap();
    let iac = mutual_information(&a, &c, &mesh(1), Route::Scattering, &q).unwrap();
    assert!(i_far.value.abs() < 1e-4 * iac.value);
    assert!(i_near.value > 0.0 && i_near.value <= iac.value);
}

#[test]
fn body_system_translation_matches_fresh_assembly() {
    let a = BodyShape::disc(0.7, [0.0, 0.0]);
    let b = BodyShape::rectangle(0.5, 1.0, [2.0, 0.0]);
    let mut sys = BodySystem::from_shapes(&[a.clone(), b.clone()], &mesh(1)).unwrap();
    sys.translate_body(1, [1.5, 0.5]).unwrap();
    let fresh = BodySystem::from_shapes(&[a, b.translated([1.5, 0.5])], &mesh(1)).unwrap();
    for lam in [0.0, 1.0] {
        let x = sys.delta_f(0, 1, lam, Route::Scattering).unwrap();
        let y = fresh.delta_f(0, 1, lam, Route::Scattering).unwrap();
        assert!((x / y - 1.0).abs() < 1e-12);
    }
}

#[test]
fn matrix_and_mesh_files_round_trip() {
    let dir = std::env::temp_dir().join(format!("qmi-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let a = BodyShape::disc(1.0, [0.0, 0.0]).mesh(1, Grading::Uniform).unwrap();
    let b = a.translate([3.0, 0.0]);
    let g = assemble_cross(&a, &b, 4).unwrap();
    let p = dir.join("g.bin");
    write_matrix_file(&p, &g).unwrap();
    let back = read_matrix_file(&p).unwrap();
    assert_eq!(back.entries, g.entries);
    assert_eq!((back.row_mesh.as_str(), back.col_mesh.as_str()), (a.hash().as_str(), b.hash().as_str()));
    let mp = dir.join("a.txt");
    write_mesh(&mp, &a).unwrap();
    assert_eq!(std::fs::read_to_string(&mp).unwrap(), a.to_text());
    std::fs::remove_dir_all(&dir).unwrap();
}
