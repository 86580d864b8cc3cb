mod common;

use common::*;
use indefgraph::assembly::assemble_global;
use indefgraph::krein::{
    classify_cone, halfrange_gram, krein_report, operator_checks, random_probes, s_norm, Cone, KreinConfig,
};
use indefgraph::spectrum::solve_pencil;
use indefgraph::Error;

#[test]
fn operator_residuals_are_at_rounding_level() {
    for (name, g) in [("mixed", mixed_star(12)), ("robin", robin_path(16)), ("pm", pm_path(0.0, 16))] {
        let d = assemble_global(&g).unwrap();
        let s = solve_pencil(&d).unwrap();
        let c = operator_checks(&d, &s, &random_probes(d.dof_count(), 20, 3)).unwrap();
        for (what, v) in [
            ("s_self_adjoint", c.s_self_adjoint),
            ("s_eigen_agreement", c.s_eigen_agreement),
            ("completeness", c.completeness),
            ("idempotency", c.idempotency),
            ("f_self_adjoint", c.f_self_adjoint),
            ("b_orthogonality", c.b_orthogonality),
            ("abs_s_identity", c.abs_s_identity),
            ("adjoint", c.adjoint),
        ] {
            assert!(v < 1e-9, "{name} {what} = {v:e}");
        }
        assert!(c.abs_s_min_positive > 0.0, "{name}");
    }
}

#[test]
fn cone_follows_eigenvalue_sign() {
    let d = assemble_global(&robin_path(16)).unwrap();
    let s = solve_pencil(&d).unwrap();
    let table = classify_cone(&s, &d).unwrap();
    assert_eq!(table.len(), s.len());
    for e in table {
        assert_eq!(e.cone == Cone::Positive, e.lambda > 0.0);
        assert!(e.krein * e.lambda > 0.0);
    }
}

#[test]
fn s_norm_of_eigenvectors() {
    let d = assemble_global(&mixed_star(10)).unwrap();
    let s = solve_pencil(&d).unwrap();
    for p in s.iter().take(6) {
        let n = s_norm(&p.vector, &d, &s).unwrap();
        assert!((n - 1.0 / p.lambda.abs().sqrt()).abs() < 1e-10);
    }
    assert!(matches!(s_norm(&[1.0], &d, &s), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn report_is_reproducible_and_bounded() {
    let d = assemble_global(&pm_path(1.0, 24)).unwrap();
    let s = solve_pencil(&d).unwrap();
    let cfg = KreinConfig {
        probes: 30,
        seed: 11,
        ..KreinConfig::default()
    };
    let a = krein_report(&d, &s, &cfg).unwrap();
    let b = krein_report(&d, &s, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.vw_residuals.len(), 30);
    assert!(a.max_vw_residual() < 1e-10);
    assert!(a.max_maxmin_gap() < 1e-10);
    let n = &a.s_norm_constants;
    assert!(n.gram_min <= n.probe_min && n.probe_max <= n.gram_max);
    // Directions at infinity carry zero S-norm.
    assert_eq!(s.kernel.len(), 1);
    assert!(n.gram_min < 1e-6);
    assert_eq!(a.gram_spectra.iter().map(|g| g.truncation).collect::<Vec<_>>(), [5, 10, 15, 20]);
}

#[test]
fn norm_constants_are_positive_without_kernel() {
    let d = assemble_global(&mixed_star(10)).unwrap();
    let s = solve_pencil(&d).unwrap();
    let cfg = KreinConfig {
        probes: 10,
        ..KreinConfig::default()
    };
    let n = krein_report(&d, &s, &cfg).unwrap().s_norm_constants;
    if s.kernel.is_empty() {
        assert!(n.gram_min > 0.0);
    }
    assert!(n.gram_min <= n.probe_min && n.probe_max <= n.gram_max);
}

#[test]
fn gram_is_identity_when_there_is_no_negative_edge() {
    let d = assemble_global(&positive_star(16)).unwrap();
    let s = solve_pencil(&d).unwrap();
    let g = halfrange_gram(&s, &d, 8).unwrap();
    assert!((g.min_eig - 1.0).abs() < 1e-10 && (g.max_eig - 1.0).abs() < 1e-10);
}

#[test]
fn probes_depend_only_on_seed() {
    let a = random_probes::<f64>(7, 3, 42);
    assert_eq!(a, random_probes::<f64>(7, 3, 42));
    assert_ne!(a, random_probes::<f64>(7, 3, 43));
    assert!(a.iter().flatten().all(|x| (-1.0..=1.0).contains(x)));
}
