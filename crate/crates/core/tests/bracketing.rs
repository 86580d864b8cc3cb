mod common;

use common::*;
use indefgraph::bracketing::{
    asymptotic_fit, asymptotics, decoupled_spectrum, positive_eigenvalues, sign_flip_residual, verify_bracketing,
    DecoupledKind, NondSign,
};
use indefgraph::Error;

fn report(g: &indefgraph::Graph, n: usize, tol: f64, sign: NondSign) -> indefgraph::bracketing::BracketReport {
    let coupled = positive_eigenvalues(g, n).unwrap();
    let meshes: Vec<usize> = g.edges().iter().map(|e| e.mesh).collect();
    let lower = decoupled_spectrum(g, DecoupledKind::NonDirichlet, sign, n).unwrap();
    let upper = decoupled_spectrum(g, DecoupledKind::Dirichlet, sign, n).unwrap();
    verify_bracketing(&coupled, &meshes, &lower, &upper, tol, n).unwrap()
}

#[test]
fn star_bracketing_is_tight_at_shared_values() {
    let rep = report(&positive_star(32), 10, 0.0, NondSign::Form);
    assert!(rep.all_pass && rep.rows.len() == 10 && !rep.truncated);
    // The double eigenvalue at π² equals the Dirichlet edge value.
    let tight = rep.rows.iter().filter(|r| r.upper_slack.abs() < 1e-8 * r.lambda).count();
    assert!(tight >= 2, "{rep:?}");
}

#[test]
fn indefinite_graphs_bracket() {
    for g in [pm_path(1.0, 64), mixed_star(64), robin_path(64)] {
        let rep = report(&g, 8, 0.0, NondSign::Form);
        assert!(rep.all_pass, "{rep:?}");
    }
}

#[test]
fn robin_natural_condition_can_lose_definiteness() {
    let g = robin_path(32);
    let lower = decoupled_spectrum(&g, DecoupledKind::NonDirichlet, NondSign::Form, 4).unwrap();
    let flipped = decoupled_spectrum(&g, DecoupledKind::NonDirichlet, NondSign::Paper, 4).unwrap();
    assert_ne!(lower.merged_values(), flipped.merged_values());
    let upper = decoupled_spectrum(&g, DecoupledKind::Dirichlet, NondSign::Paper, 4).unwrap();
    let same = decoupled_spectrum(&g, DecoupledKind::Dirichlet, NondSign::Form, 4).unwrap();
    assert_eq!(upper.merged_values(), same.merged_values());
}

#[test]
fn multiplicity_table_counts_positive_edges() {
    let s = decoupled_spectrum(&positive_star(16), DecoupledKind::Dirichlet, NondSign::Form, 3).unwrap();
    assert_eq!(s.multiplicity_table.len(), 3);
    assert!(s.multiplicity_table.iter().all(|m| m.nu == 3 && m.nu_plus == 3));
    let m = decoupled_spectrum(&mixed_star(16), DecoupledKind::Dirichlet, NondSign::Form, 2).unwrap();
    assert!(m.multiplicity_table.iter().all(|e| e.nu_plus <= e.nu));
    assert_eq!(m.multiplicity_table.iter().map(|e| e.nu).sum::<usize>(), 6);
}

#[test]
fn mismatched_meshes_are_rejected() {
    let g = pm_path(1.0, 16);
    let coupled = positive_eigenvalues(&g, 3).unwrap();
    let lower = decoupled_spectrum(&g.with_mesh(32), DecoupledKind::NonDirichlet, NondSign::Form, 3).unwrap();
    let upper = decoupled_spectrum(&g, DecoupledKind::Dirichlet, NondSign::Form, 3).unwrap();
    assert_eq!(verify_bracketing(&coupled, &[16, 16], &lower, &upper, 0.0, 3), Err(Error::NonNested));
}

#[test]
fn decoupled_spectra_flip_with_weights() {
    for kind in [DecoupledKind::Dirichlet, DecoupledKind::NonDirichlet] {
        let r = sign_flip_residual(&mixed_star(16), kind, NondSign::Form, 5).unwrap();
        assert!(r < 1e-12, "{kind:?}: {r}");
    }
}

#[test]
fn coarse_mesh_fails_the_gate() {
    match asymptotics(&pm_path(1.0, 48), 5, 30, 1e-3) {
        Err(Error::MeshTooCoarse { max_change, .. }) => assert!(max_change > 1e-3),
        other => panic!("{other:?}"),
    }
    assert!(matches!(asymptotics(&pm_path(1.0, 16), 5, 30, 1e-3), Err(Error::NotEnoughEigenvalues { .. })));
}

#[test]
fn slope_counts_only_positive_edges() {
    let g = mixed_star(256);
    let values = positive_eigenvalues(&g, 20).unwrap();
    let fit = asymptotic_fit(&values, g.positive_edge_count(), 5, 20).unwrap();
    assert!((fit.target_slope - std::f64::consts::PI / 2.0).abs() < 1e-15);
    assert!(fit.slope_rel_error < 5e-2, "{fit:?}");
    assert_eq!(fit.points.len(), 16);
}
