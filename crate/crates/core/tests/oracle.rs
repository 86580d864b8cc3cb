mod common;

use common::*;
use indefgraph::assembly::assemble_global;
use indefgraph::oracle::{edge_transfer, scan_roots, secular_det, RootKind};
use indefgraph::spectrum::solve_pencil;

#[test]
fn frozen_pm_path_roots() {
    let scan = scan_roots(&pm_path(0.0, 8), -80.0, 80.0, 4000).unwrap();
    let v = scan.values();
    assert_eq!(v.len(), 6);
    for (k, want) in PM_Q0.iter().enumerate() {
        assert!(rel(v[3 + k], *want) < 1e-12, "{} vs {want}", v[3 + k]);
        assert!(rel(-v[2 - k], *want) < 1e-12);
    }
    assert!(rel(PM_Q0[0], OMEGA1 * OMEGA1) < 1e-14);

    let v = scan_roots(&pm_path(1.0, 8), 0.0, 40.0, 2000).unwrap().values();
    assert_eq!(v.len(), 2);
    for (a, b) in v.iter().zip(PM_Q1) {
        assert!(rel(*a, b) < 1e-12);
    }
}

#[test]
fn star_double_roots_are_tangent() {
    let scan = scan_roots(&positive_star(8), 0.0, 45.0, 3000).unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    let doubles: Vec<_> = scan.roots.iter().filter(|r| r.multiplicity == 2).collect();
    assert_eq!(doubles.len(), 2);
    assert!(doubles.iter().all(|r| r.kind == RootKind::Tangent));
    assert!(rel(doubles[0].lambda, pi2) < 1e-8);
    assert!(rel(doubles[1].lambda, 4.0 * pi2) < 1e-8);
    assert_eq!(scan.count(), 6);
}

#[test]
fn transfer_matrices_are_unimodular() {
    for c in [-50.0f64, -1e-10, 0.0, 3e-9, 7.0, 400.0] {
        let t = edge_transfer(c, 1.0);
        let big = t.0.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        assert!((t.det() - 1.0).abs() < 1e-14 * big * big, "c = {c}");
        let half = edge_transfer(c, 0.5);
        let whole = half.then_after(&half);
        for i in 0..2 {
            for j in 0..2 {
                assert!((whole.0[i][j] - t.0[i][j]).abs() < 1e-9 * (1.0 + t.0[i][j].abs()));
            }
        }
    }
}

#[test]
fn determinant_vanishes_at_fem_limit() {
    let g = robin_path(8);
    let scan = scan_roots(&g, -40.0, 40.0, 4000).unwrap();
    for r in &scan.roots {
        let near = secular_det(&g, r.lambda).abs();
        let off = secular_det(&g, r.lambda + 0.5).abs();
        assert!(near < 1e-6 * off.max(1e-300) || near < 1e-12, "{} {near} {off}", r.lambda);
    }
}

#[test]
fn fem_converges_to_oracle_at_second_order() {
    for (name, g) in [("robin", robin_path(8)), ("mixed", mixed_star(8))] {
        let roots = scan_roots(&g, 0.0, 30.0, 3000).unwrap().values();
        let err = |m: usize| {
            let s = solve_pencil(&assemble_global(&g.with_mesh(m)).unwrap()).unwrap();
            roots.iter().zip(s.positive_values()).map(|(r, l)| rel(l, *r)).fold(0.0, f64::max)
        };
        let (e32, e64, e128) = (err(32), err(64), err(128));
        assert!(e64 < 1e-2 && e128 < 2.5e-3, "{name}: {e64} {e128}");
        let ratio = e64 / e128;
        assert!((3.2..=5.0).contains(&ratio), "{name}: {e32} {e64} {e128}");
    }
}
