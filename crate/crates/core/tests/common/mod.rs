#![allow(dead_code)]

use std::collections::BTreeMap;

use indefgraph::graph::{Edge, End, EndpointRef, MetricGraph, PiecewisePotential, Vertex, VertexCondition, WeightSign};

pub const OMEGA1: f64 = 2.365_020_372_431_352;
pub const PM_Q0: [f64; 3] = [5.593_321_362_015_331, 30.225_847_931_780_945, 74.638_883_824_543_96];
pub const PM_Q1: [f64; 2] = [6.916_098_633_547_956, 31.401_154_373_185_86];

pub fn dirichlet_edge(mesh: usize) -> MetricGraph<f64> {
    MetricGraph::new(
        vec![Edge::new("e1", "a", "b", WeightSign::Positive, PiecewisePotential::zero(), mesh)],
        vec![Vertex::new("a", VertexCondition::Dirichlet), Vertex::new("b", VertexCondition::Dirichlet)],
    )
    .unwrap()
}

/// `a -(+)- c -(-)- b`, Dirichlet ends, Kirchhoff center, constant `q`.
pub fn pm_path(q: f64, mesh: usize) -> MetricGraph<f64> {
    MetricGraph::new(
        vec![
            Edge::new("e1", "a", "c", WeightSign::Positive, PiecewisePotential::constant(q), mesh),
            Edge::new("e2", "c", "b", WeightSign::Negative, PiecewisePotential::constant(q), mesh),
        ],
        vec![
            Vertex::new("a", VertexCondition::Dirichlet),
            Vertex::new("c", VertexCondition::Kirchhoff),
            Vertex::new("b", VertexCondition::Dirichlet),
        ],
    )
    .unwrap()
}

fn star(weights: [WeightSign; 3], q: [f64; 3], mesh: usize) -> MetricGraph<f64> {
    let edges = (0..3)
        .map(|i| {
            Edge::new(&format!("e{}", i + 1), "c", &format!("t{}", i + 1), weights[i], PiecewisePotential::constant(q[i]), mesh)
        })
        .collect();
    let mut vertices = vec![Vertex::new("c", VertexCondition::Kirchhoff)];
    vertices.extend((1..=3).map(|i| Vertex::new(&format!("t{i}"), VertexCondition::Dirichlet)));
    MetricGraph::new(edges, vertices).unwrap()
}

/// Three positive edges, Kirchhoff center, Dirichlet tips, `q ≡ 0`.
pub fn positive_star(mesh: usize) -> MetricGraph<f64> {
    star([WeightSign::Positive; 3], [0.0; 3], mesh)
}

/// Two positive edges and one negative edge with distinct potentials.
pub fn mixed_star(mesh: usize) -> MetricGraph<f64> {
    star([WeightSign::Positive, WeightSign::Positive, WeightSign::Negative], [0.5, 2.0, 1.0], mesh)
}

/// Robin ends and a potential step off the mesh nodes.
pub fn robin_path(mesh: usize) -> MetricGraph<f64> {
    let mut fa = BTreeMap::new();
    fa.insert(EndpointRef::new(0, End::Start), -0.5);
    let mut fb = BTreeMap::new();
    fb.insert(EndpointRef::new(1, End::Terminal), 2.0);
    let q = PiecewisePotential::new(vec![0.0, 0.3, 1.0], vec![3.0, 1.0]).unwrap();
    MetricGraph::new(
        vec![
            Edge::new("e1", "a", "c", WeightSign::Positive, q, mesh),
            Edge::new("e2", "c", "b", WeightSign::Negative, PiecewisePotential::constant(2.0), mesh),
        ],
        vec![
            Vertex::new("a", VertexCondition::Robin { f: fa }),
            Vertex::new("c", VertexCondition::Kirchhoff),
            Vertex::new("b", VertexCondition::Robin { f: fb }),
        ],
    )
    .unwrap()
}

pub fn all_graphs(mesh: usize) -> Vec<(&'static str, MetricGraph<f64>)> {
    vec![
        ("dirichlet-edge", dirichlet_edge(mesh)),
        ("pm-path-q0", pm_path(0.0, mesh)),
        ("pm-path-q1", pm_path(1.0, mesh)),
        ("positive-star", positive_star(mesh)),
        ("mixed-star", mixed_star(mesh)),
        ("robin-path", robin_path(mesh)),
    ]
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
