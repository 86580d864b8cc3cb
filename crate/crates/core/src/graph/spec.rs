//! JSON graph specification files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Edge, End, EndpointRef, MetricGraph, PiecewisePotential, Vertex, VertexCondition, WeightSign};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub edges: Vec<EdgeSpec>,
    pub vertices: Vec<VertexSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub id: String,
    pub start: String,
    pub end: String,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    pub mesh: usize,
    /// Accepted only so that non-unit lengths can be rejected explicitly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexSpec {
    pub id: String,
    pub condition: ConditionSpec,
}

/// Endpoint keys in `f` maps are written `"<edge id>:0"` (initial point)
/// or `"<edge id>:1"` (terminal point).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConditionSpec {
    Dirichlet,
    Kirchhoff,
    Robin {
        #[serde(default)]
        f: BTreeMap<String, f64>,
    },
    Custom {
        rows: Vec<Vec<f64>>,
        #[serde(default)]
        f: BTreeMap<String, f64>,
    },
}

impl GraphSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph spec serializes")
    }

    /// Converts to a validated graph, reporting every problem found.
    pub fn to_graph<T: Real>(&self) -> Result<MetricGraph<T>> {
        let mut problems = Vec::new();
        let edge_pos: BTreeMap<&str, usize> = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.as_str(), i))
            .collect();

        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let weight = if e.weight == 1.0 {
                WeightSign::Positive
            } else if e.weight == -1.0 {
                WeightSign::Negative
            } else {
                problems.push(format!("edge {}: weight must be +1 or -1, got {}", e.id, e.weight));
                WeightSign::Positive
            };
            if let Some(len) = e.length {
                if len != 1.0 {
                    problems.push(format!("edge {}: non-unit edge length {len} is not supported", e.id));
                }
            }
            let potential = match &e.potential {
                None => PiecewisePotential::zero(),
                Some(p) => {
                    let bps: Vec<T> = p.breakpoints.iter().map(|&x| T::lit(x)).collect();
                    let vals: Vec<T> = p.values.iter().map(|&x| T::lit(x)).collect();
                    match PiecewisePotential::new(bps, vals) {
                        Ok(q) => q,
                        Err(Error::InvalidGraph(msgs)) => {
                            problems.extend(msgs.into_iter().map(|m| format!("edge {}: {m}", e.id)));
                            PiecewisePotential::zero()
                        }
                        Err(other) => return Err(other),
                    }
                }
            };
            edges.push(Edge {
                id: e.id.clone(),
                start: e.start.clone(),
                end: e.end.clone(),
                weight,
                potential,
                mesh: e.mesh,
            });
        }

        let mut parse_f = |vid: &str, f: &BTreeMap<String, f64>| -> BTreeMap<EndpointRef, T> {
            let mut out = BTreeMap::new();
            for (key, &val) in f {
                match parse_endpoint_key(key, &edge_pos) {
                    Some(p) => {
                        out.insert(p, T::lit(val));
                    }
                    None => problems.push(format!(
                        "vertex {vid}: f key {key:?} is not of the form <edge id>:0|1 with a known edge"
                    )),
                }
            }
            out
        };

        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                let condition = match &v.condition {
                    ConditionSpec::Dirichlet => VertexCondition::Dirichlet,
                    ConditionSpec::Kirchhoff => VertexCondition::Kirchhoff,
                    ConditionSpec::Robin { f } => VertexCondition::Robin { f: parse_f(&v.id, f) },
                    ConditionSpec::Custom { rows, f } => VertexCondition::Custom {
                        rows: rows.iter().map(|r| r.iter().map(|&x| T::lit(x)).collect()).collect(),
                        f: parse_f(&v.id, f),
                    },
                };
                Vertex {
                    id: v.id.clone(),
                    condition,
                }
            })
            .collect();

        let graph = MetricGraph::from_parts(edges, vertices);
        problems.extend(graph.validate().violations());
        if problems.is_empty() {
            Ok(graph)
        } else {
            Err(Error::InvalidGraph(problems))
        }
    }

    pub fn from_graph<T: Real>(g: &MetricGraph<T>) -> Self {
        let key = |p: &EndpointRef| format!("{}:{}", g.edges()[p.edge].id, p.end.index());
        let f_map = |f: &BTreeMap<EndpointRef, T>| {
            f.iter().map(|(p, v)| (key(p), v.to_f64_lossy())).collect()
        };
        Self {
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeSpec {
                    id: e.id.clone(),
                    start: e.start.clone(),
                    end: e.end.clone(),
                    weight: e.weight.value::<f64>(),
                    potential: Some(PotentialSpec {
                        breakpoints: e.potential.breakpoints().iter().map(|b| b.to_f64_lossy()).collect(),
                        values: e.potential.values().iter().map(|v| v.to_f64_lossy()).collect(),
                    }),
                    mesh: e.mesh,
                    length: None,
                })
                .collect(),
            vertices: g
                .vertices()
                .iter()
                .map(|v| VertexSpec {
                    id: v.id.clone(),
                    condition: match &v.condition {
                        VertexCondition::Dirichlet => ConditionSpec::Dirichlet,
                        VertexCondition::Kirchhoff => ConditionSpec::Kirchhoff,
                        VertexCondition::Robin { f } => ConditionSpec::Robin { f: f_map(f) },
                        VertexCondition::Custom { rows, f } => ConditionSpec::Custom {
                            rows: rows
                                .iter()
                                .map(|r| r.iter().map(|x| x.to_f64_lossy()).collect())
                                .collect(),
                            f: f_map(f),
                        },
                    },
                })
                .collect(),
        }
    }
}

fn parse_endpoint_key(key: &str, edges: &BTreeMap<&str, usize>) -> Option<EndpointRef> {
    let (id, end) = key.rsplit_once(':')?;
    let end = match end {
        "0" => End::Start,
        "1" => End::Terminal,
        _ => return None,
    };
    Some(EndpointRef::new(*edges.get(id)?, end))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PATH: &str = r#"{
        "edges": [
            {"id": "e1", "start": "a", "end": "c", "weight": 1, "potential": {"breakpoints": [0, 1], "values": [1]}, "mesh": 8},
            {"id": "e2", "start": "c", "end": "b", "weight": -1, "mesh": 8}
        ],
        "vertices": [
            {"id": "a", "condition": {"type": "dirichlet"}},
            {"id": "c", "condition": {"type": "kirchhoff"}},
            {"id": "b", "condition": {"type": "robin", "f": {"e2:1": 0.5}}}
        ]
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let spec = GraphSpec::from_json(PATH).unwrap();
        let g: MetricGraph<f64> = spec.to_graph().unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.endpoint_f(EndpointRef::new(1, End::Terminal)), 0.5);
        let again: MetricGraph<f64> = GraphSpec::from_graph(&g).to_graph().unwrap();
        assert_eq!(again, g);
    }

    #[test]
    fn rejects_bad_weight_length_and_keys() {
        let text = PATH
            .replace("\"weight\": -1", "\"weight\": -2, \"length\": 2.0")
            .replace("e2:1", "e9:1");
        let err = GraphSpec::from_json(&text).unwrap().to_graph::<f64>().unwrap_err();
        let Error::InvalidGraph(msgs) = err else { panic!("wrong error") };
        assert!(msgs.iter().any(|m| m.contains("weight")));
        assert!(msgs.iter().any(|m| m.contains("non-unit")));
        assert!(msgs.iter().any(|m| m.contains("e9:1")));
    }

    #[test]
    fn malformed_json_is_parse_error() {
        assert!(matches!(GraphSpec::from_json("{\"edges\": 3}"), Err(Error::Parse(_))));
        assert!(matches!(
            GraphSpec::from_json(&PATH.replace("kirchhoff", "neumannish")),
            Err(Error::Parse(_))
        ));
    }
}
