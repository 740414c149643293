//! JSON documents for instances and solutions.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, InstanceError};
use crate::network::{Arc, NetworkError, NetworkGraph, NodeRole, OdPair, RangeParams, Solution};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Field { path: String, message: String },
}

fn field(path: impl Into<String>, message: impl Into<String>) -> FormatError {
    FormatError::Field {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: u64,
    role: NodeRole,
    #[serde(default)]
    cost: Option<f64>,
    /// `null` or absent: unlimited.
    #[serde(default)]
    capacity: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArcDoc {
    tail: u64,
    head: u64,
    tau: f64,
    ell: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairDoc {
    s: u64,
    t: u64,
    f: f64,
    u: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    ranges: RangeParams,
    nodes: Vec<NodeDoc>,
    arcs: Vec<ArcDoc>,
    od_pairs: Vec<PairDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
}

/// Parses and validates an instance document. Errors name the offending
/// field, e.g. `od_pairs[0].s`.
pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    let mut index = HashMap::new();
    for (i, n) in doc.nodes.iter().enumerate() {
        if index.insert(n.id, i).is_some() {
            return Err(field(format!("nodes[{i}].id"), format!("duplicate id {}", n.id)));
        }
    }
    let mut cost = Vec::with_capacity(doc.nodes.len());
    let mut capacity = Vec::with_capacity(doc.nodes.len());
    for (i, n) in doc.nodes.iter().enumerate() {
        let c = match (n.role, n.cost) {
            (NodeRole::Station, None) => return Err(field(format!("nodes[{i}].cost"), "missing for station")),
            (_, c) => c.unwrap_or(0.0),
        };
        if !(c >= 0.0) || !c.is_finite() {
            return Err(field(
                format!("nodes[{i}].cost"),
                format!("must be nonnegative, got {c}"),
            ));
        }
        let k = n.capacity.unwrap_or(f64::INFINITY);
        if !(k >= 0.0) {
            return Err(field(
                format!("nodes[{i}].capacity"),
                format!("must be nonnegative, got {k}"),
            ));
        }
        cost.push(c);
        capacity.push(k);
    }
    let resolve = |path: String, label: u64| {
        index
            .get(&label)
            .copied()
            .ok_or_else(|| field(path, format!("unknown node id {label}")))
    };
    let mut arcs = Vec::with_capacity(doc.arcs.len());
    for (i, a) in doc.arcs.iter().enumerate() {
        for (name, v) in [("tau", a.tau), ("ell", a.ell)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(field(
                    format!("arcs[{i}].{name}"),
                    format!("must be nonnegative, got {v}"),
                ));
            }
        }
        arcs.push(Arc {
            tail: resolve(format!("arcs[{i}].tail"), a.tail)?,
            head: resolve(format!("arcs[{i}].head"), a.head)?,
            tau: a.tau,
            ell: a.ell,
        });
    }
    let mut pairs = Vec::with_capacity(doc.od_pairs.len());
    for (q, p) in doc.od_pairs.iter().enumerate() {
        pairs.push(OdPair {
            origin: resolve(format!("od_pairs[{q}].s"), p.s)?,
            dest: resolve(format!("od_pairs[{q}].t"), p.t)?,
            demand: p.f,
            time_bound: p.u,
        });
    }
    doc.ranges.validate().map_err(|e| field("ranges", e.to_string()))?;
    let nodes = doc.nodes.iter().map(|n| (n.id, n.role)).collect();
    let graph = NetworkGraph::new(nodes, arcs).map_err(|e| network_error(&doc, e))?;
    let mut inst = Instance::new(graph, doc.ranges, pairs, cost, capacity).map_err(instance_error)?;
    if let Some(l) = doc.lambda {
        if !(l >= 0.0) {
            return Err(field("lambda", format!("must be nonnegative, got {l}")));
        }
        inst.lambda = Some(l);
    }
    Ok(inst)
}

fn network_error(doc: &InstanceDoc, e: NetworkError) -> FormatError {
    let arc_path = |tail: usize, head: usize| {
        let (lt, lh) = (doc.nodes[tail].id, doc.nodes[head].id);
        doc.arcs
            .iter()
            .position(|a| a.tail == lt && a.head == lh)
            .map_or_else(|| "arcs".to_string(), |i| format!("arcs[{i}]"))
    };
    match e {
        NetworkError::SelfLoop { tail, head } | NetworkError::ParallelArc { tail, head } => {
            field(arc_path(tail, head), e.to_string())
        }
        _ => field("arcs", e.to_string()),
    }
}

fn instance_error(e: InstanceError) -> FormatError {
    let path = match &e {
        InstanceError::OriginNotTerminal { pair } => format!("od_pairs[{pair}].s"),
        InstanceError::DestNotTerminal { pair } => format!("od_pairs[{pair}].t"),
        InstanceError::SameEndpoints { pair } | InstanceError::UnknownNode { pair, .. } => format!("od_pairs[{pair}]"),
        InstanceError::InvalidDemand { pair, .. } => format!("od_pairs[{pair}].f"),
        InstanceError::InvalidTimeBound { pair, .. } => format!("od_pairs[{pair}].u"),
        InstanceError::InvalidCost { node, .. } => format!("nodes[{node}].cost"),
        InstanceError::InvalidCapacity { node, .. } => format!("nodes[{node}].capacity"),
        _ => "instance".to_string(),
    };
    field(path, e.to_string())
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn write_instance(instance: &Instance) -> String {
    let g = &instance.graph;
    let nodes = (0..g.node_count())
        .map(|v| {
            let station = g.is_station(v);
            NodeDoc {
                id: g.label(v),
                role: g.role(v),
                cost: station.then_some(instance.cost[v]),
                capacity: if station { finite(instance.capacity[v]) } else { None },
            }
        })
        .collect();
    let arcs = g
        .arcs()
        .iter()
        .map(|a| ArcDoc {
            tail: g.label(a.tail),
            head: g.label(a.head),
            tau: a.tau,
            ell: a.ell,
        })
        .collect();
    let od_pairs = instance
        .pairs
        .iter()
        .map(|p| PairDoc {
            s: g.label(p.origin),
            t: g.label(p.dest),
            f: p.demand,
            u: p.time_bound,
        })
        .collect();
    let doc = InstanceDoc {
        ranges: instance.ranges,
        nodes,
        arcs,
        od_pairs,
        lambda: instance.lambda,
    };
    serde_json::to_string_pretty(&doc).expect("instance documents serialize")
}

/// Solution document keyed by node labels; routes are keyed by pair index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub objective: f64,
    pub open: Vec<u64>,
    pub routes: BTreeMap<String, Vec<u64>>,
    /// Load over capacity per open station; `null` for unlimited capacity.
    pub utilization: BTreeMap<String, Option<f64>>,
}

impl SolutionDoc {
    pub fn new(instance: &Instance, solution: &Solution) -> Self {
        let g = &instance.graph;
        let routes = solution
            .routes
            .iter()
            .enumerate()
            .map(|(q, r)| (q.to_string(), r.iter().map(|&v| g.label(v)).collect()))
            .collect();
        let utilization = solution
            .open
            .iter()
            .map(|&v| {
                let load = solution.load.get(&v).copied().unwrap_or(0.0);
                let k = instance.capacity[v];
                let u = (k.is_finite() && k > 0.0).then(|| load / k);
                (g.label(v).to_string(), u)
            })
            .collect();
        SolutionDoc {
            objective: solution.objective,
            open: solution.open.iter().map(|&v| g.label(v)).collect(),
            routes,
            utilization,
        }
    }
}

pub fn write_solution(instance: &Instance, solution: &Solution) -> String {
    serde_json::to_string_pretty(&SolutionDoc::new(instance, solution)).expect("solution documents serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_network;

    const MINIMAL: &str = r#"{
        "ranges": {"r_max": 4.0, "rho_orig": 2.0, "rho_dest": 2.0},
        "nodes": [
            {"id": 10, "role": "terminal"},
            {"id": 11, "role": "station", "cost": 1, "capacity": null},
            {"id": 12, "role": "terminal"}
        ],
        "arcs": [
            {"tail": 10, "head": 11, "tau": 1.0, "ell": 1.0},
            {"tail": 11, "head": 12, "tau": 1.0, "ell": 1.0}
        ],
        "od_pairs": [{"s": 10, "t": 12, "f": 1, "u": 3}]
    }"#;

    #[test]
    fn minimal_document() {
        let inst = parse_instance(MINIMAL).unwrap();
        assert_eq!(inst.station_count(), 1);
        assert_eq!(inst.pairs.len(), 1);
        assert!(inst.capacity[1].is_infinite());
    }

    #[test]
    fn origin_must_be_terminal() {
        let bad = MINIMAL.replace(r#""s": 10"#, r#""s": 11"#);
        let err = parse_instance(&bad).unwrap_err().to_string();
        assert!(err.contains("od_pairs[0].s"), "{err}");
        assert!(err.contains("origin must be terminal"), "{err}");
    }

    #[test]
    fn dangling_reference_and_negative_values() {
        let err = parse_instance(&MINIMAL.replace(r#""head": 12"#, r#""head": 99"#)).unwrap_err();
        assert!(err.to_string().contains("arcs[1].head"), "{err}");
        let err = parse_instance(&MINIMAL.replace(r#""cost": 1"#, r#""cost": -1"#)).unwrap_err();
        assert!(err.to_string().contains("nodes[1].cost"), "{err}");
        let err = parse_instance(&MINIMAL.replace(r#""f": 1"#, r#""f": 0"#)).unwrap_err();
        assert!(err.to_string().contains("od_pairs[0].f"), "{err}");
    }

    #[test]
    fn round_trip() {
        let mut fx = example_network(5.0, &[1.0, 2.0]);
        fx.instance.capacity[fx.b] = 3.0;
        fx.instance.lambda = Some(0.1);
        let text = write_instance(&fx.instance);
        assert_eq!(parse_instance(&text).unwrap(), fx.instance);
    }

    #[test]
    fn solution_document_uses_labels() {
        let fx = example_network(5.0, &[1.0]);
        let sol = Solution::new(&fx.instance, [fx.b].into_iter().collect(), vec![vec![fx.s, fx.b, fx.t]]);
        let doc = SolutionDoc::new(&fx.instance, &sol);
        assert_eq!(doc.open, vec![2]);
        assert_eq!(doc.routes["0"], vec![0, 2, 5]);
        assert_eq!(doc.utilization["2"], None);
    }
}
