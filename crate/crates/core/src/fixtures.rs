//! Small hand-checkable networks shared by unit and integration tests.

use crate::instance::Instance;
use crate::network::{Arc, NetworkGraph, NodeId, NodeRole, OdPair, RangeParams};

/// The six-node example network: terminals `s`, `t` and stations
/// `a`, `b`, `c`, `d`. Distances equal transit times.
#[derive(Debug, Clone)]
pub struct ExampleGraph {
    pub graph: NetworkGraph,
    pub s: NodeId,
    pub a: NodeId,
    pub b: NodeId,
    pub c: NodeId,
    pub d: NodeId,
    pub t: NodeId,
}

pub fn example_graph() -> ExampleGraph {
    let nodes = vec![
        (0, NodeRole::Terminal),
        (1, NodeRole::Station),
        (2, NodeRole::Station),
        (3, NodeRole::Station),
        (4, NodeRole::Station),
        (5, NodeRole::Terminal),
    ];
    let (s, a, b, c, d, t) = (0, 1, 2, 3, 4, 5);
    let arcs = [
        (s, a, 2.0),
        (s, b, 2.0),
        (a, c, 1.0),
        (b, c, 1.0),
        (a, d, 1.0),
        (d, t, 2.0),
        (c, t, 3.0),
        (b, t, 3.0),
    ]
    .into_iter()
    .map(|(tail, head, tau)| Arc {
        tail,
        head,
        tau,
        ell: tau,
    })
    .collect();
    ExampleGraph {
        graph: NetworkGraph::new(nodes, arcs).expect("valid example graph"),
        s,
        a,
        b,
        c,
        d,
        t,
    }
}

#[derive(Debug, Clone)]
pub struct ExampleInstance {
    pub instance: Instance,
    pub s: NodeId,
    pub a: NodeId,
    pub b: NodeId,
    pub c: NodeId,
    pub d: NodeId,
    pub t: NodeId,
}

/// The example network with one `s -> t` pair per entry of `demands`, all
/// with time bound `u`, unit station costs and unlimited capacities.
pub fn example_network(u: f64, demands: &[f64]) -> ExampleInstance {
    let ExampleGraph {
        graph,
        s,
        a,
        b,
        c,
        d,
        t,
    } = example_graph();
    let n = graph.node_count();
    let pairs = demands
        .iter()
        .map(|&f| OdPair {
            origin: s,
            dest: t,
            demand: f,
            time_bound: u,
        })
        .collect();
    let instance = Instance::new(
        graph,
        RangeParams::half_capacity(4.0),
        pairs,
        vec![1.0; n],
        vec![f64::INFINITY; n],
    )
    .expect("valid example instance");
    ExampleInstance {
        instance,
        s,
        a,
        b,
        c,
        d,
        t,
    }
}

#[derive(Debug, Clone)]
pub struct ChainInstance {
    pub instance: Instance,
    pub s: NodeId,
    pub mid: NodeId,
    pub t: NodeId,
}

/// `s -> mid -> t` with one unit pair and a generous time bound.
pub fn example_chain() -> ChainInstance {
    let nodes = vec![(0, NodeRole::Terminal), (1, NodeRole::Station), (2, NodeRole::Terminal)];
    let arcs = vec![
        Arc {
            tail: 0,
            head: 1,
            tau: 1.0,
            ell: 1.0,
        },
        Arc {
            tail: 1,
            head: 2,
            tau: 1.0,
            ell: 1.0,
        },
    ];
    let graph = NetworkGraph::new(nodes, arcs).expect("valid chain");
    let pair = OdPair {
        origin: 0,
        dest: 2,
        demand: 1.0,
        time_bound: 10.0,
    };
    let instance = Instance::new(
        graph,
        RangeParams::half_capacity(2.0),
        vec![pair],
        vec![1.0; 3],
        vec![f64::INFINITY; 3],
    )
    .expect("valid chain instance");
    ChainInstance {
        instance,
        s: 0,
        mid: 1,
        t: 2,
    }
}
