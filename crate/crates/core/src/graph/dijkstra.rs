use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Which way arcs are traversed: forward computes distances from the source,
/// backward computes distances to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Minimal adjacency interface shared by the full network and the per-pair
/// subgraphs.
pub trait Digraph {
    fn node_count(&self) -> usize;

    /// Calls `f(neighbor, arc, tau)` for every arc leaving `v` (forward) or
    /// entering `v` (backward).
    fn visit_arcs(&self, v: usize, dir: Direction, f: &mut dyn FnMut(usize, usize, f64));
}

/// Number of Dijkstra invocations during one solve.
#[derive(Debug, Default)]
pub struct DijkstraCounter(Cell<u64>);

impl DijkstraCounter {
    pub fn count(&self) -> u64 {
        self.0.get()
    }

    fn bump(&self) {
        self.0.set(self.0.get() + 1);
    }
}

#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub source: usize,
    pub dir: Direction,
    pub dist: Vec<f64>,
    /// Predecessor `(node, arc)` on the shortest-path tree.
    pub pred: Vec<Option<(usize, usize)>>,
}

impl ShortestPaths {
    pub fn reached(&self, v: usize) -> bool {
        self.dist[v].is_finite()
    }

    /// Nodes of the tree path between the source and `v`, listed in arc
    /// direction (source first when forward, `v` first when backward).
    pub fn path(&self, v: usize) -> Option<Vec<usize>> {
        if !self.reached(v) {
            return None;
        }
        let mut nodes = vec![v];
        let mut cur = v;
        while let Some((p, _)) = self.pred[cur] {
            nodes.push(p);
            cur = p;
        }
        if self.dir == Direction::Forward {
            nodes.reverse();
        }
        Some(nodes)
    }

    /// Arc indexes of the tree path, in arc direction.
    pub fn arcs(&self, v: usize) -> Option<Vec<usize>> {
        if !self.reached(v) {
            return None;
        }
        let mut arcs = Vec::new();
        let mut cur = v;
        while let Some((p, a)) = self.pred[cur] {
            arcs.push(a);
            cur = p;
        }
        if self.dir == Direction::Forward {
            arcs.reverse();
        }
        Some(arcs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, node)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Label-setting shortest paths. `weight(arc)` returns the nonnegative
/// weight of an arc or `None` when the arc is disabled.
pub fn dijkstra<G, W>(graph: &G, source: usize, dir: Direction, weight: W, counter: &DijkstraCounter) -> ShortestPaths
where
    G: Digraph + ?Sized,
    W: Fn(usize) -> Option<f64>,
{
    counter.bump();
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry {
        dist: 0.0,
        node: source,
    });
    while let Some(Entry { dist: d, node: v }) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        graph.visit_arcs(v, dir, &mut |w, arc, _tau| {
            let Some(len) = weight(arc) else { return };
            debug_assert!(len >= 0.0, "negative arc weight {len}");
            let cand = d + len;
            if cand < dist[w] {
                dist[w] = cand;
                pred[w] = Some((v, arc));
                heap.push(Entry { dist: cand, node: w });
            }
        });
    }
    ShortestPaths {
        source,
        dir,
        dist,
        pred,
    }
}

/// Breadth-first hop distances; `usize::MAX` marks unreachable nodes.
pub fn hop_distances<G, F>(graph: &G, source: usize, dir: Direction, allowed: F) -> Vec<usize>
where
    G: Digraph + ?Sized,
    F: Fn(usize) -> bool,
{
    let mut hops = vec![usize::MAX; graph.node_count()];
    let mut queue = std::collections::VecDeque::new();
    hops[source] = 0;
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        graph.visit_arcs(v, dir, &mut |w, arc, _| {
            if hops[w] == usize::MAX && allowed(arc) {
                hops[w] = hops[v] + 1;
                queue.push_back(w);
            }
        });
    }
    hops
}
