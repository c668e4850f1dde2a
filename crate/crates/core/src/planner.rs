//! Probabilistic roadmap over the free cells of a map and A* queries on it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gridworld::{GridMap, WorldPoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrmParams {
    pub nodes: usize,
    /// Connection radius (m); edges are strictly shorter.
    pub d_max: f64,
    pub seed: u64,
}

/// Rejection-sampling budget per requested node.
pub const ATTEMPTS_PER_NODE: usize = 100;

/// Weighted undirected graph with positioned nodes.
pub trait Graph {
    fn node_count(&self) -> usize;
    fn position(&self, i: usize) -> WorldPoint;
    fn for_each_neighbor(&self, i: usize, f: &mut dyn FnMut(usize, f64));
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrmGraph {
    pub nodes: Vec<WorldPoint>,
    /// Sorted by neighbor index.
    pub adjacency: Vec<Vec<(usize, f64)>>,
    pub params: PrmParams,
}

impl Graph for PrmGraph {
    fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn position(&self, i: usize) -> WorldPoint {
        self.nodes[i]
    }

    fn for_each_neighbor(&self, i: usize, f: &mut dyn FnMut(usize, f64)) {
        for &(j, w) in &self.adjacency[i] {
            f(j, w);
        }
    }
}

impl PrmGraph {
    /// Builds a graph from explicit nodes and edges (for tests and reloads).
    pub fn from_edges(nodes: Vec<WorldPoint>, edges: &[(usize, usize, f64)], params: PrmParams) -> Result<PrmGraph> {
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for &(i, j, w) in edges {
            if i >= nodes.len() || j >= nodes.len() || i == j {
                return Err(Error::Planning(format!("bad edge ({i}, {j})")));
            }
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
        for adj in &mut adjacency {
            adj.sort_by_key(|&(j, _)| j);
        }
        Ok(PrmGraph {
            nodes,
            adjacency,
            params,
        })
    }

    /// Each undirected edge once, `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, adj) in self.adjacency.iter().enumerate() {
            for &(j, w) in adj {
                if i < j {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn nodes_csv(&self) -> String {
        let mut s = String::from("id,x,y\n");
        for (i, p) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "{i},{:.6},{:.6}", p.x, p.y);
        }
        s
    }

    pub fn edges_csv(&self) -> String {
        let mut s = String::from("i,j,weight\n");
        for (i, j, w) in self.edges() {
            let _ = writeln!(s, "{i},{j},{w:.6}");
        }
        s
    }
}

/// Samples `params.nodes` free positions and links every pair closer than
/// `d_max` whose segment is free.
pub fn prm_build(map: &GridMap, params: PrmParams) -> Result<PrmGraph> {
    if params.nodes < 2 {
        return Err(Error::Planning(format!("need at least 2 nodes, got {}", params.nodes)));
    }
    if !(params.d_max >= 0.0) {
        return Err(Error::Planning(format!("D_max must be non-negative, got {}", params.d_max)));
    }
    if map.free_cells().is_empty() {
        return Err(Error::NoFreeSpace);
    }
    let (lo, hi) = map.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut nodes = Vec::with_capacity(params.nodes);
    let cap = ATTEMPTS_PER_NODE * params.nodes;
    let mut attempts = 0;
    while nodes.len() < params.nodes {
        if attempts == cap {
            return Err(Error::Planning(format!(
                "placed only {} of {} nodes after {cap} attempts",
                nodes.len(),
                params.nodes
            )));
        }
        attempts += 1;
        let p = WorldPoint::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        if map.point_free(p) {
            nodes.push(p);
        }
    }
    let mut edges = Vec::new();
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let d = nodes[i].distance(&nodes[j]);
            if d < params.d_max && map.segment_free(nodes[i], nodes[j]) {
                edges.push((i, j, d));
            }
        }
    }
    PrmGraph::from_edges(nodes, &edges, params)
}

/// A roadmap with a start (index `N`) and goal (index `N + 1`) attached.
/// The underlying roadmap is borrowed, not modified.
#[derive(Debug, Clone)]
pub struct QueryGraph<'a> {
    base: &'a PrmGraph,
    extra: [WorldPoint; 2],
    /// Links from each extra node to base nodes.
    links: [Vec<(usize, f64)>; 2],
    /// Base node -> extra links, indexed by base node.
    back: Vec<Vec<(usize, f64)>>,
    direct: Option<f64>,
}

impl QueryGraph<'_> {
    pub fn start(&self) -> usize {
        self.base.nodes.len()
    }

    pub fn goal(&self) -> usize {
        self.base.nodes.len() + 1
    }
}

impl Graph for QueryGraph<'_> {
    fn node_count(&self) -> usize {
        self.base.nodes.len() + 2
    }

    fn position(&self, i: usize) -> WorldPoint {
        let n = self.base.nodes.len();
        if i < n {
            self.base.nodes[i]
        } else {
            self.extra[i - n]
        }
    }

    fn for_each_neighbor(&self, i: usize, f: &mut dyn FnMut(usize, f64)) {
        let n = self.base.nodes.len();
        if i < n {
            self.base.for_each_neighbor(i, f);
            for &(j, w) in &self.back[i] {
                f(j, w);
            }
        } else {
            let e = i - n;
            for &(j, w) in &self.links[e] {
                f(j, w);
            }
            if let Some(w) = self.direct {
                f(n + 1 - e, w);
            }
        }
    }
}

/// Attaches `start` and `goal` under the roadmap's radius and collision rule.
pub fn connect_query_points<'a>(
    g: &'a PrmGraph,
    map: &GridMap,
    start: WorldPoint,
    goal: WorldPoint,
) -> Result<QueryGraph<'a>> {
    if !map.point_free(start) {
        return Err(Error::StartBlocked);
    }
    if !map.point_free(goal) {
        return Err(Error::GoalBlocked);
    }
    let n = g.nodes.len();
    let d_max = g.params.d_max;
    let mut links: [Vec<(usize, f64)>; 2] = [Vec::new(), Vec::new()];
    let mut back = vec![Vec::new(); n];
    for (e, q) in [start, goal].into_iter().enumerate() {
        for (i, p) in g.nodes.iter().enumerate() {
            let d = q.distance(p);
            if d < d_max && map.segment_free(q, *p) {
                links[e].push((i, d));
                back[i].push((n + e, d));
            }
        }
    }
    let d = start.distance(&goal);
    let direct = (d < d_max && map.segment_free(start, goal)).then_some(d);
    if direct.is_none() {
        if links[0].is_empty() {
            return Err(Error::Planning("start has no feasible roadmap connection".into()));
        }
        if links[1].is_empty() {
            return Err(Error::Planning("goal has no feasible roadmap connection".into()));
        }
    }
    Ok(QueryGraph {
        base: g,
        extra: [start, goal],
        links,
        back,
        direct,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphPath {
    pub nodes: Vec<usize>,
    pub length: f64,
}

impl GraphPath {
    pub fn positions<G: Graph + ?Sized>(&self, g: &G) -> Vec<WorldPoint> {
        self.nodes.iter().map(|&i| g.position(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    f: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // min-heap on f, then on node index
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest path with the straight-line heuristic; `None` if unreachable.
pub fn astar<G: Graph + ?Sized>(g: &G, s: usize, t: usize) -> Option<GraphPath> {
    let n = g.node_count();
    if s >= n || t >= n {
        return None;
    }
    let goal = g.position(t);
    let h = |i: usize| g.position(i).distance(&goal);
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Entry { f: h(s), node: s });
    while let Some(Entry { node, .. }) = heap.pop() {
        if closed[node] {
            continue;
        }
        closed[node] = true;
        if node == t {
            let mut nodes = vec![t];
            while let Some(&last) = nodes.last() {
                if last == s {
                    break;
                }
                nodes.push(parent[last]);
            }
            nodes.reverse();
            return Some(GraphPath {
                nodes,
                length: dist[t],
            });
        }
        let base = dist[node];
        g.for_each_neighbor(node, &mut |j, w| {
            if closed[j] {
                return;
            }
            let cand = base + w;
            if cand < dist[j] {
                dist[j] = cand;
                parent[j] = node;
                heap.push(Entry { f: cand + h(j), node: j });
            }
        });
    }
    None
}

/// Re-route from `start` to `goal` through the roadmap.
pub fn shortest_route(
    g: &PrmGraph,
    map: &GridMap,
    start: WorldPoint,
    goal: WorldPoint,
) -> Result<Option<(Vec<WorldPoint>, f64)>> {
    let q = connect_query_points(g, map, start, goal)?;
    Ok(astar(&q, q.start(), q.goal()).map(|p| (p.positions(&q), p.length)))
}
