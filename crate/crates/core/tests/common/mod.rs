//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use covhole::chmap::ChMap;
use covhole::gridworld::{GridMap, WorldPoint};
use covhole::planner::{PrmGraph, PrmParams};
use covhole::trajectory::Trajectory;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Adjacency = Vec<Vec<(usize, f64)>>;

/// Quadratic Dijkstra without a heap.
pub fn dijkstra(adj: &Adjacency, s: usize, t: usize) -> Option<f64> {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[s] = 0.0;
    loop {
        let mut u = None;
        for i in 0..n {
            if !done[i] && dist[i].is_finite() && u.is_none_or(|j: usize| dist[i] < dist[j]) {
                u = Some(i);
            }
        }
        let u = u?;
        if u == t {
            return Some(dist[t]);
        }
        done[u] = true;
        for &(v, w) in &adj[u] {
            if dist[u] + w < dist[v] {
                dist[v] = dist[u] + w;
            }
        }
    }
}

pub fn adjacency_of(g: &PrmGraph) -> Adjacency {
    g.adjacency.clone()
}

/// Random undirected graph; weights are at least the Euclidean distance.
pub fn random_graph(seed: u64, n: usize) -> PrmGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<WorldPoint> = (0..n)
        .map(|_| WorldPoint::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)))
        .collect();
    let p = rng.random_range(0.05..0.4);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                let stretch = if rng.random::<bool>() { 1.0 } else { rng.random_range(1.0..1.5) };
                edges.push((i, j, nodes[i].distance(&nodes[j]) * stretch));
            }
        }
    }
    PrmGraph::from_edges(
        nodes,
        &edges,
        PrmParams {
            nodes: n,
            d_max: f64::INFINITY,
            seed,
        },
    )
    .unwrap()
}

/// Roadmap plus start (index n) and goal (index n + 1), built from scratch.
pub fn augmented(g: &PrmGraph, map: &GridMap, start: WorldPoint, goal: WorldPoint) -> Adjacency {
    let n = g.nodes.len();
    let d_max = g.params.d_max;
    let mut adj: Adjacency = g.adjacency.clone();
    adj.push(Vec::new());
    adj.push(Vec::new());
    for (k, q) in [start, goal].into_iter().enumerate() {
        for i in 0..n {
            let d = q.distance(&g.nodes[i]);
            if d < d_max && map.segment_free(q, g.nodes[i]) {
                adj[n + k].push((i, d));
                adj[i].push((n + k, d));
            }
        }
    }
    let d = start.distance(&goal);
    if d < d_max && map.segment_free(start, goal) {
        adj[n].push((n + 1, d));
        adj[n + 1].push((n, d));
    }
    adj
}

/// Minimum over every departure index of polyline prefix plus Dijkstra
/// re-route; `None` when no departure reaches the target.
pub fn exhaustive_sspr(chmap: &ChMap, g: &PrmGraph, traj: &Trajectory, indices: impl Iterator<Item = usize>) -> Option<(usize, f64)> {
    let map = chmap.grid();
    let target = traj.end();
    let n = g.nodes.len();
    let mut best: Option<(usize, f64)> = None;
    for i in indices {
        let sp = traj.samples[i].position();
        if !map.point_free(sp) {
            continue;
        }
        let prefix: f64 = traj.samples[..=i]
            .windows(2)
            .map(|w| w[0].position().distance(&w[1].position()))
            .sum();
        let adj = augmented(g, map, sp, target);
        if let Some(r) = dijkstra(&adj, n, n + 1) {
            let total = prefix + r;
            if best.is_none_or(|(_, b)| total < b) {
                best = Some((i, total));
            }
        }
    }
    best
}

/// All pairs closer than `d_max` with a free segment.
pub fn brute_force_edges(nodes: &[WorldPoint], map: &GridMap, d_max: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if nodes[i].distance(&nodes[j]) < d_max && map.segment_free(nodes[i], nodes[j]) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Points on a ring (label 1) around a core (label 0).
pub fn ring_and_core(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for k in 0..n {
        let ring = k % 2 == 0;
        let r = if ring { rng.random_range(2.0..3.0) } else { rng.random_range(0.0..1.0) };
        let a = rng.random_range(0.0..std::f64::consts::TAU);
        x.push(vec![r * a.cos(), r * a.sin()]);
        y.push(u8::from(ring));
    }
    (x, y)
}

pub fn xor() -> (Vec<Vec<f64>>, Vec<u8>) {
    (
        vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
        vec![0, 0, 1, 1],
    )
}

/// Mann-Whitney estimate of P(score of a hole < score of a covered sample),
/// ties counting one half.
pub fn mann_whitney_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut u = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if li != 0 {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj == 0 {
                continue;
            }
            if scores[i] < scores[j] {
                u += 1.0;
            } else if scores[i] == scores[j] {
                u += 0.5;
            }
        }
    }
    let pos = labels.iter().filter(|&&l| l == 0).count();
    let neg = labels.len() - pos;
    u / (pos as f64 * neg as f64)
}

pub struct SsprCase {
    pub chmap: ChMap,
    pub prm: PrmGraph,
    pub traj: Trajectory,
    pub k_now: usize,
    pub event: covhole::chmap::CoverageHoleEvent,
    pub lat: f64,
    pub profile: covhole::trajectory::ProfileParams,
}

/// Random floor of at most 20x20 cells with a hole blob across the straight
/// route; `None` when the draw does not produce an event.
pub fn sspr_case(seed: u64) -> Option<SsprCase> {
    use covhole::chmap::local_detect;
    use covhole::planner::{prm_build, shortest_route};
    use covhole::trajectory::{interpolate_safe, ProfileParams, StartState};

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(15..=20usize);
    let side = n as f64;
    let mut layout = GridMap::new(n, n, 1.0, WorldPoint::new(0.0, 0.0)).ok()?;
    for _ in 0..rng.random_range(0..3) {
        let (x, y) = (rng.random_range(3.0..side - 4.0), rng.random_range(0.0..side - 2.0));
        layout.block_rect(WorldPoint::new(x, y), WorldPoint::new(x + 1.0, y + rng.random_range(1.0..3.0)));
    }
    let start = WorldPoint::new(1.5, rng.random_range(2.0..side - 2.0));
    let target = WorldPoint::new(side - 1.5, rng.random_range(2.0..side - 2.0));
    if !layout.point_free(start) || !layout.point_free(target) {
        return None;
    }
    let profile = ProfileParams::new(0.1, 1.0, 0.8, 0.5);
    let plan_prm = prm_build(&layout, PrmParams { nodes: 80, d_max: 5.0, seed: seed ^ 1 }).ok()?;
    let (wps, _) = shortest_route(&plan_prm, &layout, start, target).ok()??;
    let traj = interpolate_safe(&wps, &profile, StartState::default(), &layout).ok()?;

    let mid = traj.samples[traj.len() / 2].position();
    let (cx, cy) = (mid.x + rng.random_range(-1.5..1.5), mid.y + rng.random_range(-1.5..1.5));
    let r = rng.random_range(1.5..3.0);
    let holes: Vec<bool> = (0..layout.len())
        .map(|i| {
            let c = layout.cell_center(layout.cell_at(i));
            (c.x - cx).hypot(c.y - cy) < r
        })
        .collect();
    let chmap = ChMap::with_holes(&layout, &holes).ok()?;
    if !chmap.grid().point_free(target) {
        return None;
    }
    let k_now = rng.random_range(0..(traj.len() / 3).max(1));
    let event = local_detect(&chmap, &traj, k_now).ok()??;
    let prm = prm_build(chmap.grid(), PrmParams { nodes: rng.random_range(40..120), d_max: rng.random_range(3.0..7.0), seed }).ok()?;
    let lat = [0.0, 0.5, 1.0, 2.0, 5.0, 100.0][rng.random_range(0..6)];
    Some(SsprCase {
        chmap,
        prm,
        traj,
        k_now,
        event,
        lat,
        profile,
    })
}

/// Departure indices: from `k_now` over `lat` seconds, stopping before the hole.
pub fn window_oracle(k_now: usize, k_bs: usize, lat: f64, dt: f64) -> Vec<usize> {
    let mut out = vec![k_now];
    let mut k = k_now + 1;
    while k < k_bs && (k - k_now) as f64 * dt <= lat + 1e-9 {
        out.push(k);
        k += 1;
    }
    out
}
