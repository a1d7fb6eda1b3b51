//! Integral minimum-cost flow by the primal-dual method: Dijkstra with
//! potentials finds the shortest-path distances, then a Dinic-style
//! blocking flow saturates every shortest path at once before the next
//! Dijkstra round. Costs must be non-negative.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

const INF: i64 = i64::MAX / 4;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: i64,
    cost: i64,
}

#[derive(Debug, Clone)]
pub struct MinCostFlow {
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
    original_cap: Vec<i64>,
    /// Kept across calls so later solves start from valid reduced costs.
    potential: Vec<i64>,
}

impl MinCostFlow {
    pub fn new(nodes: usize) -> Self {
        Self {
            edges: Vec::new(),
            adjacency: vec![Vec::new(); nodes],
            original_cap: Vec::new(),
            potential: vec![0; nodes],
        }
    }

    /// Adds a directed arc and returns its id.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: i64) -> usize {
        debug_assert!(cap >= 0 && cost >= 0);
        let id = self.edges.len();
        self.adjacency[from].push(id);
        self.edges.push(Edge { to, cap, cost });
        self.adjacency[to].push(id + 1);
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.original_cap.push(cap);
        self.original_cap.push(0);
        id
    }

    /// Flow currently on arc `id`.
    pub fn flow(&self, id: usize) -> i64 {
        self.original_cap[id] - self.edges[id].cap
    }

    /// Sends up to `limit` units from `s` to `t` at minimum cost and
    /// returns `(flow, cost)`.
    pub fn solve(&mut self, s: usize, t: usize, limit: i64) -> (i64, i64) {
        let n = self.adjacency.len();
        let mut potential = std::mem::take(&mut self.potential);
        let (mut flow, mut cost) = (0i64, 0i64);
        while flow < limit {
            let dist = self.dijkstra(s, &potential);
            if dist[t] >= INF {
                break;
            }
            for v in 0..n {
                if dist[v] < INF {
                    potential[v] += dist[v];
                }
            }
            let pushed = self.blocking_flow(s, t, limit - flow, &potential);
            if pushed == 0 {
                break;
            }
            flow += pushed;
            cost += pushed * (potential[t] - potential[s]);
        }
        self.potential = potential;
        (flow, cost)
    }

    fn reduced(&self, from: usize, e: usize, potential: &[i64]) -> i64 {
        let edge = &self.edges[e];
        edge.cost + potential[from] - potential[edge.to]
    }

    fn dijkstra(&self, s: usize, potential: &[i64]) -> Vec<i64> {
        let mut dist = vec![INF; self.adjacency.len()];
        let mut heap = BinaryHeap::new();
        dist[s] = 0;
        heap.push(Reverse((0i64, s)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &e in &self.adjacency[u] {
                if self.edges[e].cap == 0 {
                    continue;
                }
                let v = self.edges[e].to;
                let nd = d + self.reduced(u, e, potential);
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        dist
    }

    /// Max flow restricted to residual arcs of zero reduced cost.
    fn blocking_flow(&mut self, s: usize, t: usize, limit: i64, potential: &[i64]) -> i64 {
        let n = self.adjacency.len();
        let mut total = 0;
        loop {
            let mut level = vec![usize::MAX; n];
            level[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &e in &self.adjacency[u] {
                    let v = self.edges[e].to;
                    if self.edges[e].cap > 0
                        && level[v] == usize::MAX
                        && self.reduced(u, e, potential) == 0
                    {
                        level[v] = level[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if level[t] == usize::MAX {
                return total;
            }
            let mut next = vec![0usize; n];
            loop {
                let pushed = self.augment(s, t, limit - total, &level, &mut next, potential);
                if pushed == 0 {
                    break;
                }
                total += pushed;
                if total == limit {
                    return total;
                }
            }
        }
    }

    /// One augmenting path in the level graph, found iteratively.
    fn augment(
        &mut self,
        s: usize,
        t: usize,
        limit: i64,
        level: &[usize],
        next: &mut [usize],
        potential: &[i64],
    ) -> i64 {
        let mut path: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                let pushed = path
                    .iter()
                    .map(|&e| self.edges[e].cap)
                    .min()
                    .unwrap_or(0)
                    .min(limit);
                for &e in &path {
                    self.edges[e].cap -= pushed;
                    self.edges[e ^ 1].cap += pushed;
                }
                return pushed;
            }
            let mut advanced = false;
            while next[u] < self.adjacency[u].len() {
                let e = self.adjacency[u][next[u]];
                let v = self.edges[e].to;
                if self.edges[e].cap > 0
                    && level[v] == level[u] + 1
                    && self.reduced(u, e, potential) == 0
                {
                    path.push(e);
                    u = v;
                    advanced = true;
                    break;
                }
                next[u] += 1;
            }
            if !advanced {
                // dead end: retreat and skip the arc that led here
                let Some(e) = path.pop() else {
                    return 0;
                };
                u = self.edges[e ^ 1].to;
                next[u] += 1;
            }
        }
    }
}
