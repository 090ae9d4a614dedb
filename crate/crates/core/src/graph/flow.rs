//! Unit-capacity max-flow (Edmonds–Karp) used by the cut routines.

use std::collections::VecDeque;

pub(super) const INF: u64 = u64::MAX / 4;

#[derive(Debug, Clone)]
pub(super) struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u64>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            adj: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn push_pair(&mut self, u: usize, v: usize, forward: u64, backward: u64) {
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(forward);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(backward);
    }

    pub fn add_arc(&mut self, u: usize, v: usize, cap: u64) {
        self.push_pair(u, v, cap, 0);
    }

    /// An undirected edge: capacity `cap` in each direction.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: u64) {
        self.push_pair(u, v, cap, cap);
    }

    /// Pushes flow from `s` to `t` until the maximum is reached or the total
    /// hits `limit`; returns `min(max_flow, limit)`.
    pub fn max_flow(&mut self, s: usize, t: usize, limit: u64) -> u64 {
        if s == t {
            return limit;
        }
        let n = self.adj.len();
        let mut total = 0u64;
        let mut via = vec![usize::MAX; n];
        let mut queue = VecDeque::with_capacity(n);
        while total < limit {
            via.fill(usize::MAX);
            queue.clear();
            queue.push_back(s);
            let mut found = false;
            'bfs: while let Some(u) = queue.pop_front() {
                for &e in &self.adj[u] {
                    let v = self.to[e];
                    if self.cap[e] > 0 && v != s && via[v] == usize::MAX {
                        via[v] = e;
                        if v == t {
                            found = true;
                            break 'bfs;
                        }
                        queue.push_back(v);
                    }
                }
            }
            if !found {
                break;
            }
            let mut bottleneck = limit - total;
            let mut v = t;
            while v != s {
                let e = via[v];
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = via[v];
                self.cap[e] -= bottleneck;
                self.cap[e ^ 1] = self.cap[e ^ 1].saturating_add(bottleneck);
                v = self.to[e ^ 1];
            }
            total += bottleneck;
        }
        total
    }
}
