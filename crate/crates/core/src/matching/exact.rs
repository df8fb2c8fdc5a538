//! Flow-based oracles: maximum-cardinality b-matching by Dinic's
//! algorithm and maximum-weight b-matching by successive shortest paths.

use std::collections::VecDeque;

use super::{MatchingError, MatchingSolution, SolveMethod};
use crate::graph::BipartiteInstance;

struct Arc {
    to: usize,
    cap: i64,
    cost: f64,
}

struct FlowNet {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl FlowNet {
    fn new(nodes: usize) -> Self {
        Self { arcs: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    fn add(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, cost });
        self.arcs.push(Arc { to: from, cap: 0, cost: -cost });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    fn bfs_levels(&self, s: usize, t: usize) -> Option<Vec<i32>> {
        let mut level = vec![-1; self.adj.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let arc = &self.arcs[a];
                if arc.cap > 0 && level[arc.to] < 0 {
                    level[arc.to] = level[u] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        (level[t] >= 0).then_some(level)
    }

    fn dfs(&mut self, u: usize, t: usize, f: i64, level: &[i32], it: &mut [usize]) -> i64 {
        if u == t {
            return f;
        }
        while it[u] < self.adj[u].len() {
            let a = self.adj[u][it[u]];
            let (to, cap) = (self.arcs[a].to, self.arcs[a].cap);
            if cap > 0 && level[to] == level[u] + 1 {
                let d = self.dfs(to, t, f.min(cap), level, it);
                if d > 0 {
                    self.arcs[a].cap -= d;
                    self.arcs[a ^ 1].cap += d;
                    return d;
                }
            }
            it[u] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        while let Some(level) = self.bfs_levels(s, t) {
            let mut it = vec![0; self.adj.len()];
            loop {
                let f = self.dfs(s, t, i64::MAX, &level, &mut it);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
        total
    }

    /// Augments one unit at a time along cheapest paths while the path cost
    /// is negative, or until `units` have been sent when given.
    fn min_cost_flow(&mut self, s: usize, t: usize, units: Option<usize>) -> usize {
        let mut sent = 0;
        let n = self.adj.len();
        loop {
            let mut dist = vec![f64::INFINITY; n];
            let mut prev = vec![usize::MAX; n];
            let mut in_queue = vec![false; n];
            dist[s] = 0.0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                in_queue[u] = false;
                for &a in &self.adj[u] {
                    let arc = &self.arcs[a];
                    if arc.cap > 0 && dist[u] + arc.cost < dist[arc.to] - 1e-15 {
                        dist[arc.to] = dist[u] + arc.cost;
                        prev[arc.to] = a;
                        if !in_queue[arc.to] {
                            in_queue[arc.to] = true;
                            queue.push_back(arc.to);
                        }
                    }
                }
            }
            match units {
                Some(u) if sent >= u || dist[t].is_infinite() => break,
                None if !(dist[t] < 0.0) => break,
                _ => {}
            }
            sent += 1;
            let mut v = t;
            while v != s {
                let a = prev[v];
                self.arcs[a].cap -= 1;
                self.arcs[a ^ 1].cap += 1;
                v = self.arcs[a ^ 1].to;
            }
        }
        sent
    }
}

fn build(inst: &BipartiteInstance, weights: Option<&[f64]>) -> (FlowNet, Vec<(usize, usize, usize)>) {
    let (m, n) = (inst.users(), inst.aps());
    let (s, t) = (0, m + n + 1);
    let mut net = FlowNet::new(m + n + 2);
    for u in 0..m {
        net.add(s, 1 + u, inst.demand()[u] as i64, 0.0);
    }
    let mut edge_arcs = Vec::new();
    for (u, a) in inst.edges() {
        let cost = weights.map_or(0.0, |w| -w[u * n + a]);
        let id = net.add(1 + u, 1 + m + a, 1, cost);
        edge_arcs.push((u, a, id));
    }
    for a in 0..n {
        net.add(1 + m + a, t, inst.capacity() as i64, 0.0);
    }
    (net, edge_arcs)
}

fn extract(inst: &BipartiteInstance, net: &FlowNet, edge_arcs: &[(usize, usize, usize)], method: SolveMethod) -> MatchingSolution {
    let mut matched = vec![Vec::new(); inst.users()];
    for &(u, a, id) in edge_arcs {
        if net.arcs[id].cap == 0 {
            matched[u].push(a);
        }
    }
    MatchingSolution::from_matched(inst, matched, 0, true, method)
}

/// Maximum-cardinality b-matching.
pub fn solve_exact(inst: &BipartiteInstance) -> MatchingSolution {
    let (mut net, edge_arcs) = build(inst, None);
    net.max_flow(0, inst.users() + inst.aps() + 1);
    extract(inst, &net, &edge_arcs, SolveMethod::Exact)
}

/// Maximum-weight b-matching for positive per-edge weights given as a
/// dense row-major `M x N` slice.
pub fn solve_max_weight(inst: &BipartiteInstance, weights: &[f64]) -> MatchingSolution {
    assert_eq!(weights.len(), inst.users() * inst.aps());
    let (mut net, edge_arcs) = build(inst, Some(weights));
    net.min_cost_flow(0, inst.users() + inst.aps() + 1, None);
    extract(inst, &net, &edge_arcs, SolveMethod::MaxWeight)
}

/// Filler sets for `users` found by max-flow on the complement of the
/// matched edges, restricted to the spare AP capacity.
pub(super) fn complete_by_flow(
    sol: &MatchingSolution,
    inst: &BipartiteInstance,
    users: &[usize],
) -> Result<Vec<Vec<usize>>, MatchingError> {
    let (u, n) = (users.len(), inst.aps());
    let (s, t) = (0, u + n + 1);
    let load = sol.ap_loads();
    let mut net = FlowNet::new(u + n + 2);
    let mut arcs = Vec::new();
    let mut needed_total = 0;
    for (i, &m) in users.iter().enumerate() {
        let needed = inst.demand()[m] - sol.matched(m).len();
        needed_total += needed;
        net.add(s, 1 + i, needed as i64, 0.0);
        for a in (0..n).filter(|a| !sol.matched(m).contains(a)) {
            arcs.push((i, a, net.add(1 + i, 1 + u + a, 1, 0.0)));
        }
    }
    for a in 0..n {
        net.add(1 + u + a, t, inst.capacity().saturating_sub(load[a]) as i64, 0.0);
    }
    let flow = net.max_flow(s, t) as usize;
    let mut out = vec![Vec::new(); u];
    for (i, a, id) in arcs {
        if net.arcs[id].cap == 0 {
            out[i].push(a);
        }
    }
    if flow < needed_total {
        let (i, m) = users
            .iter()
            .enumerate()
            .find(|&(i, &m)| out[i].len() + sol.matched(m).len() < inst.demand()[m])
            .map(|(i, &m)| (i, m))
            .unwrap_or((0, users[0]));
        return Err(MatchingError::CompletionInfeasible {
            user: m,
            needed: inst.demand()[m] - sol.matched(m).len(),
            available: out[i].len(),
        });
    }
    Ok(out)
}

/// Assignment of exactly `K_m` distinct APs to every user with AP loads at
/// most `L` that maximizes the total weight, where present edges weigh
/// `weights` and absent pairs weigh `filler_weights` (both dense `M x N`).
/// Always exists for a valid instance.
pub(super) fn solve_complete_assignment(
    inst: &BipartiteInstance,
    weights: &[f64],
    filler_weights: &[f64],
) -> Result<(Vec<Vec<usize>>, Vec<Vec<usize>>), MatchingError> {
    let (m, n) = (inst.users(), inst.aps());
    let (s, t) = (0, m + n + 1);
    let mut net = FlowNet::new(m + n + 2);
    for u in 0..m {
        net.add(s, 1 + u, inst.demand()[u] as i64, 0.0);
    }
    let mut arcs = Vec::with_capacity(m * n);
    for u in 0..m {
        for a in 0..n {
            let w = if inst.has_edge(u, a) { weights[u * n + a] } else { filler_weights[u * n + a] };
            arcs.push((u, a, net.add(1 + u, 1 + m + a, 1, -w)));
        }
    }
    for a in 0..n {
        net.add(1 + m + a, t, inst.capacity() as i64, 0.0);
    }
    let need = inst.k_sum();
    let sent = net.min_cost_flow(s, t, Some(need));
    if sent < need {
        return Err(MatchingError::CompletionInfeasible { user: 0, needed: need, available: sent });
    }
    let mut matched = vec![Vec::new(); m];
    let mut fillers = vec![Vec::new(); m];
    for (u, a, id) in arcs {
        if net.arcs[id].cap == 0 {
            if inst.has_edge(u, a) {
                matched[u].push(a);
            } else {
                fillers[u].push(a);
            }
        }
    }
    Ok((matched, fillers))
}
