//! Random bipartite graph of users and Fog-APs with degree bounds.

use std::fmt::Write as _;

use rand::Rng as _;
use thiserror::Error;

use crate::bitmatrix::BitMatrix;
use crate::channel::QuantizedCsiMatrix;
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("infeasible demand: {0}")]
    InfeasibleDemand(String),
    #[error("degree bounds must be at least one: {0}")]
    InvalidDegreeBound(String),
    #[error("edge-absence probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("expected {expected} entries, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("edge list line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vertex {
    User(usize),
    Ap(usize),
}

/// Users `0..M` on one side, APs `0..N` on the other, user `m` demanding
/// `K_m` distinct APs and every AP serving at most `L` users.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteInstance {
    capacity: usize,
    demand: Vec<usize>,
    adjacency: BitMatrix,
}

impl BipartiteInstance {
    /// Builds an instance from an explicit adjacency matrix.
    pub fn new(adjacency: BitMatrix, demand: Vec<usize>, capacity: usize) -> Result<Self, GraphError> {
        let (m, n) = (adjacency.rows(), adjacency.cols());
        if demand.len() != m {
            return Err(GraphError::ShapeMismatch { expected: m, got: demand.len() });
        }
        if capacity == 0 {
            return Err(GraphError::InvalidDegreeBound("L = 0".into()));
        }
        if let Some(i) = demand.iter().position(|&k| k == 0) {
            return Err(GraphError::InvalidDegreeBound(format!("K_{i} = 0")));
        }
        if let Some(i) = demand.iter().position(|&k| k > n) {
            return Err(GraphError::InfeasibleDemand(format!("K_{i} = {} exceeds N = {n}", demand[i])));
        }
        let k_sum: usize = demand.iter().sum();
        if k_sum > n * capacity {
            return Err(GraphError::InfeasibleDemand(format!("sum of demands {k_sum} exceeds N*L = {}", n * capacity)));
        }
        Ok(Self { capacity, demand, adjacency })
    }

    pub fn from_edges(
        users: usize,
        aps: usize,
        capacity: usize,
        demand: Vec<usize>,
        edges: &[(usize, usize)],
    ) -> Result<Self, GraphError> {
        let mut adj = BitMatrix::new(users, aps);
        for &(m, n) in edges {
            if m >= users || n >= aps {
                return Err(GraphError::ShapeMismatch { expected: users.max(aps), got: m.max(n) });
            }
            adj.set(m, n, true);
        }
        Self::new(adj, demand, capacity)
    }

    pub fn users(&self) -> usize {
        self.adjacency.rows()
    }

    pub fn aps(&self) -> usize {
        self.adjacency.cols()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn demand(&self) -> &[usize] {
        &self.demand
    }

    pub fn k_sum(&self) -> usize {
        self.demand.iter().sum()
    }

    pub fn adjacency(&self) -> &BitMatrix {
        &self.adjacency
    }

    #[inline]
    pub fn has_edge(&self, m: usize, n: usize) -> bool {
        self.adjacency.get(m, n)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.count_ones()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency.ones()
    }

    pub fn user_neighbors(&self, m: usize) -> Vec<usize> {
        self.adjacency.row_iter(m).collect()
    }

    pub fn ap_neighbors(&self, n: usize) -> Vec<usize> {
        self.adjacency.col_iter(n).collect()
    }

    /// `b(v)`: `K_m` for user vertices and `L` for AP vertices.
    pub fn degree_bound(&self, v: Vertex) -> usize {
        match v {
            Vertex::User(m) => self.demand[m],
            Vertex::Ap(_) => self.capacity,
        }
    }

    /// Serializes as the plain-text edge list read by [`parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.users(), self.aps(), self.capacity);
        let ks: Vec<String> = self.demand.iter().map(|k| k.to_string()).collect();
        let _ = writeln!(out, "K: {}", ks.join(" "));
        for (m, n) in self.edges() {
            let _ = writeln!(out, "{m} {n}");
        }
        out
    }
}

/// Builds the instance whose edges are the non-outage links of `csi`.
pub fn from_csi(csi: &QuantizedCsiMatrix, demand: Vec<usize>, capacity: usize) -> Result<BipartiteInstance, GraphError> {
    BipartiteInstance::new(csi.0.clone(), demand, capacity)
}

/// Samples an instance where edge `(m, n)` is absent with probability `p[m]`.
pub fn sample_rbg(
    aps: usize,
    p: &[f64],
    demand: Vec<usize>,
    capacity: usize,
    seed: u64,
) -> Result<BipartiteInstance, GraphError> {
    if let Some(&bad) = p.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
        return Err(GraphError::InvalidProbability(bad));
    }
    let mut rng = rng::keyed(seed, rng::STREAM_GRAPH, 0, 0);
    let mut adj = BitMatrix::new(p.len(), aps);
    for (m, &pm) in p.iter().enumerate() {
        for n in 0..aps {
            let u: f64 = rng.gen();
            adj.set(m, n, u >= pm);
        }
    }
    BipartiteInstance::new(adj, demand, capacity)
}

/// Parses the edge-list format: a header `M N L`, a line `K: k1 ... kM`,
/// then one `m n` pair per line (zero-based). Blank lines and lines
/// starting with `#` are ignored.
pub fn parse_edge_list(text: &str) -> Result<BipartiteInstance, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let parse_err = |line: usize, message: &str| GraphError::Parse { line, message: message.to_string() };
    let nums = |line: usize, s: &str| -> Result<Vec<usize>, GraphError> {
        s.split_whitespace().map(|t| t.parse::<usize>().map_err(|_| parse_err(line, &format!("bad integer {t:?}")))).collect()
    };
    let (l1, header) = lines.next().ok_or_else(|| parse_err(0, "missing header"))?;
    let h = nums(l1, header)?;
    if h.len() != 3 {
        return Err(parse_err(l1, "header must be `M N L`"));
    }
    let (users, aps, capacity) = (h[0], h[1], h[2]);
    let (l2, kline) = lines.next().ok_or_else(|| parse_err(l1, "missing demand line"))?;
    let rest = kline.strip_prefix("K:").ok_or_else(|| parse_err(l2, "demand line must start with `K:`"))?;
    let demand = nums(l2, rest)?;
    if demand.len() != users {
        return Err(parse_err(l2, &format!("expected {users} demands, got {}", demand.len())));
    }
    let mut edges = Vec::new();
    for (ln, l) in lines {
        let e = nums(ln, l)?;
        if e.len() != 2 || e[0] >= users || e[1] >= aps {
            return Err(parse_err(ln, "edge must be `m n` with m < M and n < N"));
        }
        edges.push((e[0], e[1]));
    }
    BipartiteInstance::from_edges(users, aps, capacity, demand, &edges)
}

/// User indices sorted by ascending demand, ties broken by index, so that
/// position `i` holds `u_{i+1:M}`.
pub fn ordered_users(demand: &[usize]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..demand.len()).collect();
    idx.sort_by_key(|&i| demand[i]);
    idx
}

/// `(M - 1) N + K_{m:M} - 1` where `k_ordered` is sorted ascending and
/// `rank` is one-based.
pub fn phi1(users: usize, aps: usize, k_ordered: &[usize], rank: usize) -> usize {
    assert!(rank >= 1 && rank <= k_ordered.len(), "rank {rank} out of range");
    (users - 1) * aps + k_ordered[rank - 1] - 1
}

/// `(M - L)(ceil(K_sum / L) - 1) + K_sum - 1`.
pub fn phi2(users: usize, capacity: usize, k_sum: usize) -> i64 {
    assert!(k_sum >= 1 && capacity >= 1);
    let c = k_sum.div_ceil(capacity) as i64 - 1;
    (users as i64 - capacity as i64) * c + k_sum as i64 - 1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCountThresholds {
    pub phi1: usize,
    pub phi2: i64,
    /// `(phi2 - eta K_m) / (M - 1)`; minus infinity for a single user, who
    /// never competes for APs.
    pub threshold: f64,
}

impl EdgeCountThresholds {
    /// Thresholds for the user of one-based `rank` in demand order.
    pub fn new(aps: usize, capacity: usize, demand: &[usize], rank: usize, eta: f64) -> Self {
        let users = demand.len();
        let order = ordered_users(demand);
        let sorted: Vec<usize> = order.iter().map(|&i| demand[i]).collect();
        let k_sum = demand.iter().sum();
        let phi1 = phi1(users, aps, &sorted, rank);
        let phi2 = phi2(users, capacity, k_sum);
        let km = sorted[rank - 1] as f64;
        let threshold = if users > 1 { (phi2 as f64 - eta * km) / (users - 1) as f64 } else { f64::NEG_INFINITY };
        Self { phi1, phi2, threshold }
    }
}

/// `min_X b(V \ X) + |E(X)|` over all vertex subsets `X`, where `E(X)` is
/// the set of edges with both ends in `X`. By exhaustive enumeration, so
/// only usable for `M + N <= 24`.
pub fn min_cut_bound(g: &BipartiteInstance) -> Option<usize> {
    let (m, n) = (g.users(), g.aps());
    if m + n > 24 {
        return None;
    }
    let rows: Vec<u32> = (0..m).map(|i| (0..n).filter(|&j| g.has_edge(i, j)).fold(0u32, |acc, j| acc | 1 << j)).collect();
    let mut best = usize::MAX;
    for xa in 0u32..(1 << n) {
        let b_aps_out = (n - xa.count_ones() as usize) * g.capacity();
        // each user independently joins X when that is cheaper
        let mut cost = b_aps_out;
        for (i, &row) in rows.iter().enumerate() {
            let inside = (row & xa).count_ones() as usize;
            cost += inside.min(g.demand()[i]);
        }
        best = best.min(cost);
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn small_example() -> BipartiteInstance {
        // u1a1, u1a3, u2a1, u3a2, u3a3, u4a2, u4a3 with zero-based labels
        let edges = [(0, 0), (0, 2), (1, 0), (2, 1), (2, 2), (3, 1), (3, 2)];
        BipartiteInstance::from_edges(4, 3, 3, vec![2; 4], &edges).unwrap()
    }

    #[test]
    fn small_example_instance() {
        let g = small_example();
        assert_eq!(g.edge_count(), 7);
        assert_eq!(g.k_sum(), 8);
        assert_eq!(g.degree_bound(Vertex::User(1)), 2);
        assert_eq!(g.degree_bound(Vertex::Ap(2)), 3);
        assert_eq!(g.user_neighbors(1), vec![0]);
        assert_eq!(g.ap_neighbors(2), vec![0, 2, 3]);
    }

    #[test]
    fn infeasible_demands_rejected() {
        let adj = BitMatrix::new(2, 2);
        assert!(matches!(BipartiteInstance::new(adj.clone(), vec![3, 1], 2), Err(GraphError::InfeasibleDemand(_))));
        assert!(matches!(BipartiteInstance::new(adj.clone(), vec![2, 2], 1), Err(GraphError::InfeasibleDemand(_))));
        assert!(matches!(BipartiteInstance::new(adj, vec![0, 1], 1), Err(GraphError::InvalidDegreeBound(_))));
    }

    #[test]
    fn rbg_extremes() {
        let full = sample_rbg(4, &[0.0; 3], vec![1; 3], 1, 3).unwrap();
        assert_eq!(full.edge_count(), 12);
        let empty = sample_rbg(4, &[1.0; 3], vec![1; 3], 1, 3).unwrap();
        assert_eq!(empty.edge_count(), 0);
        assert!(sample_rbg(4, &[1.5], vec![1], 1, 3).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = small_example();
        let text = g.to_edge_list();
        assert!(text.starts_with("4 3 3\nK: 2 2 2 2\n0 0\n"));
        assert_eq!(parse_edge_list(&text).unwrap(), g);
        assert!(parse_edge_list("2 2 1\nK: 1\n").is_err());
        assert!(parse_edge_list("2 2 1\nK: 1 1\n0 5\n").is_err());
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi1(10, 5, &[2; 10], 1), 46);
        assert_eq!(phi1(1, 7, &[1], 1), 0);
        assert_eq!(phi1(2, 3, &[2, 2], 1), 4);
        assert_eq!(phi2(10, 4, 20), 43);
        assert_eq!(phi2(4, 4, 9), 8);
        assert_eq!(phi2(6, 3, 12), 20);
        let t = EdgeCountThresholds::new(5, 4, &[2; 10], 1, 0.5);
        assert_eq!(t.phi2, 43);
        assert!((t.threshold - 42.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn ordering_is_stable() {
        assert_eq!(ordered_users(&[2, 1, 2, 1]), vec![1, 3, 0, 2]);
    }

    #[test]
    fn min_cut_on_small_example() {
        assert_eq!(min_cut_bound(&small_example()), Some(7));
    }
}
