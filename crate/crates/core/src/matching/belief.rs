//! Message passing for bipartite b-matching.
//!
//! Every vertex keeps `mu = -sigma_b` and `nu = -sigma_{b+1}` of its belief
//! row and the set of neighbours it currently selects. A belief entry is
//! recovered on demand as `W_jk + nu_k` when `j` is among `k`'s selection
//! and `W_jk + mu_k` otherwise, so no per-edge message arrays are kept.
//! Each row is padded with `b(v)` zero-valued slack entries, which turns the
//! degree equalities into the `<= b(v)` bounds of the matching problem.

use crate::graph::BipartiteInstance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexUpdate {
    pub mu: f64,
    pub nu: f64,
    /// Real (non-slack) entries examined to produce the update.
    pub inspected: usize,
}

#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    value: f64,
    index: Option<usize>,
}

/// Working state of one message-passing run. Vertices `0..M` are users and
/// `M..M+N` are APs; neighbour indices are local to the opposite side.
pub struct BeliefState<'a> {
    inst: &'a BipartiteInstance,
    weights: &'a [f64],
    cache_size: usize,
    weight_cache: Vec<Vec<usize>>,
    degree: Vec<usize>,
    mu: Vec<f64>,
    nu: Vec<f64>,
    selected: Vec<Vec<usize>>,
    nu_order: [Vec<usize>; 2],
    pub inspections: u64,
}

impl<'a> BeliefState<'a> {
    /// `weights` is the dense `M x N` row-major weight matrix; entries of
    /// absent edges are never read.
    pub fn new(inst: &'a BipartiteInstance, weights: &'a [f64], cache_size: usize) -> Self {
        let (m, n) = (inst.users(), inst.aps());
        assert_eq!(weights.len(), m * n);
        let total = m + n;
        let mut weight_cache = Vec::with_capacity(total);
        let mut degree = Vec::with_capacity(total);
        for v in 0..total {
            let mut nb: Vec<usize> = if v < m { inst.user_neighbors(v) } else { inst.ap_neighbors(v - m) };
            degree.push(nb.len());
            nb.sort_by(|&a, &b| {
                let (wa, wb) = if v < m { (weights[v * n + a], weights[v * n + b]) } else { (weights[a * n + v - m], weights[b * n + v - m]) };
                wb.total_cmp(&wa).then(a.cmp(&b))
            });
            nb.truncate(cache_size.max(1));
            weight_cache.push(nb);
        }
        let mut s = Self {
            inst,
            weights,
            cache_size: cache_size.max(1),
            weight_cache,
            degree,
            mu: vec![0.0; total],
            nu: vec![0.0; total],
            selected: vec![Vec::new(); total],
            nu_order: [Vec::new(), Vec::new()],
            inspections: 0,
        };
        s.rebuild_nu_order();
        s
    }

    pub fn cache_size(&self) -> usize {
        self.cache_size
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// Neighbours selected by vertex `v` in the current iteration.
    pub fn selected(&self, v: usize) -> &[usize] {
        &self.selected[v]
    }

    fn users(&self) -> usize {
        self.inst.users()
    }

    fn bound(&self, v: usize) -> usize {
        if v < self.users() {
            self.inst.demand()[v]
        } else {
            self.inst.capacity()
        }
    }

    fn other(&self, v: usize, k: usize) -> usize {
        if v < self.users() {
            self.users() + k
        } else {
            k
        }
    }

    fn local(&self, v: usize) -> usize {
        if v < self.users() {
            v
        } else {
            v - self.users()
        }
    }

    fn has_edge(&self, v: usize, k: usize) -> bool {
        if v < self.users() {
            self.inst.has_edge(v, k)
        } else {
            self.inst.has_edge(k, v - self.users())
        }
    }

    fn weight(&self, v: usize, k: usize) -> f64 {
        let n = self.inst.aps();
        if v < self.users() {
            self.weights[v * n + k]
        } else {
            self.weights[k * n + v - self.users()]
        }
    }

    /// Belief of vertex `v` about neighbour `k`, `-inf` for absent edges.
    pub fn belief(&self, v: usize, k: usize) -> f64 {
        if !self.has_edge(v, k) {
            return f64::NEG_INFINITY;
        }
        let g = self.other(v, k);
        let me = self.local(v);
        let y = if self.selected[g].contains(&me) { self.nu[g] } else { self.mu[g] };
        self.weight(v, k) + y
    }

    fn rebuild_nu_order(&mut self) {
        let m = self.users();
        let total = self.mu.len();
        let mut users: Vec<usize> = (0..m).collect();
        let mut aps: Vec<usize> = (0..total - m).collect();
        users.sort_by(|&a, &b| self.nu[b].total_cmp(&self.nu[a]).then(a.cmp(&b)));
        aps.sort_by(|&a, &b| self.nu[m + b].total_cmp(&self.nu[m + a]).then(a.cmp(&b)));
        self.nu_order = [users, aps];
    }

    fn finish(&self, v: usize, cands: &[Candidate], inspected: usize) -> (VertexUpdate, Vec<usize>) {
        let b = self.bound(v);
        if self.degree[v] == 0 {
            return (VertexUpdate { mu: 0.0, nu: 0.0, inspected }, Vec::new());
        }
        let sigma_b = cands[b - 1].value;
        let sigma_b1 = cands[b].value;
        let mut sel: Vec<usize> = cands[..b].iter().filter(|c| c.value > 0.0).filter_map(|c| c.index).collect();
        sel.sort_unstable();
        (VertexUpdate { mu: -sigma_b, nu: -sigma_b1, inspected }, sel)
    }

    fn insert(cands: &mut Vec<Candidate>, limit: usize, c: Candidate) {
        // descending value, then ascending index, slack entries last
        let key = |x: &Candidate| x.index.unwrap_or(usize::MAX);
        let pos = cands.partition_point(|x| x.value > c.value || (x.value == c.value && key(x) < key(&c)));
        if pos < limit {
            cands.insert(pos, c);
            cands.truncate(limit);
        }
    }

    fn slack(b: usize, limit: usize) -> Vec<Candidate> {
        let mut cands = Vec::with_capacity(limit + 1);
        cands.resize(b, Candidate { value: 0.0, index: None });
        cands
    }

    /// Reference update scanning every neighbour.
    pub fn full_scan(&self, v: usize) -> (VertexUpdate, Vec<usize>) {
        let b = self.bound(v);
        let limit = b + 1;
        let mut cands = Self::slack(b, limit);
        let other_side = if v < self.users() { self.inst.aps() } else { self.users() };
        let mut inspected = 0;
        for k in 0..other_side {
            if self.has_edge(v, k) {
                inspected += 1;
                Self::insert(&mut cands, limit, Candidate { value: self.belief(v, k), index: Some(k) });
            }
        }
        self.finish(v, &cands, inspected)
    }

    /// Update of vertex `v` that walks its weight cache and the opposite
    /// side's descending `nu` order together, stopping as soon as no unseen
    /// entry can exceed the running `(b+1)`-th largest value.
    pub fn sufficient_selection(&self, v: usize) -> (VertexUpdate, Vec<usize>) {
        let b = self.bound(v);
        let limit = b + 1;
        let deg = self.degree[v];
        let mut cands = Self::slack(b, limit);
        if deg == 0 {
            return self.finish(v, &cands, 0);
        }
        let side = usize::from(v < self.users());
        let order = &self.nu_order[side];
        let offset = if side == 1 { self.users() } else { 0 };
        let cache = &self.weight_cache[v];
        let mut seen: Vec<usize> = Vec::with_capacity(2 * limit);
        let visit = |k: usize, cands: &mut Vec<Candidate>, seen: &mut Vec<usize>| {
            if !seen.contains(&k) {
                seen.push(k);
                Self::insert(cands, limit, Candidate { value: self.belief(v, k), index: Some(k) });
            }
        };
        for step in 0..order.len() {
            if step < cache.len() {
                visit(cache[step], &mut cands, &mut seen);
            }
            let theta = order[step];
            if self.has_edge(v, theta) {
                visit(theta, &mut cands, &mut seen);
            }
            if seen.len() == deg {
                break;
            }
            let w_bound = self.weight(v, cache[step.min(cache.len() - 1)]);
            let rho = w_bound + self.nu[offset + theta];
            if cands.len() == limit && cands[limit - 1].value >= rho {
                break;
            }
        }
        let inspected = seen.len();
        self.finish(v, &cands, inspected)
    }

    /// One Jacobi iteration over all vertices. Returns whether any
    /// selection set changed.
    pub fn step(&mut self, sufficient: bool) -> bool {
        let total = self.mu.len();
        let mut mu = Vec::with_capacity(total);
        let mut nu = Vec::with_capacity(total);
        let mut selected = Vec::with_capacity(total);
        for v in 0..total {
            let (u, sel) = if sufficient { self.sufficient_selection(v) } else { self.full_scan(v) };
            self.inspections += u.inspected as u64;
            mu.push(u.mu);
            nu.push(u.nu);
            selected.push(sel);
        }
        let changed = selected != self.selected;
        // the previous iteration's buffers are dropped here
        self.mu = mu;
        self.nu = nu;
        self.selected = selected;
        self.rebuild_nu_order();
        changed
    }

    /// Whether every selection is reciprocated.
    pub fn is_consistent(&self) -> bool {
        let m = self.users();
        (0..self.mu.len()).all(|v| {
            let me = self.local(v);
            self.selected[v].iter().all(|&k| self.selected[self.other(v, k)].contains(&me))
        }) && (0..m).all(|u| self.selected[u].len() <= self.inst.demand()[u])
    }

    /// Matched AP lists per user, read from the user-side selections.
    pub fn matched(&self) -> Vec<Vec<usize>> {
        (0..self.users()).map(|u| self.selected[u].clone()).collect()
    }
}
