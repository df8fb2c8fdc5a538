//! Fairness maximum b-matching: message passing, flow oracles and the
//! random completion of unsaturated users.

mod belief;
mod exact;
mod selection;

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::Open01;
use thiserror::Error;

pub use belief::{BeliefState, VertexUpdate};
pub use exact::{solve_exact, solve_max_weight};
pub use selection::selection;

use crate::bitmatrix::BitMatrix;
use crate::graph::BipartiteInstance;
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchingError {
    #[error("rank {rank} is outside 1..={len}")]
    RankOutOfRange { rank: usize, len: usize },
    #[error("invalid fairness policy: {0}")]
    InvalidPolicy(String),
    #[error("cannot complete user {user}: needs {needed} filler APs, {available} available")]
    CompletionInfeasible { user: usize, needed: usize, available: usize },
    #[error("infeasible solution: {0}")]
    Infeasible(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    MessagePassing,
    Exact,
    MaxWeight,
}

/// Randomization and target parameters of the fairness matching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairnessPolicy {
    /// Target fraction of non-outage APs for unsaturated users.
    pub eta: f64,
    pub epsilon: f64,
    /// Upper end of the uniform weight jitter; `None` picks `1 / (2MN + 1)`.
    pub jitter_scale: Option<f64>,
    pub seed: u64,
    /// Extra key words so that every Monte Carlo trial gets its own draws.
    pub key: (u64, u64),
}

impl FairnessPolicy {
    pub fn new(eta: f64, epsilon: f64, seed: u64) -> Result<Self, MatchingError> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(MatchingError::InvalidPolicy(format!("eta = {eta} must lie in (0, 1)")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(MatchingError::InvalidPolicy(format!("epsilon = {epsilon} must lie in (0, 1)")));
        }
        Ok(Self { eta, epsilon, jitter_scale: None, seed, key: (0, 0) })
    }

    pub fn with_jitter_scale(mut self, scale: f64) -> Self {
        self.jitter_scale = Some(scale);
        self
    }

    pub fn with_key(mut self, a: u64, b: u64) -> Self {
        self.key = (a, b);
        self
    }

    pub fn max_jitter(users: usize, aps: usize) -> f64 {
        1.0 / (2.0 * (users * aps) as f64)
    }

    pub fn validate(&self, users: usize, aps: usize) -> Result<(), MatchingError> {
        if let Some(s) = self.jitter_scale {
            let max = Self::max_jitter(users, aps);
            if !(s > 0.0 && s < max) {
                return Err(MatchingError::InvalidPolicy(format!("jitter scale {s} must lie in (0, {max})")));
            }
        }
        Ok(())
    }

    fn effective_jitter(&self, users: usize, aps: usize) -> f64 {
        let default = 1.0 / (2.0 * (users * aps) as f64 + 1.0);
        match self.jitter_scale {
            Some(s) if s > 0.0 && s < Self::max_jitter(users, aps) => s,
            _ => default,
        }
    }

    /// Edge weights `1 + U(0, jitter)`, dense `M x N`; absent edges get 0.
    pub fn jittered_weights(&self, inst: &BipartiteInstance) -> Vec<f64> {
        let (m, n) = (inst.users(), inst.aps());
        let s = self.effective_jitter(m, n);
        let mut rng = rng::keyed(self.seed, rng::STREAM_MATCHING, self.key.0, self.key.1);
        let mut w = vec![0.0; m * n];
        for u in 0..m {
            for a in 0..n {
                let j: f64 = rng.sample(Open01);
                if inst.has_edge(u, a) {
                    w[u * n + a] = 1.0 + s * j;
                }
            }
        }
        w
    }
}

/// A b-matching plus, after [`complete_fairness`], the filler APs of every
/// unsaturated user.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingSolution {
    matched: Vec<Vec<usize>>,
    fillers: Vec<Vec<usize>>,
    demand: Vec<usize>,
    aps: usize,
    pub iterations: usize,
    pub converged: bool,
    pub method: SolveMethod,
    pub completion: Completion,
}

/// How the filler sets were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    /// No fillers were needed or they have not been drawn yet.
    None,
    /// Uniform random draws from the APs with spare capacity.
    Uniform,
    /// Max-flow over spare capacity after random draws got stuck.
    Flow,
    /// The matching itself admitted no completion, so all users were
    /// reassigned by a maximum-weight complete assignment.
    Reassigned,
}

impl MatchingSolution {
    pub fn from_matched(
        inst: &BipartiteInstance,
        mut matched: Vec<Vec<usize>>,
        iterations: usize,
        converged: bool,
        method: SolveMethod,
    ) -> Self {
        for row in &mut matched {
            row.sort_unstable();
        }
        Self {
            fillers: vec![Vec::new(); matched.len()],
            matched,
            demand: inst.demand().to_vec(),
            aps: inst.aps(),
            iterations,
            converged,
            method,
            completion: Completion::None,
        }
    }

    pub fn users(&self) -> usize {
        self.matched.len()
    }

    /// Matched (non-outage) APs of user `m`.
    pub fn matched(&self, m: usize) -> &[usize] {
        &self.matched[m]
    }

    pub fn fillers(&self, m: usize) -> &[usize] {
        &self.fillers[m]
    }

    /// `k_m`, the number of matched APs of user `m`.
    pub fn k(&self, m: usize) -> usize {
        self.matched[m].len()
    }

    pub fn is_saturated(&self, m: usize) -> bool {
        self.k(m) == self.demand[m]
    }

    pub fn saturated(&self) -> Vec<bool> {
        (0..self.users()).map(|m| self.is_saturated(m)).collect()
    }

    pub fn cardinality(&self) -> usize {
        self.matched.iter().map(Vec::len).sum()
    }

    /// `A*_m`: matched APs together with fillers, sorted.
    pub fn a_star(&self, m: usize) -> Vec<usize> {
        let mut a: Vec<usize> = self.matched[m].iter().chain(&self.fillers[m]).copied().collect();
        a.sort_unstable();
        a
    }

    /// The matched-edge decision matrix `X`.
    pub fn decision_matrix(&self) -> BitMatrix {
        let mut x = BitMatrix::new(self.users(), self.aps);
        for (m, row) in self.matched.iter().enumerate() {
            for &n in row {
                x.set(m, n, true);
            }
        }
        x
    }

    /// Number of users holding AP `n` in `A*`.
    pub fn ap_loads(&self) -> Vec<usize> {
        let mut load = vec![0; self.aps];
        for m in 0..self.users() {
            for &n in self.matched[m].iter().chain(&self.fillers[m]) {
                load[n] += 1;
            }
        }
        load
    }

    /// Checks the b-matching constraints, and with `completed` also that
    /// every `A*_m` has exactly `K_m` distinct APs within capacity.
    pub fn check_feasibility(&self, inst: &BipartiteInstance, completed: bool) -> Result<(), MatchingError> {
        let err = |s: String| Err(MatchingError::Infeasible(s));
        let mut matched_load = vec![0; inst.aps()];
        for m in 0..self.users() {
            if self.k(m) > inst.demand()[m] {
                return err(format!("user {m} matched to {} APs, demand {}", self.k(m), inst.demand()[m]));
            }
            for &n in &self.matched[m] {
                if !inst.has_edge(m, n) {
                    return err(format!("matched pair ({m}, {n}) is not an edge"));
                }
                matched_load[n] += 1;
            }
            if completed {
                let a = self.a_star(m);
                if a.len() != inst.demand()[m] || a.windows(2).any(|w| w[0] == w[1]) {
                    return err(format!("user {m} holds {:?}, demand {}", a, inst.demand()[m]));
                }
            }
        }
        let loads = if completed { self.ap_loads() } else { matched_load };
        if let Some(n) = loads.iter().position(|&l| l > inst.capacity()) {
            return err(format!("AP {n} serves {} users, capacity {}", loads[n], inst.capacity()));
        }
        Ok(())
    }

    /// One `m: n1 n2 ...` line per user with filler APs marked `*`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for m in 0..self.users() {
            let _ = write!(out, "{m}:");
            for n in self.a_star(m) {
                let mark = if self.fillers[m].contains(&n) { "*" } else { "" };
                let _ = write!(out, " {n}{mark}");
            }
            out.push('\n');
        }
        out
    }
}

/// Default weight-cache size, `max(K_max, L) + 1`.
pub fn default_cache_size(inst: &BipartiteInstance) -> usize {
    inst.demand().iter().copied().max().unwrap_or(1).max(inst.capacity()) + 1
}

/// Default iteration cap, `100 (M + N)`.
pub fn default_max_iters(inst: &BipartiteInstance) -> usize {
    100 * (inst.users() + inst.aps())
}

/// Maximum b-matching by message passing on jittered weights. Falls back
/// to the exact maximum-weight solver, flagging `converged = false`, when
/// the selections have not settled after `max_iters` iterations.
pub fn solve_message_passing(inst: &BipartiteInstance, policy: &FairnessPolicy, max_iters: usize) -> MatchingSolution {
    let weights = policy.jittered_weights(inst);
    solve_message_passing_with(inst, &weights, default_cache_size(inst), max_iters, true)
}

pub fn solve_message_passing_with(
    inst: &BipartiteInstance,
    weights: &[f64],
    cache_size: usize,
    max_iters: usize,
    sufficient: bool,
) -> MatchingSolution {
    if inst.edge_count() == 0 {
        return MatchingSolution::from_matched(inst, vec![Vec::new(); inst.users()], 0, true, SolveMethod::MessagePassing);
    }
    let mut state = BeliefState::new(inst, weights, cache_size);
    for it in 1..=max_iters {
        let changed = state.step(sufficient);
        if !changed && it > 1 && state.is_consistent() {
            return MatchingSolution::from_matched(inst, state.matched(), it, true, SolveMethod::MessagePassing);
        }
    }
    let mut sol = solve_max_weight(inst, weights);
    sol.iterations = max_iters;
    sol.converged = false;
    sol
}

/// Gives every unsaturated user `K_m - k_m` filler APs drawn uniformly from
/// the APs it does not hold that still have spare capacity. Users are
/// served in a random order.
pub fn complete_fairness(
    sol: &MatchingSolution,
    inst: &BipartiteInstance,
    policy: &FairnessPolicy,
) -> Result<MatchingSolution, MatchingError> {
    let mut out = sol.clone();
    let mut users: Vec<usize> = (0..inst.users()).filter(|&m| !sol.is_saturated(m)).collect();
    if users.is_empty() {
        return Ok(out);
    }
    let mut rng = rng::keyed(policy.seed, rng::STREAM_FILLER, policy.key.0, policy.key.1);
    for _ in 0..COMPLETION_ATTEMPTS {
        users.shuffle(&mut rng);
        if let Some(fillers) = draw_fillers(&out, inst, &users, &mut rng) {
            for (&m, f) in users.iter().zip(fillers) {
                out.fillers[m] = f;
            }
            out.completion = Completion::Uniform;
            return Ok(out);
        }
    }
    // random sequential draws kept getting stuck; settle it with a flow
    if let Ok(fillers) = exact::complete_by_flow(sol, inst, &users) {
        for (&m, f) in users.iter().zip(fillers) {
            out.fillers[m] = f;
        }
        out.completion = Completion::Flow;
        return Ok(out);
    }
    // no completion of this matching exists: reassign globally, keeping as
    // many non-outage links as any complete assignment allows
    let weights = policy.jittered_weights(inst);
    let scale = policy.effective_jitter(inst.users(), inst.aps());
    let filler_weights: Vec<f64> = (0..inst.users() * inst.aps()).map(|_| scale * rng.sample::<f64, _>(Open01)).collect();
    let (matched, fillers) = exact::solve_complete_assignment(inst, &weights, &filler_weights)?;
    let mut re = MatchingSolution::from_matched(inst, matched, sol.iterations, sol.converged, sol.method);
    re.fillers = fillers;
    re.completion = Completion::Reassigned;
    Ok(re)
}

const COMPLETION_ATTEMPTS: usize = 16;

fn draw_fillers(
    sol: &MatchingSolution,
    inst: &BipartiteInstance,
    users: &[usize],
    rng: &mut rng::Rng,
) -> Option<Vec<Vec<usize>>> {
    let mut load = sol.ap_loads();
    let mut out = Vec::with_capacity(users.len());
    for &m in users {
        let held = sol.matched(m);
        let needed = inst.demand()[m] - held.len();
        let eligible: Vec<usize> = (0..inst.aps()).filter(|&n| load[n] < inst.capacity() && !held.contains(&n)).collect();
        if eligible.len() < needed {
            return None;
        }
        let mut pick: Vec<usize> = eligible.choose_multiple(rng, needed).copied().collect();
        pick.sort_unstable();
        for &n in &pick {
            load[n] += 1;
        }
        out.push(pick);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_rbg;

    fn small_example() -> BipartiteInstance {
        let edges = [(0, 0), (0, 2), (1, 0), (2, 1), (2, 2), (3, 1), (3, 2)];
        BipartiteInstance::from_edges(4, 3, 3, vec![2; 4], &edges).unwrap()
    }

    fn policy(seed: u64) -> FairnessPolicy {
        FairnessPolicy::new(0.5, 0.5, seed).unwrap()
    }

    #[test]
    fn small_example_exact_and_completion() {
        let g = small_example();
        let sol = solve_exact(&g);
        assert_eq!(sol.cardinality(), 7);
        assert_eq!(sol.saturated(), vec![true, false, true, true]);
        let done = complete_fairness(&sol, &g, &policy(1)).unwrap();
        assert_eq!(done.fillers(1), &[1]);
        done.check_feasibility(&g, true).unwrap();
        assert_eq!(done.to_text(), "0: 0 2\n1: 0 1*\n2: 1 2\n3: 1 2\n");
    }

    #[test]
    fn small_example_message_passing() {
        let g = small_example();
        let sol = solve_message_passing(&g, &policy(3), default_max_iters(&g));
        assert!(sol.converged);
        assert_eq!(sol.cardinality(), 7);
        sol.check_feasibility(&g, false).unwrap();
    }

    #[test]
    fn complete_graph_saturates_everyone() {
        let g = sample_rbg(3, &[0.0; 4], vec![2; 4], 3, 0).unwrap();
        assert_eq!(solve_exact(&g).cardinality(), 8);
        let sol = solve_message_passing(&g, &policy(5), default_max_iters(&g));
        assert_eq!(sol.cardinality(), 8);
        let done = complete_fairness(&sol, &g, &policy(5)).unwrap();
        assert_eq!(done, sol);
    }

    #[test]
    fn empty_graph() {
        let g = sample_rbg(3, &[1.0; 2], vec![1; 2], 1, 0).unwrap();
        assert_eq!(solve_exact(&g).cardinality(), 0);
        let sol = solve_message_passing(&g, &policy(0), 10);
        assert_eq!(sol.cardinality(), 0);
        let done = complete_fairness(&sol, &g, &policy(0)).unwrap();
        done.check_feasibility(&g, true).unwrap();
    }

    #[test]
    fn max_weight_prefers_heavier_edges() {
        let g = BipartiteInstance::from_edges(2, 2, 1, vec![1, 1], &[(0, 0), (1, 0)]).unwrap();
        let sol = solve_max_weight(&g, &[1.1, 0.0, 1.2, 0.0]);
        assert_eq!(sol.matched(1), &[0]);
        assert!(sol.matched(0).is_empty());
    }

    #[test]
    fn policy_validation() {
        assert!(FairnessPolicy::new(0.0, 0.5, 0).is_err());
        assert!(FairnessPolicy::new(0.5, 1.0, 0).is_err());
        let p = policy(0).with_jitter_scale(0.1);
        assert!(p.validate(2, 2).is_ok());
        assert!(p.validate(3, 3).is_err());
    }
}
