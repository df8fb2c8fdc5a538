use rand::seq::index;
use rand::Rng as _;

use super::conditional::draw_conditional_power;
use super::SimError;
use crate::bitmatrix::BitMatrix;
use crate::channel::{ApOutage, SnrPoint};
use crate::graph::BipartiteInstance;
use crate::matching::{
    complete_fairness, default_max_iters, solve_exact, solve_max_weight, solve_message_passing, FairnessPolicy, MatchingSolution,
    SolveMethod, Completion,
};
use crate::rng;

/// Everything a trial needs at one SNR point.
pub(super) struct PointContext<'a> {
    pub seed: u64,
    pub point: u64,
    pub snr: SnrPoint,
    pub aps: usize,
    pub capacity: usize,
    pub demand: &'a [usize],
    pub links: Vec<ApOutage>,
    /// Outage iff the delivered information is below this.
    pub targets: Vec<f64>,
    pub policy: FairnessPolicy,
    pub solver: SolveMethod,
    pub greedy_shortcut: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialDiagnostics {
    pub greedy: u64,
    pub solved: u64,
    pub not_converged: u64,
    pub reassigned: u64,
}

impl TrialDiagnostics {
    pub fn add(&mut self, o: &TrialDiagnostics) {
        self.greedy += o.greedy;
        self.solved += o.solved;
        self.not_converged += o.not_converged;
        self.reassigned += o.reassigned;
    }
}

/// Row `user` forced to exactly `outages` outage links.
#[derive(Debug, Clone, Copy)]
pub(super) struct ForcedRow {
    pub user: usize,
    pub outages: usize,
}

/// Tries to give every user `K_m` neighbours, least-connected users first,
/// preferring APs with the most spare room. Success proves that every
/// maximum b-matching saturates every user.
pub(super) fn greedy_saturates(inst: &BipartiteInstance) -> bool {
    let mut order: Vec<usize> = (0..inst.users()).collect();
    order.sort_by_key(|&m| (inst.adjacency().row_count(m), m));
    let mut room = vec![inst.capacity(); inst.aps()];
    let mut cand = Vec::with_capacity(inst.aps());
    for m in order {
        cand.clear();
        cand.extend(inst.adjacency().row_iter(m).filter(|&n| room[n] > 0));
        let k = inst.demand()[m];
        if cand.len() < k {
            return false;
        }
        cand.sort_by_key(|&n| (std::cmp::Reverse(room[n]), n));
        for &n in &cand[..k] {
            room[n] -= 1;
        }
    }
    true
}

pub(super) fn solve(inst: &BipartiteInstance, policy: &FairnessPolicy, solver: SolveMethod) -> MatchingSolution {
    match solver {
        SolveMethod::MessagePassing => solve_message_passing(inst, policy, default_max_iters(inst)),
        SolveMethod::MaxWeight => solve_max_weight(inst, &policy.jittered_weights(inst)),
        SolveMethod::Exact => solve_exact(inst),
    }
}

/// One channel realisation. Writes per-user outage flags for the users in
/// `watch` into `out`.
pub(super) fn run_trial(
    ctx: &PointContext<'_>,
    key: u64,
    forced: Option<ForcedRow>,
    watch: &[usize],
    out: &mut [bool],
    diag: &mut TrialDiagnostics,
) -> Result<(), SimError> {
    let users = ctx.demand.len();
    let n = ctx.aps;
    let mut ch = rng::keyed(ctx.seed, rng::STREAM_CHANNEL, ctx.point, key);
    let mut adj = BitMatrix::new(users, n);
    for m in 0..users {
        match forced {
            Some(f) if f.user == m => {
                let mut sr = rng::keyed(ctx.seed, rng::STREAM_STRATUM, ctx.point, key);
                let down = index::sample(&mut sr, n, f.outages);
                for a in 0..n {
                    adj.set(m, a, true);
                }
                for a in down.iter() {
                    adj.set(m, a, false);
                }
            }
            _ => {
                let q = ctx.links[m].q;
                for a in 0..n {
                    let u: f64 = ch.gen();
                    adj.set(m, a, u < q);
                }
            }
        }
    }
    out.iter_mut().for_each(|o| *o = false);
    let inst = BipartiteInstance::new(adj, ctx.demand.to_vec(), ctx.capacity)?;
    if ctx.greedy_shortcut && greedy_saturates(&inst) {
        diag.greedy += 1;
        return Ok(());
    }
    let policy = ctx.policy.with_key(ctx.point, key);
    let sol = solve(&inst, &policy, ctx.solver);
    diag.solved += 1;
    if !sol.converged {
        diag.not_converged += 1;
    }
    let done = complete_fairness(&sol, &inst, &policy)?;
    if done.completion == Completion::Reassigned {
        diag.reassigned += 1;
    }
    done.check_feasibility(&inst, true)?;
    let mut fade = rng::keyed(ctx.seed, rng::STREAM_FADING, ctx.point, key);
    for (slot, &m) in out.iter_mut().zip(watch) {
        // a saturated user holds K links each carrying at least alpha
        if done.is_saturated(m) {
            continue;
        }
        let link = &ctx.links[m];
        let mut sum = 0.0;
        for a in done.a_star(m) {
            let e = draw_conditional_power(&mut fade, link, inst.has_edge(m, a));
            sum += (ctx.snr.linear() * e).ln_1p();
        }
        *slot = sum < ctx.targets[m];
    }
    Ok(())
}
