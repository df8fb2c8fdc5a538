//! Self-check suites run by `fogmatch verify`: message passing against the
//! flow oracle, the min-cut characterisation by exhaustive enumeration,
//! incomplete-gamma identities, and fairness symmetry.

use rand::Rng as _;

use crate::analytic::{cgf, SaddleConfig};
use crate::channel::SnrPoint;
use crate::graph::{min_cut_bound, BipartiteInstance};
use crate::matching::{complete_fairness, default_max_iters, solve_exact, solve_message_passing, FairnessPolicy};
use crate::bitmatrix::BitMatrix;
use crate::rng::{self, Rng};
use crate::special::quad::integrate;
use crate::special::{upper_gamma_order_derivative, upper_incomplete_gamma};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
    pub detail: String,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }

    pub fn line(&self) -> String {
        let verdict = if self.ok() { "PASS" } else { "FAIL" };
        if self.detail.is_empty() {
            format!("{:<20} {verdict} ({}/{})", self.name, self.passed, self.total)
        } else {
            format!("{:<20} {verdict} ({}/{}) {}", self.name, self.passed, self.total, self.detail)
        }
    }
}

/// Deliberate corruption used to check that the suites can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Checks matchings against APs with one unit less capacity.
    DegreeViolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub quick: bool,
    pub seed: u64,
    pub fault: Option<Fault>,
}

pub fn run_all(opts: &VerifyOptions) -> Vec<SuiteReport> {
    let q = opts.quick;
    vec![
        bp_vs_flow(if q { 100 } else { 1000 }, opts.seed, opts.fault),
        min_cut_enumeration(if q { 40 } else { 200 }, opts.seed),
        special_functions(opts.seed),
        fairness_symmetry(if q { 2000 } else { 10_000 }),
    ]
}

/// Random instance with `M, N <= max_side`, `K_m <= N`, a random edge
/// density and the smallest feasible `L` or larger.
pub fn random_instance(rng: &mut Rng, max_users: usize, max_aps: usize) -> BipartiteInstance {
    let m = rng.gen_range(1..=max_users);
    let n = rng.gen_range(1..=max_aps);
    random_instance_sized(rng, m, n)
}

pub fn random_instance_sized(rng: &mut Rng, m: usize, n: usize) -> BipartiteInstance {
    let demand: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=n)).collect();
    let need = demand.iter().sum::<usize>().div_ceil(n);
    let capacity = rng.gen_range(need..=need.max(m));
    let density: f64 = rng.gen();
    let mut adj = BitMatrix::new(m, n);
    for i in 0..m {
        for j in 0..n {
            adj.set(i, j, rng.gen::<f64>() < density);
        }
    }
    BipartiteInstance::new(adj, demand, capacity).expect("capacity chosen feasible")
}

fn with_capacity(g: &BipartiteInstance, capacity: usize) -> Option<BipartiteInstance> {
    BipartiteInstance::new(g.adjacency().clone(), g.demand().to_vec(), capacity).ok()
}

pub fn bp_vs_flow(count: usize, seed: u64, fault: Option<Fault>) -> SuiteReport {
    let mut rng = rng::keyed(seed, rng::STREAM_GRAPH, 1, 0);
    let mut passed = 0;
    let mut fallback = 0;
    for i in 0..count {
        let g = random_instance(&mut rng, 8, 8);
        let policy = FairnessPolicy::new(0.5, 0.5, seed).expect("constant policy").with_key(i as u64, 0);
        let sol = solve_message_passing(&g, &policy, default_max_iters(&g));
        if !sol.converged {
            fallback += 1;
        }
        let check_against = match fault {
            Some(Fault::DegreeViolation) => with_capacity(&g, g.capacity().saturating_sub(1).max(1)).unwrap_or_else(|| g.clone()),
            None => g.clone(),
        };
        let same = sol.cardinality() == solve_exact(&g).cardinality();
        let feasible = sol.check_feasibility(&check_against, false).is_ok()
            && complete_fairness(&sol, &g, &policy).map(|c| c.check_feasibility(&check_against, true).is_ok()).unwrap_or(false);
        if same && feasible {
            passed += 1;
        }
    }
    SuiteReport { name: "bp-vs-flow", passed, total: count, detail: format!("{fallback} exact fallbacks") }
}

/// `min_X b(V \ X) + |E(X)|` over all `2^(M+N)` subsets.
pub fn brute_force_min_cut(g: &BipartiteInstance) -> usize {
    let (m, n) = (g.users(), g.aps());
    let rows: Vec<u32> = (0..m).map(|i| (0..n).filter(|&j| g.has_edge(i, j)).fold(0, |a, j| a | 1 << j)).collect();
    let mut best = usize::MAX;
    for xu in 0u32..(1 << m) {
        for xa in 0u32..(1 << n) {
            let mut cost = (n - xa.count_ones() as usize) * g.capacity();
            for (i, &row) in rows.iter().enumerate() {
                if xu >> i & 1 == 1 {
                    cost += (row & xa).count_ones() as usize;
                } else {
                    cost += g.demand()[i];
                }
            }
            best = best.min(cost);
        }
    }
    best
}

pub fn min_cut_enumeration(count: usize, seed: u64) -> SuiteReport {
    let mut rng = rng::keyed(seed, rng::STREAM_GRAPH, 2, 0);
    let mut passed = 0;
    for _ in 0..count {
        let m = rng.gen_range(1..=20);
        let n = rng.gen_range(1..=20 / m);
        let g = random_instance_sized(&mut rng, m, n);
        let oracle = solve_exact(&g).cardinality();
        if oracle == brute_force_min_cut(&g) && Some(oracle) == min_cut_bound(&g) {
            passed += 1;
        }
    }
    SuiteReport { name: "min-cut-enumeration", passed, total: count, detail: String::new() }
}

/// `int_x^inf ln(t/x) t^(s-1) e^(-t) dt` by quadrature in `v = ln(t/x)`.
pub fn g3_by_quadrature(s: f64, x: f64) -> f64 {
    let top = ((x + 60.0 + 5.0 * s.abs()) / x).ln();
    integrate(|v| v * (s * (x.ln() + v) - x * v.exp()).exp(), 0.0, top, 0.0, 1e-12).map(|r| r.value).unwrap_or(f64::NAN)
}

pub fn special_functions(seed: u64) -> SuiteReport {
    let mut passed = 0;
    let mut total = 0;
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let s = -3.05 + 0.6 * i as f64;
            let x = 0.05 * (400f64).powf(j as f64 / 9.0);
            total += 2;
            let (Ok(a), Ok(b)) = (upper_incomplete_gamma(s + 1.0, x), upper_incomplete_gamma(s, x)) else { continue };
            let tail = (s * x.ln() - x).exp();
            let scale = a.abs().max((s * b).abs()).max(tail);
            let rec = (a - s * b - tail).abs() / scale;
            worst = worst.max(rec);
            if rec <= 1e-6 {
                passed += 1;
            }
            let Ok(d) = upper_gamma_order_derivative(s, x, 1) else { continue };
            let g3 = g3_by_quadrature(s, x);
            let err = (d - b * x.ln() - g3).abs() / g3.abs().max(1e-300);
            worst = worst.max(err);
            if err <= 1e-6 {
                passed += 1;
            }
        }
    }
    let mut rng = rng::keyed(seed, rng::STREAM_GRAPH, 3, 0);
    for _ in 0..50 {
        let big_k = rng.gen_range(1..=6);
        let small_k = rng.gen_range(0..=big_k);
        let rate = rng.gen_range(0.1..6.0);
        let db = rng.gen_range(-10.0..50.0);
        total += 1;
        let Ok(cfg) = SaddleConfig::for_rate(big_k, small_k, rate, SnrPoint::from_db(db).expect("finite")) else { continue };
        if let Ok(v) = cgf(0.0, &cfg) {
            if v.abs() <= 1e-12 {
                passed += 1;
            }
        }
    }
    SuiteReport { name: "special-functions", passed, total, detail: format!("worst relative error {worst:.2e}") }
}

/// Upper tail of the chi-square law.
pub fn chi_square_sf(stat: f64, dof: usize) -> f64 {
    let a = dof as f64 / 2.0;
    if stat <= 0.0 {
        return 1.0;
    }
    upper_incomplete_gamma(a, stat / 2.0).map(|g| g / libm::tgamma(a)).unwrap_or(f64::NAN)
}

/// Four users that all see only AP 0 (capacity 3), so exactly one of them
/// is left unsaturated. Which one should be uniform over seeds.
pub fn symmetric_instance() -> BipartiteInstance {
    BipartiteInstance::from_edges(4, 2, 3, vec![1; 4], &[(0, 0), (1, 0), (2, 0), (3, 0)]).expect("valid by construction")
}

/// Per-user counts of being the unsaturated one, and the chi-square
/// p-value against the uniform law.
pub fn unsaturated_counts(seeds: usize) -> (Vec<usize>, f64) {
    let g = symmetric_instance();
    let mut counts = vec![0; g.users()];
    for s in 0..seeds {
        let policy = FairnessPolicy::new(0.5, 0.5, s as u64).expect("constant policy");
        let sol = solve_message_passing(&g, &policy, default_max_iters(&g));
        for (m, sat) in sol.saturated().iter().enumerate() {
            if !sat {
                counts[m] += 1;
            }
        }
    }
    let expect = seeds as f64 / g.users() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    (counts.clone(), chi_square_sf(stat, g.users() - 1))
}

pub fn fairness_symmetry(seeds: usize) -> SuiteReport {
    let (counts, p) = unsaturated_counts(seeds);
    let ok = p >= 0.01 && counts.iter().sum::<usize>() == seeds;
    SuiteReport { name: "fairness-symmetry", passed: ok as usize, total: 1, detail: format!("counts {counts:?}, p = {p:.3}") }
}
