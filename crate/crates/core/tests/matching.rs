use fogmatch::graph::{sample_rbg, BipartiteInstance};
use fogmatch::matching::{
    complete_fairness, default_cache_size, default_max_iters, solve_exact, solve_message_passing, BeliefState,
    FairnessPolicy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_instance(rng: &mut ChaCha8Rng, max_side: usize, seed: u64) -> BipartiteInstance {
    let m = rng.gen_range(1..=max_side);
    let n = rng.gen_range(1..=max_side);
    let l = rng.gen_range(1..=m.max(1));
    let mut demand: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=n)).collect();
    while demand.iter().sum::<usize>() > n * l {
        let i = demand.iter().enumerate().max_by_key(|(_, &k)| k).unwrap().0;
        if demand[i] == 1 {
            break;
        }
        demand[i] -= 1;
    }
    let p: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
    match sample_rbg(n, &p, demand, l, seed) {
        Ok(g) => g,
        Err(_) => random_instance(rng, max_side, seed + 1),
    }
}

#[test]
fn message_passing_matches_exact_cardinality() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut converged = 0;
    let mut iters = 0;
    for t in 0..1000u64 {
        let g = random_instance(&mut rng, 8, t);
        let policy = FairnessPolicy::new(0.5, 0.5, t).unwrap();
        let sol = solve_message_passing(&g, &policy, default_max_iters(&g));
        sol.check_feasibility(&g, false).unwrap();
        assert_eq!(sol.cardinality(), solve_exact(&g).cardinality(), "instance {t}:\n{}", g.to_edge_list());
        converged += usize::from(sol.converged);
        iters += sol.iterations;
        let done = complete_fairness(&sol, &g, &policy).unwrap_or_else(|e| panic!("{e}\n{}\n{}", g.to_edge_list(), sol.to_text()));
        done.check_feasibility(&g, true).unwrap();
    }
    eprintln!("converged {converged}/1000, mean iterations {}", iters as f64 / 1000.0);
}

#[test]
fn sufficient_selection_equals_full_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut saved = 0u64;
    let mut total = 0u64;
    for t in 0..300u64 {
        let g = random_instance(&mut rng, 10, 10_000 + t);
        let w = FairnessPolicy::new(0.5, 0.5, t).unwrap().jittered_weights(&g);
        for &c in &[1usize, default_cache_size(&g), g.users().max(g.aps())] {
            let mut st = BeliefState::new(&g, &w, c);
            for _ in 0..12 {
                for v in 0..g.users() + g.aps() {
                    let (a, sa) = st.sufficient_selection(v);
                    let (b, sb) = st.full_scan(v);
                    assert_eq!((a.mu, a.nu), (b.mu, b.nu), "instance {t} vertex {v} cache {c}");
                    assert_eq!(sa, sb);
                    assert!(a.mu <= a.nu);
                    saved += (b.inspected - a.inspected) as u64;
                    total += b.inspected as u64;
                }
                st.step(true);
            }
        }
    }
    eprintln!("sufficient selection skipped {saved} of {total} entries");
}
