use fogmatch::analytic::{exact_conditional_outage, SaddleConfig};
use fogmatch::channel::{ap_outage_prob, SnrPoint};
use fogmatch::rng;
use fogmatch::sim::{draw_conditional_power, simulate_content_outage, ExperimentConfig, TrialBudget};

#[test]
fn conditional_draws_respect_threshold() {
    let link = ap_outage_prob(1.0, SnrPoint::from_db(5.0).unwrap()).unwrap();
    let c = link.power_threshold;
    let mut r = rng::keyed(3, 0, 0, 0);
    let n = 200_000;
    let (mut above, mut below) = (0.0, 0.0);
    for _ in 0..n {
        let a = draw_conditional_power(&mut r, &link, true);
        let b = draw_conditional_power(&mut r, &link, false);
        assert!(a >= c && b < c);
        above += a;
        below += b;
    }
    // memoryless tail, and the truncated exponential mean
    assert!((above / n as f64 - (c + 1.0)).abs() < 0.01);
    let want = 1.0 - c * (-c).exp() / -(-c).exp_m1();
    assert!((below / n as f64 - want).abs() < 0.005);
}

/// `P(ln(1+g a) + ln(1+g b) < R)` for independent unit exponentials.
fn two_link_outage(g: f64, r: f64) -> f64 {
    let top = r.exp_m1() / g;
    let n = 20_000;
    let h = top / n as f64;
    let f = |a: f64| (-a).exp() * -(-((r.exp() / (1.0 + g * a) - 1.0) / g)).exp_m1();
    let mut acc = f(0.0) + f(top);
    for i in 1..n {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn conditionals_recombine_to_unconditional() {
    for db in [0.0, 10.0, 20.0] {
        let snr = SnrPoint::from_db(db).unwrap();
        let link = ap_outage_prob(1.0, snr).unwrap();
        let (p, q) = (link.p, link.q);
        let total: f64 = (0..=2)
            .map(|k| {
                let w = [p * p, 2.0 * p * q, q * q][k];
                w * exact_conditional_outage(&SaddleConfig::for_rate(2, k, 2.0, snr).unwrap()).unwrap()
            })
            .sum();
        let want = two_link_outage(snr.linear(), 2.0);
        assert!((total - want).abs() < 1e-7 * want.max(1e-3), "{db} dB: {total} vs {want}");
    }
}

fn small(seed: u64, grid: Vec<f64>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::homogeneous(4, 3, 3, 2, 2.0, grid, seed);
    cfg.budget = TrialBudget::fixed(4000);
    cfg
}

#[test]
fn outage_falls_with_snr() {
    let curves = simulate_content_outage(&small(5, vec![0.0, 10.0, 20.0])).unwrap();
    for c in curves {
        let p: Vec<f64> = c.points.iter().map(|x| x.estimate.estimate).collect();
        assert!(p[0] > p[1] && p[1] > p[2], "user {}: {p:?}", c.user);
    }
}

#[test]
fn greedy_shortcut_changes_nothing() {
    let on = small(8, vec![5.0, 15.0]);
    let mut off = on.clone();
    off.greedy_shortcut = false;
    let (a, b) = (simulate_content_outage(&on).unwrap(), simulate_content_outage(&off).unwrap());
    for (x, y) in a.iter().zip(&b) {
        for (p, q) in x.points.iter().zip(&y.points) {
            assert_eq!(p.estimate.events, q.estimate.events);
        }
    }
}

#[test]
fn infeasible_demand_rejected() {
    let mut cfg = small(1, vec![10.0]);
    cfg.demand = vec![3; 4];
    cfg.capacity = 2;
    assert!(simulate_content_outage(&cfg).is_err());
}
