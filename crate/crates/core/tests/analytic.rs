use fogmatch::analytic::{
    cgf, cgf_derivative, conditional_dmt, conditional_upper_bound, content_outage_high_snr, dmr, exact_conditional_outage, solve_saddle,
    Branch, ConditionalModel, SaddleConfig, SystemConfig,
};
use fogmatch::channel::SnrPoint;

fn reference(db: f64) -> SaddleConfig {
    SaddleConfig::for_rate(2, 1, 2.0, SnrPoint::from_db(db).unwrap()).unwrap()
}

#[test]
fn saddle_matches_grid_search() {
    let cfg = reference(30.0);
    let f = |l: f64| cgf(l, &cfg).unwrap();
    let grid = (1..80_000).map(|i| i as f64 / 10_000.0);
    let coarse = grid.min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
    // golden section around the grid minimum
    let (mut a, mut b) = (coarse - 1e-4, coarse + 1e-4);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-10 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let sp = solve_saddle(&cfg).unwrap();
    assert!((sp.lambda_star - (a + b) / 2.0).abs() < 1e-6, "{} vs {}", sp.lambda_star, (a + b) / 2.0);
    assert!(sp.sigma_sq > 0.0);
    let psi = 1.0 / ((2.0 * std::f64::consts::PI * 2.0 * sp.sigma_sq).sqrt() * sp.lambda_star);
    assert!((sp.psi - psi).abs() < 1e-12 * psi);
}

#[test]
fn saddle_is_continuous_in_snr() {
    let mut last: Option<f64> = None;
    for i in 0..=200 {
        let lam = solve_saddle(&reference(20.0 + 0.1 * i as f64)).unwrap().lambda_star;
        if let Some(prev) = last {
            assert!((lam - prev).abs() < 5e-3, "jump at step {i}");
        }
        last = Some(lam);
    }
}

#[test]
fn cgf_is_convex() {
    let cfg = reference(25.0);
    for i in 1..20 {
        let l = -1.0 + 0.1 * i as f64;
        assert!(cgf_derivative(l, &cfg, 2).unwrap() > 0.0, "lambda = {l}");
    }
}

#[test]
fn bound_slope_follows_conditional_dmt() {
    for (big_k, small_k) in [(2, 1), (3, 2), (3, 1)] {
        let ln_b = |db: f64| {
            conditional_upper_bound(&SaddleConfig::for_rate(big_k, small_k, 2.0, SnrPoint::from_db(db).unwrap()).unwrap()).unwrap().ln_value
        };
        let slope = -(ln_b(50.5) - ln_b(49.5)) / (std::f64::consts::LN_10 * 0.1);
        let d = conditional_dmt(big_k, small_k, 0.0).unwrap().d;
        assert!((slope - d).abs() <= 0.05 * d, "K={big_k} k={small_k}: {slope} vs {d}");
    }
}

#[test]
fn full_conditioning_cannot_fail() {
    let cfg = SaddleConfig::for_rate(3, 3, 2.0, SnrPoint::from_db(10.0).unwrap()).unwrap();
    assert_eq!(exact_conditional_outage(&cfg).unwrap(), 0.0);
    assert!(solve_saddle(&cfg).is_err());
}

#[test]
fn reference_system_uses_all_ap_branch() {
    let sys = SystemConfig::homogeneous(10, 5, 4, 2, 0.5).unwrap();
    assert_eq!(sys.phi2(), 43);
    assert!((sys.threshold() - 42.0 / 9.0).abs() < 1e-12);
    assert_eq!(sys.branch(), Branch::AllAps);
    let v = content_outage_high_snr(&sys, 2.0, SnrPoint::from_db(30.0).unwrap(), ConditionalModel::Auto).unwrap();
    assert_eq!(v.branch, Branch::AllAps);
    assert!(v.value > 0.0 && v.value < 1e-5);
}

#[test]
fn reference_dmr() {
    let sys = SystemConfig::homogeneous(10, 5, 4, 2, 0.5).unwrap();
    assert!((dmr(&sys, 0.9).unwrap() - 2.75).abs() < 1e-12);
    assert!((dmr(&sys, 0.6).unwrap() - 3.5).abs() < 1e-12);
}
