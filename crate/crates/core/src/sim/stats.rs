use super::SimError;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_964;

/// Wilson score interval for `events` successes in `trials`.
pub fn wilson_interval(events: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = events as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

/// Local outage exponents `-d ln p / d ln snr` from a curve given as
/// `(snr_db, p)` points. Points with `p <= 0` are skipped and reported as
/// `None`; interior points use centred differences over their usable
/// neighbours, the two ends one-sided ones.
pub fn estimate_exponent(points: &[(f64, f64)]) -> Result<Vec<Option<f64>>, SimError> {
    let usable: Vec<usize> = (0..points.len()).filter(|&i| points[i].1 > 0.0 && points[i].1.is_finite()).collect();
    if usable.len() < 3 {
        return Err(SimError::InsufficientData { usable: usable.len(), needed: 3 });
    }
    let x = |i: usize| points[i].0 * std::f64::consts::LN_10 / 10.0;
    let y = |i: usize| points[i].1.ln();
    let mut out = vec![None; points.len()];
    for (j, &i) in usable.iter().enumerate() {
        let (a, b) = if j == 0 {
            (i, usable[1])
        } else if j + 1 == usable.len() {
            (usable[j - 1], i)
        } else {
            (usable[j - 1], usable[j + 1])
        };
        out[i] = Some(-(y(b) - y(a)) / (x(b) - x(a)));
    }
    Ok(out)
}

/// Least-squares slope of `-ln p` against `ln snr` over the points whose
/// SNR lies in `[lo_db, hi_db]`.
pub fn fitted_exponent(points: &[(f64, f64)], lo_db: f64, hi_db: f64) -> Result<f64, SimError> {
    let sel: Vec<(f64, f64)> = points
        .iter()
        .filter(|(db, p)| *db >= lo_db && *db <= hi_db && *p > 0.0)
        .map(|&(db, p)| (db * std::f64::consts::LN_10 / 10.0, p.ln()))
        .collect();
    if sel.len() < 2 {
        return Err(SimError::InsufficientData { usable: sel.len(), needed: 2 });
    }
    let n = sel.len() as f64;
    let mx = sel.iter().map(|v| v.0).sum::<f64>() / n;
    let my = sel.iter().map(|v| v.1).sum::<f64>() / n;
    let sxy: f64 = sel.iter().map(|v| (v.0 - mx) * (v.1 - my)).sum();
    let sxx: f64 = sel.iter().map(|v| (v.0 - mx).powi(2)).sum();
    Ok(-sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_estimate() {
        for &(e, n) in &[(0u64, 10u64), (3, 10), (10, 10), (500, 100_000)] {
            let (lo, hi) = wilson_interval(e, n, Z95);
            let p = e as f64 / n as f64;
            assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
        }
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn power_law_has_constant_exponent() {
        let pts: Vec<(f64, f64)> = (0..6).map(|i| {
            let db = 5.0 * i as f64;
            (db, 10f64.powf(-2.5 * db / 10.0))
        }).collect();
        for e in estimate_exponent(&pts).unwrap() {
            assert!((e.unwrap() - 2.5).abs() < 1e-9);
        }
        assert!((fitted_exponent(&pts, 5.0, 20.0).unwrap() - 2.5).abs() < 1e-9);
    }

    #[test]
    fn zeros_are_skipped() {
        let pts = [(0.0, 0.5), (10.0, 0.05), (20.0, 0.0), (30.0, 0.0005)];
        let e = estimate_exponent(&pts).unwrap();
        assert!(e[2].is_none());
        assert!((e[1].unwrap() - 1.0).abs() < 1e-9);
        assert!(estimate_exponent(&pts[..2]).is_err());
    }
}
