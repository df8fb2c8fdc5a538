use super::numdiff::derivative;
use super::{log_add_exp, SpecialError};

const EPS: f64 = 1e-17;
const MAX_ITER: usize = 1000;
const FPMIN: f64 = 1e-300;
const EULER: f64 = 0.577_215_664_901_532_9;
const POLE_RADIUS: f64 = 0.25;
const STEP_FIRST: f64 = 1e-3;
const STEP_SECOND: f64 = 5e-3;

// zeta(2) ..= zeta(14)
const ZETA: [f64; 13] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_369_9,
    1.017_343_061_984_449_1,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308,
    1.000_122_713_347_578_5,
    1.000_061_248_135_058_7,
];

fn zeta(k: usize) -> f64 {
    if k - 2 < ZETA.len() {
        ZETA[k - 2]
    } else {
        let k = k as f64;
        1.0 + 2f64.powf(-k) + 3f64.powf(-k) + 4f64.powf(-k)
    }
}

fn check_domain(s: f64, x: f64) -> Result<(), SpecialError> {
    if !s.is_finite() {
        return Err(SpecialError::Domain(format!("order {s} must be finite")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecialError::Domain(format!("argument {x} must be positive and finite")));
    }
    Ok(())
}

/// `ln Gamma(1 + e) / e` for `|e| <= 1/2`, accurate as `e -> 0`.
fn ln_gamma_1p_over(e: f64) -> f64 {
    let mut sum = -EULER;
    let mut pow = 1.0;
    for k in 2..80 {
        // (-1)^k zeta(k) e^(k-1) / k
        pow *= e;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * zeta(k) * pow / k as f64;
        sum += term;
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    sum
}

/// `Gamma(s, x) * x^(-s)` for `0 < x <= 1` via the alternating power
/// series, with the pole of `Gamma(s)` cancelled analytically near
/// non-positive integers.
fn scaled_series(s: f64, x: f64) -> f64 {
    let lnx = x.ln();
    let j = (-s).round().max(0.0);
    let eps = s + j;
    let near_pole = eps.abs() < POLE_RADIUS;
    let jn = j as usize;
    let mut sum = 0.0;
    let mut fact_term = 1.0; // x^n / n!
    let mut n = 0usize;
    loop {
        if !(near_pole && n == jn) {
            let c = s + n as f64;
            let term = fact_term / c;
            let signed = if n % 2 == 0 { term } else { -term };
            sum -= signed;
            if n > jn + 2 && term.abs() < EPS * sum.abs().max(1e-300) {
                break;
            }
        }
        n += 1;
        if n > MAX_ITER {
            break;
        }
        fact_term *= x / n as f64;
    }
    let head = if near_pole {
        // (-1)^j x^j / j! * (g(eps) x^(-eps) - 1) / eps
        let mut lg = ln_gamma_1p_over(eps);
        for l in 1..=jn {
            let l = l as f64;
            lg -= if eps == 0.0 { -1.0 / l } else { (-eps / l).ln_1p() / eps };
        }
        let slope = lg - lnx;
        let u = eps * slope;
        let ratio = if u == 0.0 { 1.0 } else { u.exp_m1() / u };
        let ln_xj_fact = j * lnx - libm::lgamma(j + 1.0);
        let sign = if jn % 2 == 0 { 1.0 } else { -1.0 };
        sign * ln_xj_fact.exp() * slope * ratio
    } else {
        let (lg, sign) = libm::lgamma_r(s);
        sign as f64 * (lg - s * lnx).exp()
    };
    head + sum
}

fn ln_continued_fraction(s: f64, x: f64) -> Result<f64, SpecialError> {
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(-x + s * x.ln() + h.ln());
        }
    }
    Err(SpecialError::NoConvergence("incomplete gamma continued fraction"))
}

fn ln_complement_series(s: f64, x: f64) -> Result<f64, SpecialError> {
    // Gamma(s) - gamma(s, x) with the positive series for gamma(s, x)
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut ap = s;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            let lg = libm::lgamma(s);
            let p = (-x + s * x.ln() + sum.ln() - lg).exp();
            return Ok(lg + (-p).ln_1p());
        }
    }
    Err(SpecialError::NoConvergence("incomplete gamma series"))
}

/// Natural log of the upper incomplete gamma function `Gamma(s, x)` for
/// any real order `s` and `x > 0`.
pub fn ln_upper_incomplete_gamma(s: f64, x: f64) -> Result<f64, SpecialError> {
    check_domain(s, x)?;
    if x <= 1.0 {
        let scaled = scaled_series(s, x);
        if !(scaled > 0.0) {
            return Err(SpecialError::NoConvergence("incomplete gamma power series"));
        }
        Ok(s * x.ln() + scaled.ln())
    } else if s < x + 1.0 {
        ln_continued_fraction(s, x)
    } else {
        ln_complement_series(s, x)
    }
}

/// Upper incomplete gamma function `Gamma(s, x) = int_x^inf t^(s-1) e^(-t) dt`.
///
/// # Example
/// ```
/// use fogmatch::special::upper_incomplete_gamma;
/// let v = upper_incomplete_gamma(1.0, 2.0).unwrap();
/// assert!((v - (-2.0f64).exp()).abs() < 1e-15);
/// ```
pub fn upper_incomplete_gamma(s: f64, x: f64) -> Result<f64, SpecialError> {
    Ok(ln_upper_incomplete_gamma(s, x)?.exp())
}

/// `ln((exp(c L) - 1) / c)`, positive for every real `c`.
fn ln_expm1_ratio(c: f64, l: f64) -> f64 {
    if c == 0.0 {
        l.ln()
    } else if c > 0.0 {
        c * l + (-(-c * l).exp_m1()).ln() - c.ln()
    } else {
        (-(c * l).exp_m1()).ln() - (-c).ln()
    }
}

fn ln_interval_series(s: f64, a: f64, b: f64) -> Result<f64, SpecialError> {
    let l = (b / a).ln();
    let lna = a.ln();
    let mut sum = 0.0;
    let mut ln_fact = 0.0;
    for n in 0..MAX_ITER {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let c = s + n as f64;
        let mag = (n as f64 * lna - ln_fact + ln_expm1_ratio(c, l)).exp();
        sum += if n % 2 == 0 { mag } else { -mag };
        if n as f64 > -s + 2.0 && mag < EPS * sum.abs() {
            if !(sum > 0.0) {
                break;
            }
            return Ok(s * lna + sum.ln());
        }
    }
    Err(SpecialError::NoConvergence("incomplete gamma interval series"))
}

fn ln_interval_difference(s: f64, a: f64, b: f64) -> Result<f64, SpecialError> {
    let la = ln_upper_incomplete_gamma(s, a)?;
    let lb = ln_upper_incomplete_gamma(s, b)?;
    Ok(la + (-(lb - la).exp_m1()).ln())
}

/// Natural log of `int_a^b t^(s-1) e^(-t) dt` for `0 < a < b`, which
/// equals `Gamma(s, a) - Gamma(s, b)` but avoids the cancellation when
/// both terms are large.
pub fn ln_gamma_interval(s: f64, a: f64, b: f64) -> Result<f64, SpecialError> {
    check_domain(s, a)?;
    check_domain(s, b)?;
    if !(b > a) {
        return Err(SpecialError::Domain(format!("interval ({a}, {b}) is empty")));
    }
    if b <= 1.0 {
        ln_interval_series(s, a, b)
    } else if a >= 1.0 {
        ln_interval_difference(s, a, b)
    } else {
        Ok(log_add_exp(ln_interval_series(s, a, 1.0)?, ln_interval_difference(s, 1.0, b)?))
    }
}

#[inline]
fn ln_derivs(s: f64, x: f64) -> Result<(f64, f64, f64), SpecialError> {
    let f = |t: f64| ln_upper_incomplete_gamma(t, x);
    let l0 = f(s)?;
    let l1 = derivative(f, s, STEP_FIRST, 1)?;
    let l2 = derivative(f, s, STEP_SECOND, 2)?;
    Ok((l0, l1, l2))
}

/// Derivative of `Gamma(s, x)` with respect to the order `s`.
/// `order` must be 1 or 2.
pub fn upper_gamma_order_derivative(s: f64, x: f64, order: u8) -> Result<f64, SpecialError> {
    check_domain(s, x)?;
    let (l0, l1, l2) = ln_derivs(s, x)?;
    let g = l0.exp();
    match order {
        1 => Ok(g * l1),
        2 => Ok(g * (l2 + l1 * l1)),
        _ => Err(SpecialError::Domain(format!("derivative order {order} not supported"))),
    }
}

/// `G^{3,0}_{2,3}(z | 1,1 ; 0,0,s)`, the part of the order derivative of
/// `Gamma(s, z)` that is not proportional to `Gamma(s, z)`.
pub fn meijer_g3(s: f64, z: f64) -> Result<f64, SpecialError> {
    check_domain(s, z)?;
    let (l0, l1, _) = ln_derivs(s, z)?;
    Ok(l0.exp() * (l1 - z.ln()))
}

/// `G^{4,0}_{3,4}(z | 1,1,1 ; 0,0,0,s)`.
pub fn meijer_g4(s: f64, z: f64) -> Result<f64, SpecialError> {
    check_domain(s, z)?;
    let (l0, l1, l2) = ln_derivs(s, z)?;
    let d = l1 - z.ln();
    Ok(0.5 * l0.exp() * (l2 + d * d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn ln_gamma_1p_series_matches_lgamma() {
        for &e in &[-0.24, -0.1, -1e-3, 1e-6, 0.05, 0.2] {
            let direct = libm::lgamma(1.0 + e) / e;
            assert!(close(ln_gamma_1p_over(e), direct, 1e-10), "e={e}");
        }
    }

    #[test]
    fn integer_orders_have_closed_forms() {
        // Gamma(1, x) = e^-x, Gamma(2, x) = (1 + x) e^-x, Gamma(0, x) = E1(x)
        for &x in &[0.01, 0.3, 1.0, 2.5, 10.0, 40.0] {
            assert!(close(upper_incomplete_gamma(1.0, x).unwrap(), (-x).exp(), 1e-13));
            assert!(close(upper_incomplete_gamma(2.0, x).unwrap(), (1.0 + x) * (-x).exp(), 1e-13));
        }
        // E1(1) = 0.21938393439552028
        assert!(close(upper_incomplete_gamma(0.0, 1.0).unwrap(), 0.219_383_934_395_520_28, 1e-13));
        // E1(0.1) = 1.8229239584193906
        assert!(close(upper_incomplete_gamma(0.0, 0.1).unwrap(), 1.822_923_958_419_390_6, 1e-13));
    }

    #[test]
    fn recurrence_holds_across_branches() {
        // Gamma(s + 1, x) = s Gamma(s, x) + x^s e^-x
        for &s in &[-3.7, -2.0, -1.59, -0.5, -1e-9, 0.3, 1.7, 4.2] {
            for &x in &[1e-4, 0.05, 0.9, 1.0, 1.1, 3.0, 12.0] {
                let lhs = upper_incomplete_gamma(s + 1.0, x).unwrap();
                let a = s * upper_incomplete_gamma(s, x).unwrap();
                let b = x.powf(s) * (-x).exp();
                let scale = a.abs().max(b.abs());
                assert!((lhs - (a + b)).abs() <= 1e-13 * scale, "s={s} x={x}: {lhs} vs {}", a + b);
            }
        }
    }

    #[test]
    fn continuity_across_pole_window() {
        let x = 0.02;
        for &j in &[0.0, 1.0, 2.0] {
            let inside = upper_incomplete_gamma(-j + POLE_RADIUS - 1e-12, x).unwrap();
            let outside = upper_incomplete_gamma(-j + POLE_RADIUS + 1e-12, x).unwrap();
            assert!(close(inside, outside, 1e-10), "j={j}: {inside} vs {outside}");
        }
    }

    #[test]
    fn interval_matches_difference_when_benign() {
        for &s in &[-1.6, -0.2, 0.0, 0.5, 2.0] {
            for &(a, b) in &[(0.01, 0.5), (0.2, 1.0), (0.5, 3.0), (1.5, 4.0)] {
                let direct = upper_incomplete_gamma(s, a).unwrap() - upper_incomplete_gamma(s, b).unwrap();
                let v = ln_gamma_interval(s, a, b).unwrap().exp();
                assert!(close(v, direct, 1e-10), "s={s} a={a} b={b}");
            }
        }
    }

    #[test]
    fn order_derivative_of_unit_order() {
        // d/ds Gamma(s, x) at s = 1 is E1(x) + ln(x) e^-x
        let x = 1.0;
        let d = upper_gamma_order_derivative(1.0, x, 1).unwrap();
        assert!(close(d, 0.219_383_934_395_520_28, 1e-9));
    }

    #[test]
    fn domain_errors() {
        assert!(upper_incomplete_gamma(1.0, 0.0).is_err());
        assert!(upper_incomplete_gamma(f64::NAN, 1.0).is_err());
        assert!(ln_gamma_interval(1.0, 2.0, 1.0).is_err());
    }
}
