use super::AnalyticError;
use crate::channel::{ap_outage_prob, SnrPoint};
use crate::special::numdiff::derivative;
use crate::special::{ln_gamma_interval, ln_upper_incomplete_gamma, meijer_g3, meijer_g4};

const BRACKET_LO: f64 = 1e-6;
const BRACKET_HI: f64 = 0.999;
const BRACKET_MAX: f64 = 512.0;
const ROOT_TOL: f64 = 1e-9;
const MAX_ROOT_ITERS: usize = 200;

/// Conditioning of one user's `K` per-AP mutual informations: `k` of them
/// known to be at least `alpha_star`, the other `K - k` below it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleConfig {
    pub big_k: usize,
    pub small_k: usize,
    pub rho: f64,
    pub alpha_star: f64,
    pub snr: SnrPoint,
    pub p: f64,
    pub q: f64,
    ln_p: f64,
    ln_q: f64,
}

impl SaddleConfig {
    pub fn new(big_k: usize, small_k: usize, alpha_star: f64, snr: SnrPoint) -> Result<Self, AnalyticError> {
        if big_k == 0 || small_k > big_k {
            return Err(AnalyticError::InvalidConfig(format!("need 0 <= k <= K with K >= 1, got K = {big_k}, k = {small_k}")));
        }
        if !(alpha_star > 0.0) || !alpha_star.is_finite() {
            return Err(AnalyticError::InvalidConfig(format!("alpha* = {alpha_star} must be positive")));
        }
        let o = ap_outage_prob(alpha_star, snr)?;
        Ok(Self {
            big_k,
            small_k,
            rho: 1.0 - small_k as f64 / big_k as f64,
            alpha_star,
            snr,
            p: o.p,
            q: o.q,
            ln_p: o.ln_p(),
            ln_q: o.ln_q(),
        })
    }

    /// Configuration for content size `rate` split into `K` equal fragments.
    pub fn for_rate(big_k: usize, small_k: usize, rate: f64, snr: SnrPoint) -> Result<Self, AnalyticError> {
        Self::new(big_k, small_k, rate / big_k as f64, snr)
    }

    fn x_low(&self) -> f64 {
        1.0 / self.snr.linear()
    }

    fn x_high(&self) -> f64 {
        self.alpha_star.exp() / self.snr.linear()
    }

    fn ln_upper(&self, s: f64) -> Result<f64, AnalyticError> {
        Ok(ln_upper_incomplete_gamma(s, self.x_high())?)
    }

    fn ln_interval(&self, s: f64) -> Result<f64, AnalyticError> {
        Ok(ln_gamma_interval(s, self.x_low(), self.x_high())?)
    }
}

/// Per-fragment cumulant-generating function of `alpha* - Z`, averaged
/// over the above/below mixture with weights `1 - rho` and `rho`.
pub fn cgf(lambda: f64, cfg: &SaddleConfig) -> Result<f64, AnalyticError> {
    let s = 1.0 - lambda;
    let rho = cfg.rho;
    let mut v = (cfg.alpha_star - cfg.snr.ln()) * lambda + cfg.x_low();
    if rho < 1.0 {
        v += (1.0 - rho) * (cfg.ln_upper(s)? - cfg.ln_q);
    }
    if rho > 0.0 {
        v += rho * (cfg.ln_interval(s)? - cfg.ln_p);
    }
    Ok(v)
}

fn step_for(lambda: f64, order: u8) -> f64 {
    let base = if order == 1 { 1e-3 } else { 5e-3 };
    base * lambda.abs().max(1.0).sqrt()
}

/// First or second derivative of [`cgf`], from order-derivatives of the
/// logarithms of the two incomplete gamma terms.
pub fn cgf_derivative(lambda: f64, cfg: &SaddleConfig, order: u8) -> Result<f64, AnalyticError> {
    let s = 1.0 - lambda;
    let h = step_for(lambda, order);
    let rho = cfg.rho;
    let sign = if order == 1 { -1.0 } else { 1.0 };
    let mut v = if order == 1 { cfg.alpha_star - cfg.snr.ln() } else { 0.0 };
    if rho < 1.0 {
        v += sign * (1.0 - rho) * derivative(|t| cfg.ln_upper(t), s, h, order)?;
    }
    if rho > 0.0 {
        v += sign * rho * derivative(|t| cfg.ln_interval(t), s, h, order)?;
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddlePoint {
    pub lambda_star: f64,
    pub sigma_sq: f64,
    /// `ln(p^rho q^(1-rho))`.
    pub j1: f64,
    /// `1/snr + (1-rho) ln Gamma(1-l, e^a/snr) + rho ln(Gamma(1-l, 1/snr) - Gamma(1-l, e^a/snr))`.
    pub j0: f64,
    pub psi: f64,
    /// `cgf(lambda_star)`.
    pub cgf_value: f64,
}

/// Locates the unique root of the CGF derivative by a safeguarded secant
/// (Illinois) iteration on an expanding bracket.
pub fn solve_saddle(cfg: &SaddleConfig) -> Result<SaddlePoint, AnalyticError> {
    let f = |l: f64| cgf_derivative(l, cfg, 1);
    let mut lo = BRACKET_LO;
    let mut flo = f(lo)?;
    if flo >= 0.0 {
        return Err(AnalyticError::NoSaddle(format!(
            "mean of alpha* - Z is {flo:.3e} >= 0, the outage event is not in the upper tail"
        )));
    }
    let mut hi = BRACKET_HI;
    let mut fhi = f(hi)?;
    while fhi < 0.0 {
        if hi >= BRACKET_MAX {
            return Err(AnalyticError::NoSaddle(format!("no sign change of the CGF slope below lambda = {BRACKET_MAX}")));
        }
        lo = hi;
        flo = fhi;
        hi *= 2.0;
        fhi = f(hi)?;
    }
    let mut side = 0i8;
    let mut root = 0.5 * (lo + hi);
    for _ in 0..MAX_ROOT_ITERS {
        let mut x = (lo * fhi - hi * flo) / (fhi - flo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x)?;
        root = x;
        if fx.abs() <= ROOT_TOL || (hi - lo) <= 1e-14 * hi {
            break;
        }
        if fx < 0.0 {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    let sigma_sq = cgf_derivative(root, cfg, 2)?;
    if !(sigma_sq >= 1e-12) {
        return Err(AnalyticError::NoSaddle(format!("curvature {sigma_sq:.3e} at the saddle is not positive")));
    }
    let cgf_value = cgf(root, cfg)?;
    let j1 = cfg.rho * cfg.ln_p + (1.0 - cfg.rho) * cfg.ln_q;
    let s = 1.0 - root;
    let mut j0 = cfg.x_low();
    if cfg.rho < 1.0 {
        j0 += (1.0 - cfg.rho) * cfg.ln_upper(s)?;
    }
    if cfg.rho > 0.0 {
        j0 += cfg.rho * cfg.ln_interval(s)?;
    }
    let psi = 1.0 / ((2.0 * std::f64::consts::PI * cfg.big_k as f64 * sigma_sq).sqrt() * root);
    Ok(SaddlePoint { lambda_star: root, sigma_sq, j1, j0, psi, cgf_value })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    pub value: f64,
    pub ln_value: f64,
    /// Whether the raw bound exceeded one and was clamped.
    pub clamped: bool,
    pub saddle: SaddlePoint,
}

/// `psi exp(K cgf(lambda*))`, the saddle-point upper bound on the
/// probability that the `K` fragments carry less than `K alpha*` nats.
pub fn conditional_upper_bound(cfg: &SaddleConfig) -> Result<BoundValue, AnalyticError> {
    let sp = solve_saddle(cfg)?;
    let raw = cfg.big_k as f64 * sp.cgf_value + sp.psi.ln();
    let clamped = raw > 0.0;
    let ln_value = raw.min(0.0);
    Ok(BoundValue { value: ln_value.exp(), ln_value, clamped, saddle: sp })
}

/// Residual of the expanded stationarity condition written with Meijer-G
/// terms: the right-hand side minus `alpha*`, zero at the saddle.
pub fn stationarity_residual(lambda: f64, cfg: &SaddleConfig) -> Result<f64, AnalyticError> {
    let s = 1.0 - lambda;
    let (x1, x2) = (cfg.x_low(), cfg.x_high());
    let rho = cfg.rho;
    let g1 = crate::special::upper_incomplete_gamma(s, x1)?;
    let g2 = crate::special::upper_incomplete_gamma(s, x2)?;
    let (m1, m2) = (meijer_g3(s, x1)?, meijer_g3(s, x2)?);
    let diff = cfg.ln_interval(s)?.exp();
    let rhs = cfg.snr.ln()
        + (1.0 - rho) * x2.ln()
        + (1.0 - rho) * m2 / g2
        + rho * ((g1 * x1.ln() - g2 * x2.ln() + m1) / diff - m2 / diff);
    Ok(rhs - cfg.alpha_star)
}

/// The expanded curvature expression written with Meijer-G terms.
pub fn curvature_expanded(lambda: f64, cfg: &SaddleConfig) -> Result<f64, AnalyticError> {
    let s = 1.0 - lambda;
    let (x1, x2) = (cfg.x_low(), cfg.x_high());
    let (l1, l2) = (x1.ln(), x2.ln());
    let rho = cfg.rho;
    let g1 = crate::special::upper_incomplete_gamma(s, x1)?;
    let g2 = crate::special::upper_incomplete_gamma(s, x2)?;
    let (a1, a2) = (meijer_g3(s, x1)?, meijer_g3(s, x2)?);
    let (b1, b2) = (meijer_g4(s, x1)?, meijer_g4(s, x2)?);
    let d = cfg.ln_interval(s)?.exp();
    let first = (g1 * l1 - g2 * l2) / d + (a1 - a2) / d;
    let inner = (g1 * l1 * l1 - g2 * l2 * l2) / d + (2.0 * a1 * l1 - 2.0 * a2 * l2) / d + (2.0 * b1 - 2.0 * b2) / d;
    Ok(rho * inner - rho * first * first + (1.0 - rho) * (2.0 * b2 / g2 - (a2 / g2).powi(2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(db: f64) -> SaddleConfig {
        SaddleConfig::for_rate(2, 1, 2.0, SnrPoint::from_db(db).unwrap()).unwrap()
    }

    #[test]
    fn cgf_vanishes_at_origin() {
        for &db in &[-5.0, 0.0, 10.0, 30.0, 50.0] {
            assert!(cgf(0.0, &cfg(db)).unwrap().abs() < 1e-12, "{db} dB");
        }
    }

    #[test]
    fn saddle_at_high_snr() {
        let c = cfg(40.0);
        let sp = solve_saddle(&c).unwrap();
        assert!(sp.lambda_star > 1.0);
        assert!(cgf_derivative(sp.lambda_star, &c, 1).unwrap().abs() < 1e-8);
        assert!(sp.sigma_sq > 0.0);
        // the quantity in the exponent splits into the J terms
        let recon = (c.alpha_star - c.snr.ln()) * sp.lambda_star - sp.j1 + sp.j0;
        assert!((recon - sp.cgf_value).abs() < 1e-12);
    }

    #[test]
    fn no_saddle_when_event_is_typical() {
        assert!(matches!(solve_saddle(&cfg(0.0)), Err(AnalyticError::NoSaddle(_))));
        let full = SaddleConfig::for_rate(2, 2, 2.0, SnrPoint::from_db(30.0).unwrap()).unwrap();
        assert!(matches!(solve_saddle(&full), Err(AnalyticError::NoSaddle(_))));
    }

    #[test]
    fn expanded_forms_agree_with_direct_derivatives() {
        let c = cfg(30.0);
        let sp = solve_saddle(&c).unwrap();
        assert!(stationarity_residual(sp.lambda_star, &c).unwrap().abs() < 1e-6);
        let direct = sp.sigma_sq;
        let expanded = curvature_expanded(sp.lambda_star, &c).unwrap();
        assert!((direct - expanded).abs() < 1e-5 * direct.abs().max(1.0), "{direct} vs {expanded}");
    }
}
