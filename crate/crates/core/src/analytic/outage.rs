use super::conditional::{conditional_outage, ConditionalModel};
use super::saddle::SaddleConfig;
use super::AnalyticError;
use crate::channel::{ap_outage_prob, SnrPoint};
use crate::graph::phi2;
use crate::special::{ln_binomial, log_add_exp};

/// The network seen by one user: its demand `demand` among `users` users
/// with total demand `k_sum`, `aps` APs of capacity `capacity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub users: usize,
    pub aps: usize,
    pub capacity: usize,
    pub demand: usize,
    pub k_sum: usize,
    pub eta: f64,
}

impl SystemConfig {
    /// Every user requests `demand` fragments.
    pub fn homogeneous(users: usize, aps: usize, capacity: usize, demand: usize, eta: f64) -> Result<Self, AnalyticError> {
        Self::new(users, aps, capacity, demand, users * demand, eta)
    }

    pub fn new(users: usize, aps: usize, capacity: usize, demand: usize, k_sum: usize, eta: f64) -> Result<Self, AnalyticError> {
        if users == 0 || aps == 0 || demand == 0 || demand > aps || k_sum < demand {
            return Err(AnalyticError::InvalidConfig(format!(
                "bad sizes M = {users}, N = {aps}, K = {demand}, sum K = {k_sum}"
            )));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(AnalyticError::InvalidConfig(format!("eta = {eta} outside [0, 1]")));
        }
        Ok(Self { users, aps, capacity, demand, k_sum, eta })
    }

    pub fn phi2(&self) -> i64 {
        phi2(self.users, self.capacity, self.k_sum)
    }

    /// `(phi2 - eta K) / (M - 1)`; minus infinity for a single user.
    pub fn threshold(&self) -> f64 {
        if self.users == 1 {
            return f64::NEG_INFINITY;
        }
        (self.phi2() as f64 - self.eta * self.demand as f64) / (self.users - 1) as f64
    }

    /// Number of fragments guaranteed by the fairness constraint.
    pub fn fair_share(&self) -> usize {
        ((self.eta * self.demand as f64 + 1e-9).floor() as usize).min(self.demand)
    }

    pub fn branch(&self) -> Branch {
        let t = self.threshold();
        let n = self.aps as f64;
        if (n - t).abs() <= 1e-9 {
            Branch::Both
        } else if n > t {
            Branch::AllAps
        } else {
            Branch::EdgeLimited
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Enough APs: outage needs `N - K + 1` AP outages.
    AllAps,
    /// Edge-limited: only the fairness share survives.
    EdgeLimited,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageValue {
    pub value: f64,
    pub ln_value: f64,
    pub branch: Branch,
    pub clamped: bool,
}

impl OutageValue {
    fn from_ln(ln_value: f64, branch: Branch) -> Self {
        let clamped = ln_value > 0.0;
        let ln_value = ln_value.min(0.0);
        Self { value: ln_value.exp(), ln_value, branch, clamped }
    }
}

fn ln_pcon(cfg: &SystemConfig, k: usize, rate: f64, snr: SnrPoint, model: ConditionalModel) -> Result<f64, AnalyticError> {
    let sc = SaddleConfig::for_rate(cfg.demand, k, rate, snr)?;
    Ok(conditional_outage(&sc, model)?.ln())
}

fn ln_all_aps(cfg: &SystemConfig, rate: f64, snr: SnrPoint, model: ConditionalModel) -> Result<f64, AnalyticError> {
    let o = ap_outage_prob(rate / cfg.demand as f64, snr)?;
    let n = cfg.aps;
    let mut acc = f64::NEG_INFINITY;
    for kappa in (n - cfg.demand + 1)..=n {
        let t = ln_binomial(n as u64, kappa as u64) + ln_pcon(cfg, n - kappa, rate, snr, model)? + kappa as f64 * o.ln_p();
        acc = log_add_exp(acc, t);
    }
    Ok(acc)
}

fn ln_edge_limited(cfg: &SystemConfig, rate: f64, snr: SnrPoint, model: ConditionalModel) -> Result<f64, AnalyticError> {
    let o = ap_outage_prob(rate / cfg.demand as f64, snr)?;
    let mn = (cfg.users * cfg.aps) as i64;
    let phi = cfg.phi2();
    if phi < 0 || phi > mn {
        return Err(AnalyticError::InvalidConfig(format!("edge count {phi} outside [0, {mn}]")));
    }
    Ok(ln_binomial(mn as u64, phi as u64)
        + ln_pcon(cfg, cfg.fair_share(), rate, snr, model)?
        + (mn - phi) as f64 * o.ln_p())
}

/// First-order high-SNR content outage probability of one user.
pub fn content_outage_high_snr(
    cfg: &SystemConfig,
    rate: f64,
    snr: SnrPoint,
    model: ConditionalModel,
) -> Result<OutageValue, AnalyticError> {
    let branch = cfg.branch();
    let ln = match branch {
        Branch::AllAps => ln_all_aps(cfg, rate, snr, model)?,
        Branch::EdgeLimited => ln_edge_limited(cfg, rate, snr, model)?,
        Branch::Both => log_add_exp(ln_all_aps(cfg, rate, snr, model)?, ln_edge_limited(cfg, rate, snr, model)?),
    };
    Ok(OutageValue::from_ln(ln, branch))
}

/// First-order low-SNR content outage: all `N` APs in outage, or exactly
/// one AP above the threshold and the user still short.
pub fn content_outage_low_snr(
    aps: usize,
    demand: usize,
    rate: f64,
    snr: SnrPoint,
    model: ConditionalModel,
) -> Result<OutageValue, AnalyticError> {
    if aps == 0 || demand == 0 || demand > aps {
        return Err(AnalyticError::InvalidConfig(format!("bad sizes N = {aps}, K = {demand}")));
    }
    let sc = SaddleConfig::for_rate(demand, 1, rate, snr)?;
    let o = ap_outage_prob(sc.alpha_star, snr)?;
    let n = aps as f64;
    let first = n * o.ln_p();
    let second = n.ln() + conditional_outage(&sc, model)?.ln() + (n - 1.0) * o.ln_p() + o.ln_q();
    Ok(OutageValue::from_ln(log_add_exp(first, second), Branch::AllAps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_configuration_branch() {
        let c = SystemConfig::homogeneous(10, 5, 4, 2, 0.5).unwrap();
        assert_eq!(c.phi2(), 43);
        assert!((c.threshold() - 42.0 / 9.0).abs() < 1e-12);
        assert_eq!(c.branch(), Branch::AllAps);
    }

    #[test]
    fn high_snr_scales_like_p_to_the_n() {
        let c = SystemConfig::homogeneous(10, 5, 4, 2, 0.5).unwrap();
        let a = content_outage_high_snr(&c, 1.0, SnrPoint::from_db(40.0).unwrap(), ConditionalModel::Exact).unwrap();
        let b = content_outage_high_snr(&c, 1.0, SnrPoint::from_db(50.0).unwrap(), ConditionalModel::Exact).unwrap();
        // leading term p^(N-1) p_con with p_con ~ 1/snr gives slope N
        let slope = (a.ln_value - b.ln_value) / (10f64.ln());
        assert!((slope - 5.0).abs() < 0.1, "{slope}");
    }

    #[test]
    fn low_snr_limit_is_one() {
        let v = content_outage_low_snr(5, 2, 2.0, SnrPoint::from_db(-60.0).unwrap(), ConditionalModel::Auto).unwrap();
        assert!((v.value - 1.0).abs() < 1e-4);
    }
}
