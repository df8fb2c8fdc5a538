use rand::Rng as _;
use rand_distr::Open01;

use super::stats::{wilson_interval, Z95};
use super::{Estimate, SimError, TrialBudget};
use crate::channel::{ap_outage_prob, ApOutage, SnrPoint};
use crate::rng::{self, Rng};

/// Conditional outage experiment: `k` of the `K` fragments on links known
/// to be above `alpha* = R / K`, the rest below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalConfig {
    pub big_k: usize,
    pub small_k: usize,
    pub rate: f64,
    pub snr: SnrPoint,
    pub budget: TrialBudget,
}

impl ConditionalConfig {
    pub fn rho(&self) -> f64 {
        1.0 - self.small_k as f64 / self.big_k as f64
    }

    pub fn alpha_star(&self) -> f64 {
        self.rate / self.big_k as f64
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.big_k == 0 || self.small_k > self.big_k {
            return Err(SimError::InvalidConfig(format!("need 0 <= k <= K, K >= 1; got K = {}, k = {}", self.big_k, self.small_k)));
        }
        if !(self.rate >= 0.0) || !self.rate.is_finite() {
            return Err(SimError::InvalidConfig(format!("rate {} must be non-negative", self.rate)));
        }
        self.budget.validate()
    }
}

/// Channel power `|h|^2` drawn from its law conditioned on the link being
/// above (`true`) or below the power threshold, by inverse transform.
pub fn draw_conditional_power(rng: &mut Rng, link: &ApOutage, above: bool) -> f64 {
    let v: f64 = rng.sample(Open01);
    if above {
        link.power_threshold - v.ln()
    } else {
        -(-link.p * v).ln_1p()
    }
}

/// Mutual information `ln(1 + snr |h|^2)` from the same conditional laws.
pub fn draw_conditional_mi(rng: &mut Rng, link: &ApOutage, snr: SnrPoint, above: bool) -> f64 {
    (snr.linear() * draw_conditional_power(rng, link, above)).ln_1p()
}

pub fn simulate_conditional_outage(cfg: &ConditionalConfig, seed: u64) -> Result<Estimate, SimError> {
    cfg.validate()?;
    let link = ap_outage_prob(cfg.alpha_star(), cfg.snr)?;
    let stream = (cfg.big_k as u64) << 32 | cfg.small_k as u64;
    let run = |from: u64, to: u64| -> u64 {
        let mut events = 0;
        for t in from..to {
            let mut r = rng::keyed(seed, rng::STREAM_CONDITIONAL, stream, t);
            let mut sum = 0.0;
            for i in 0..cfg.big_k {
                sum += draw_conditional_mi(&mut r, &link, cfg.snr, i < cfg.small_k);
            }
            if sum < cfg.rate {
                events += 1;
            }
        }
        events
    };
    let (events, trials) = cfg.budget.run(run);
    let estimate = events as f64 / trials as f64;
    let (ci_lo, ci_hi) = wilson_interval(events, trials, Z95);
    Ok(Estimate {
        estimate,
        trials,
        events,
        ci_lo,
        ci_hi,
        std_err: (estimate * (1.0 - estimate) / trials as f64).sqrt(),
    })
}
