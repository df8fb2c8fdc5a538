use super::saddle::{conditional_upper_bound, SaddleConfig};
use super::AnalyticError;
use crate::special::quad::integrate;

/// Largest fragment count handled by nested quadrature.
pub const EXACT_MAX_K: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConditionalModel {
    /// Saddle-point upper bound; an error when no saddle exists.
    #[default]
    SaddlePoint,
    /// Nested quadrature of the conditional laws, for `K <= 4`.
    Exact,
    /// The bound where a saddle exists, otherwise quadrature when small
    /// enough, otherwise the trivial bound one.
    Auto,
}

impl std::str::FromStr for ConditionalModel {
    type Err = AnalyticError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "saddle" | "saddlepoint" | "saddle-point" => Ok(Self::SaddlePoint),
            "exact" => Ok(Self::Exact),
            "auto" => Ok(Self::Auto),
            _ => Err(AnalyticError::InvalidConfig(format!("unknown conditional model '{s}'"))),
        }
    }
}

/// Conditional outage probability of one user given how many of its `K`
/// fragments sit on APs above the threshold.
pub fn conditional_outage(cfg: &SaddleConfig, model: ConditionalModel) -> Result<f64, AnalyticError> {
    if cfg.small_k == 0 {
        return Ok(1.0);
    }
    if cfg.small_k == cfg.big_k {
        return Ok(0.0);
    }
    match model {
        ConditionalModel::SaddlePoint => Ok(conditional_upper_bound(cfg)?.value),
        ConditionalModel::Exact => exact_conditional_outage(cfg),
        ConditionalModel::Auto => match conditional_upper_bound(cfg) {
            Ok(b) => Ok(b.value),
            Err(AnalyticError::NoSaddle(_)) if cfg.big_k <= EXACT_MAX_K => exact_conditional_outage(cfg),
            Err(AnalyticError::NoSaddle(_)) => Ok(1.0),
            Err(e) => Err(e),
        },
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Above,
    Below,
}

struct Laws {
    alpha: f64,
    inv_snr: f64,
    p: f64,
}

impl Laws {
    fn lo(&self, k: Kind) -> f64 {
        match k {
            Kind::Above => self.alpha,
            Kind::Below => 0.0,
        }
    }

    fn hi(&self, k: Kind) -> f64 {
        match k {
            Kind::Above => f64::INFINITY,
            Kind::Below => self.alpha,
        }
    }

    fn cdf(&self, k: Kind, z: f64) -> f64 {
        match k {
            Kind::Above if z <= self.alpha => 0.0,
            Kind::Above => -(-self.alpha.exp() * (z - self.alpha).exp_m1() * self.inv_snr).exp_m1(),
            Kind::Below if z <= 0.0 => 0.0,
            Kind::Below if z >= self.alpha => 1.0,
            Kind::Below => (-(-z.exp_m1() * self.inv_snr).exp_m1() / self.p).min(1.0),
        }
    }

    fn pdf(&self, k: Kind, z: f64) -> f64 {
        let g = z.exp() * self.inv_snr;
        match k {
            Kind::Above => g * (-self.alpha.exp() * (z - self.alpha).exp_m1() * self.inv_snr).exp(),
            Kind::Below => g * (-z.exp_m1() * self.inv_snr).exp() / self.p,
        }
    }

    fn prob_less(&self, kinds: &[Kind], r: f64) -> Result<f64, AnalyticError> {
        let first = kinds[0];
        if kinds.len() == 1 {
            return Ok(self.cdf(first, r));
        }
        let rest = &kinds[1..];
        let rest_min: f64 = rest.iter().map(|&k| self.lo(k)).sum();
        let rest_max: f64 = rest.iter().map(|&k| self.hi(k)).sum();
        let a = self.lo(first);
        let b = self.hi(first).min(r - rest_min);
        if b <= a {
            return Ok(0.0);
        }
        // kinks of the inner probability sit where r - z crosses a sum of thresholds
        let mut cuts = vec![a];
        for j in 0..=rest.len() {
            let c = r - rest_min - j as f64 * self.alpha;
            if c > a && c < b {
                cuts.push(c);
            }
        }
        cuts.push(b);
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut total = 0.0;
        let mut err = None;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi <= lo {
                continue;
            }
            // beyond this point the remaining fragments always fit
            let full = r - rest_max;
            let res = integrate(
                |z| {
                    let inner = if z < full {
                        1.0
                    } else {
                        match self.prob_less(rest, r - z) {
                            Ok(v) => v,
                            Err(e) => {
                                err.get_or_insert(e);
                                0.0
                            }
                        }
                    };
                    self.pdf(first, z) * inner
                },
                lo,
                hi,
                1e-16,
                1e-10,
            )?;
            total += res.value;
        }
        if let Some(e) = err {
            return Err(e);
        }
        Ok(total.clamp(0.0, 1.0))
    }
}

/// Exact conditional outage by nested quadrature over the conditional
/// per-fragment laws.
pub fn exact_conditional_outage(cfg: &SaddleConfig) -> Result<f64, AnalyticError> {
    if cfg.big_k > EXACT_MAX_K {
        return Err(AnalyticError::Unsupported(format!(
            "exact conditional outage supports K <= {EXACT_MAX_K}, got {}",
            cfg.big_k
        )));
    }
    if cfg.small_k == 0 {
        return Ok(1.0);
    }
    if cfg.small_k == cfg.big_k {
        return Ok(0.0);
    }
    let laws = Laws { alpha: cfg.alpha_star, inv_snr: 1.0 / cfg.snr.linear(), p: cfg.p };
    let mut kinds = vec![Kind::Above; cfg.small_k];
    kinds.resize(cfg.big_k, Kind::Below);
    laws.prob_less(&kinds, cfg.big_k as f64 * cfg.alpha_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SnrPoint;

    #[test]
    fn saddle_bound_tracks_exact_at_high_snr() {
        let cfg = |db| SaddleConfig::for_rate(2, 1, 2.0, SnrPoint::from_db(db).unwrap()).unwrap();
        for &db in &[20.0, 40.0] {
            let c = cfg(db);
            let exact = exact_conditional_outage(&c).unwrap();
            let bound = conditional_upper_bound(&c).unwrap().value;
            let ratio = bound / exact;
            assert!(ratio > 0.9 && ratio < 1.1, "{db} dB: bound {bound} exact {exact}");
        }
    }

    #[test]
    fn endpoints() {
        let snr = SnrPoint::from_db(10.0).unwrap();
        let none = SaddleConfig::for_rate(3, 0, 1.0, snr).unwrap();
        let all = SaddleConfig::for_rate(3, 3, 1.0, snr).unwrap();
        for m in [ConditionalModel::SaddlePoint, ConditionalModel::Exact, ConditionalModel::Auto] {
            assert_eq!(conditional_outage(&none, m).unwrap(), 1.0);
            assert_eq!(conditional_outage(&all, m).unwrap(), 0.0);
        }
    }
}
