use super::conditional::ConditionalModel;
use super::outage::{content_outage_high_snr, SystemConfig};
use super::AnalyticError;
use crate::channel::SnrPoint;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmtPoint {
    pub r: f64,
    pub d: f64,
}

/// Diversity of the conditional outage with `k` of `K` fragments on
/// non-outage APs.
pub fn conditional_dmt(big_k: usize, small_k: usize, r: f64) -> Result<DmtPoint, AnalyticError> {
    if small_k > big_k || !(0.0..=big_k as f64).contains(&r) {
        return Err(AnalyticError::InvalidConfig(format!("need k <= K and 0 <= r <= K, got K = {big_k}, k = {small_k}, r = {r}")));
    }
    Ok(DmtPoint { r, d: small_k as f64 * (1.0 - r / big_k as f64) })
}

/// Best achievable diversity gain of one user at multiplexing gain `r`.
pub fn dmr(cfg: &SystemConfig, r: f64) -> Result<f64, AnalyticError> {
    let k = cfg.demand as f64;
    if !(r > 0.0 && r <= k) {
        return Err(AnalyticError::InvalidConfig(format!("multiplexing gain {r} outside (0, {k}]")));
    }
    let n = cfg.aps as f64;
    let factor = 1.0 - r / k;
    if n >= cfg.threshold() - 1e-9 {
        Ok(n * factor)
    } else {
        let mn = (cfg.users * cfg.aps) as f64;
        Ok((mn - cfg.phi2() as f64 + cfg.eta * k) * factor)
    }
}

/// How the rate moves along the stencil when differentiating in SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateSpec {
    /// Fixed rate in nats.
    Fixed(f64),
    /// Rate `r ln(snr)`.
    Multiplexing(f64),
}

impl RateSpec {
    pub fn rate_at(self, snr: SnrPoint) -> f64 {
        match self {
            RateSpec::Fixed(r) => r,
            RateSpec::Multiplexing(r) => r * snr.ln(),
        }
    }
}

const LN_STEP: f64 = 0.05;

/// `-d ln p / d ln snr` of the high-SNR approximation by a central
/// difference in `ln snr`.
pub fn outage_exponent(cfg: &SystemConfig, rate: RateSpec, snr: SnrPoint, model: ConditionalModel) -> Result<f64, AnalyticError> {
    let at = |shift: f64| -> Result<f64, AnalyticError> {
        let s = SnrPoint::new(snr.linear() * shift.exp())?;
        Ok(content_outage_high_snr(cfg, rate.rate_at(s), s, model)?.ln_value)
    };
    Ok(-(at(LN_STEP)? - at(-LN_STEP)?) / (2.0 * LN_STEP))
}

/// Outage exponent of every user in `configs` at the same SNR.
pub fn oer(configs: &[(SystemConfig, RateSpec)], snr: SnrPoint, model: ConditionalModel) -> Result<Vec<f64>, AnalyticError> {
    configs.iter().map(|(c, r)| outage_exponent(c, *r, snr, model)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_dmr_values() {
        let c = SystemConfig::homogeneous(10, 5, 4, 2, 0.5).unwrap();
        assert!((dmr(&c, 0.9).unwrap() - 2.75).abs() < 1e-12);
        assert!((dmr(&c, 0.6).unwrap() - 3.5).abs() < 1e-12);
        assert!((dmr(&c, 1e-9).unwrap() - 5.0).abs() < 1e-6);
    }

    #[test]
    fn conditional_dmt_values() {
        assert_eq!(conditional_dmt(2, 1, 0.0).unwrap().d, 1.0);
        assert_eq!(conditional_dmt(2, 1, 2.0).unwrap().d, 0.0);
        assert_eq!(conditional_dmt(3, 3, 0.0).unwrap().d, 3.0);
    }

    #[test]
    fn exponent_grows_with_snr_at_fixed_rate() {
        let c = SystemConfig::homogeneous(10, 5, 4, 2, 0.5).unwrap();
        let e: Vec<f64> = [10.0, 20.0, 30.0]
            .iter()
            .map(|&db| outage_exponent(&c, RateSpec::Fixed(1.0), SnrPoint::from_db(db).unwrap(), ConditionalModel::Auto).unwrap())
            .collect();
        assert!(e[0] < e[1] && e[1] < e[2], "{e:?}");
    }
}
