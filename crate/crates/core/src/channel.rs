//! Rayleigh block-fading channel, per-AP mutual information and one-bit
//! quantized CSI.

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::bitmatrix::BitMatrix;
use crate::rng::{self, Rng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("SNR must be positive and finite, got {0}")]
    InvalidSnr(f64),
    #[error("per-AP threshold must be non-negative and finite, got {0}")]
    InvalidThreshold(f64),
    #[error("matrix has {got} rows but {expected} thresholds were given")]
    ShapeMismatch { expected: usize, got: usize },
}

/// Transmit SNR, stored in linear scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SnrPoint(f64);

impl SnrPoint {
    pub fn new(linear: f64) -> Result<Self, ChannelError> {
        if linear > 0.0 && linear.is_finite() {
            Ok(Self(linear))
        } else {
            Err(ChannelError::InvalidSnr(linear))
        }
    }

    pub fn from_db(db: f64) -> Result<Self, ChannelError> {
        Self::new(10f64.powf(db / 10.0))
    }

    pub fn linear(self) -> f64 {
        self.0
    }

    pub fn db(self) -> f64 {
        10.0 * self.0.log10()
    }

    pub fn ln(self) -> f64 {
        self.0.ln()
    }
}

/// Complex gains `h[m][n]` between user `m` and AP `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl GainMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "gain matrix data has the wrong length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.data[m * self.cols + n]
    }
}

/// One circularly-symmetric complex Gaussian draw with unit variance.
pub fn sample_gain(rng: &mut Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// I.i.d. CN(0, 1) gains for an `m x n` system.
pub fn sample_gains(m: usize, n: usize, seed: u64) -> GainMatrix {
    let mut rng = rng::keyed(seed, rng::STREAM_CHANNEL, 0, 0);
    let data = (0..m * n).map(|_| sample_gain(&mut rng)).collect();
    GainMatrix::from_vec(m, n, data)
}

/// `ln(1 + snr * |h|^2)` in nats.
pub fn mutual_information(h: Complex64, snr: SnrPoint) -> f64 {
    mutual_information_from_power(h.norm_sqr(), snr)
}

pub fn mutual_information_from_power(power: f64, snr: SnrPoint) -> f64 {
    (snr.linear() * power).ln_1p()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MutualInfoMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl MutualInfoMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "mutual information data has the wrong length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.data[m * self.cols + n]
    }
}

pub fn mutual_info_matrix(gains: &GainMatrix, snr: SnrPoint) -> MutualInfoMatrix {
    let data = gains.data.iter().map(|&h| mutual_information(h, snr)).collect();
    MutualInfoMatrix::from_vec(gains.rows, gains.cols, data)
}

/// Per-link outage law for threshold `alpha`: `p = P(I < alpha)`, `q = 1 - p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApOutage {
    /// `(exp(alpha) - 1) / snr`, the channel-power threshold.
    pub power_threshold: f64,
    pub p: f64,
    pub q: f64,
}

impl ApOutage {
    pub fn ln_p(&self) -> f64 {
        self.p.ln()
    }

    pub fn ln_q(&self) -> f64 {
        -self.power_threshold
    }
}

/// `p` is evaluated with `expm1` so that it keeps full relative precision
/// at high SNR; `p + q` equals one to within one ulp.
pub fn ap_outage_prob(alpha: f64, snr: SnrPoint) -> Result<ApOutage, ChannelError> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(ChannelError::InvalidThreshold(alpha));
    }
    let t = alpha.exp_m1() / snr.linear();
    Ok(ApOutage { power_threshold: t, p: -(-t).exp_m1(), q: (-t).exp() })
}

/// Binary non-outage indicators, `Q[m][n] = 1` iff AP `n` can deliver its
/// coded packet to user `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedCsiMatrix(pub BitMatrix);

impl QuantizedCsiMatrix {
    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn cols(&self) -> usize {
        self.0.cols()
    }

    pub fn get(&self, m: usize, n: usize) -> bool {
        self.0.get(m, n)
    }
}

pub fn quantize_csi(info: &MutualInfoMatrix, alpha_star: &[f64]) -> Result<QuantizedCsiMatrix, ChannelError> {
    if alpha_star.len() != info.rows {
        return Err(ChannelError::ShapeMismatch { expected: alpha_star.len(), got: info.rows });
    }
    let mut bits = BitMatrix::new(info.rows, info.cols);
    for (m, &a) in alpha_star.iter().enumerate() {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(ChannelError::InvalidThreshold(a));
        }
        for n in 0..info.cols {
            bits.set(m, n, info.get(m, n) >= a);
        }
    }
    Ok(QuantizedCsiMatrix(bits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_conversions() {
        let s = SnrPoint::from_db(30.0).unwrap();
        assert!((s.linear() - 1000.0).abs() < 1e-9);
        assert!((s.db() - 30.0).abs() < 1e-12);
        assert!(SnrPoint::new(0.0).is_err());
        assert!(SnrPoint::new(f64::INFINITY).is_err());
    }

    #[test]
    fn outage_probabilities_sum_to_one() {
        for &db in &[-10.0, 0.0, 20.0, 60.0] {
            let o = ap_outage_prob(1.0, SnrPoint::from_db(db).unwrap()).unwrap();
            assert!((o.p + o.q - 1.0).abs() <= f64::EPSILON);
            assert!(o.p > 0.0 && o.q > 0.0);
        }
        let o = ap_outage_prob(0.0, SnrPoint::new(1.0).unwrap()).unwrap();
        assert_eq!((o.p, o.q), (0.0, 1.0));
        assert!(ap_outage_prob(-1.0, SnrPoint::new(1.0).unwrap()).is_err());
    }

    #[test]
    fn zero_gain_has_zero_information() {
        let snr = SnrPoint::from_db(10.0).unwrap();
        assert_eq!(mutual_information(Complex64::new(0.0, 0.0), snr), 0.0);
        let i = mutual_information(Complex64::new(0.6, 0.8), snr);
        assert!((i - 11f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gain_power_is_unit_exponential() {
        let g = sample_gains(200, 100, 11);
        let n = (g.rows() * g.cols()) as f64;
        let mean = g.data.iter().map(|h| h.norm_sqr()).sum::<f64>() / n;
        let below = g.data.iter().filter(|h| h.norm_sqr() < 1.0).count() as f64 / n;
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
        assert!((below - (1.0 - (-1.0f64).exp())).abs() < 0.01, "cdf {below}");
    }

    #[test]
    fn quantizer_matches_threshold() {
        let info = MutualInfoMatrix::from_vec(2, 2, vec![0.5, 1.0, 1.5, 0.9]);
        let q = quantize_csi(&info, &[1.0, 1.0]).unwrap();
        assert!(!q.get(0, 0) && q.get(0, 1) && q.get(1, 0) && !q.get(1, 1));
        assert!(quantize_csi(&info, &[1.0]).is_err());
    }
}
