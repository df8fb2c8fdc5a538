//! Regenerating-code parameters and the DMR-optimal code design.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodingError {
    #[error("invalid code dimensions: {0}")]
    InvalidDimensions(String),
    #[error("content sizes must be positive: {0}")]
    InvalidContent(String),
    #[error("no rounding keeps every K_m in 1..={aps}: {detail}")]
    RoundingInfeasible { aps: usize, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeScheme {
    Mds,
    Mbr,
    Msr,
}

impl std::str::FromStr for CodeScheme {
    type Err = CodingError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mds" => Ok(Self::Mds),
            "mbr" => Ok(Self::Mbr),
            "msr" => Ok(Self::Msr),
            other => Err(CodingError::InvalidDimensions(format!("unknown code scheme {other:?}"))),
        }
    }
}

impl std::fmt::Display for CodeScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Mds => "mds",
            Self::Mbr => "mbr",
            Self::Msr => "msr",
        })
    }
}

/// Content sizes `R_m` in nats, one per user.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentSpec {
    sizes: Vec<f64>,
}

impl ContentSpec {
    pub fn new(sizes: Vec<f64>) -> Result<Self, CodingError> {
        if sizes.is_empty() {
            return Err(CodingError::InvalidContent("no contents".into()));
        }
        if let Some(r) = sizes.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
            return Err(CodingError::InvalidContent(format!("R = {r}")));
        }
        Ok(Self { sizes })
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn total(&self) -> f64 {
        self.sizes.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeParameters {
    pub scheme: CodeScheme,
    pub n: usize,
    pub k: usize,
    pub d: Option<usize>,
    pub alpha: f64,
    /// Repair bandwidth; absent for plain MDS codes.
    pub beta: Option<f64>,
}

fn check_kd(k: usize, d: usize) -> Result<(), CodingError> {
    if k < 1 || k > d {
        return Err(CodingError::InvalidDimensions(format!("need 1 <= K <= D, got K = {k}, D = {d}")));
    }
    Ok(())
}

/// Minimum-storage point: `alpha = R/K`, `beta = D/(D-K+1) R/K`.
pub fn msr_params(r: f64, k: usize, d: usize) -> Result<(f64, f64), CodingError> {
    check_kd(k, d)?;
    let alpha = r / k as f64;
    Ok((alpha, d as f64 / (d - k + 1) as f64 * alpha))
}

/// Minimum-bandwidth point: `alpha = beta = 2D/(2D-K+1) R/K`.
pub fn mbr_params(r: f64, k: usize, d: usize) -> Result<(f64, f64), CodingError> {
    check_kd(k, d)?;
    let a = 2.0 * d as f64 / (2 * d - k + 1) as f64 * r / k as f64;
    Ok((a, a))
}

/// Per-node storage of an MDS code, `R/K`.
pub fn mds_alpha(r: f64, k: usize) -> Result<f64, CodingError> {
    if k < 1 {
        return Err(CodingError::InvalidDimensions("K = 0".into()));
    }
    Ok(r / k as f64)
}

/// Parameters of scheme `scheme` with dimensions `(n, k, d)`; `d` is
/// ignored for MDS.
pub fn code_parameters(scheme: CodeScheme, r: f64, n: usize, k: usize, d: usize) -> Result<CodeParameters, CodingError> {
    if k > n {
        return Err(CodingError::InvalidDimensions(format!("K = {k} exceeds N = {n}")));
    }
    match scheme {
        CodeScheme::Mds => Ok(CodeParameters { scheme, n, k, d: None, alpha: mds_alpha(r, k)?, beta: None }),
        CodeScheme::Msr | CodeScheme::Mbr => {
            if d > n {
                return Err(CodingError::InvalidDimensions(format!("D = {d} exceeds N = {n}")));
            }
            let (alpha, beta) = if scheme == CodeScheme::Msr { msr_params(r, k, d)? } else { mbr_params(r, k, d)? };
            Ok(CodeParameters { scheme, n, k, d: Some(d), alpha, beta: Some(beta) })
        }
    }
}

/// Unrounded `K*_m = R_m N / sum R`.
pub fn ideal_k(spec: &ContentSpec, aps: usize) -> Vec<f64> {
    let total = spec.total();
    spec.sizes.iter().map(|r| r * aps as f64 / total).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    /// Largest-remainder apportionment, total capped by `max_total` when
    /// given (typically `N L`).
    LargestRemainder { max_total: Option<usize> },
}

impl Default for Rounding {
    fn default() -> Self {
        Self::LargestRemainder { max_total: None }
    }
}

/// Integer `K*` closest to the ideal split keeping `1 <= K_m <= N`.
pub fn optimal_k(spec: &ContentSpec, aps: usize, rounding: Rounding) -> Result<Vec<usize>, CodingError> {
    let ideal = ideal_k(spec, aps);
    let Rounding::LargestRemainder { max_total } = rounding;
    let mut target = ideal.iter().sum::<f64>().round() as usize;
    if let Some(cap) = max_total {
        target = target.min(cap);
    }
    let mut k: Vec<usize> = ideal.iter().map(|x| (x.floor() as usize).clamp(1, aps)).collect();
    let assigned: usize = k.iter().sum();
    if assigned > target {
        return Err(CodingError::RoundingInfeasible {
            aps,
            detail: format!("{} contents need at least {assigned} coded packets, budget {target}", k.len()),
        });
    }
    let rem: Vec<f64> = ideal.iter().zip(&k).map(|(x, &ki)| x - ki as f64).collect();
    let mut order: Vec<usize> = (0..k.len()).collect();
    order.sort_by(|&a, &b| rem[b].total_cmp(&rem[a]).then(a.cmp(&b)));
    let mut left = target - assigned;
    for &i in &order {
        if left == 0 {
            break;
        }
        if k[i] < aps && rem[i] > 0.0 {
            k[i] += 1;
            left -= 1;
        }
    }
    if left > 0 {
        return Err(CodingError::RoundingInfeasible { aps, detail: format!("{left} packets could not be placed") });
    }
    Ok(k)
}

/// MSR codes with `(n, k, d) = (N, K*_m, K*_m)` for every content.
pub fn dmr_optimal_code(spec: &ContentSpec, aps: usize) -> Result<Vec<CodeParameters>, CodingError> {
    let k = optimal_k(spec, aps, Rounding::default())?;
    spec.sizes
        .iter()
        .zip(k)
        .map(|(&r, km)| code_parameters(CodeScheme::Msr, r, aps, km, km))
        .collect()
}
