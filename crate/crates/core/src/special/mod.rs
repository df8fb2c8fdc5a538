//! Special functions: incomplete gamma of real order, numerical
//! derivatives and adaptive quadrature.

mod incgamma;
pub mod numdiff;
pub mod quad;

use thiserror::Error;

pub use incgamma::{
    ln_gamma_interval, ln_upper_incomplete_gamma, meijer_g3, meijer_g4, upper_gamma_order_derivative,
    upper_incomplete_gamma,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialError {
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

/// Natural log of the binomial coefficient `C(n, k)`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// `ln(exp(a) + exp(b))` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
