//! Saddle-point bounds on the conditional outage, first-order content
//! outage expansions, outage exponents and the diversity-multiplexing
//! region.

mod conditional;
mod dmt;
mod outage;
mod saddle;

use thiserror::Error;

pub use conditional::{conditional_outage, exact_conditional_outage, ConditionalModel};
pub use dmt::{conditional_dmt, dmr, outage_exponent, oer, DmtPoint, RateSpec};
pub use outage::{content_outage_high_snr, content_outage_low_snr, Branch, OutageValue, SystemConfig};
pub use saddle::{cgf, cgf_derivative, conditional_upper_bound, curvature_expanded, solve_saddle, stationarity_residual, BoundValue, SaddleConfig, SaddlePoint};

use crate::channel::ChannelError;
use crate::special::SpecialError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("no saddle point: {0}")]
    NoSaddle(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}
