//! Environment division multiple access with pinching antennas: channel and
//! blockage model, rate evaluation, two-user closed forms, placement
//! optimizers and seeded Monte Carlo.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analytics;
pub mod cli;
pub mod downlink;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod placement;
pub mod quadrature;
pub mod rates;
pub mod uplink;

pub use error::{Error, Result};
