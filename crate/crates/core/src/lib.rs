//! Profit intensity of repeated trading cycles against a stationary market,
//! the fixed-point characterisation of the optimal withdrawal price, and the
//! maximum-entropy model of subjectively perceived demand whose optimum sits
//! at the golden-ratio transaction probability.
//!
//! Module map:
//!
//! * [`distributions`]: log-price laws and adaptive quadrature
//! * [`engine`]: cycle duration, cycle profit, intensity, fixed-point solver
//! * [`maxent`]: the subjective max-entropy law and the golden optimum
//! * [`info`]: Shannon entropy, Fisher information, H-entropy, reference curves
//! * [`sim`]: seeded Monte Carlo validation of the cycle
//! * [`market`]: supply/demand curves, equilibrium, cross-ratio invariant
//! * [`cli`]: the `mmtrade` command-line front end

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod battery;
pub mod cli;
pub mod distributions;
pub mod engine;
pub mod error;
pub mod info;
pub mod market;
pub mod maxent;
pub mod roots;
pub mod sim;

pub use distributions::{LogPrice, PriceDistribution, Side, Support};
pub use engine::{FixedPointResult, MMConfig, Orientation};
pub use error::{Error, Result};
pub use maxent::MaxEntModel;
pub use sim::{CycleStats, SimConfig};
