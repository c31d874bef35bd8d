//! Log-price distributions and the integration kernel used by every other
//! module.

mod gaussian;
pub mod quadrature;
mod reflected;
mod tabulated;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gaussian::{std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf, GaussianDist};
pub use quadrature::{integrate, integrate_with_breaks};
pub use reflected::Reflected;
pub use tabulated::TabulatedDist;

/// A logarithmic quotation `ln(V_money) - ln(V_asset)`. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LogPrice(f64);

impl LogPrice {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(LogPrice(value))
        } else {
            Err(Error::invalid(format!("log-price must be finite, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for LogPrice {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        LogPrice::new(v)
    }
}

impl From<LogPrice> for f64 {
    fn from(p: LogPrice) -> f64 {
        p.0
    }
}

impl fmt::Display for LogPrice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Which half-line a partial moment is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `(-inf, bound]`
    Below,
    /// `[bound, +inf)`
    Above,
}

/// Closed support interval; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

/// The law of the logarithmic quotation offered by the rest of the market.
///
/// Implementations are immutable once built and safe to share across
/// threads.
pub trait PriceDistribution: fmt::Debug + Send + Sync {
    fn density(&self, p: f64) -> f64;

    fn cdf(&self, p: f64) -> f64;

    /// Survival function `P(X >= p)`. Override when `1 - cdf` loses precision.
    fn sf(&self, p: f64) -> f64 {
        1.0 - self.cdf(p)
    }

    /// `∫ p·density(p) dp` over the half-line selected by `side`.
    fn partial_first_moment(&self, bound: f64, side: Side) -> f64;

    fn support(&self) -> Support;

    /// Inverse cdf. Values outside `(0, 1)` clamp to the support ends.
    fn quantile(&self, u: f64) -> f64;

    fn mean(&self) -> f64 {
        self.partial_first_moment(0.0, Side::Below) + self.partial_first_moment(0.0, Side::Above)
    }

    /// Points where the density is not smooth; quadrature splits there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Integrates `g(p)·density(p)` over `(lo, hi)` for any distribution,
/// clipping to the support and splitting at its kinks.
pub fn expectation_over<D, G>(dist: &D, g: G, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    D: PriceDistribution + ?Sized,
    G: Fn(f64) -> f64,
{
    let s = dist.support();
    let lo = lo.max(s.lower);
    let hi = hi.min(s.upper);
    if !(lo < hi) {
        return Ok(0.0);
    }
    let breaks = dist.breakpoints();
    integrate_with_breaks(
        |p| {
            let d = dist.density(p);
            if d == 0.0 {
                0.0
            } else {
                g(p) * d
            }
        },
        lo,
        hi,
        &breaks,
        tol,
    )
}

/// Uniform law on `[lo, hi]`, expressed as a one-bin histogram.
pub fn make_uniform(lo: f64, hi: f64) -> Result<TabulatedDist> {
    TabulatedDist::new(vec![lo, hi], vec![1.0])
}

pub fn make_gaussian(mean: f64, sigma: f64) -> Result<GaussianDist> {
    GaussianDist::new(mean, sigma)
}

pub fn make_tabulated(edges: Vec<f64>, masses: Vec<f64>) -> Result<TabulatedDist> {
    TabulatedDist::new(edges, masses)
}

macro_rules! forward_price_distribution {
    ($($ptr:ty),*) => {$(
        impl<T: PriceDistribution + ?Sized> PriceDistribution for $ptr {
            fn density(&self, p: f64) -> f64 { (**self).density(p) }
            fn cdf(&self, p: f64) -> f64 { (**self).cdf(p) }
            fn sf(&self, p: f64) -> f64 { (**self).sf(p) }
            fn partial_first_moment(&self, bound: f64, side: Side) -> f64 {
                (**self).partial_first_moment(bound, side)
            }
            fn support(&self) -> Support { (**self).support() }
            fn quantile(&self, u: f64) -> f64 { (**self).quantile(u) }
            fn mean(&self) -> f64 { (**self).mean() }
            fn breakpoints(&self) -> Vec<f64> { (**self).breakpoints() }
        }
    )*};
}

forward_price_distribution!(&T, Box<T>, std::sync::Arc<T>);
