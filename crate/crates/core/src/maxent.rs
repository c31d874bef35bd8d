//! The subjective maximum-entropy quotation law.
//!
//! Knowing only her transaction probability `P`, the trader reconstructs a
//! law on `[0, ∞)` that is flat up to the withdrawal price `a` and decays
//! exponentially with temperature `T` beyond it:
//!
//! ```text
//! pdf(p) = exp(-[p > a](p - a)/T) / (a + T)
//! ```
//!
//! so that `P = ∫_a^∞ pdf = T/(a + T)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::distributions::{PriceDistribution, Side, Support};
use crate::engine::{self, MMConfig, Orientation};
use crate::error::{Error, Result};
use crate::roots;

/// `(√5 - 1)/2`
pub const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxEntModel {
    a: f64,
    t: f64,
}

impl MaxEntModel {
    pub fn new(a: f64, temperature: f64) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::invalid(format!("withdrawal price a must be finite and nonnegative, got {a}")));
        }
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::invalid(format!("temperature must be positive, got {temperature}")));
        }
        Ok(MaxEntModel { a, t: temperature })
    }

    /// Builds the model from its transaction probability instead of `T`.
    pub fn from_probability(a: f64, p: f64) -> Result<Self> {
        MaxEntModel::new(a, temperature_from_probability(a, p)?)
    }

    pub fn withdrawal(&self) -> f64 {
        self.a
    }

    pub fn temperature(&self) -> f64 {
        self.t
    }

    /// Transaction probability `T/(a + T)`.
    pub fn probability(&self) -> f64 {
        probability_from_temperature(self.a, self.t)
    }

    fn norm(&self) -> f64 {
        self.a + self.t
    }

    /// `ln pdf(p)` on the support, without underflow in the far tail.
    pub fn ln_density(&self, p: f64) -> f64 {
        if p < 0.0 {
            return f64::NEG_INFINITY;
        }
        let excess = if p > self.a { (p - self.a) / self.t } else { 0.0 };
        -excess - self.norm().ln()
    }

    /// `∂ ln pdf / ∂p`: zero on the flat segment, `-1/T` on the tail. At the
    /// kink the tail value is returned.
    pub fn score(&self, p: f64) -> f64 {
        if p < self.a {
            0.0
        } else {
            -1.0 / self.t
        }
    }

    /// `E(p) = a²/(2(a+T)) + T`.
    pub fn mean_price(&self) -> f64 {
        0.5 * self.a * self.a / self.norm() + self.t
    }
}

impl PriceDistribution for MaxEntModel {
    fn density(&self, p: f64) -> f64 {
        if p < 0.0 {
            0.0
        } else if p <= self.a {
            1.0 / self.norm()
        } else {
            (-(p - self.a) / self.t).exp() / self.norm()
        }
    }

    fn cdf(&self, p: f64) -> f64 {
        if p <= 0.0 {
            0.0
        } else if p <= self.a {
            p / self.norm()
        } else {
            1.0 - self.sf(p)
        }
    }

    fn sf(&self, p: f64) -> f64 {
        if p <= 0.0 {
            1.0
        } else if p <= self.a {
            (self.a - p + self.t) / self.norm()
        } else {
            self.t * (-(p - self.a) / self.t).exp() / self.norm()
        }
    }

    fn partial_first_moment(&self, bound: f64, side: Side) -> f64 {
        let n = self.norm();
        let upper = |b: f64| {
            if b <= 0.0 {
                self.mean_price()
            } else if b <= self.a {
                0.5 * (self.a - b) * (self.a + b) / n + self.t
            } else if b == f64::INFINITY {
                0.0
            } else {
                (-(b - self.a) / self.t).exp() * self.t * (b + self.t) / n
            }
        };
        match side {
            Side::Above => upper(bound),
            Side::Below => {
                if bound <= 0.0 {
                    0.0
                } else if bound <= self.a {
                    0.5 * bound * bound / n
                } else {
                    self.mean_price() - upper(bound)
                }
            }
        }
    }

    fn support(&self) -> Support {
        Support { lower: 0.0, upper: f64::INFINITY }
    }

    fn quantile(&self, u: f64) -> f64 {
        if !(u > 0.0) {
            return 0.0;
        }
        if u >= 1.0 {
            return f64::INFINITY;
        }
        let flat = self.a / self.norm();
        if u <= flat {
            u * self.norm()
        } else {
            // (1-u)(a+T)/T without cancellation for u near 1
            self.a - self.t * ((1.0 - u) * self.norm() / self.t).ln()
        }
    }

    fn mean(&self) -> f64 {
        self.mean_price()
    }

    fn breakpoints(&self) -> Vec<f64> {
        if self.a > 0.0 {
            vec![self.a]
        } else {
            Vec::new()
        }
    }
}

pub fn make_maxent(a: f64, temperature: f64) -> Result<MaxEntModel> {
    MaxEntModel::new(a, temperature)
}

/// The unique `T = aP/(1 - P)` giving tail mass `P` beyond `a`.
pub fn temperature_from_probability(a: f64, p: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::invalid(format!("withdrawal price must be positive, got {a}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("transaction probability must lie in (0, 1), got {p}")));
    }
    Ok(a * p / (1.0 - p))
}

pub fn probability_from_temperature(a: f64, temperature: f64) -> f64 {
    temperature / (a + temperature)
}

pub fn mean_price(m: &MaxEntModel) -> f64 {
    m.mean_price()
}

/// Probability that the rest of the market buys at log-price `x` or above.
pub fn perceived_demand(m: &MaxEntModel, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::invalid(format!("perceived demand is defined for x >= 0, got {x}")));
    }
    Ok(m.sf(x))
}

pub fn golden_optimum() -> f64 {
    (5.0_f64.sqrt() - 1.0) / 2.0
}

/// Seller cycle profit of the model at threshold `a`, minus `a`, as a
/// function of the transaction probability.
fn optimality_gap(a: f64, p: f64) -> Result<f64> {
    let model = MaxEntModel::from_probability(a, p)?;
    let cfg = MMConfig::new(Arc::new(model), a, 1.0, Orientation::Seller)?;
    Ok(engine::cycle_profit(&cfg)? - a)
}

/// Solves `ρ_seller(a) = a` for the transaction probability at fixed `a` by
/// bracketing root finding on `(0, 1)`.
pub fn golden_optimum_numeric(a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::invalid(format!("withdrawal price must be positive, got {a}")));
    }
    let g = |p: f64| optimality_gap(a, p).unwrap_or(f64::NAN);
    let root = roots::brent(g, 1e-9, 1.0 - 1e-9, 1e-14, 200)?;
    Ok(root.x)
}
