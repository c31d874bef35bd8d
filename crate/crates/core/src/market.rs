//! Supply and demand curves (Cournot convention: functions of log-price),
//! the equilibrium price and the cross-ratio form of the cycle return.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::distributions::{LogPrice, PriceDistribution};
use crate::error::{Error, Result};
use crate::roots;

/// Supply and demand quotation laws; they may differ (taxes, monopoly, …).
#[derive(Debug, Clone)]
pub struct MarketPair {
    pub eta_s: Arc<dyn PriceDistribution>,
    pub eta_d: Arc<dyn PriceDistribution>,
}

impl MarketPair {
    pub fn new(eta_s: Arc<dyn PriceDistribution>, eta_d: Arc<dyn PriceDistribution>) -> Self {
        MarketPair { eta_s, eta_d }
    }

    /// Both sides share one law.
    pub fn symmetric(eta: Arc<dyn PriceDistribution>) -> Self {
        MarketPair { eta_s: eta.clone(), eta_d: eta }
    }
}

/// Probability of buying a unit at `e^x` or cheaper: the cdf of `η_s`.
pub fn supply_curve(mp: &MarketPair, x: f64) -> f64 {
    mp.eta_s.cdf(x)
}

/// Tail mass of `η_d` above `x`.
pub fn demand_curve(mp: &MarketPair, x: f64) -> f64 {
    mp.eta_d.sf(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub price: f64,
    pub supply: f64,
    pub demand: f64,
    /// Set when the two laws differ, so the crossing is not the common median.
    pub warning: Option<String>,
}

const CONSISTENCY_TOL: f64 = 1e-9;

/// Largest cdf gap between the two laws on a grid spanning both supports.
fn max_cdf_gap(mp: &MarketPair, lo: f64, hi: f64) -> f64 {
    (0..=400)
        .map(|k| lo + (hi - lo) * k as f64 / 400.0)
        .map(|x| (mp.eta_s.cdf(x) - mp.eta_d.cdf(x)).abs())
        .fold(0.0, f64::max)
}

/// The log-price where supply meets demand. For identical laws this is the
/// common median, where both curves equal one half.
pub fn equilibrium_price(mp: &MarketPair) -> Result<Equilibrium> {
    let lo = mp.eta_s.quantile(1e-12).min(mp.eta_d.quantile(1e-12));
    let hi = mp.eta_s.quantile(1.0 - 1e-12).max(mp.eta_d.quantile(1.0 - 1e-12));
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::NoEquilibrium(format!("cannot bracket the curves on [{lo}, {hi}]")));
    }
    let gap = |x: f64| supply_curve(mp, x) - demand_curve(mp, x);
    let root = roots::brent(gap, lo, hi, 1e-13, 300).map_err(|e| Error::NoEquilibrium(e.to_string()))?;
    let price = root.x;
    let mismatch = max_cdf_gap(mp, lo, hi);
    let warning = (mismatch > CONSISTENCY_TOL).then(|| {
        format!("supply and demand laws differ (max cdf gap {mismatch:.3e}); crossing is not the common median")
    });
    Ok(Equilibrium { price, supply: supply_curve(mp, price), demand: demand_curve(mp, price), warning })
}

/// A portfolio `(v, v·e^p, …)` on the money/asset plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortfolioPoint {
    pub money_amount: f64,
    pub asset_log_price: LogPrice,
}

impl PortfolioPoint {
    pub fn new(money_amount: f64, asset_log_price: f64) -> Result<Self> {
        if !(money_amount > 0.0) || !money_amount.is_finite() {
            return Err(Error::invalid(format!("money amount must be positive, got {money_amount}")));
        }
        Ok(PortfolioPoint { money_amount, asset_log_price: LogPrice::new(asset_log_price)? })
    }
}

/// A point on the projective line in homogeneous coordinates `(x, w)`,
/// standing for the parameter `x/w`; `w = 0` is the point at infinity.
#[derive(Debug, Clone, Copy)]
struct LinePoint(f64, f64);

fn det(p: LinePoint, q: LinePoint) -> f64 {
    p.0 * q.1 - p.1 * q.0
}

/// Cross ratio `[A, B, C, D] = (A-C)(B-D) / ((A-B)(C-D))`.
fn cross_ratio(a: LinePoint, b: LinePoint, c: LinePoint, d: LinePoint) -> f64 {
    det(a, c) * det(b, d) / (det(a, b) * det(c, d))
}

/// Logarithm of the cross ratio of the single-asset point, the purchase
/// portfolio, the sale portfolio and the money-only point along the line
/// `u(λ) = λ·U_buy + (1-λ)·U_sell`.
///
/// The line meets the money-only hyperplane at `λ_$ = w/(w-v)` and the
/// asset-only hyperplane at `λ_Θ = w e^{p_sell} / (w e^{p_sell} - v e^{p_buy})`;
/// the two portfolios sit at `λ = 1` and `λ = 0`. The result equals
/// `p_sell - p_buy` whatever the money amounts.
pub fn log_cross_ratio(buy: &PortfolioPoint, sell: &PortfolioPoint) -> Result<f64> {
    let (v, w) = (buy.money_amount, sell.money_amount);
    if !(v > 0.0 && w > 0.0) {
        return Err(Error::invalid("money amounts must be positive"));
    }
    let (pb, ps) = (buy.asset_log_price.value(), sell.asset_log_price.value());
    if v == w && pb == ps {
        return Err(Error::invalid("purchase and sale portfolios coincide; the line through them is undefined"));
    }
    // Homogeneous coordinates are taken in the basis (x, x - w): every point
    // then has cancellation-free coordinates, and the cross ratio does not
    // depend on the basis. The asset point is rescaled by e^{-max(p)} to keep
    // the exponentials finite.
    let m = pb.max(ps);
    let lambda_asset = LinePoint(w * (ps - m).exp(), v * (pb - m).exp());
    let lambda_money = LinePoint(w, v);
    let at_buy = LinePoint(1.0, 0.0);
    let at_sell = LinePoint(0.0, -1.0);
    let cr = cross_ratio(lambda_asset, at_buy, at_sell, lambda_money);
    if !(cr > 0.0) || !cr.is_finite() {
        return Err(Error::invalid(format!("degenerate cross ratio {cr}")));
    }
    Ok(cr.ln())
}
