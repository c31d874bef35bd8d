//! Trading-cycle quantities: acceptance and non-transaction probabilities,
//! expected cycle duration, the cycle profit functional and the profit
//! intensity, plus the fixed-point solver for the optimal withdrawal price.
//!
//! A buyer accepts the first quotation at or below `-a` and closes the
//! position with one random sale. A seller is the mirror image: a random
//! purchase and a rational sale at or above `a`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::distributions::{LogPrice, PriceDistribution, Side};
use crate::error::{Error, Result};
use crate::roots;

/// Acceptance probabilities below this are treated as zero.
pub const MIN_ACCEPTANCE: f64 = 1e-12;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DAMPING: f64 = 0.5;
/// Consecutive non-contracting steps tolerated before falling back to bisection.
pub const STALL_LIMIT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Rational purchase at `p <= -a`, random sale.
    #[default]
    Buyer,
    /// Random purchase, rational sale at `p >= a`.
    Seller,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Buyer => "buyer",
            Orientation::Seller => "seller",
        })
    }
}

impl std::str::FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "buyer" => Ok(Orientation::Buyer),
            "seller" => Ok(Orientation::Seller),
            other => Err(Error::invalid(format!("orientation must be `buyer` or `seller`, got `{other}`"))),
        }
    }
}

/// One trading strategy against a fixed quotation law.
#[derive(Debug, Clone)]
pub struct MMConfig {
    pub dist: Arc<dyn PriceDistribution>,
    /// Withdrawal price `a`.
    pub withdrawal: f64,
    /// Mean time of a single transaction; must be positive.
    pub theta: f64,
    pub orientation: Orientation,
}

impl MMConfig {
    pub fn new(
        dist: Arc<dyn PriceDistribution>,
        withdrawal: f64,
        theta: f64,
        orientation: Orientation,
    ) -> Result<Self> {
        let cfg = MMConfig { dist, withdrawal, theta, orientation };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.withdrawal.is_nan() {
            return Err(Error::invalid("withdrawal price is NaN"));
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return Err(Error::invalid(format!("theta must be positive and finite, got {}", self.theta)));
        }
        Ok(())
    }

    pub fn with_withdrawal(&self, withdrawal: f64) -> Self {
        MMConfig { withdrawal, ..self.clone() }
    }
}

/// Probability that a single quotation satisfies the rational side.
pub fn acceptance_prob(cfg: &MMConfig) -> f64 {
    let a = cfg.withdrawal;
    match cfg.orientation {
        Orientation::Buyer => cfg.dist.cdf(-a),
        Orientation::Seller => cfg.dist.sf(a),
    }
}

/// Probability `x` that the rational transaction does not occur on a draw.
pub fn non_transaction_prob(cfg: &MMConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(match cfg.orientation {
        Orientation::Buyer => cfg.dist.sf(-cfg.withdrawal),
        Orientation::Seller => 1.0 - cfg.dist.sf(cfg.withdrawal),
    })
}

/// `E(τ) = (1 + 1/P_accept)·θ`.
pub fn expected_cycle_length(cfg: &MMConfig) -> Result<f64> {
    cfg.validate()?;
    let acc = acceptance_prob(cfg);
    if !(acc >= MIN_ACCEPTANCE) {
        return Err(Error::DegenerateStrategy(format!(
            "acceptance probability {acc:e} at withdrawal price {} makes the expected wait unbounded",
            cfg.withdrawal
        )));
    }
    Ok((1.0 + 1.0 / acc) * cfg.theta)
}

/// Numerator of the cycle profit: the accepted-side partial first moment,
/// signed so that it is a gain.
fn accepted_moment(cfg: &MMConfig) -> f64 {
    let a = cfg.withdrawal;
    match cfg.orientation {
        Orientation::Buyer => -cfg.dist.partial_first_moment(-a, Side::Below),
        Orientation::Seller => cfg.dist.partial_first_moment(a, Side::Above),
    }
}

/// Expected log-return over a whole cycle, normalised per random-transaction
/// time: `ρ(a) = M(a) / (1 + P_accept(a))`.
pub fn cycle_profit(cfg: &MMConfig) -> Result<f64> {
    cfg.validate()?;
    let value = accepted_moment(cfg) / (1.0 + acceptance_prob(cfg));
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::DegenerateStrategy(format!("cycle profit is not finite at a = {}", cfg.withdrawal)))
    }
}

/// Profit per unit time, `ρ(a)/θ`.
pub fn profit_intensity(cfg: &MMConfig) -> Result<f64> {
    Ok(cycle_profit(cfg)? / cfg.theta)
}

/// `E(r)` assembled from its pieces: the conditional mean of the accepted
/// quotation and the unconditional mean of the random reverse transaction.
///
/// For a centred law `E(r)/E(τ)` equals [`profit_intensity`].
pub fn expected_log_return(cfg: &MMConfig) -> Result<f64> {
    cfg.validate()?;
    let acc = acceptance_prob(cfg);
    if !(acc >= MIN_ACCEPTANCE) {
        return Err(Error::DegenerateStrategy(format!("acceptance probability {acc:e} is zero")));
    }
    let mean = cfg.dist.mean();
    Ok(match cfg.orientation {
        Orientation::Buyer => mean - cfg.dist.partial_first_moment(-cfg.withdrawal, Side::Below) / acc,
        Orientation::Seller => cfg.dist.partial_first_moment(cfg.withdrawal, Side::Above) / acc - mean,
    })
}

/// Expected profit over `[0, horizon]` at a constant intensity.
pub fn accumulate_profit(intensity: f64, horizon: f64) -> Result<f64> {
    if !(horizon >= 0.0) {
        return Err(Error::invalid(format!("horizon must be nonnegative, got {horizon}")));
    }
    Ok(intensity * horizon)
}

pub fn log_return(p_buy: LogPrice, p_sell: LogPrice) -> f64 {
    p_sell.value() - p_buy.value()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub a_max: f64,
    pub rho_at_max: f64,
    pub iterations: usize,
    /// Every `(a, ρ(a))` evaluated, in order.
    pub trace: Vec<(f64, f64)>,
    pub converged: bool,
    pub residual: f64,
    /// `"damped"` or `"bisection"`.
    pub method: String,
}

/// Solves `ρ(a) = a` by damped iteration `a ← (1-λ)a + λρ(a)`, switching to
/// bisection on `ρ(a) - a` when the residual stops shrinking.
///
/// The optimum is guaranteed positive only for centred laws; other laws are
/// accepted and solved as given.
pub fn solve_fixed_point(cfg: &MMConfig, tol: f64, max_iter: usize) -> Result<FixedPointResult> {
    cfg.validate()?;
    if !(tol > 0.0) {
        return Err(Error::invalid("solver tolerance must be positive"));
    }
    let rho = |a: f64| cycle_profit(&cfg.with_withdrawal(a));
    let mut trace = Vec::new();

    let mut a = 0.0;
    let mut best_residual = f64::INFINITY;
    let mut stalled = 0;
    let mut iterations = 0;
    while iterations < max_iter {
        let r = rho(a)?;
        trace.push((a, r));
        iterations += 1;
        let residual = (r - a).abs();
        if residual <= tol {
            return Ok(FixedPointResult {
                a_max: a,
                rho_at_max: r,
                iterations,
                trace,
                converged: true,
                residual,
                method: "damped".into(),
            });
        }
        if residual < best_residual {
            best_residual = residual;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= STALL_LIMIT {
                break;
            }
        }
        a = (1.0 - DAMPING) * a + DAMPING * r;
    }

    let (lo, hi) = fixed_point_bracket(cfg)?;
    let g = |x: f64| rho(x).map(|r| r - x).unwrap_or(f64::NAN);
    let mut bis_trace = Vec::new();
    let budget = max_iter.saturating_sub(iterations).max(1);
    let root = roots::bisect(g, lo, hi, 0.25 * tol, budget.max(200), |x, gx| bis_trace.push((x, gx + x)));
    let bis_len = bis_trace.len();
    trace.extend(bis_trace);
    let root = root.map_err(|e| Error::NoFixedPoint(e.to_string()))?;
    let r = rho(root.x)?;
    let residual = (r - root.x).abs();
    Ok(FixedPointResult {
        a_max: root.x,
        rho_at_max: r,
        iterations: iterations + bis_len,
        trace,
        converged: residual <= tol,
        residual,
        method: "bisection".into(),
    })
}

/// Bracket for `g(a) = ρ(a) - a`: `[0, q99]` with `q99` the 0.99 quantile
/// of `|p|`, widened if that does not straddle a sign change.
fn fixed_point_bracket(cfg: &MMConfig) -> Result<(f64, f64)> {
    let d = &cfg.dist;
    let abs_cdf = |q: f64| d.cdf(q) - d.cdf(-q);
    let mut hi = d.quantile(0.995).abs().max(d.quantile(0.005).abs()).max(1e-6);
    if let Ok(r) = roots::brent(|q| abs_cdf(q) - 0.99, 0.0, hi, 1e-12, 200) {
        hi = r.x.max(1e-6);
    }
    let g = |x: f64| cycle_profit(&cfg.with_withdrawal(x)).map(|r| r - x);
    let mut lo = 0.0;
    let g_lo = g(lo)?;
    if g_lo < 0.0 {
        // Optimum lies below zero for strongly off-centre laws.
        lo = -hi;
    }
    for _ in 0..60 {
        let (gl, gh) = (g(lo)?, g(hi)?);
        if gl == 0.0 || gh == 0.0 || gl.signum() != gh.signum() {
            return Ok((lo, hi));
        }
        if gl < 0.0 {
            lo = 2.0 * lo - hi.abs();
        } else {
            hi *= 2.0;
        }
    }
    Err(Error::NoFixedPoint("ρ(a) - a does not change sign on any searched bracket".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_gaussian, make_uniform};

    fn normal(sigma: f64) -> Arc<dyn PriceDistribution> {
        Arc::new(make_gaussian(0.0, sigma).unwrap())
    }

    fn buyer(a: f64, theta: f64) -> MMConfig {
        MMConfig::new(normal(1.0), a, theta, Orientation::Buyer).unwrap()
    }

    #[test]
    fn theta_must_be_positive() {
        assert!(MMConfig::new(normal(1.0), 0.0, 0.0, Orientation::Buyer).is_err());
        assert!(MMConfig::new(normal(1.0), 0.0, -1.0, Orientation::Buyer).is_err());
    }

    #[test]
    fn non_transaction_examples() {
        assert_eq!(non_transaction_prob(&buyer(0.0, 1.0)).unwrap(), 0.5);
        // 1 - Φ(10)
        let x = non_transaction_prob(&buyer(-10.0, 1.0)).unwrap();
        assert!((x - 7.619_853_024_160_526e-24).abs() < 1e-30);
        let u = Arc::new(make_uniform(0.0, 1.0).unwrap());
        let cfg = MMConfig::new(u, 0.25, 1.0, Orientation::Seller).unwrap();
        assert!((non_transaction_prob(&cfg).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn cycle_length_examples() {
        assert_eq!(expected_cycle_length(&buyer(0.0, 1.0)).unwrap(), 3.0);
        assert_eq!(expected_cycle_length(&buyer(0.0, 2.0)).unwrap(), 6.0);
        let tau = expected_cycle_length(&buyer(0.27603, 1.0)).unwrap();
        assert!((tau - 3.555_828_807_750_026).abs() < 1e-12, "{tau}");
    }

    #[test]
    fn degenerate_acceptance() {
        let e = expected_cycle_length(&buyer(40.0, 1.0)).unwrap_err();
        assert!(matches!(e, Error::DegenerateStrategy(_)));
        let u = Arc::new(make_uniform(0.0, 1.0).unwrap());
        let cfg = MMConfig::new(u, 2.0, 1.0, Orientation::Seller).unwrap();
        assert!(matches!(expected_cycle_length(&cfg), Err(Error::DegenerateStrategy(_))));
    }

    #[test]
    fn cycle_profit_at_zero() {
        let r = cycle_profit(&buyer(0.0, 1.0)).unwrap();
        assert!((r - 0.265_961_520_267_621_8).abs() < 1e-15);
        assert!((profit_intensity(&buyer(0.0, 2.0)).unwrap() - 0.132_980_760_133_810_9).abs() < 1e-15);
    }

    #[test]
    fn accumulate() {
        assert_eq!(accumulate_profit(0.25, 4.0).unwrap(), 1.0);
        assert_eq!(accumulate_profit(0.27603, 0.0).unwrap(), 0.0);
        assert!((accumulate_profit(0.265_961_5, 10.0).unwrap() - 2.659_615).abs() < 1e-12);
        assert!(accumulate_profit(1.0, -1.0).is_err());
    }

    #[test]
    fn log_return_examples() {
        let p = |v| LogPrice::new(v).unwrap();
        assert!((log_return(p(0.1), p(0.5)) - 0.4).abs() < 1e-15);
        assert_eq!(log_return(p(0.3), p(0.3)), 0.0);
        assert_eq!(log_return(p(-0.27603), p(0.0)), 0.27603);
    }

    #[test]
    fn orientation_parsing() {
        assert_eq!("seller".parse::<Orientation>().unwrap(), Orientation::Seller);
        assert!("short".parse::<Orientation>().is_err());
    }

    #[test]
    fn solver_normal() {
        let res = solve_fixed_point(&buyer(0.0, 1.0), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(res.converged);
        // mpmath root of φ(a)/(1+Φ(-a)) = a
        assert!((res.a_max - 0.276_029_804_798_143_3).abs() < 1e-9, "{}", res.a_max);
        assert!(res.residual <= DEFAULT_TOL);
        assert_eq!(res.trace.len(), res.iterations);
    }

    #[test]
    fn solver_rejects_bad_tol() {
        assert!(solve_fixed_point(&buyer(0.0, 1.0), 0.0, 10).is_err());
    }

    #[test]
    fn bisection_fallback_when_iteration_is_starved() {
        // one damped step cannot converge, so the bracketing path must finish
        let res = solve_fixed_point(&buyer(0.0, 1.0), DEFAULT_TOL, 1).unwrap();
        assert_eq!(res.method, "bisection");
        assert!(res.converged);
        assert!((res.a_max - 0.276_029_804_798_143_3).abs() < 1e-9);
    }
}
