//! The end-to-end check battery behind `mmtrade demo-all`.
//!
//! Each check reproduces one headline result with its pinned tolerance and
//! reports pass/fail with the numbers it saw.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::distributions::{make_gaussian, std_normal_cdf, PriceDistribution};
use crate::engine::{self, MMConfig, Orientation, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::Result;
use crate::info::{self, figure_curves, standard_grid, Verdict};
use crate::market::{log_cross_ratio, PortfolioPoint};
use crate::maxent::{self, MaxEntModel, GOLDEN};
use crate::sim::{self, SimConfig};

pub const NORMAL_A_MAX: f64 = 0.27603;
pub const MC_SEED: u64 = 42;
pub const MC_CYCLES: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn run_check(id: u32, name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Check { id, name: name.into(), passed, detail, seconds: start.elapsed().as_secs_f64() }
}

fn normal(sigma: f64) -> Result<Arc<dyn PriceDistribution>> {
    Ok(Arc::new(make_gaussian(0.0, sigma)?))
}

pub fn normal_fixed_point() -> Check {
    run_check(1, "normal fixed point", || {
        let start = Instant::now();
        let cfg = MMConfig::new(normal(1.0)?, 0.0, 1.0, Orientation::Buyer)?;
        let r = engine::solve_fixed_point(&cfg, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        let secs = start.elapsed().as_secs_f64();
        let ok = (r.a_max - NORMAL_A_MAX).abs() <= 1e-4 && r.residual <= 1e-10 && secs < 1.0;
        Ok((ok, format!("a_max={:.10} residual={:.2e} time={secs:.3}s", r.a_max, r.residual)))
    })
}

pub fn golden_ratio() -> Check {
    run_check(2, "golden ratio (analytic and numeric)", || {
        let start = Instant::now();
        let exact = maxent::golden_optimum();
        let mut ok = exact == 0.618_033_988_749_894_9;
        let mut parts = vec![format!("analytic={exact:.16}")];
        for a in [0.1, 1.0, 7.3] {
            let p = maxent::golden_optimum_numeric(a)?;
            ok &= (p - 0.618_034).abs() <= 1e-6;
            parts.push(format!("P*(a={a})={p:.10}"));
        }
        let secs = start.elapsed().as_secs_f64();
        ok &= secs < 1.0;
        Ok((ok, parts.join(" ")))
    })
}

pub fn golden_scale_free() -> Check {
    run_check(3, "golden fixed point is scale-free", || {
        let mut worst: f64 = 0.0;
        for k in 0..20 {
            let a = 0.1 + (10.0 - 0.1) * k as f64 / 19.0;
            let m = MaxEntModel::new(a, a * GOLDEN / (1.0 - GOLDEN))?;
            let cfg = MMConfig::new(Arc::new(m), a, 1.0, Orientation::Seller)?;
            worst = worst.max((engine::cycle_profit(&cfg)? - a).abs());
        }
        Ok((worst <= 1e-9, format!("max |rho(a) - a| = {worst:.2e}")))
    })
}

pub fn a_relative_curves() -> Check {
    run_check(4, "a-relative closed forms against quadrature", || {
        let mut worst: f64 = 0.0;
        for a in [0.5, 1.0, 2.0] {
            for p in standard_grid() {
                let r = info::info_report(&MaxEntModel::from_probability(a, p)?)?;
                let c = figure_curves(p)?;
                worst = worst
                    .max((r.s_rel_a - c.s_rel_a).abs())
                    .max((r.i_scaled_a - c.i_scaled_a).abs())
                    .max((r.h_rel_a - c.h_rel_a).abs());
            }
        }
        Ok((worst <= 1e-8, format!("max deviation {worst:.2e}")))
    })
}

pub fn red_audit() -> Check {
    run_check(5, "mean-relative closed-form audit", || {
        let report = info::audit_red_curves(&standard_grid())?;
        let s = &report.quantities[0];
        let mut ok = s.published_max_deviation <= 1e-8;
        let mut parts = vec![format!("{}: as-published dev {:.2e}", s.quantity, s.published_max_deviation)];
        for q in &report.quantities[1..] {
            ok &= matches!(q.verdict, Verdict::AsPublished | Verdict::Derived);
            parts.push(format!("{}: {:?}", q.quantity, q.verdict));
        }
        Ok((ok, parts.join("; ")))
    })
}

pub fn monte_carlo_normal() -> Check {
    run_check(6, "Monte Carlo validation (normal, a=0.27603)", || {
        let start = Instant::now();
        let mm = MMConfig::new(normal(1.0)?, NORMAL_A_MAX, 1.0, Orientation::Buyer)?;
        let s = sim::simulate(&SimConfig::new(mm, MC_CYCLES, MC_SEED)?)?;
        let secs = start.elapsed().as_secs_f64();
        let tau = 1.0 + 1.0 / std_normal_cdf(-NORMAL_A_MAX);
        let ok = (s.intensity_estimate - NORMAL_A_MAX).abs() <= 3.0 * s.se_intensity
            && (s.mean_tau - tau).abs() <= 3.0 * s.se_tau
            && s.wald_residual.abs() <= 3.0 * s.se_wald
            && s.wald_var_residual.abs() <= 3.0 * s.se_wald_var
            && secs < 30.0;
        Ok((
            ok,
            format!(
                "intensity={:.6}±{:.1e} tau={:.5}±{:.1e} wald={:.1e}±{:.1e} var={:.1e}±{:.1e} time={secs:.2}s",
                s.intensity_estimate,
                s.se_intensity,
                s.mean_tau,
                s.se_tau,
                s.wald_residual,
                s.se_wald,
                s.wald_var_residual,
                s.se_wald_var
            ),
        ))
    })
}

pub fn transaction_frequency() -> Check {
    run_check(7, "golden transaction frequency", || {
        let m = MaxEntModel::new(1.0, 1.0 / GOLDEN)?;
        let mm = MMConfig::new(Arc::new(m), 1.0, 1.0, Orientation::Seller)?;
        let s = sim::simulate(&SimConfig::new(mm, MC_CYCLES, MC_SEED)?)?;
        let ok = (s.acceptance_fraction - 0.618).abs() <= 3.0 * s.se_acceptance;
        Ok((ok, format!("fraction={:.6}±{:.1e}", s.acceptance_fraction, s.se_acceptance)))
    })
}

pub fn scaling() -> Check {
    run_check(8, "normal scaling law", || {
        let solve = |sigma: f64| -> Result<f64> {
            let cfg = MMConfig::new(normal(sigma)?, 0.0, 1.0, Orientation::Buyer)?;
            Ok(engine::solve_fixed_point(&cfg, DEFAULT_TOL, DEFAULT_MAX_ITER)?.a_max)
        };
        let (a1, a2) = (solve(1.0)?, solve(2.0)?);
        let c1 = MMConfig::new(normal(1.0)?, 0.0, 1.0, Orientation::Buyer)?;
        let c2 = MMConfig::new(normal(2.0)?, 0.0, 1.0, Orientation::Buyer)?;
        let mut worst: f64 = 0.0;
        for k in 0..50 {
            let a = -2.0 + 4.0 * k as f64 / 49.0;
            let lhs = engine::cycle_profit(&c2.with_withdrawal(2.0 * a))?;
            let rhs = 2.0 * engine::cycle_profit(&c1.with_withdrawal(a))?;
            worst = worst.max((lhs - rhs).abs());
        }
        let ok = (a2 - 2.0 * a1).abs() <= 1e-6 && worst <= 1e-9;
        Ok((ok, format!("a_max(2)-2a_max(1)={:.1e} max rho deviation {worst:.1e}", a2 - 2.0 * a1)))
    })
}

pub fn cross_ratio() -> Check {
    run_check(9, "cross-ratio invariance", || {
        let amounts: Vec<f64> = (0..10).map(|k| 0.1 + (10.0 - 0.1) * k as f64 / 9.0).collect();
        let prices = [(0.1, 0.5), (-0.27603, 0.0), (0.0, 0.7), (1.5, -2.0), (-3.0, 3.0)];
        let mut worst: f64 = 0.0;
        for &(pb, ps) in &prices {
            for &v in &amounts {
                for &w in &amounts {
                    let l = log_cross_ratio(&PortfolioPoint::new(v, pb)?, &PortfolioPoint::new(w, ps)?)?;
                    worst = worst.max((l - (ps - pb)).abs());
                }
            }
        }
        Ok((worst <= 1e-12, format!("max deviation {worst:.1e}")))
    })
}

/// Runs every check in order.
pub fn run_all() -> Vec<Check> {
    vec![
        normal_fixed_point(),
        golden_ratio(),
        golden_scale_free(),
        a_relative_curves(),
        red_audit(),
        monte_carlo_normal(),
        transaction_frequency(),
        scaling(),
        cross_ratio(),
    ]
}
