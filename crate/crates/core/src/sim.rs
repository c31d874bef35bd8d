//! Seeded Monte Carlo simulation of the trading cycle.
//!
//! Each cycle draws quotations until one satisfies the rational side
//! (`p <= -a` for a buyer, `p >= a` for a seller), each draw costing `θ`,
//! then closes the position with one random draw, costing another `θ`.
//! Quotations come from the distribution's quantile function applied to a
//! ChaCha8 stream, so a run is fully determined by `(seed, shards)`.
//!
//! Standard errors use batch means over [`BATCHES`] batches.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{expectation_over, PriceDistribution};
use crate::engine::{self, MMConfig, Orientation, MIN_ACCEPTANCE};
use crate::error::{Error, Result};

pub const BATCHES: usize = 100;
pub const MAX_DRAWS_PER_CYCLE: u64 = 1_000_000_000;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub mm: MMConfig,
    pub n_cycles: u64,
    pub seed: u64,
    /// Number of independent worker streams; 1 runs single-threaded.
    pub shards: usize,
}

impl SimConfig {
    pub fn new(mm: MMConfig, n_cycles: u64, seed: u64) -> Result<Self> {
        let cfg = SimConfig { mm, n_cycles, seed, shards: 1 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_shards(mut self, shards: usize) -> Result<Self> {
        self.shards = shards;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        self.mm.validate()?;
        if self.n_cycles == 0 {
            return Err(Error::invalid("n_cycles must be at least 1"));
        }
        if self.shards == 0 {
            return Err(Error::invalid("shards must be at least 1"));
        }
        let acc = engine::acceptance_prob(&self.mm);
        if !(acc >= MIN_ACCEPTANCE) {
            return Err(Error::DegenerateStrategy(format!("acceptance probability {acc:e} is effectively zero")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleStats {
    pub n_cycles: u64,
    /// Estimate of `E(τ)`.
    pub mean_tau: f64,
    /// Estimate of `E(r)`.
    pub mean_return: f64,
    /// `mean_return / mean_tau`.
    pub intensity_estimate: f64,
    pub se_return: f64,
    pub se_tau: f64,
    /// Delta-method standard error of the ratio, using batch covariances.
    pub se_intensity: f64,
    /// Fraction of cycles whose first rational-side draw was accepted.
    pub acceptance_fraction: f64,
    pub se_acceptance: f64,
    pub wald_residual: f64,
    pub se_wald: f64,
    pub wald_var_residual: f64,
    pub se_wald_var: f64,
}

/// Per-batch sums from one shard, plus accepted prices when requested.
type ShardOutput = (Vec<(usize, BatchSums)>, Vec<f64>);

/// Running sums for one batch.
#[derive(Debug, Clone, Copy, Default)]
struct BatchSums {
    n: u64,
    tau: f64,
    ret: f64,
    first: f64,
    wald: f64,
    wald_var: f64,
}

/// Moments of the per-draw increment `X = gain·[accepted]`, the quantity
/// whose stopped sum over the rational phase is the accepted gain.
#[derive(Debug, Clone, Copy)]
struct Increment {
    mean: f64,
    var: f64,
}

fn increment_moments(mm: &MMConfig) -> Result<Increment> {
    let a = mm.withdrawal;
    let d = &*mm.dist;
    let (mean, second) = match mm.orientation {
        Orientation::Buyer => (
            -d.partial_first_moment(-a, crate::distributions::Side::Below),
            expectation_over(d, |p| p * p, f64::NEG_INFINITY, -a, 1e-12)?,
        ),
        Orientation::Seller => (
            d.partial_first_moment(a, crate::distributions::Side::Above),
            expectation_over(d, |p| p * p, a, f64::INFINITY, 1e-12)?,
        ),
    };
    Ok(Increment { mean, var: (second - mean * mean).max(0.0) })
}

#[inline]
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

struct CycleRunner<'a> {
    dist: &'a dyn PriceDistribution,
    a: f64,
    theta: f64,
    orientation: Orientation,
    inc: Increment,
}

impl CycleRunner<'_> {
    #[inline]
    fn accepts(&self, p: f64) -> bool {
        match self.orientation {
            Orientation::Buyer => p <= -self.a,
            Orientation::Seller => p >= self.a,
        }
    }

    fn run_batch(&self, rng: &mut ChaCha8Rng, n: u64, mut accepted: Option<&mut Vec<f64>>) -> Result<BatchSums> {
        let mut s = BatchSums::default();
        for _ in 0..n {
            let mut draws: u64 = 0;
            let p_acc = loop {
                draws += 1;
                let p = self.dist.quantile(open_unit(rng));
                if self.accepts(p) {
                    break p;
                }
                if draws >= MAX_DRAWS_PER_CYCLE {
                    return Err(Error::DegenerateStrategy(format!(
                        "a cycle exceeded {MAX_DRAWS_PER_CYCLE} draws without a rational transaction"
                    )));
                }
            };
            let p_rand = self.dist.quantile(open_unit(rng));
            let (gain, ret) = match self.orientation {
                Orientation::Buyer => (-p_acc, p_rand - p_acc),
                Orientation::Seller => (p_acc, p_acc - p_rand),
            };
            if let Some(v) = accepted.as_deref_mut() {
                v.push(p_acc);
            }
            let k = draws as f64;
            let dev = gain - self.inc.mean * k;
            s.n += 1;
            s.tau += (k + 1.0) * self.theta;
            s.ret += ret;
            s.first += if draws == 1 { 1.0 } else { 0.0 };
            s.wald += dev;
            s.wald_var += dev * dev - k * self.inc.var;
        }
        Ok(s)
    }
}

fn batch_sizes(n: u64) -> Vec<u64> {
    let b = (BATCHES as u64).min(n);
    (0..b).map(|i| n / b + u64::from(i < n % b)).collect()
}

/// Runs every batch, shard `s` handling batches `s, s + shards, …` on its
/// own ChaCha stream. Returns per-batch sums in batch order.
fn run_all(cfg: &SimConfig, mut collect: Option<&mut Vec<f64>>) -> Result<Vec<BatchSums>> {
    cfg.validate()?;
    let runner = CycleRunner {
        dist: &*cfg.mm.dist,
        a: cfg.mm.withdrawal,
        theta: cfg.mm.theta,
        orientation: cfg.mm.orientation,
        inc: increment_moments(&cfg.mm)?,
    };
    let sizes = batch_sizes(cfg.n_cycles);
    let shards = cfg.shards.min(sizes.len()).max(1);

    let shard_job = |shard: usize, mut sink: Option<&mut Vec<f64>>| -> Result<Vec<(usize, BatchSums)>> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(shard as u64);
        let mut out = Vec::new();
        for (i, &n) in sizes.iter().enumerate().skip(shard).step_by(shards) {
            out.push((i, runner.run_batch(&mut rng, n, sink.as_deref_mut())?));
        }
        Ok(out)
    };

    let mut results: Vec<(usize, BatchSums)> = Vec::with_capacity(sizes.len());
    if shards == 1 {
        results = shard_job(0, collect.as_deref_mut())?;
    } else {
        let parts: Vec<Result<ShardOutput>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..shards)
                .map(|s| {
                    let want = collect.is_some();
                    let job = &shard_job;
                    scope.spawn(move || {
                        let mut local = Vec::new();
                        let r = job(s, if want { Some(&mut local) } else { None })?;
                        Ok((r, local))
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("simulation worker panicked")).collect()
        });
        for part in parts {
            let (r, local) = part?;
            results.extend(r);
            if let Some(v) = collect.as_deref_mut() {
                v.extend(local);
            }
        }
        results.sort_by_key(|(i, _)| *i);
    }
    Ok(results.into_iter().map(|(_, s)| s).collect())
}

fn mean_and_se(values: &[f64], weights: &[f64]) -> (f64, f64) {
    let total: f64 = weights.iter().sum();
    let mean = values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total;
    let b = values.len();
    if b < 2 {
        return (mean, 0.0);
    }
    let bm: f64 = values.iter().sum::<f64>() / b as f64;
    let var = values.iter().map(|v| (v - bm).powi(2)).sum::<f64>() / (b - 1) as f64;
    (mean, (var / b as f64).sqrt())
}

fn covariance_of_means(x: &[f64], y: &[f64]) -> f64 {
    let b = x.len();
    if b < 2 {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / b as f64;
    let my = y.iter().sum::<f64>() / b as f64;
    x.iter().zip(y).map(|(a, c)| (a - mx) * (c - my)).sum::<f64>() / ((b - 1) * b) as f64
}

fn summarize(batches: &[BatchSums]) -> CycleStats {
    let weights: Vec<f64> = batches.iter().map(|b| b.n as f64).collect();
    let per = |f: fn(&BatchSums) -> f64| -> Vec<f64> { batches.iter().map(|b| f(b) / b.n as f64).collect() };
    let tau = per(|b| b.tau);
    let ret = per(|b| b.ret);
    let first = per(|b| b.first);
    let wald = per(|b| b.wald);
    let wald_var = per(|b| b.wald_var);
    let (mean_tau, se_tau) = mean_and_se(&tau, &weights);
    let (mean_return, se_return) = mean_and_se(&ret, &weights);
    let (acceptance_fraction, se_acceptance) = mean_and_se(&first, &weights);
    let (wald_residual, se_wald) = mean_and_se(&wald, &weights);
    let (wald_var_residual, se_wald_var) = mean_and_se(&wald_var, &weights);
    let intensity = mean_return / mean_tau;
    let var_i = (se_return.powi(2) - 2.0 * intensity * covariance_of_means(&ret, &tau)
        + intensity.powi(2) * se_tau.powi(2))
        / mean_tau.powi(2);
    CycleStats {
        n_cycles: batches.iter().map(|b| b.n).sum(),
        mean_tau,
        mean_return,
        intensity_estimate: intensity,
        se_return,
        se_tau,
        se_intensity: var_i.max(0.0).sqrt(),
        acceptance_fraction,
        se_acceptance,
        wald_residual,
        se_wald,
        wald_var_residual,
        se_wald_var,
    }
}

pub fn simulate(cfg: &SimConfig) -> Result<CycleStats> {
    Ok(summarize(&run_all(cfg, None)?))
}

/// Same run as [`simulate`], also returning every accepted quotation in
/// batch order.
pub fn simulate_with_accepted(cfg: &SimConfig) -> Result<(CycleStats, Vec<f64>)> {
    let mut accepted = Vec::with_capacity(cfg.n_cycles.min(50_000_000) as usize);
    let stats = summarize(&run_all(cfg, Some(&mut accepted))?);
    Ok((stats, accepted))
}

/// Wald-identity residuals with their batch-means standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaldCheck {
    /// `Ê(S_τ') - E(X₁)·Ê(τ')`
    pub residual: f64,
    pub se: f64,
    /// `Ê((S_τ' - τ'E(X₁))²) - Ê(τ')·Var(X₁)`
    pub var_residual: f64,
    pub var_se: f64,
}

/// Treats the rational phase as a stopped sum: draw `k` contributes
/// `X_k = gain(p_k)·[p_k accepted]`, i.i.d. across draws, and the phase
/// stops at the first acceptance, so `S_τ'` is the accepted gain.
pub fn check_wald(cfg: &SimConfig) -> Result<WaldCheck> {
    let s = simulate(cfg)?;
    Ok(WaldCheck { residual: s.wald_residual, se: s.se_wald, var_residual: s.wald_var_residual, var_se: s.se_wald_var })
}

/// Cdf of the accepted quotation: `η` restricted to the rational side.
pub fn truncated_cdf(mm: &MMConfig, x: f64) -> f64 {
    let a = mm.withdrawal;
    let acc = engine::acceptance_prob(mm);
    match mm.orientation {
        Orientation::Buyer => (mm.dist.cdf(x.min(-a)) / acc).min(1.0),
        Orientation::Seller => {
            if x < a {
                0.0
            } else {
                ((acc - mm.dist.sf(x)) / acc).clamp(0.0, 1.0)
            }
        }
    }
}

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n - F|`. Sorts in place.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic critical value of `D_n` at significance `alpha`:
/// `sqrt(-ln(alpha/2)/2) / sqrt(n)`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::distributions::make_gaussian;

    fn cfg(a: f64, n: u64, seed: u64) -> SimConfig {
        let mm = MMConfig::new(Arc::new(make_gaussian(0.0, 1.0).unwrap()), a, 1.0, Orientation::Buyer).unwrap();
        SimConfig::new(mm, n, seed).unwrap()
    }

    #[test]
    fn batch_sizes_cover_n() {
        assert_eq!(batch_sizes(7), vec![1; 7]);
        let s = batch_sizes(1005);
        assert_eq!(s.len(), 100);
        assert_eq!(s.iter().sum::<u64>(), 1005);
        assert_eq!(s[0], 11);
        assert_eq!(s[99], 10);
    }

    #[test]
    fn deterministic() {
        let a = simulate(&cfg(0.2, 5_000, 9)).unwrap();
        let b = simulate(&cfg(0.2, 5_000, 9)).unwrap();
        assert_eq!(a, b);
        let c = simulate(&cfg(0.2, 5_000, 10)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sharded_runs_are_reproducible() {
        let c = cfg(0.2, 20_000, 3).with_shards(4).unwrap();
        assert_eq!(simulate(&c).unwrap(), simulate(&c).unwrap());
        let one = simulate(&cfg(0.2, 20_000, 3)).unwrap();
        let four = simulate(&c).unwrap();
        assert_ne!(one, four);
        assert!((one.mean_tau - four.mean_tau).abs() < 5.0 * (one.se_tau + four.se_tau));
    }

    #[test]
    fn single_cycle_has_zero_se() {
        let s = simulate(&cfg(0.0, 1, 1)).unwrap();
        assert_eq!(s.n_cycles, 1);
        assert_eq!(s.se_tau, 0.0);
        assert!(s.mean_tau >= 2.0);
    }

    #[test]
    fn rejects_bad_config() {
        let mm = MMConfig::new(Arc::new(make_gaussian(0.0, 1.0).unwrap()), 0.0, 1.0, Orientation::Buyer).unwrap();
        assert!(SimConfig::new(mm.clone(), 0, 1).is_err());
        assert!(SimConfig::new(mm.clone(), 10, 1).unwrap().with_shards(0).is_err());
        let far = mm.with_withdrawal(40.0);
        assert!(matches!(SimConfig::new(far, 10, 1), Err(Error::DegenerateStrategy(_))));
    }

    #[test]
    fn ks_helpers() {
        let mut xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = ks_statistic(&mut xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.0005).abs() < 1e-12);
        assert!((ks_critical_value(100, 0.001) - 0.194_947_7).abs() < 1e-6);
    }
}
