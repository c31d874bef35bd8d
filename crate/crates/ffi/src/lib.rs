//! C ABI over `mmtrade`.
//!
//! Conventions:
//!
//! * Every fallible call returns an [`MmStatus`] and writes its result through
//!   an out-pointer, which is left untouched on failure.
//! * After a non-`OK` status, [`mm_last_error_message`] describes the failure.
//!   The message is thread-local and stays valid until the next failing call
//!   on the same thread.
//! * Distributions are opaque [`MmDistribution`] handles. Release them with
//!   [`mm_distribution_free`]. Handles are immutable and may be shared across
//!   threads.
//! * Panics never cross the boundary; they surface as `MM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use mmtrade::distributions::{make_gaussian, make_tabulated, make_uniform, TabulatedDist};
use mmtrade::engine::{self, MMConfig, Orientation};
use mmtrade::info;
use mmtrade::market::{self, MarketPair, PortfolioPoint};
use mmtrade::maxent::{self, MaxEntModel};
use mmtrade::sim::{self, SimConfig};
use mmtrade::{Error, PriceDistribution};

/// Status codes; the nonzero values match the CLI exit codes where they overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmStatus {
    Ok = 0,
    InvalidParameter = 1,
    SolverFailure = 2,
    Io = 3,
    NullPointer = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmOrientation {
    Buyer = 0,
    Seller = 1,
}

impl From<MmOrientation> for Orientation {
    fn from(o: MmOrientation) -> Self {
        match o {
            MmOrientation::Buyer => Orientation::Buyer,
            MmOrientation::Seller => Orientation::Seller,
        }
    }
}

/// Opaque handle to a log-price distribution.
pub struct MmDistribution {
    inner: Arc<dyn PriceDistribution>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MmFixedPoint {
    pub a_max: f64,
    pub rho_at_max: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// True when the solver finished on the bracketing fallback.
    pub used_bisection: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MmInfoReport {
    pub p: f64,
    pub a: f64,
    pub s: f64,
    pub i: f64,
    pub h: f64,
    pub mean: f64,
    pub s_rel_a: f64,
    pub s_rel_mean: f64,
    pub i_scaled_a: f64,
    pub i_scaled_mean: f64,
    pub h_rel_a: f64,
    pub h_rel_mean: f64,
}

/// Reference closed-form curves, evaluated verbatim.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MmFigureCurves {
    pub s_rel_a: f64,
    pub s_rel_mean: f64,
    pub i_scaled_a: f64,
    pub i_scaled_mean: f64,
    pub h_rel_a: f64,
    pub h_rel_mean: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MmCycleStats {
    pub n_cycles: u64,
    pub mean_tau: f64,
    pub mean_return: f64,
    pub intensity_estimate: f64,
    pub se_return: f64,
    pub se_tau: f64,
    pub se_intensity: f64,
    pub acceptance_fraction: f64,
    pub se_acceptance: f64,
    pub wald_residual: f64,
    pub se_wald: f64,
    pub wald_var_residual: f64,
    pub se_wald_var: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MmEquilibrium {
    pub price: f64,
    pub supply: f64,
    pub demand: f64,
    /// Set when the curves never meet within tolerance; the message is
    /// available from `mm_last_error_message`.
    pub has_warning: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Core(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn status_of(e: &Error) -> MmStatus {
    match e.exit_code() {
        1 => MmStatus::InvalidParameter,
        3 => MmStatus::Io,
        _ => MmStatus::SolverFailure,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MmStatus::Ok,
        Ok(Err(Fail::Core(e))) => {
            let s = status_of(&e);
            set_last_error(e.to_string());
            s
        }
        Ok(Err(Fail::Null(what))) => {
            set_last_error(format!("null pointer passed for `{what}`"));
            MmStatus::NullPointer
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            MmStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn new_handle(out: *mut *mut MmDistribution, inner: Arc<dyn PriceDistribution>) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    out.write(Box::into_raw(Box::new(MmDistribution { inner })));
    Ok(())
}

unsafe fn config(
    dist: *const MmDistribution,
    withdrawal: f64,
    theta: f64,
    orientation: MmOrientation,
) -> Result<MMConfig, Fail> {
    let d = deref(dist, "dist")?;
    Ok(MMConfig::new(d.inner.clone(), withdrawal, theta, orientation.into())?)
}

/// Message for the most recent failure on this thread, or NULL if none.
#[no_mangle]
pub extern "C" fn mm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Gaussian law of the log-price.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn mm_gaussian_new(mean: f64, sigma: f64, out: *mut *mut MmDistribution) -> MmStatus {
    guard(|| new_handle(out, Arc::new(make_gaussian(mean, sigma)?)))
}

/// Uniform law on `[lo, hi]`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn mm_uniform_new(lo: f64, hi: f64, out: *mut *mut MmDistribution) -> MmStatus {
    guard(|| new_handle(out, Arc::new(make_uniform(lo, hi)?)))
}

/// Max-entropy subjective law with withdrawal price `a` and temperature `t`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn mm_maxent_new(a: f64, t: f64, out: *mut *mut MmDistribution) -> MmStatus {
    guard(|| new_handle(out, Arc::new(MaxEntModel::new(a, t)?)))
}

/// Piecewise-uniform law from `n_edges` bin edges and `n_edges - 1` masses.
///
/// # Safety
/// `edges` and `masses` must point to arrays of the stated lengths; `out`
/// must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn mm_tabulated_new(
    edges: *const f64,
    n_edges: usize,
    masses: *const f64,
    n_masses: usize,
    out: *mut *mut MmDistribution,
) -> MmStatus {
    guard(|| {
        if edges.is_null() {
            return Err(Fail::Null("edges"));
        }
        if masses.is_null() {
            return Err(Fail::Null("masses"));
        }
        let e = std::slice::from_raw_parts(edges, n_edges).to_vec();
        let m = std::slice::from_raw_parts(masses, n_masses).to_vec();
        new_handle(out, Arc::new(make_tabulated(e, m)?))
    })
}

/// Piecewise-uniform law from a CSV file with header `edge,mass`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for a
/// pointer write.
#[no_mangle]
pub unsafe extern "C" fn mm_tabulated_from_csv(path: *const c_char, out: *mut *mut MmDistribution) -> MmStatus {
    guard(|| {
        if path.is_null() {
            return Err(Fail::Null("path"));
        }
        let p = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Fail::Core(Error::InvalidParameter("path is not valid UTF-8".into())))?;
        new_handle(out, Arc::new(TabulatedDist::from_csv_path(p)?))
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `dist` must come from one of the constructors and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mm_distribution_free(dist: *mut MmDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// # Safety
/// `dist` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mm_density(dist: *const MmDistribution, x: f64, out: *mut f64) -> MmStatus {
    guard(|| write(out, deref(dist, "dist")?.inner.density(x), "out"))
}

/// # Safety
/// `dist` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mm_cdf(dist: *const MmDistribution, x: f64, out: *mut f64) -> MmStatus {
    guard(|| write(out, deref(dist, "dist")?.inner.cdf(x), "out"))
}

/// Quantile at probability `u` in `[0, 1]`.
///
/// # Safety
/// `dist` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mm_quantile(dist: *const MmDistribution, u: f64, out: *mut f64) -> MmStatus {
    guard(|| {
        let d = deref(dist, "dist")?;
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InvalidParameter(format!("probability must lie in [0, 1], got {u}")).into());
        }
        write(out, d.inner.quantile(u), "out")
    })
}

/// Cycle profit `ρ(a)`.
///
/// # Safety
/// `dist` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mm_cycle_profit(
    dist: *const MmDistribution,
    a: f64,
    theta: f64,
    orientation: MmOrientation,
    out: *mut f64,
) -> MmStatus {
    guard(|| write(out, engine::cycle_profit(&config(dist, a, theta, orientation)?)?, "out"))
}

/// Profit intensity `ρ(a)/θ`.
///
/// # Safety
/// `dist` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mm_profit_intensity(
    dist: *const MmDistribution,
    a: f64,
    theta: f64,
    orientation: MmOrientation,
    out: *mut f64,
) -> MmStatus {
    guard(|| write(out, engine::profit_intensity(&config(dist, a, theta, orientation)?)?, "out"))
}

/// Expected cycle length `E(τ)`.
///
/// # Safety
/// `dist` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mm_expected_cycle_length(
    dist: *const MmDistribution,
    a: f64,
    theta: f64,
    orientation: MmOrientation,
    out: *mut f64,
) -> MmStatus {
    guard(|| write(out, engine::expected_cycle_length(&config(dist, a, theta, orientation)?)?, "out"))
}

/// Probability that a quotation is not accepted.
///
/// # Safety
/// `dist` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mm_non_transaction_prob(
    dist: *const MmDistribution,
    a: f64,
    orientation: MmOrientation,
    out: *mut f64,
) -> MmStatus {
    guard(|| write(out, engine::non_transaction_prob(&config(dist, a, 1.0, orientation)?)?, "out"))
}

/// Solves `ρ(a) = a` for the optimal withdrawal price.
///
/// # Safety
/// `dist` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mm_solve_fixed_point(
    dist: *const MmDistribution,
    theta: f64,
    orientation: MmOrientation,
    tol: f64,
    max_iter: usize,
    out: *mut MmFixedPoint,
) -> MmStatus {
    guard(|| {
        let r = engine::solve_fixed_point(&config(dist, 0.0, theta, orientation)?, tol, max_iter)?;
        write(
            out,
            MmFixedPoint {
                a_max: r.a_max,
                rho_at_max: r.rho_at_max,
                residual: r.residual,
                iterations: r.iterations,
                converged: r.converged,
                used_bisection: r.method == "bisection",
            },
            "out",
        )
    })
}

/// The golden transaction probability `(√5 − 1)/2`.
#[no_mangle]
pub extern "C" fn mm_golden_optimum() -> f64 {
    maxent::golden_optimum()
}

/// The optimal transaction probability of the max-entropy seller at
/// withdrawal price `a`, found by root finding.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mm_golden_optimum_numeric(a: f64, out: *mut f64) -> MmStatus {
    guard(|| write(out, maxent::golden_optimum_numeric(a)?, "out"))
}

/// Information measures (by quadrature) of the max-entropy law `(a, t)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mm_info_report(a: f64, t: f64, out: *mut MmInfoReport) -> MmStatus {
    guard(|| {
        let r = info::info_report(&MaxEntModel::new(a, t)?)?;
        write(
            out,
            MmInfoReport {
                p: r.p,
                a: r.a,
                s: r.s,
                i: r.i,
                h: r.h,
                mean: r.mean,
                s_rel_a: r.s_rel_a,
                s_rel_mean: r.s_rel_mean,
                i_scaled_a: r.i_scaled_a,
                i_scaled_mean: r.i_scaled_mean,
                h_rel_a: r.h_rel_a,
                h_rel_mean: r.h_rel_mean,
            },
            "out",
        )
    })
}

/// Reference curves at transaction probability `p` in `(0, 1)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mm_figure_curves(p: f64, out: *mut MmFigureCurves) -> MmStatus {
    guard(|| {
        let c = info::figure_curves(p)?;
        write(
            out,
            MmFigureCurves {
                s_rel_a: c.s_rel_a,
                s_rel_mean: c.s_rel_mean,
                i_scaled_a: c.i_scaled_a,
                i_scaled_mean: c.i_scaled_mean,
                h_rel_a: c.h_rel_a,
                h_rel_mean: c.h_rel_mean,
            },
            "out",
        )
    })
}

/// Seeded Monte Carlo run of `n_cycles` trading cycles. Results are
/// reproducible for a given `(seed, shards)` pair.
///
/// # Safety
/// `dist` must be a live handle; `out` must be valid for writes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn mm_simulate(
    dist: *const MmDistribution,
    a: f64,
    theta: f64,
    orientation: MmOrientation,
    n_cycles: u64,
    seed: u64,
    shards: usize,
    out: *mut MmCycleStats,
) -> MmStatus {
    guard(|| {
        let cfg = SimConfig::new(config(dist, a, theta, orientation)?, n_cycles, seed)?.with_shards(shards)?;
        let s = sim::simulate(&cfg)?;
        write(
            out,
            MmCycleStats {
                n_cycles: s.n_cycles,
                mean_tau: s.mean_tau,
                mean_return: s.mean_return,
                intensity_estimate: s.intensity_estimate,
                se_return: s.se_return,
                se_tau: s.se_tau,
                se_intensity: s.se_intensity,
                acceptance_fraction: s.acceptance_fraction,
                se_acceptance: s.se_acceptance,
                wald_residual: s.wald_residual,
                se_wald: s.se_wald,
                wald_var_residual: s.wald_var_residual,
                se_wald_var: s.se_wald_var,
            },
            "out",
        )
    })
}

/// Logarithm of the cross ratio for buying with money `v` at log-price
/// `p_buy` and selling with money `w` at log-price `p_sell`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mm_log_cross_ratio(v: f64, p_buy: f64, w: f64, p_sell: f64, out: *mut f64) -> MmStatus {
    guard(|| {
        let buy = PortfolioPoint::new(v, p_buy)?;
        let sell = PortfolioPoint::new(w, p_sell)?;
        write(out, market::log_cross_ratio(&buy, &sell)?, "out")
    })
}

/// Price where supply meets demand. `demand` may be NULL to reuse `supply`.
///
/// # Safety
/// `supply` must be a live handle, `demand` a live handle or NULL; `out`
/// must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mm_equilibrium_price(
    supply: *const MmDistribution,
    demand: *const MmDistribution,
    out: *mut MmEquilibrium,
) -> MmStatus {
    guard(|| {
        let s = deref(supply, "supply")?.inner.clone();
        let d = match demand.as_ref() {
            Some(h) => h.inner.clone(),
            None => s.clone(),
        };
        let eq = market::equilibrium_price(&MarketPair::new(s, d))?;
        if let Some(w) = &eq.warning {
            set_last_error(w.clone());
        }
        write(
            out,
            MmEquilibrium { price: eq.price, supply: eq.supply, demand: eq.demand, has_warning: eq.warning.is_some() },
            "out",
        )
    })
}
