//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Infinite endpoints are mapped onto the unit interval with
//! `x = lo + t / (1 - t)` (and its mirror), so half-lines and the whole line
//! are integrated without truncation. Interior kinks should be passed as
//! breakpoints so every panel sees a smooth integrand.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_DEPTH: u32 = 60;
const MAX_PANELS: usize = 20_000;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Integral estimate with its absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

fn adapt_finite<F: Fn(f64) -> f64>(f: &F, points: &[f64], tol: f64) -> Result<Estimate> {
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (value, error) = kronrod15(f, w[0], w[1]);
            heap.push(Panel { lo: w[0], hi: w[1], value, error, depth: 0 });
        }
    }
    let mut err: f64 = heap.iter().map(|p| p.error).sum();
    let mut total: f64 = heap.iter().map(|p| p.value).sum();
    loop {
        if err <= tol * total.abs().max(1.0) {
            // Re-sum exactly; the running totals only steer refinement.
            let value: f64 = heap.iter().map(|p| p.value).sum();
            let error: f64 = heap.iter().map(|p| p.error).sum();
            if error <= tol * value.abs().max(1.0) {
                return Ok(Estimate { value, error });
            }
            err = error;
            total = value;
        }
        if !err.is_finite() {
            let value: f64 = heap.iter().map(|p| p.value).sum();
            return Err(Error::QuadratureFailure { estimate: value, error_bound: err });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => return Ok(Estimate { value: 0.0, error: 0.0 }),
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if worst.depth >= MAX_DEPTH || heap.len() + 2 > MAX_PANELS || mid <= worst.lo || mid >= worst.hi {
            heap.push(worst);
            let value: f64 = heap.iter().map(|p| p.value).sum();
            return Err(Error::QuadratureFailure { estimate: value, error_bound: err });
        }
        err -= worst.error;
        total -= worst.value;
        for (lo, hi) in [(worst.lo, mid), (mid, worst.hi)] {
            let (value, error) = kronrod15(f, lo, hi);
            err += error;
            total += value;
            heap.push(Panel { lo, hi, value, error, depth: worst.depth + 1 });
        }
    }
}

/// Integrates `f` over `(lo, hi)`; either endpoint may be infinite.
///
/// `tol` bounds the estimated error absolutely for integrals of magnitude
/// below one and relatively above that.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    integrate_with_breaks(f, lo, hi, &[], tol)
}

/// Like [`integrate`], splitting the domain at every breakpoint strictly
/// inside `(lo, hi)`.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, breaks: &[f64], tol: f64) -> Result<f64> {
    integrate_detailed(f, lo, hi, breaks, tol).map(|e| e.value)
}

pub fn integrate_detailed<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, breaks: &[f64], tol: f64) -> Result<Estimate> {
    if lo.is_nan() || hi.is_nan() || !(lo < hi) {
        return Err(Error::invalid(format!("integration bounds must satisfy lo < hi, got ({lo}, {hi})")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("quadrature tolerance must be positive"));
    }
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|b| b.is_finite() && *b > lo && *b < hi).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            let mut pts = Vec::with_capacity(cuts.len() + 2);
            pts.push(lo);
            pts.extend(cuts);
            pts.push(hi);
            adapt_finite(&f, &pts, tol)
        }
        _ => {
            // Finite middle section between the outermost finite anchors,
            // with mapped tails on whichever side is infinite.
            let left_anchor = if lo.is_finite() { lo } else { cuts.first().copied().unwrap_or(0.0).min(hi) };
            let right_anchor =
                if hi.is_finite() { hi } else { cuts.last().copied().unwrap_or(left_anchor).max(left_anchor) };
            let n_parts = 1 + usize::from(!lo.is_finite()) + usize::from(left_anchor < right_anchor);
            let part_tol = tol / n_parts as f64;
            let mut total = Estimate { value: 0.0, error: 0.0 };
            let mut add = |e: Estimate| {
                total.value += e.value;
                total.error += e.error;
            };
            if !lo.is_finite() {
                let g = |t: f64| {
                    let s = 1.0 - t;
                    let v = f(left_anchor - t / s);
                    if v == 0.0 {
                        0.0
                    } else {
                        v / (s * s)
                    }
                };
                add(adapt_finite(&g, &[0.0, 1.0], part_tol)?);
            }
            if left_anchor < right_anchor {
                let mut pts = vec![left_anchor];
                pts.extend(cuts.iter().copied().filter(|c| *c > left_anchor && *c < right_anchor));
                pts.push(right_anchor);
                add(adapt_finite(&f, &pts, part_tol)?);
            }
            if !hi.is_finite() {
                let g = |t: f64| {
                    let s = 1.0 - t;
                    let v = f(right_anchor + t / s);
                    if v == 0.0 {
                        0.0
                    } else {
                        v / (s * s)
                    }
                };
                add(adapt_finite(&g, &[0.0, 1.0], part_tol)?);
            }
            Ok(total)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_normal(p: f64) -> f64 {
        (-0.5 * p * p).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    #[test]
    fn unit_exponential_on_half_line() {
        let v = integrate(|p: f64| (-p).exp(), 0.0, f64::INFINITY, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn normal_density_on_whole_line() {
        let v = integrate(std_normal, f64::NEG_INFINITY, f64::INFINITY, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn lower_half_first_moment_of_normal() {
        // -phi(0), checked against 1/sqrt(2 pi) to 25 digits.
        let v = integrate(|p| p * std_normal(p), f64::NEG_INFINITY, 0.0, 1e-10).unwrap();
        assert!((v + 0.398_942_280_401_432_7).abs() < 1e-10, "{v}");
    }

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x, -1.0, 3.0, 1e-12).unwrap();
        assert!((v - 12.0).abs() < 1e-12);
    }

    #[test]
    fn kink_with_breakpoint() {
        let v = integrate_with_breaks(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], 1e-12).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-13);
    }

    #[test]
    fn infinite_with_interior_breaks() {
        let f = |p: f64| if p < 1.0 { 0.5 } else { 0.5 * (-(p - 1.0)).exp() };
        let v = integrate_with_breaks(f, 0.0, f64::INFINITY, &[1.0], 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let g = |p: f64| std_normal(p) * if p > 2.0 { 2.0 } else { 1.0 };
        let w = integrate_with_breaks(g, f64::NEG_INFINITY, f64::INFINITY, &[-1.0, 2.0], 1e-11).unwrap();
        let tail = 0.022_750_131_948_179_21;
        assert!((w - (1.0 + tail)).abs() < 1e-10, "{w}");
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(matches!(integrate(|x| x, 1.0, 0.0, 1e-10), Err(Error::InvalidParameter(_))));
        assert!(matches!(integrate(|x| x, 0.0, 1.0, 0.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn non_integrable_reports_failure() {
        let r = integrate(|x: f64| 1.0 / x, 0.0, 1.0, 1e-10);
        match r {
            Err(Error::QuadratureFailure { error_bound, .. }) => assert!(error_bound > 1e-10 || error_bound.is_nan()),
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
