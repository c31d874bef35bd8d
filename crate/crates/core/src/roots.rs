//! Bracketing scalar root finding (Brent–Dekker).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Finds a root of `f` in `[lo, hi]`, which must bracket a sign change.
///
/// Stops when the bracket is narrower than `xtol` (plus a few ulps) or `f`
/// hits zero exactly.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Result<Root> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::RootFinding("function is NaN at a bracket end".into()));
    }
    if fa == 0.0 {
        return Ok(Root { x: a, fx: fa, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: fb, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootFinding(format!("[{lo}, {hi}] does not bracket a sign change ({fa:e}, {fb:e})")));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for it in 1..=max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(Root { x: b, fx: fb, iterations: it });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::RootFinding(format!("function is NaN at {b}")));
        }
    }
    Err(Error::RootFinding(format!("no convergence after {max_iter} iterations (best {b}, f={fb:e})")))
}

/// Plain bisection; slower than [`brent`] but never leaves the bracket and
/// records every midpoint it evaluates.
pub fn bisect<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    xtol: f64,
    max_iter: usize,
    mut on_eval: impl FnMut(f64, f64),
) -> Result<Root> {
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(Root { x: a, fx: fa, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: fb, iterations: 0 });
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::RootFinding(format!("[{lo}, {hi}] does not bracket a sign change")));
    }
    let mut sa = fa.signum();
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for it in 1..=max_iter {
        let m = 0.5 * (a + b);
        let fm = f(m);
        on_eval(m, fm);
        if fm.abs() < best.1.abs() {
            best = (m, fm);
        }
        if fm == 0.0 || 0.5 * (b - a) <= xtol || m == a || m == b {
            return Ok(Root { x: best.0, fx: best.1, iterations: it });
        }
        if fm.signum() == sa {
            a = m;
            sa = fm.signum();
        } else {
            b = m;
        }
    }
    Err(Error::RootFinding(format!("bisection did not converge after {max_iter} iterations")))
}
