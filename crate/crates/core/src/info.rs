//! Shannon entropy, Fisher information and the Fisher-consistent H-entropy
//! of the maximum-entropy model, by quadrature and in closed form, plus the
//! reference closed-form curves and an audit of them against quadrature.
//!
//! All entropies are in nats.

use serde::{Deserialize, Serialize};

use crate::distributions::quadrature::integrate_with_breaks;
use crate::error::{Error, Result};
use crate::maxent::{MaxEntModel, GOLDEN};

const QUAD_TOL: f64 = 1e-12;

/// `∫ g(p)·pdf(p) dp` over the model's support, split at the kink.
fn model_expectation(m: &MaxEntModel, g: impl Fn(f64) -> f64) -> Result<f64> {
    let a = m.withdrawal();
    let f = |p: f64| {
        let d = m.ln_density(p).exp();
        if d == 0.0 {
            0.0
        } else {
            g(p) * d
        }
    };
    let breaks = if a > 0.0 { vec![a] } else { Vec::new() };
    integrate_with_breaks(f, 0.0, f64::INFINITY, &breaks, QUAD_TOL)
}

/// `S = -∫ ln(pdf)·pdf dp` by quadrature.
pub fn shannon_entropy(m: &MaxEntModel) -> Result<f64> {
    model_expectation(m, |p| -m.ln_density(p))
}

/// `I = ∫ (∂ ln pdf/∂p)²·pdf dp` by quadrature. The score is piecewise
/// constant, so the kink at `a` contributes nothing.
pub fn fisher_information(m: &MaxEntModel) -> Result<f64> {
    model_expectation(m, |p| {
        let s = m.score(p);
        s * s
    })
}

/// `H = -½ ln I` (one-dimensional case).
pub fn h_entropy(m: &MaxEntModel) -> Result<f64> {
    let i = fisher_information(m)?;
    if !(i > 0.0) {
        return Err(Error::Domain(format!("Fisher information must be positive, got {i}")));
    }
    Ok(-0.5 * i.ln())
}

/// `E(p)` by quadrature.
pub fn mean_by_quadrature(m: &MaxEntModel) -> Result<f64> {
    model_expectation(m, |p| p)
}

/// Closed forms in `(a, T)`, valid down to `a = 0`.
pub mod closed_form {
    use crate::maxent::MaxEntModel;

    /// `ln(a + T) + P`
    pub fn shannon(m: &MaxEntModel) -> f64 {
        (m.withdrawal() + m.temperature()).ln() + m.probability()
    }

    /// `P/T²`
    pub fn fisher(m: &MaxEntModel) -> f64 {
        m.probability() / (m.temperature() * m.temperature())
    }

    pub fn h(m: &MaxEntModel) -> f64 {
        -0.5 * fisher(m).ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoReport {
    #[serde(rename = "P")]
    pub p: f64,
    pub a: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub mean: f64,
    pub s_rel_a: f64,
    pub s_rel_mean: f64,
    pub i_scaled_a: f64,
    pub i_scaled_mean: f64,
    pub h_rel_a: f64,
    pub h_rel_mean: f64,
}

/// All measures for the model, every integral computed by quadrature.
pub fn info_report(m: &MaxEntModel) -> Result<InfoReport> {
    let a = m.withdrawal();
    if !(a > 0.0) {
        return Err(Error::Domain("relative measures need a positive withdrawal price".into()));
    }
    let s = shannon_entropy(m)?;
    let i = fisher_information(m)?;
    let h = -0.5 * i.ln();
    let mean = mean_by_quadrature(m)?;
    Ok(InfoReport {
        p: m.probability(),
        a,
        s,
        i,
        h,
        mean,
        s_rel_a: s - a.ln(),
        s_rel_mean: s - mean.ln(),
        i_scaled_a: i * a * a,
        i_scaled_mean: i * mean * mean,
        h_rel_a: h - a.ln(),
        h_rel_mean: h - mean.ln(),
    })
}

/// The six reference closed-form curves, evaluated verbatim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FigureCurves {
    /// `P - ln(1 - P)`
    pub s_rel_a: f64,
    /// `P - ln((1 + P²)/2)`
    pub s_rel_mean: f64,
    /// `(1 - P)²/P`
    pub i_scaled_a: f64,
    /// `(1 + P²)²/(2P)²`
    pub i_scaled_mean: f64,
    /// `ln(√P/(1 - P))`
    pub h_rel_a: f64,
    /// `ln(2P/(1 + P²))`
    pub h_rel_mean: f64,
}

pub fn figure_curves(p: f64) -> Result<FigureCurves> {
    check_probability(p)?;
    let q = 1.0 + p * p;
    Ok(FigureCurves {
        s_rel_a: p - (1.0 - p).ln(),
        s_rel_mean: p - (q / 2.0).ln(),
        i_scaled_a: (1.0 - p).powi(2) / p,
        i_scaled_mean: q * q / (2.0 * p).powi(2),
        h_rel_a: (p.sqrt() / (1.0 - p)).ln(),
        h_rel_mean: (2.0 * p / q).ln(),
    })
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("P must lie strictly inside (0, 1), got {p}")))
    }
}

/// Closed forms derived from the model for the mean-relative quantities.
pub mod derived {
    /// `I·E(p)² = (1 + P²)²/(4P)`
    pub fn fisher_scaled_mean(p: f64) -> f64 {
        (1.0 + p * p).powi(2) / (4.0 * p)
    }

    /// `H - ln E(p) = ln(2√P/(1 + P²))`
    pub fn h_rel_mean(p: f64) -> f64 {
        (2.0 * p.sqrt() / (1.0 + p * p)).ln()
    }
}

pub const AUDIT_TOL: f64 = 1e-6;
pub const AUDIT_A: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AsPublished,
    Derived,
    Both,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditPoint {
    #[serde(rename = "P")]
    pub p: f64,
    pub computed: f64,
    pub as_published: f64,
    pub derived: f64,
    pub published_deviation: f64,
    pub derived_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityAudit {
    pub quantity: String,
    pub published_formula: String,
    pub derived_formula: String,
    pub points: Vec<AuditPoint>,
    pub published_max_deviation: f64,
    pub derived_max_deviation: f64,
    /// Which closed form matches quadrature within [`AUDIT_TOL`] everywhere.
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub a: f64,
    pub tolerance: f64,
    pub quantities: Vec<QuantityAudit>,
}

fn audit_quantity(
    name: &str,
    published_formula: &str,
    derived_formula: &str,
    reports: &[InfoReport],
    computed: impl Fn(&InfoReport) -> f64,
    published: impl Fn(f64) -> f64,
    derived: impl Fn(f64) -> f64,
) -> QuantityAudit {
    let points: Vec<AuditPoint> = reports
        .iter()
        .map(|r| {
            let c = computed(r);
            let pub_v = published(r.p);
            let der_v = derived(r.p);
            AuditPoint {
                p: r.p,
                computed: c,
                as_published: pub_v,
                derived: der_v,
                published_deviation: (c - pub_v).abs(),
                derived_deviation: (c - der_v).abs(),
            }
        })
        .collect();
    let cmax = points.iter().map(|p| p.published_deviation).fold(0.0, f64::max);
    let dmax = points.iter().map(|p| p.derived_deviation).fold(0.0, f64::max);
    let verdict = match (cmax <= AUDIT_TOL, dmax <= AUDIT_TOL) {
        (true, true) => Verdict::Both,
        (true, false) => Verdict::AsPublished,
        (false, true) => Verdict::Derived,
        (false, false) => Verdict::Neither,
    };
    QuantityAudit {
        quantity: name.into(),
        published_formula: published_formula.into(),
        derived_formula: derived_formula.into(),
        points,
        published_max_deviation: cmax,
        derived_max_deviation: dmax,
        verdict,
    }
}

/// Checks the mean-relative reference closed forms against quadrature on the
/// `a = 1` model over `p_grid`.
pub fn audit_red_curves(p_grid: &[f64]) -> Result<AuditReport> {
    if p_grid.is_empty() {
        return Err(Error::invalid("audit grid is empty"));
    }
    let reports = p_grid
        .iter()
        .map(|&p| {
            check_probability(p)?;
            info_report(&MaxEntModel::from_probability(AUDIT_A, p)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let reference = |p: f64| figure_curves(p).expect("grid validated");
    let quantities = vec![
        audit_quantity(
            "S - ln E(p)",
            "P - ln((1+P^2)/2)",
            "P - ln((1+P^2)/2)",
            &reports,
            |r| r.s_rel_mean,
            |p| reference(p).s_rel_mean,
            |p| p - ((1.0 + p * p) / 2.0).ln(),
        ),
        audit_quantity(
            "I * E(p)^2",
            "(1+P^2)^2/(2P)^2",
            "(1+P^2)^2/(4P)",
            &reports,
            |r| r.i_scaled_mean,
            |p| reference(p).i_scaled_mean,
            derived::fisher_scaled_mean,
        ),
        audit_quantity(
            "H - ln E(p)",
            "ln(2P/(1+P^2))",
            "ln(2*sqrt(P)/(1+P^2))",
            &reports,
            |r| r.h_rel_mean,
            |p| reference(p).h_rel_mean,
            derived::h_rel_mean,
        ),
    ];
    Ok(AuditReport { a: AUDIT_A, tolerance: AUDIT_TOL, quantities })
}

/// `{0.05, 0.10, …, 0.95}`
pub fn standard_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 * 0.05).collect()
}

/// Standard grid with the golden probability inserted in order.
pub fn scan_grid() -> Vec<f64> {
    let mut g = standard_grid();
    g.push(GOLDEN);
    g.sort_by(f64::total_cmp);
    g
}
